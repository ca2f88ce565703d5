#include "core/levelsets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rivlab {

size_t BinaryMask::count_set() const {
    size_t c = 0;
    for (uint8_t b : bits) c += b;
    return c;
}

const char* component_name(int source_component) {
    static const char* names[6] = {"f1+", "f1-", "f2+", "f2-", "f3+", "f3-"};
    if (source_component < 0 || source_component > 5) return "?";
    return names[source_component];
}

std::array<ScalarField3, 6> component_parts(const VectorField3& f) {
    validate(f, "component_parts");
    std::array<ScalarField3, 6> out{ScalarField3(f.grid), ScalarField3(f.grid),
                                    ScalarField3(f.grid), ScalarField3(f.grid),
                                    ScalarField3(f.grid), ScalarField3(f.grid)};
    const size_t count = f.grid.point_count();
    for (int c = 0; c < 3; ++c) {
        const double* src = f[c].values.data();
        double* pos = out[size_t(2 * c)].values.data();
        double* neg = out[size_t(2 * c + 1)].values.data();
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)count; ++i) {
            const double v = src[i];
            pos[i] = v > 0.0 ? v : 0.0;
            neg[i] = v < 0.0 ? -v : 0.0;
        }
    }
    return out;
}

ScalarField3 max_norm_field(const VectorField3& f) {
    validate(f, "max_norm_field");
    ScalarField3 out(f.grid);
    const size_t count = f.grid.point_count();
    const double* x = f[0].values.data();
    const double* y = f[1].values.data();
    const double* z = f[2].values.data();
    double* o = out.values.data();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)count; ++i) {
        const double a = std::fabs(x[i]), b = std::fabs(y[i]), c = std::fabs(z[i]);
        double m = a > b ? a : b;
        o[i] = m > c ? m : c;
    }
    return out;
}

BinaryMask superlevel_mask(const ScalarField3& s, double cut) {
    if (!(cut >= 0.0)) throw std::invalid_argument("superlevel_mask: cut must be >= 0");
    BinaryMask m(s.grid);
    const size_t count = s.grid.point_count();
    const double* v = s.values.data();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)count; ++i) m.bits[size_t(i)] = v[i] > cut ? 1 : 0;
    return m;
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("mask_union: grid mismatch");
    BinaryMask out(a.grid);
    for (size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = (a.bits[i] | b.bits[i]);
    return out;
}

// --- connected components ------------------------------------------------------

namespace {

// Periodic bbox per axis: the complement of the largest cyclic run of empty
// coordinates. Scanning from 0 makes ties deterministic.
void axis_bbox(const std::vector<uint8_t>& occupied, int n, int& anchor, int& extent) {
    int best_len = -1, best_start = 0;
    int i = 0;
    while (i < n) {
        if (occupied[size_t(i)]) {
            ++i;
            continue;
        }
        int j = i;
        while (j < n && !occupied[size_t(j)]) ++j;
        int len = j - i;
        int start = i;
        if (j == n && !occupied[0] && i > 0) {
            // gap wraps; extend with the leading run
            int k = 0;
            while (k < n && !occupied[size_t(k)]) ++k;
            len += k;
        }
        if (len > best_len) {
            best_len = len;
            best_start = start;
        }
        i = j;
    }
    // also consider the pure leading gap when it wasn't merged above
    if (best_len < 0) {
        anchor = 0;
        extent = n;  // fully occupied
        return;
    }
    anchor = (best_start + best_len) % n;
    extent = n - best_len;
}

}  // namespace

std::vector<Riv> connected_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 6 && connectivity != 26)
        throw std::invalid_argument("connected_components: connectivity must be 6 or 26");
    const GridSpec g = mask.grid;
    const int n = g.n;
    const size_t total = g.point_count();

    std::vector<std::array<int, 3>> offsets;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (connectivity == 6 && manhattan != 1) continue;
                offsets.push_back({dx, dy, dz});
            }

    std::vector<int32_t> label(total, -1);
    std::vector<Riv> rivs;
    std::vector<size_t> stack;

    for (size_t seed = 0; seed < total; ++seed) {
        if (!mask.test(seed) || label[seed] >= 0) continue;
        const int32_t id = int32_t(rivs.size());
        Riv riv;
        stack.clear();
        stack.push_back(seed);
        label[seed] = id;
        while (!stack.empty()) {
            const size_t cur = stack.back();
            stack.pop_back();
            riv.voxels.push_back(cur);
            const int ix = int(cur % size_t(n));
            const int iy = int((cur / size_t(n)) % size_t(n));
            const int iz = int(cur / (size_t(n) * size_t(n)));
            for (const auto& d : offsets) {
                const size_t nb = g.wrap_index(ix + d[0], iy + d[1], iz + d[2]);
                if (mask.test(nb) && label[nb] < 0) {
                    label[nb] = id;
                    stack.push_back(nb);
                }
            }
        }
        std::sort(riv.voxels.begin(), riv.voxels.end());
        rivs.push_back(std::move(riv));
    }

    // canonical order: decreasing voxel count, then smallest linear index
    std::sort(rivs.begin(), rivs.end(), [](const Riv& a, const Riv& b) {
        if (a.voxels.size() != b.voxels.size()) return a.voxels.size() > b.voxels.size();
        return a.voxels.front() < b.voxels.front();
    });

    for (size_t i = 0; i < rivs.size(); ++i) {
        Riv& riv = rivs[i];
        riv.component_id = int(i);
        std::array<std::vector<uint8_t>, 3> occ{std::vector<uint8_t>(size_t(n), 0),
                                                std::vector<uint8_t>(size_t(n), 0),
                                                std::vector<uint8_t>(size_t(n), 0)};
        for (size_t v : riv.voxels) {
            occ[0][v % size_t(n)] = 1;
            occ[1][(v / size_t(n)) % size_t(n)] = 1;
            occ[2][v / (size_t(n) * size_t(n))] = 1;
        }
        for (int a = 0; a < 3; ++a) axis_bbox(occ[size_t(a)], n, riv.bbox.anchor[size_t(a)],
                                              riv.bbox.extent[size_t(a)]);
    }
    return rivs;
}

// --- sparseness ratio ------------------------------------------------------------

double sparseness_ratio(const BinaryMask& mask, const std::array<double, 3>& x0, double r) {
    const GridSpec g = mask.grid;
    const double L = g.domain_length;
    if (!(r > 0.0) || !(r < 0.5 * L))
        throw std::invalid_argument("sparseness_ratio: r must satisfy 0 < r < L/2");
    const double h = g.spacing();
    const int n = g.n;
    const double diag = h * std::sqrt(3.0);
    const double r2 = r * r;

    auto wrap_delta = [&](double d) { return std::remainder(d, L); };

    // voxels whose center can be within r + diag of x0; each distinct voxel
    // must be visited once, so the window is clamped to one period
    int span = int(std::ceil((r + diag) / h)) + 1;
    if (2 * span + 1 > n) span = n / 2;
    const int cx = int(std::floor(x0[0] / h));
    const int cy = int(std::floor(x0[1] / h));
    const int cz = int(std::floor(x0[2] / h));
    const int lox = cx - span, hix = std::min(cx + span, cx - span + n - 1);
    const int loy = cy - span, hiy = std::min(cy + span, cy - span + n - 1);
    const int loz = cz - span, hiz = std::min(cz + span, cz - span + n - 1);

    // Voxel i spans the cell [i*h, (i+1)*h); distances use the cell center.
    double num = 0.0, den = 0.0;
    for (int iz = loz; iz <= hiz; ++iz) {
        const double dz = wrap_delta((iz + 0.5) * h - x0[2]);
        for (int iy = loy; iy <= hiy; ++iy) {
            const double dy = wrap_delta((iy + 0.5) * h - x0[1]);
            for (int ix = lox; ix <= hix; ++ix) {
                const double dx = wrap_delta((ix + 0.5) * h - x0[0]);
                const double d2 = dx * dx + dy * dy + dz * dz;
                const double dist = std::sqrt(d2);
                double w;
                if (dist + diag < r) {
                    w = 1.0;  // fully inside by center test
                } else if (dist - diag > r) {
                    continue;  // fully outside
                } else {
                    // subcell refinement near the sphere surface
                    int inside = 0;
                    for (int sz = 0; sz < 4; ++sz) {
                        const double oz = wrap_delta(dz + ((sz + 0.5) / 4.0 - 0.5) * h);
                        for (int sy = 0; sy < 4; ++sy) {
                            const double oy = wrap_delta(dy + ((sy + 0.5) / 4.0 - 0.5) * h);
                            for (int sx = 0; sx < 4; ++sx) {
                                const double ox = wrap_delta(dx + ((sx + 0.5) / 4.0 - 0.5) * h);
                                if (ox * ox + oy * oy + oz * oz < r2) ++inside;
                            }
                        }
                    }
                    if (inside == 0) continue;
                    w = double(inside) / 64.0;
                }
                den += w;
                if (mask.test(g.wrap_index(ix, iy, iz))) num += w;
            }
        }
    }
    if (den == 0.0) {
        // ball smaller than the subcell resolution: fall back to the nearest sample
        return mask.test(g.wrap_index(cx, cy, cz)) ? 1.0 : 0.0;
    }
    return num / den;
}

// --- Z_alpha membership ------------------------------------------------------------

void ZAlphaParams::check() const {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("z_alpha: lambda must be in (0,1)");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("z_alpha: delta must be in (0,1)");
    if (!(c0 > 1.0)) throw std::invalid_argument("z_alpha: c0 must be > 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("z_alpha: alpha must be positive");
    if (scale_samples < 1) throw std::invalid_argument("z_alpha: scale_samples must be >= 1");
}

ZAlphaResult z_alpha_check(const VectorField3& f, const ZAlphaParams& params) {
    params.check();
    validate(f, "z_alpha_check");
    const GridSpec g = f.grid;

    ZAlphaResult res;
    res.f_max = max_norm(f);
    if (res.f_max == 0.0) {
        res.verdict = true;
        res.degenerate = true;  // empty super-level sets
        return res;
    }

    const double base = std::pow(res.f_max, -params.alpha);
    res.scale_lo = base / params.c0;
    res.scale_hi = base * params.c0;
    if (!(res.scale_hi < 0.5 * g.domain_length))
        throw std::invalid_argument("z_alpha_check: scale exceeds periodic box");

    const double cut = params.lambda * res.f_max;
    const auto parts = component_parts(f);
    std::array<BinaryMask, 6> masks;
    for (int c = 0; c < 6; ++c) masks[size_t(c)] = superlevel_mask(parts[size_t(c)], cut);

    // scales, largest first
    std::vector<double> scales(size_t(params.scale_samples));
    if (params.scale_samples == 1) {
        scales[0] = res.scale_hi;
    } else {
        const double ratio = res.scale_lo / res.scale_hi;
        for (int j = 0; j < params.scale_samples; ++j)
            scales[size_t(j)] =
                res.scale_hi * std::pow(ratio, double(j) / double(params.scale_samples - 1));
    }

    const int n = g.n;
    const double h = g.spacing();

    struct PlaneWorst {
        double ratio = -1.0;
        std::array<int, 3> voxel{0, 0, 0};
        int comp = -1;
        bool all_pass = true;
        size_t checked = 0;
    };
    std::vector<PlaneWorst> planes(static_cast<size_t>(n));

#pragma omp parallel for schedule(dynamic, 1)
    for (int iz = 0; iz < n; ++iz) {
        PlaneWorst pw;
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const size_t idx = g.index(ix, iy, iz);
                const double vx = f[0].values[idx];
                const double vy = f[1].values[idx];
                const double vz = f[2].values[idx];
                const double mag =
                    std::max({std::fabs(vx), std::fabs(vy), std::fabs(vz)});
                if (params.restrict_to_active && mag < cut) continue;
                // locally maximal component, fixed tie order
                const double vals[6] = {std::max(vx, 0.0), std::max(-vx, 0.0),
                                        std::max(vy, 0.0), std::max(-vy, 0.0),
                                        std::max(vz, 0.0), std::max(-vz, 0.0)};
                int sel = 0;
                for (int c = 0; c < 6; ++c) {
                    if (vals[c] == mag) {
                        sel = c;
                        break;
                    }
                }
                ++pw.checked;
                const std::array<double, 3> x0{ix * h, iy * h, iz * h};
                bool pass = false;
                double best = std::numeric_limits<double>::infinity();
                for (double r : scales) {
                    const double ratio = sparseness_ratio(masks[size_t(sel)], x0, r);
                    best = std::min(best, ratio);
                    if (ratio <= params.delta) {
                        pass = true;
                        break;
                    }
                }
                if (!pass) pw.all_pass = false;
                if (best > pw.ratio) {
                    pw.ratio = best;
                    pw.voxel = {ix, iy, iz};
                    pw.comp = sel;
                }
            }
        }
        planes[size_t(iz)] = pw;
    }

    res.verdict = true;
    res.worst_ratio = -1.0;
    for (const auto& pw : planes) {
        res.points_checked += pw.checked;
        if (!pw.all_pass) res.verdict = false;
        if (pw.ratio > res.worst_ratio) {
            res.worst_ratio = pw.ratio;
            res.worst_voxel = pw.voxel;
            res.worst_component = pw.comp;
        }
    }
    if (res.worst_ratio < 0.0) {
        // restricted mode with no active points: vacuously true
        res.worst_ratio = 0.0;
        res.verdict = true;
    }
    return res;
}

RivExtraction extract_rivs(const VectorField3& f, double lambda, int connectivity) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("extract_rivs: lambda must be in (0,1)");
    validate(f, "extract_rivs");
    RivExtraction out;
    out.f_max = max_norm(f);
    out.cut = lambda * out.f_max;
    const auto parts = component_parts(f);
    for (int c = 0; c < 6; ++c) {
        out.masks[size_t(c)] = superlevel_mask(parts[size_t(c)], out.cut);
        auto rivs = connected_components(out.masks[size_t(c)], connectivity);
        for (auto& r : rivs) {
            r.source_component = c;
            r.threshold = out.cut;
            out.rivs.push_back(std::move(r));
        }
    }
    // canonical pooled order: voxel count desc, then source, then first voxel
    std::sort(out.rivs.begin(), out.rivs.end(), [](const Riv& a, const Riv& b) {
        if (a.voxels.size() != b.voxels.size()) return a.voxels.size() > b.voxels.size();
        if (a.source_component != b.source_component)
            return a.source_component < b.source_component;
        return a.voxels.front() < b.voxels.front();
    });
    for (size_t i = 0; i < out.rivs.size(); ++i) out.rivs[i].component_id = int(i);
    return out;
}

}  // namespace rivlab
