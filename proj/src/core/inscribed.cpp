#include "core/inscribed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rivlab {

InscribedSphereResult max_inscribed_radius(const Riv& riv, const ScalarField3& s, double level,
                                           const RefineParams& rp) {
    if (riv.voxels.empty())
        throw std::invalid_argument("max_inscribed_radius: empty RIV");
    const GridSpec g = s.grid;
    const int n = g.n;
    const double h = g.spacing();

    const RivSurface surf = extract_riv_surface(riv, s, level);
    if (surf.mesh.empty())
        throw std::runtime_error("max_inscribed_radius: RIV produced an empty surface");
    const AabbTree tree(surf.mesh);

    // Coarse pass: distances at the RIV's voxel centers, mapped into the
    // unwrapped block frame of the mesh.
    Point3 best_p{0, 0, 0};
    double best_d = -1.0;
    for (size_t v : riv.voxels) {
        const int ix = int(v % size_t(n));
        const int iy = int((v / size_t(n)) % size_t(n));
        const int iz = int(v / (size_t(n) * size_t(n)));
        int bi = (ix - surf.block_origin[0]) % n;
        if (bi < 0) bi += n;
        int bj = (iy - surf.block_origin[1]) % n;
        if (bj < 0) bj += n;
        int bk = (iz - surf.block_origin[2]) % n;
        if (bk < 0) bk += n;
        const Point3 p{(surf.block_origin[0] + bi) * h, (surf.block_origin[1] + bj) * h,
                       (surf.block_origin[2] + bk) * h};
        const double d = tree.unsigned_distance(p);
        if (d > best_d) {
            best_d = d;
            best_p = p;
        }
    }

    // Recursive refinement around the maximizer. Candidates must stay inside
    // this RIV's super-level set; interior confirmation interpolates the
    // component-clamped block field so a candidate can never slip into a
    // neighboring component. Distances come from the mesh, so the estimate
    // can only improve.
    double spacing = h;
    for (int levelIdx = 1; levelIdx <= rp.levels; ++levelIdx) {
        const double half = rp.neighborhood * spacing;
        spacing /= double(rp.zoom);
        const int steps = int(std::lround(half / spacing));
        Point3 local_best = best_p;
        double local_d = best_d;
        for (int dz = -steps; dz <= steps; ++dz)
            for (int dy = -steps; dy <= steps; ++dy)
                for (int dx = -steps; dx <= steps; ++dx) {
                    const Point3 cand{best_p[0] + dx * spacing, best_p[1] + dy * spacing,
                                      best_p[2] + dz * spacing};
                    if (dx == 0 && dy == 0 && dz == 0) continue;
                    if (!(surf.interpolate_block(cand, h) > level)) continue;
                    const double d = tree.unsigned_distance(cand);
                    if (d > local_d) {
                        local_d = d;
                        local_best = cand;
                    }
                }
        best_p = local_best;
        best_d = local_d;
    }

    InscribedSphereResult res;
    const double L = g.domain_length;
    for (int a = 0; a < 3; ++a) {
        double c = std::fmod(best_p[size_t(a)], L);
        if (c < 0) c += L;
        res.center[size_t(a)] = c;
    }
    res.radius = best_d;
    res.riv_id = riv.component_id;
    res.refinement_depth = rp.levels;
    res.sub_voxel = best_d < h;
    return res;
}

// --- voxel distance oracle -------------------------------------------------------

namespace {

// Felzenszwalb-Huttenlocher 1D squared-distance transform of a sampled
// function; result[i] = min_j (f[j] + (i-j)^2).
void dt1d(const std::vector<double>& f, std::vector<double>& out) {
    const int n = int(f.size());
    std::vector<int> v(static_cast<size_t>(n));
    std::vector<double> z(static_cast<size_t>(n) + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        for (;;) {
            const int p = v[size_t(k)];
            s = ((f[size_t(q)] + double(q) * q) - (f[size_t(p)] + double(p) * p)) /
                (2.0 * q - 2.0 * p);
            if (s <= z[size_t(k)]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[size_t(k)] = q;
        z[size_t(k)] = s;
        z[size_t(k) + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[size_t(k) + 1] < q) ++k;
        const int p = v[size_t(k)];
        out[size_t(q)] = double(q - p) * double(q - p) + f[size_t(p)];
    }
}

// Periodic variant: run the transform on three tiled periods, keep the middle.
void dt1d_periodic(std::vector<double>& row) {
    const int n = int(row.size());
    std::vector<double> tiled(size_t(3 * n));
    for (int i = 0; i < 3 * n; ++i) tiled[size_t(i)] = row[size_t(i % n)];
    std::vector<double> out(size_t(3 * n));
    dt1d(tiled, out);
    for (int i = 0; i < n; ++i) row[size_t(i)] = out[size_t(i + n)];
}

}  // namespace

ScalarField3 voxel_distance_oracle(const BinaryMask& mask) {
    const GridSpec g = mask.grid;
    const int n = g.n;
    const size_t total = g.point_count();
    bool has_exterior = false;
    for (size_t i = 0; i < total; ++i) {
        if (!mask.test(i)) {
            has_exterior = true;
            break;
        }
    }
    if (!has_exterior) throw std::runtime_error("voxel_distance_oracle: no exterior voxels");

    const double INF = 3.0 * double(n) * double(n);
    ScalarField3 d2(g);
    for (size_t i = 0; i < total; ++i) d2.values[i] = mask.test(i) ? INF : 0.0;

    std::vector<double> row;
    // x rows
    row.resize(size_t(n));
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) row[size_t(ix)] = d2.at(ix, iy, iz);
            dt1d_periodic(row);
            for (int ix = 0; ix < n; ++ix) d2.at(ix, iy, iz) = row[size_t(ix)];
        }
    // y rows
    for (int iz = 0; iz < n; ++iz)
        for (int ix = 0; ix < n; ++ix) {
            for (int iy = 0; iy < n; ++iy) row[size_t(iy)] = d2.at(ix, iy, iz);
            dt1d_periodic(row);
            for (int iy = 0; iy < n; ++iy) d2.at(ix, iy, iz) = row[size_t(iy)];
        }
    // z rows
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            for (int iz = 0; iz < n; ++iz) row[size_t(iz)] = d2.at(ix, iy, iz);
            dt1d_periodic(row);
            for (int iz = 0; iz < n; ++iz) d2.at(ix, iy, iz) = row[size_t(iz)];
        }

    const double h = g.spacing();
    for (size_t i = 0; i < total; ++i)
        d2.values[i] = mask.test(i) ? h * std::sqrt(d2.values[i]) : 0.0;
    return d2;
}

// --- aggregation with pruning ------------------------------------------------------

MaxRadiusOutcome max_radius_over_rivs(const std::vector<Riv>& rivs,
                                      const std::array<ScalarField3, 6>& sources, double level,
                                      PrunePolicy policy, const RefineParams& rp) {
    if (rivs.empty()) throw std::invalid_argument("max_radius_over_rivs: empty RIV list");
    const double h = sources[0].grid.spacing();

    // decreasing bbox-inradius order; deterministic ties. The surface can
    // reach one sample past the voxel bbox on each side (the crossing lies
    // between the boundary voxel and its exterior neighbor), so the sound
    // half-extent bound is (extent+1)*h/2.
    std::vector<size_t> order(rivs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto inradius = [&](const Riv& r) {
        const int m = std::min({r.bbox.extent[0], r.bbox.extent[1], r.bbox.extent[2]});
        return 0.5 * (m + 1) * h;
    };
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const double ia = inradius(rivs[a]), ib = inradius(rivs[b]);
        if (ia != ib) return ia > ib;
        return rivs[a].component_id < rivs[b].component_id;
    });

    MaxRadiusOutcome out;
    out.best.radius = -1.0;
    for (size_t oi : order) {
        const Riv& riv = rivs[oi];
        const bool skip = policy == PrunePolicy::SkipAll ||
                          (policy == PrunePolicy::Standard && inradius(riv) < out.best.radius);
        if (skip) {
            InscribedSphereResult r;
            r.riv_id = riv.component_id;
            r.pruned = true;
            out.per_riv.push_back(r);
            continue;
        }
        const int src = riv.source_component;
        if (src < 0 || src > 5)
            throw std::invalid_argument("max_radius_over_rivs: RIV lacks a source component");
        InscribedSphereResult r = max_inscribed_radius(riv, sources[size_t(src)], level, rp);
        out.per_riv.push_back(r);
        if (r.radius > out.best.radius) out.best = r;
    }
    if (out.best.radius < 0.0) out.best = InscribedSphereResult{};  // everything pruned
    return out;
}

}  // namespace rivlab
