#include "core/isosurface.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "core/mc_tables.hpp"
#include "core/util.hpp"

namespace rivlab {

double TriangleMesh::surface_area() const {
    double area = 0.0;
    for (const auto& t : triangles) {
        const auto& a = vertices[size_t(t[0])];
        const auto& b = vertices[size_t(t[1])];
        const auto& c = vertices[size_t(t[2])];
        const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
        const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
        const double cx = uy * vz - uz * vy;
        const double cy = uz * vx - ux * vz;
        const double cz = ux * vy - uy * vx;
        area += 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
    }
    return area;
}

namespace {

// Corner offsets matching mc_tables.hpp.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
// Edge endpoints (corner indices).
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

struct EdgeKey {
    int64_t corner;  // lattice id of the lexicographically smaller endpoint
    int axis;        // 0..2, direction toward the larger endpoint
    bool operator==(const EdgeKey&) const = default;
};

struct EdgeKeyHash {
    size_t operator()(const EdgeKey& k) const {
        return std::hash<int64_t>()(k.corner * 4 + k.axis);
    }
};

// Generic cell-block mesher. `value(i,j,k)` supplies corner samples on the
// lattice [0, dims] (inclusive), `coord(i,j,k)` their physical positions.
template <typename ValueFn, typename CoordFn>
TriangleMesh march_block(const std::array<int, 3>& cells, double level, ValueFn&& value,
                         CoordFn&& coord) {
    TriangleMesh mesh;
    std::unordered_map<EdgeKey, int, EdgeKeyHash> edge_vertex;
    const int64_t px = 1;
    const int64_t py = int64_t(cells[0]) + 2;
    const int64_t pz = py * (int64_t(cells[1]) + 2);

    auto lattice_id = [&](int i, int j, int k) { return px * i + py * j + pz * k; };

    double corner_val[8];
    for (int k = 0; k < cells[2]; ++k) {
        for (int j = 0; j < cells[1]; ++j) {
            for (int i = 0; i < cells[0]; ++i) {
                int cube = 0;
                for (int c = 0; c < 8; ++c) {
                    corner_val[c] =
                        value(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
                    // strict super-level semantics: "inside" means > level
                    if (!(corner_val[c] > level)) cube |= 1 << c;
                }
                const int edges = mc::kEdgeTable[cube];
                if (edges == 0) continue;

                int edge_vert_idx[12];
                for (int e = 0; e < 12; ++e) {
                    if (!(edges & (1 << e))) continue;
                    const int ca = kEdge[e][0], cb = kEdge[e][1];
                    const int ax[3] = {i + kCorner[ca][0], j + kCorner[ca][1],
                                       k + kCorner[ca][2]};
                    const int bx[3] = {i + kCorner[cb][0], j + kCorner[cb][1],
                                       k + kCorner[cb][2]};
                    // canonical key: smaller lattice endpoint + axis
                    int axis = 0;
                    for (int d = 0; d < 3; ++d)
                        if (ax[d] != bx[d]) axis = d;
                    const bool a_first = lattice_id(ax[0], ax[1], ax[2]) <
                                         lattice_id(bx[0], bx[1], bx[2]);
                    const int* lo = a_first ? ax : bx;
                    const EdgeKey key{lattice_id(lo[0], lo[1], lo[2]), axis};
                    auto it = edge_vertex.find(key);
                    if (it != edge_vertex.end()) {
                        edge_vert_idx[e] = it->second;
                        continue;
                    }
                    const double va = corner_val[ca], vb = corner_val[cb];
                    double t = (level - va) / (vb - va);
                    if (!std::isfinite(t)) t = 0.5;
                    t = std::min(1.0, std::max(0.0, t));
                    const auto pa = coord(ax[0], ax[1], ax[2]);
                    const auto pb = coord(bx[0], bx[1], bx[2]);
                    const std::array<double, 3> p{pa[0] + t * (pb[0] - pa[0]),
                                                  pa[1] + t * (pb[1] - pa[1]),
                                                  pa[2] + t * (pb[2] - pa[2])};
                    const int idx = int(mesh.vertices.size());
                    mesh.vertices.push_back(p);
                    edge_vertex.emplace(key, idx);
                    edge_vert_idx[e] = idx;
                }

                const int* tri = mc::kTriTable[cube];
                for (int t = 0; tri[t] != -1; t += 3) {
                    const int v0 = edge_vert_idx[tri[t]];
                    const int v1 = edge_vert_idx[tri[t + 1]];
                    const int v2 = edge_vert_idx[tri[t + 2]];
                    if (v0 == v1 || v1 == v2 || v0 == v2) continue;  // degenerate
                    mesh.triangles.push_back({v0, v1, v2});
                }
            }
        }
    }
    return mesh;
}

// Drop zero-area triangles (distinct indices but collinear points).
void remove_degenerate(TriangleMesh& mesh) {
    std::vector<std::array<int, 3>> kept;
    kept.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        const auto& a = mesh.vertices[size_t(t[0])];
        const auto& b = mesh.vertices[size_t(t[1])];
        const auto& c = mesh.vertices[size_t(t[2])];
        const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
        const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
        const double cx = uy * vz - uz * vy;
        const double cy = uz * vx - ux * vz;
        const double cz = ux * vy - uy * vx;
        if (cx * cx + cy * cy + cz * cz > 0.0) kept.push_back(t);
    }
    mesh.triangles = std::move(kept);
}

bool check_orientable(const TriangleMesh& mesh) {
    // closed + orientable: every directed edge appears exactly once and its
    // reverse exactly once
    std::unordered_map<int64_t, int> dir_count;
    const int64_t stride = int64_t(mesh.vertices.size()) + 1;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const int a = t[size_t(e)], b = t[size_t((e + 1) % 3)];
            ++dir_count[int64_t(a) * stride + b];
        }
    }
    for (const auto& [key, count] : dir_count) {
        if (count != 1) return false;
        const int64_t a = key / stride, b = key % stride;
        auto rev = dir_count.find(b * stride + a);
        if (rev == dir_count.end() || rev->second != 1) return false;
    }
    return !mesh.triangles.empty();
}

}  // namespace

TriangleMesh extract_isosurface(const ScalarField3& s, double level) {
    validate(s, "extract_isosurface");
    const GridSpec g = s.grid;
    const int n = g.n;
    const double h = g.spacing();
    TriangleMesh mesh = march_block(
        {n, n, n}, level,
        [&](int i, int j, int k) { return s.at_wrapped(i, j, k); },
        [&](int i, int j, int k) { return std::array<double, 3>{i * h, j * h, k * h}; });
    remove_degenerate(mesh);
    mesh.orientable = check_orientable(mesh);
    return mesh;
}

RivSurface extract_riv_surface(const Riv& riv, const ScalarField3& s, double level) {
    validate(s, "extract_riv_surface");
    if (riv.voxels.empty()) throw std::invalid_argument("extract_riv_surface: empty RIV");
    const GridSpec g = s.grid;
    const int n = g.n;
    const double h = g.spacing();

    RivSurface out;
    std::array<int, 3> size;
    for (int a = 0; a < 3; ++a) {
        out.block_origin[size_t(a)] = riv.bbox.anchor[size_t(a)] - 1;
        size[size_t(a)] = std::min(riv.bbox.extent[size_t(a)] + 2, n + 1);
    }
    out.block_size = size;

    // membership bitset in block coordinates
    std::vector<uint8_t> member(size_t(size[0]) * size[1] * size[2], 0);
    auto block_index = [&](int i, int j, int k) {
        return size_t(i) + size_t(size[0]) * (size_t(j) + size_t(size[1]) * size_t(k));
    };
    for (size_t v : riv.voxels) {
        const int ix = int(v % size_t(n));
        const int iy = int((v / size_t(n)) % size_t(n));
        const int iz = int(v / (size_t(n) * size_t(n)));
        // offsets of this voxel (and its periodic images) inside the block
        int bi = (ix - out.block_origin[0]) % n;
        if (bi < 0) bi += n;
        int bj = (iy - out.block_origin[1]) % n;
        if (bj < 0) bj += n;
        int bk = (iz - out.block_origin[2]) % n;
        if (bk < 0) bk += n;
        for (int dk = bk; dk < size[2]; dk += n)
            for (int dj = bj; dj < size[1]; dj += n)
                for (int di = bi; di < size[0]; di += n) member[block_index(di, dj, dk)] = 1;
    }

    // Other components above the level inside the block are clamped just
    // below it so only this RIV's surface is meshed. Under 26-connectivity no
    // marching cell mixes member and clamped corners, so the RIV surface
    // itself is unaffected.
    const double clamp_val = level - std::max(std::fabs(level), 1.0) * 1e-12;
    out.level = level;
    out.block_values.resize(size_t(size[0]) * size[1] * size[2]);
    for (int k = 0; k < size[2]; ++k)
        for (int j = 0; j < size[1]; ++j)
            for (int i = 0; i < size[0]; ++i) {
                double v = s.at_wrapped(out.block_origin[0] + i, out.block_origin[1] + j,
                                        out.block_origin[2] + k);
                if (v > level && !member[block_index(i, j, k)]) v = clamp_val;
                out.block_values[block_index(i, j, k)] = v;
            }

    const std::array<int, 3> cells{size[0] - 1, size[1] - 1, size[2] - 1};
    TriangleMesh mesh = march_block(
        cells, level,
        [&](int i, int j, int k) { return out.block_values[block_index(i, j, k)]; },
        [&](int i, int j, int k) {
            return std::array<double, 3>{(out.block_origin[0] + i) * h,
                                         (out.block_origin[1] + j) * h,
                                         (out.block_origin[2] + k) * h};
        });
    remove_degenerate(mesh);
    mesh.orientable = check_orientable(mesh);
    out.mesh = std::move(mesh);
    return out;
}

double RivSurface::interpolate_block(const std::array<double, 3>& p, double spacing) const {
    double local[3];
    for (int a = 0; a < 3; ++a) local[a] = p[size_t(a)] / spacing - block_origin[size_t(a)];
    int base[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
        base[a] = int(std::floor(local[a]));
        frac[a] = local[a] - base[a];
        if (base[a] < 0 || base[a] + 1 >= block_size[size_t(a)])
            return -std::numeric_limits<double>::infinity();
    }
    auto idx = [&](int i, int j, int k) {
        return size_t(i) +
               size_t(block_size[0]) * (size_t(j) + size_t(block_size[1]) * size_t(k));
    };
    double acc = 0.0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
                const double w = (di ? frac[0] : 1 - frac[0]) * (dj ? frac[1] : 1 - frac[1]) *
                                 (dk ? frac[2] : 1 - frac[2]);
                acc += w * block_values[idx(base[0] + di, base[1] + dj, base[2] + dk)];
            }
    return acc;
}

void export_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::string buf;
    buf.reserve(mesh.vertices.size() * 40 + mesh.triangles.size() * 24);
    char line[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(line, sizeof(line), "v %s %s %s\n", format_double(v[0]).c_str(),
                      format_double(v[1]).c_str(), format_double(v[2]).c_str());
        buf += line;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(line, sizeof(line), "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
        buf += line;
    }
    write_file(path, buf);
}

}  // namespace rivlab
