#include "core/aabb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "core/util.hpp"

namespace rivlab {

namespace {

double dot(const Point3& a, const Point3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
Point3 sub(const Point3& a, const Point3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
Point3 cross(const Point3& a, const Point3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double point_box_distance_sq(const Point3& p, const Point3& lo, const Point3& hi) {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double v = p[size_t(a)];
        if (v < lo[size_t(a)]) {
            const double d = lo[size_t(a)] - v;
            d2 += d * d;
        } else if (v > hi[size_t(a)]) {
            const double d = v - hi[size_t(a)];
            d2 += d * d;
        }
    }
    return d2;
}

bool ray_box_intersect(const Point3& origin, const Point3& inv_dir, const Point3& lo,
                       const Point3& hi) {
    double tmin = 0.0, tmax = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        const double t1 = (lo[size_t(a)] - origin[size_t(a)]) * inv_dir[size_t(a)];
        const double t2 = (hi[size_t(a)] - origin[size_t(a)]) * inv_dir[size_t(a)];
        tmin = std::max(tmin, std::min(t1, t2));
        tmax = std::min(tmax, std::max(t1, t2));
        if (tmin > tmax) return false;
    }
    return true;
}

}  // namespace

double point_triangle_distance_sq(const Point3& p, const Point3& a, const Point3& b,
                                  const Point3& c) {
    // Ericson, Real-Time Collision Detection, closest point on triangle.
    const Point3 ab = sub(b, a), ac = sub(c, a), ap = sub(p, a);
    const double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        const Point3 d = ap;
        return dot(d, d);
    }
    const Point3 bp = sub(p, b);
    const double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) {
        const Point3 d = bp;
        return dot(d, d);
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        const Point3 d{ap[0] - v * ab[0], ap[1] - v * ab[1], ap[2] - v * ab[2]};
        return dot(d, d);
    }
    const Point3 cp = sub(p, c);
    const double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) {
        const Point3 d = cp;
        return dot(d, d);
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        const Point3 d{ap[0] - w * ac[0], ap[1] - w * ac[1], ap[2] - w * ac[2]};
        return dot(d, d);
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        const Point3 d{bp[0] - w * (c[0] - b[0]), bp[1] - w * (c[1] - b[1]),
                       bp[2] - w * (c[2] - b[2])};
        return dot(d, d);
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    const Point3 q{a[0] + v * ab[0] + w * ac[0], a[1] + v * ab[1] + w * ac[1],
                   a[2] + v * ab[2] + w * ac[2]};
    const Point3 d = sub(p, q);
    return dot(d, d);
}

AabbTree::AabbTree(const TriangleMesh& mesh, int leaf_size) {
    tris_.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        tris_.push_back({mesh.vertices[size_t(t[0])], mesh.vertices[size_t(t[1])],
                         mesh.vertices[size_t(t[2])]});
    }
    if (tris_.empty()) return;
    std::vector<Point3> centroids(tris_.size());
    for (size_t i = 0; i < tris_.size(); ++i) {
        const auto& t = tris_[i];
        centroids[i] = {(t.a[0] + t.b[0] + t.c[0]) / 3.0, (t.a[1] + t.b[1] + t.c[1]) / 3.0,
                        (t.a[2] + t.b[2] + t.c[2]) / 3.0};
    }
    std::vector<int32_t> order(tris_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = int32_t(i);
    nodes_.reserve(2 * tris_.size() / std::max(1, leaf_size) + 2);
    root_ = build(0, int32_t(tris_.size()), std::max(1, leaf_size), centroids, order);
    // apply the final ordering
    std::vector<Tri> reordered(tris_.size());
    for (size_t i = 0; i < order.size(); ++i) reordered[i] = tris_[size_t(order[i])];
    tris_ = std::move(reordered);
}

int32_t AabbTree::build(int32_t begin, int32_t end, int leaf_size,
                        std::vector<Point3>& centroids, std::vector<int32_t>& order) {
    Node node;
    node.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity()};
    node.hi = {-std::numeric_limits<double>::infinity(),
               -std::numeric_limits<double>::infinity(),
               -std::numeric_limits<double>::infinity()};
    for (int32_t i = begin; i < end; ++i) {
        const Tri& t = tris_[size_t(order[size_t(i)])];
        for (const Point3* p : {&t.a, &t.b, &t.c}) {
            for (int a = 0; a < 3; ++a) {
                node.lo[size_t(a)] = std::min(node.lo[size_t(a)], (*p)[size_t(a)]);
                node.hi[size_t(a)] = std::max(node.hi[size_t(a)], (*p)[size_t(a)]);
            }
        }
    }
    node.begin = begin;
    node.end = end;

    const int32_t idx = int32_t(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= leaf_size) return idx;

    // split at the median centroid along the widest axis
    int axis = 0;
    double width = -1.0;
    for (int a = 0; a < 3; ++a) {
        const double w = node.hi[size_t(a)] - node.lo[size_t(a)];
        if (w > width) {
            width = w;
            axis = a;
        }
    }
    const int32_t mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int32_t x, int32_t y) {
                         const double cx = centroids[size_t(x)][size_t(axis)];
                         const double cy = centroids[size_t(y)][size_t(axis)];
                         if (cx != cy) return cx < cy;
                         return x < y;  // deterministic ties
                     });
    if (mid == begin || mid == end) return idx;  // degenerate split: keep as leaf

    const int32_t left = build(begin, mid, leaf_size, centroids, order);
    const int32_t right = build(mid, end, leaf_size, centroids, order);
    nodes_[size_t(idx)].left = left;
    nodes_[size_t(idx)].right = right;
    return idx;
}

double AabbTree::unsigned_distance(const Point3& p) const {
    if (tris_.empty()) throw std::runtime_error("unsigned_distance: empty tree");
    double best = std::numeric_limits<double>::infinity();
    // explicit stack, nearer child first
    std::array<int32_t, 128> stack;
    int depth = 0;
    stack[size_t(depth++)] = root_;
    while (depth > 0) {
        const Node& node = nodes_[size_t(stack[size_t(--depth)])];
        if (point_box_distance_sq(p, node.lo, node.hi) >= best) continue;
        if (node.left < 0) {
            for (int32_t i = node.begin; i < node.end; ++i) {
                const Tri& t = tris_[size_t(i)];
                best = std::min(best, point_triangle_distance_sq(p, t.a, t.b, t.c));
            }
            continue;
        }
        const Node& l = nodes_[size_t(node.left)];
        const Node& r = nodes_[size_t(node.right)];
        const double dl = point_box_distance_sq(p, l.lo, l.hi);
        const double dr = point_box_distance_sq(p, r.lo, r.hi);
        // push the farther child first so the nearer is processed next
        if (dl <= dr) {
            if (depth + 2 > int(stack.size())) throw std::runtime_error("tree too deep");
            stack[size_t(depth++)] = node.right;
            stack[size_t(depth++)] = node.left;
        } else {
            if (depth + 2 > int(stack.size())) throw std::runtime_error("tree too deep");
            stack[size_t(depth++)] = node.left;
            stack[size_t(depth++)] = node.right;
        }
    }
    return std::sqrt(best);
}

double AabbTree::unsigned_distance_brute(const Point3& p) const {
    if (tris_.empty()) throw std::runtime_error("unsigned_distance_brute: empty tree");
    double best = std::numeric_limits<double>::infinity();
    for (const Tri& t : tris_) best = std::min(best, point_triangle_distance_sq(p, t.a, t.b, t.c));
    return std::sqrt(best);
}

AabbTree::RayResult AabbTree::ray_crossings(const Point3& p, const Point3& dir) const {
    RayResult res;
    if (tris_.empty()) return res;
    const Point3 inv{1.0 / dir[0], 1.0 / dir[1], 1.0 / dir[2]};
    std::array<int32_t, 128> stack;
    int depth = 0;
    stack[size_t(depth++)] = root_;
    const double eps_t = 1e-12;
    const double eps_bary = 1e-9;
    while (depth > 0) {
        const Node& node = nodes_[size_t(stack[size_t(--depth)])];
        if (!ray_box_intersect(p, inv, node.lo, node.hi)) continue;
        if (node.left >= 0) {
            if (depth + 2 > int(stack.size())) throw std::runtime_error("tree too deep");
            stack[size_t(depth++)] = node.left;
            stack[size_t(depth++)] = node.right;
            continue;
        }
        for (int32_t i = node.begin; i < node.end; ++i) {
            const Tri& tri = tris_[size_t(i)];
            // Moller-Trumbore
            const Point3 e1 = sub(tri.b, tri.a), e2 = sub(tri.c, tri.a);
            const Point3 pv = cross(dir, e2);
            const double det = dot(e1, pv);
            const double area_scale =
                std::sqrt(dot(e1, e1)) * std::sqrt(dot(e2, e2));
            if (std::fabs(det) <= 1e-14 * area_scale) {
                continue;  // grazing/parallel ray
            }
            const double inv_det = 1.0 / det;
            const Point3 tv = sub(p, tri.a);
            const double u = dot(tv, pv) * inv_det;
            if (u < -eps_bary || u > 1.0 + eps_bary) continue;
            const Point3 qv = cross(tv, e1);
            const double v = dot(dir, qv) * inv_det;
            if (v < -eps_bary || u + v > 1.0 + eps_bary) continue;
            const double t = dot(e2, qv) * inv_det;
            if (t <= eps_t) {
                if (t > -eps_t) res.degenerate = true;  // origin on the surface
                continue;
            }
            // hit close to an edge or vertex: ask for a fresh ray
            if (u < eps_bary || v < eps_bary || u + v > 1.0 - eps_bary) {
                res.degenerate = true;
                continue;
            }
            ++res.crossings;
        }
    }
    return res;
}

bool inside_test(const AabbTree& tree, const Point3& p, int rays, uint64_t seed) {
    if (tree.empty()) throw std::runtime_error("inside_test: empty tree");
    Rng rng(seed);
    int inside_votes = 0, total = 0;
    int attempts = 0;
    const int max_attempts = rays * 40;
    while (total < rays) {
        if (++attempts > max_attempts)
            throw std::runtime_error("inside_test: persistent degenerate ray hits");
        auto d = rng.unit_vector();
        // keep directions away from the axes to dodge lattice-aligned geometry
        if (std::fabs(d[0]) < 1e-3 || std::fabs(d[1]) < 1e-3 || std::fabs(d[2]) < 1e-3)
            continue;
        const auto res = tree.ray_crossings(p, {d[0], d[1], d[2]});
        if (res.degenerate) continue;
        ++total;
        if (res.crossings % 2 == 1) ++inside_votes;
    }
    return 2 * inside_votes > rays;
}

}  // namespace rivlab
