#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/isosurface.hpp"

namespace rivlab {

using Point3 = std::array<double, 3>;

/// Bounding-box hierarchy over a triangle soup for closest-point queries and
/// ray-crossing parity tests. Holds its own copy of the triangle geometry.
class AabbTree {
public:
    explicit AabbTree(const TriangleMesh& mesh, int leaf_size = 4);

    size_t triangle_count() const { return tris_.size(); }
    bool empty() const { return tris_.empty(); }

    /// Exact minimum distance from p to the mesh (branch-and-bound; equals
    /// the brute-force scan). Throws on an empty tree.
    double unsigned_distance(const Point3& p) const;

    /// Reference oracle: scan every triangle.
    double unsigned_distance_brute(const Point3& p) const;

    struct RayResult {
        int crossings = 0;
        bool degenerate = false;  // hit near an edge/vertex or grazing: retry
    };
    /// Count crossings of the ray p + t*dir, t > 0.
    RayResult ray_crossings(const Point3& p, const Point3& dir) const;

private:
    struct Tri {
        Point3 a, b, c;
    };
    struct Node {
        Point3 lo, hi;
        int32_t left = -1;    // internal: child index; leaf: -1
        int32_t right = -1;
        int32_t begin = 0, end = 0;  // leaf triangle range
    };

    int32_t build(int32_t begin, int32_t end, int leaf_size,
                  std::vector<Point3>& centroids, std::vector<int32_t>& order);

    std::vector<Tri> tris_;
    std::vector<Node> nodes_;
    int32_t root_ = -1;
};

/// Exact point-to-triangle distance squared (closest-point clamping).
double point_triangle_distance_sq(const Point3& p, const Point3& a, const Point3& b,
                                  const Point3& c);

/// Majority vote over `rays` seeded pseudo-random ray directions of
/// crossing-parity tests; degenerate hits are retried with fresh directions.
/// Robust to inconsistent triangle winding. Throws after too many retries.
bool inside_test(const AabbTree& tree, const Point3& p, int rays = 5,
                 uint64_t seed = 0x5eed5eedULL);

}  // namespace rivlab
