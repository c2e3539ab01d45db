#pragma once

#include <array>
#include <vector>

namespace arpu {

// Convex polytope in R^3 held as a vertex cloud plus face loops, clipped
// incrementally by halfspaces {a.z >= c}. Backs the d=2 classifier fast path:
// min/max of a linear functional over the feasible (w1, w2, b) polytope is
// attained at a vertex. Falls to `degenerate` on numeric trouble, in which
// case callers must use the LP route instead.
class ConvexPolytope3 {
public:
    using Vec3 = std::array<double, 3>;

    static ConvexPolytope3 box(double half_width);

    // Intersect with {a.z >= c}. Returns false once the polytope is empty.
    bool clip(const Vec3& a, double c);

    bool empty() const { return empty_; }
    bool degenerate() const { return degenerate_; }

    double min_dot(const Vec3& f) const;
    double max_dot(const Vec3& f) const;

    const std::vector<Vec3>& vertices() const { return verts_; }

private:
    std::vector<Vec3> verts_;
    std::vector<std::vector<int>> faces_;  // vertex index loops
    bool empty_ = false;
    bool degenerate_ = false;
};

}  // namespace arpu
