#include "arpu/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arpu {

namespace {
constexpr double kOnPlane = 1e-12;   // vertex counted as kept when this close
constexpr double kMergeEps = 1e-10;  // vertex dedup radius
constexpr int kMaxVerts = 16384;

double dot(const ConvexPolytope3::Vec3& a, const ConvexPolytope3::Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
}  // namespace

ConvexPolytope3 ConvexPolytope3::box(double h) {
    ConvexPolytope3 p;
    for (int i = 0; i < 8; ++i)
        p.verts_.push_back({i & 1 ? h : -h, i & 2 ? h : -h, i & 4 ? h : -h});
    p.faces_ = {
        {0, 2, 3, 1},  // z = -h
        {4, 5, 7, 6},  // z = +h
        {0, 1, 5, 4},  // y = -h
        {2, 6, 7, 3},  // y = +h
        {0, 4, 6, 2},  // x = -h
        {1, 3, 7, 5},  // x = +h
    };
    return p;
}

bool ConvexPolytope3::clip(const Vec3& a, double c) {
    if (empty_ || degenerate_) return !empty_;

    std::vector<double> side(verts_.size());
    bool any_in = false, any_out = false;
    for (std::size_t i = 0; i < verts_.size(); ++i) {
        side[i] = dot(a, verts_[i]) - c;
        if (side[i] >= -kOnPlane)
            any_in = true;
        else
            any_out = true;
    }
    if (!any_out) return true;
    if (!any_in) {
        empty_ = true;
        verts_.clear();
        faces_.clear();
        return false;
    }

    std::vector<Vec3> new_verts;
    std::vector<std::vector<int>> new_faces;
    auto emit = [&](const Vec3& v) -> int {
        for (std::size_t i = 0; i < new_verts.size(); ++i) {
            double dx = new_verts[i][0] - v[0];
            double dy = new_verts[i][1] - v[1];
            double dz = new_verts[i][2] - v[2];
            if (dx * dx + dy * dy + dz * dz < kMergeEps * kMergeEps)
                return static_cast<int>(i);
        }
        new_verts.push_back(v);
        return static_cast<int>(new_verts.size() - 1);
    };

    std::vector<int> cap_points;
    for (const auto& loop : faces_) {
        std::vector<int> out;
        const int n = static_cast<int>(loop.size());
        for (int i = 0; i < n; ++i) {
            int vi = loop[i], vj = loop[(i + 1) % n];
            double si = side[vi], sj = side[vj];
            bool in_i = si >= -kOnPlane, in_j = sj >= -kOnPlane;
            if (in_i) out.push_back(emit(verts_[vi]));
            if (in_i != in_j && std::abs(si - sj) > kOnPlane) {
                double t = si / (si - sj);
                Vec3 p{verts_[vi][0] + t * (verts_[vj][0] - verts_[vi][0]),
                       verts_[vi][1] + t * (verts_[vj][1] - verts_[vi][1]),
                       verts_[vi][2] + t * (verts_[vj][2] - verts_[vi][2])};
                int id = emit(p);
                out.push_back(id);
                cap_points.push_back(id);
            }
        }
        // Drop consecutive duplicates produced by on-plane vertices.
        std::vector<int> dedup;
        for (int id : out)
            if (dedup.empty() || dedup.back() != id) dedup.push_back(id);
        while (dedup.size() > 1 && dedup.front() == dedup.back()) dedup.pop_back();
        if (dedup.size() >= 3) new_faces.push_back(std::move(dedup));
    }

    // Cap face: order the section points by angle in the cutting plane.
    std::sort(cap_points.begin(), cap_points.end());
    cap_points.erase(std::unique(cap_points.begin(), cap_points.end()),
                     cap_points.end());
    if (cap_points.size() >= 3) {
        Vec3 u{-a[1], a[0], 0.0};
        if (std::abs(a[0]) + std::abs(a[1]) < 1e-14) u = {1.0, 0.0, 0.0};
        double un = std::sqrt(dot(u, u));
        u = {u[0] / un, u[1] / un, u[2] / un};
        Vec3 w{a[1] * u[2] - a[2] * u[1], a[2] * u[0] - a[0] * u[2],
               a[0] * u[1] - a[1] * u[0]};
        Vec3 centroid{0, 0, 0};
        for (int id : cap_points)
            for (int k = 0; k < 3; ++k) centroid[k] += new_verts[id][k];
        for (int k = 0; k < 3; ++k) centroid[k] /= static_cast<double>(cap_points.size());
        std::sort(cap_points.begin(), cap_points.end(), [&](int i, int j) {
            Vec3 di{new_verts[i][0] - centroid[0], new_verts[i][1] - centroid[1],
                    new_verts[i][2] - centroid[2]};
            Vec3 dj{new_verts[j][0] - centroid[0], new_verts[j][1] - centroid[1],
                    new_verts[j][2] - centroid[2]};
            return std::atan2(dot(di, w), dot(di, u)) <
                   std::atan2(dot(dj, w), dot(dj, u));
        });
        new_faces.push_back(cap_points);
    }

    if (new_verts.empty()) {
        empty_ = true;
        verts_.clear();
        faces_.clear();
        return false;
    }
    if (new_faces.empty() || new_verts.size() > kMaxVerts) {
        // A cut this thin is numerically unreliable; callers must fall back.
        degenerate_ = true;
        return true;
    }
    verts_ = std::move(new_verts);
    faces_ = std::move(new_faces);
    return true;
}

double ConvexPolytope3::min_dot(const Vec3& f) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : verts_) best = std::min(best, dot(f, v));
    return best;
}

double ConvexPolytope3::max_dot(const Vec3& f) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : verts_) best = std::max(best, dot(f, v));
    return best;
}

}  // namespace arpu
