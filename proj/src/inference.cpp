#include "arpu/inference.hpp"

#include <cmath>
#include <stdexcept>

namespace arpu {

Constraint make_label(Point p, int sign, std::string provenance) {
    return Constraint{LabelConstraint{std::move(p), sign}, std::move(provenance)};
}

Constraint make_comparison(Point greater, Point lesser, std::string provenance) {
    return Constraint{ComparisonConstraint{std::move(greater), std::move(lesser)},
                      std::move(provenance)};
}

Constraint make_cluster(std::vector<Point> pts, double width, double min_margin,
                        int label, std::string provenance) {
    return Constraint{ClusterConstraint{std::move(pts), width, min_margin, label},
                      std::move(provenance)};
}

IneqSystem ConstraintSet::linear_system(const std::vector<Constraint>& extra) const {
    IneqSystem sys;
    sys.dim = dim_ + 1;
    sys.box = 1.0;
    auto add_label_row = [&](const Point& p, int sign) {
        std::vector<double> row(dim_ + 1);
        for (int j = 0; j < dim_; ++j) row[j] = sign * p.coords[j];
        row[dim_] = sign;
        sys.rows.push_back(std::move(row));
        sys.rhs.push_back(slack_);
    };
    auto add_one = [&](const Constraint& c) {
        if (const auto* l = std::get_if<LabelConstraint>(&c.body)) {
            add_label_row(l->point, l->sign);
        } else if (const auto* cmp = std::get_if<ComparisonConstraint>(&c.body)) {
            // Comparisons are strict in the inference relation; without the
            // slack, degenerate tie hypotheses block forcings that hold for
            // every strictly consistent separator.
            std::vector<double> row(dim_ + 1, 0.0);
            for (int j = 0; j < dim_; ++j)
                row[j] = cmp->greater.coords[j] - cmp->lesser.coords[j];
            sys.rows.push_back(std::move(row));
            sys.rhs.push_back(slack_);
        } else {
            const auto& cl = std::get<ClusterConstraint>(c.body);
            for (const Point& p : cl.points) add_label_row(p, cl.label);
        }
    };
    for (const auto& c : constraints_) add_one(c);
    for (const auto& c : extra) add_one(c);
    return sys;
}

FeasResult ConstraintSet::feasible(const std::vector<Constraint>& extra) const {
    return feasible_system(linear_system(extra), tol_);
}

Verdict ConstraintSet::lp_verdict(const Point& x) const {
    bool pos = feasible({make_label(x, +1)}).feasible;
    bool neg = feasible({make_label(x, -1)}).feasible;
    if (pos && neg) return Verdict::undetermined;
    if (pos) return Verdict::forced_positive;
    if (neg) return Verdict::forced_negative;
    return Verdict::inconsistent;
}

Verdict merge_cluster_route(const ConstraintSet& cs, const Point& x, Verdict lp) {
    int forced = 0;
    for (const auto& c : cs.constraints()) {
        const auto* cl = std::get_if<ClusterConstraint>(&c.body);
        if (!cl) continue;
        auto r = cluster_infer(*cl, x, cs.dim(), cs.tol());
        if (!r) continue;
        if (forced != 0 && forced != *r) return Verdict::inconsistent;
        forced = *r;
    }
    if (forced == 0) return lp;
    Verdict by_cluster =
        forced > 0 ? Verdict::forced_positive : Verdict::forced_negative;
    switch (lp) {
        case Verdict::undetermined: return by_cluster;
        case Verdict::inconsistent: return Verdict::inconsistent;
        default: return lp == by_cluster ? lp : Verdict::inconsistent;
    }
}

Verdict ConstraintSet::infer_label(const Point& x) const {
    return merge_cluster_route(*this, x, lp_verdict(x));
}

bool constraint_holds(const Constraint& c, const Hypothesis& h_star) {
    if (const auto* l = std::get_if<LabelConstraint>(&c.body))
        return l->sign * evaluate(h_star, l->point) > 0.0;
    if (const auto* cmp = std::get_if<ComparisonConstraint>(&c.body))
        return evaluate(h_star, cmp->greater) > evaluate(h_star, cmp->lesser);
    const auto& cl = std::get<ClusterConstraint>(c.body);
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const Point& p : cl.points) {
        double v = evaluate(h_star, p);
        if (cl.label * v <= 0.0) return false;
        if (std::abs(v) / h_star.norm2() < cl.min_margin) return false;
        lo = first ? v : std::min(lo, v);
        hi = first ? v : std::max(hi, v);
        first = false;
    }
    return hi - lo <= cl.width;
}

std::optional<double> cluster_min_l1(const std::vector<Point>& cluster,
                                     const Point& y, double tol) {
    if (cluster.empty())
        throw std::invalid_argument("cluster_infer: empty cluster");
    const int n = static_cast<int>(cluster.size());
    const int d = y.dim();

    // Variables a_i split into a+ and a-; minimize sum(a+ + a-).
    LpProblem lp;
    lp.rows = d + 1;
    lp.cols = 2 * n;
    lp.a.assign(static_cast<std::size_t>(lp.rows) * lp.cols, 0.0);
    lp.b.assign(lp.rows, 0.0);
    lp.c.assign(lp.cols, 1.0);
    for (int i = 0; i < n; ++i) {
        lp.at(0, i) = 1.0;
        lp.at(0, n + i) = -1.0;
        for (int j = 0; j < d; ++j) {
            lp.at(1 + j, i) = cluster[i].coords[j];
            lp.at(1 + j, n + i) = -cluster[i].coords[j];
        }
    }
    lp.b[0] = 1.0;
    for (int j = 0; j < d; ++j) lp.b[1 + j] = y.coords[j];

    LpResult r = solve_lp(lp, tol);
    if (r.status != LpStatus::optimal) return std::nullopt;
    return r.objective;
}

std::optional<int> cluster_infer(const ClusterConstraint& cluster, const Point& y,
                                 int dim, double tol) {
    if (cluster.points.empty())
        throw std::invalid_argument("cluster_infer: empty cluster");
    // Cheap reject: any affine combination with sum |a_i| <= d+1 stays within
    // (d+1) x (cluster radius) of the centroid.
    std::vector<double> centroid(y.dim(), 0.0);
    for (const Point& p : cluster.points)
        for (int j = 0; j < y.dim(); ++j) centroid[j] += p.coords[j];
    for (double& v : centroid) v /= static_cast<double>(cluster.points.size());
    double r2 = 0.0;
    for (const Point& p : cluster.points) {
        double s = 0.0;
        for (int j = 0; j < y.dim(); ++j) {
            double dd = p.coords[j] - centroid[j];
            s += dd * dd;
        }
        r2 = std::max(r2, s);
    }
    double dy2 = 0.0;
    for (int j = 0; j < y.dim(); ++j) {
        double dd = y.coords[j] - centroid[j];
        dy2 += dd * dd;
    }
    double bound = (dim + 1) * std::sqrt(r2) + 1e-9;
    if (dy2 > bound * bound) return std::nullopt;

    auto l1 = cluster_min_l1(cluster.points, y, tol);
    if (!l1 || *l1 > dim + 1 + 100.0 * tol) return std::nullopt;
    return cluster.label;
}

InferenceDimWitness check_inference_dimension(const std::vector<Point>& sample,
                                              const Hypothesis& h) {
    InferenceDimWitness out;
    const int n = static_cast<int>(sample.size());
    if (n < 2) return out;
    std::vector<double> value(n);
    for (int i = 0; i < n; ++i) value[i] = evaluate(h, sample[i]);

    for (int hold = 0; hold < n; ++hold) {
        ConstraintSet cs(h.dim());
        for (int i = 0; i < n; ++i) {
            if (i == hold || value[i] == 0.0) continue;
            cs.add(make_label(sample[i], value[i] > 0.0 ? 1 : -1));
        }
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (i == hold || j == hold || value[i] == value[j]) continue;
                if (value[i] > value[j])
                    cs.add(make_comparison(sample[i], sample[j]));
                else
                    cs.add(make_comparison(sample[j], sample[i]));
            }
        }
        Verdict v = cs.infer_label(sample[hold]);
        int truth = value[hold] > 0.0 ? 1 : value[hold] < 0.0 ? -1 : 0;
        if ((v == Verdict::forced_positive && truth == 1) ||
            (v == Verdict::forced_negative && truth == -1)) {
            out.holds = true;
            out.witness = sample[hold];
            return out;
        }
    }
    return out;
}

}  // namespace arpu
