#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "arpu/core.hpp"
#include "arpu/lp.hpp"

namespace arpu {

enum class Verdict { forced_positive, forced_negative, undetermined, inconsistent };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::forced_positive: return "forced_positive";
        case Verdict::forced_negative: return "forced_negative";
        case Verdict::undetermined: return "undetermined";
        case Verdict::inconsistent: return "inconsistent";
    }
    return "?";
}

struct LabelConstraint {
    Point point;
    int sign = 0;  // +1 or -1
};

struct ComparisonConstraint {
    Point greater;
    Point lesser;
};

// A certified value-cluster: all member values within `width` of each other,
// every member at margin >= min_margin, shared true label `label`. Enters
// inference through the primal coefficient system of the cluster lemma, not
// as (w, b) rows; members additionally contribute label rows.
struct ClusterConstraint {
    std::vector<Point> points;
    double width = 0.0;
    double min_margin = 0.0;
    int label = 0;
};

struct Constraint {
    std::variant<LabelConstraint, ComparisonConstraint, ClusterConstraint> body;
    std::string provenance;
};

Constraint make_label(Point p, int sign, std::string provenance = {});
Constraint make_comparison(Point greater, Point lesser, std::string provenance = {});
Constraint make_cluster(std::vector<Point> pts, double width, double min_margin,
                        int label, std::string provenance = {});

// Accumulated trusted constraints over hypotheses (w, b) normalized to
// ||(w,b)||_inf <= 1. Label rows carry an explicit slack standing in for
// strict inequalities. Freeze into a PartialClassifier before concurrent use.
class ConstraintSet {
public:
    explicit ConstraintSet(int dim, double slack = 1e-6, double tol = 1e-7)
        : dim_(dim), slack_(slack), tol_(tol) {}

    void add(Constraint c) { constraints_.push_back(std::move(c)); }

    int dim() const { return dim_; }
    double slack() const { return slack_; }
    double tol() const { return tol_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    std::size_t size() const { return constraints_.size(); }

    // Inequality rows over z = (w, b) from label/comparison constraints and
    // cluster member labels (cluster structure itself is handled separately).
    IneqSystem linear_system(const std::vector<Constraint>& extra = {}) const;

    FeasResult feasible(const std::vector<Constraint>& extra = {}) const;

    // Verdict from the (w, b) polytope alone.
    Verdict lp_verdict(const Point& x) const;

    // lp verdict merged with the cluster coefficient-system route.
    Verdict infer_label(const Point& x) const;

private:
    int dim_;
    double slack_;
    double tol_;
    std::vector<Constraint> constraints_;
};

// Combines an already-computed (w, b)-polytope verdict with the cluster
// coefficient-system route. Shared by ConstraintSet::infer_label and the
// classifier fast path.
Verdict merge_cluster_route(const ConstraintSet& cs, const Point& x, Verdict lp);

// Ground-truth check of a constraint against the planted hypothesis;
// simulation-side audit only.
bool constraint_holds(const Constraint& c, const Hypothesis& h_star);

// Whether membership in the (d+1)-expansion of the cluster forces y's label:
// feasibility of sum a_i = 1, sum a_i x_i = y, sum |a_i| <= d + 1, solved as
// an LP with split-variable absolute values. Returns the forced label, or
// nullopt when the system is infeasible.
std::optional<int> cluster_infer(const ClusterConstraint& cluster, const Point& y,
                                 int dim, double tol = 1e-7);

// Minimal sum |a_i| subject to the two equality blocks; nullopt when y is
// outside the affine hull. Exposed for tests of the hand-solved cases.
std::optional<double> cluster_min_l1(const std::vector<Point>& cluster,
                                     const Point& y, double tol = 1e-7);

// Exhaustively checks whether some point of `sample` is inferred from the
// noiseless answers (under h) on the others. Intended for small samples.
struct InferenceDimWitness {
    bool holds = false;
    std::optional<Point> witness;
};
InferenceDimWitness check_inference_dimension(const std::vector<Point>& sample,
                                              const Hypothesis& h);

}  // namespace arpu
