#pragma once

#include <optional>
#include <vector>

#include "arpu/noise.hpp"
#include "arpu/ordering.hpp"
#include "arpu/rng.hpp"

namespace arpu {

// Equitability of a subset: every element measures as less than roughly half
// of the others. The signature of comparisons among near-equal values.
struct EquitabilityReport {
    std::vector<int> subset;  // table element indices
    std::vector<int> v;       // per-element count of elements measuring less
    double epsilon = 0.0;
    bool equitable = false;
};

// Exact v counts and verdict; deterministic function of the table.
EquitabilityReport equitability(ComparisonTable& table, const std::vector<int>& subset,
                                double epsilon);

// Searches (a) all windows of the given size in a local-search pre-order of
// the table and (b) `random_budget` random subsets; returns the first
// equitable subset found. Deliberately under-approximates an exhaustive
// subset scan.
std::optional<EquitabilityReport> find_equitable_subset(ComparisonTable& table,
                                                        int subset_size, double epsilon,
                                                        int random_budget, Rng rng);

// True iff subset + {x} is lambda1-equitable, given the subset's own report.
bool point_joins_cluster(ComparisonTable& table, const EquitabilityReport& base,
                         const Point& x, double lambda1);

// Strict majority sign; nullopt on an exact tie (callers redraw).
std::optional<int> majority_label(const std::vector<int>& labels);

enum class MarginVerdict { far_enough, too_close };

// Label-count margin test for a certified cluster: far_enough iff the
// majority label's count reaches a (1/2 + 2 g_U(2 gamma)) share of |C|.
// Throws config_error when |C| is below the size precondition for delta.
MarginVerdict margin_test(const std::vector<int>& cluster_labels, double gamma,
                          const NoiseCurve& g_upper, double delta);

// Size at which margin_test is valid at confidence delta.
double margin_test_min_size(double gamma, const NoiseCurve& g_upper, double delta);

// Every displayed constant of the equitability pipeline, evaluated with
// explicit constant 1 in place of asymptotic notation; multipliers let runs
// rescale them. Formula values are reals and can be astronomically large at
// small noise levels; working sizes are chosen by configs.
struct GtncMultipliers {
    double n = 1.0;
    double c = 1.0;
    double m = 1.0;
    double m2 = 1.0;
    double block = 1.0;
};

struct GtncDerivedConstants {
    double gamma_prime = 0.0;
    double eps_t = 0.0;
    double lambda_1 = 0.0;
    double g_eff = 0.0;  // g_L(g_U^{-1}(eps_t / 2)), the working advantage
    double n = 0.0;      // fixed-point of the sample-size display
    double c = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double m = 0.0;
    double m2 = 0.0;
    double block_size = 0.0;  // c2 * m2
    int block_gap = 8;
    int fixed_point_iterations = 0;
};

GtncDerivedConstants derive_gtnc_constants(const NoiseCurve& g_lower,
                                           const NoiseCurve& g_upper, double gamma,
                                           int d, int k, double delta_r,
                                           const GtncMultipliers& mult = {});

}  // namespace arpu
