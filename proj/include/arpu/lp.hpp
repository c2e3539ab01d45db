#pragma once

#include <vector>

namespace arpu {

// min c.x  subject to  A x = b, x >= 0. Dense row-major A.
struct LpProblem {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;  // rows x cols
    std::vector<double> b;  // rows
    std::vector<double> c;  // cols

    double& at(int r, int col) { return a[static_cast<std::size_t>(r) * cols + col]; }
    double at(int r, int col) const { return a[static_cast<std::size_t>(r) * cols + col]; }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x;
    // Smallest pivot magnitude accepted during the solve; a condition proxy.
    double min_pivot = 0.0;
    // Set when min_pivot fell below the conditioning threshold; the result is
    // still returned.
    bool solver_warning = false;
};

// Two-phase dense simplex with Bland's rule. tol is the feasibility /
// reduced-cost tolerance.
LpResult solve_lp(const LpProblem& p, double tol = 1e-7);

// Feasibility of { rows[i] . z >= rhs[i] for all i, |z_j| <= box } with z
// free (handled internally by a positive split). box <= 0 drops the box.
struct IneqSystem {
    int dim = 0;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    double box = 1.0;
};

struct FeasResult {
    bool feasible = false;
    std::vector<double> witness;  // z, when feasible
    bool solver_warning = false;
};

FeasResult feasible_system(const IneqSystem& sys, double tol = 1e-7);

}  // namespace arpu
