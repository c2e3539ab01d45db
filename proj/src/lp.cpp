#include "arpu/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace arpu {
namespace {

// Dense simplex tableau. Columns 0..n-1 are structural, n..n+m-1 artificial,
// last column is the rhs. Row m holds the working objective (reduced costs),
// row m+1 the phase-1 objective while it is active.
class Tableau {
public:
    Tableau(const LpProblem& p, double tol) : m_(p.rows), n_(p.cols), tol_(tol) {
        width_ = n_ + m_ + 1;
        t_.assign(static_cast<std::size_t>(m_ + 2) * width_, 0.0);
        basis_.resize(m_);
        for (int r = 0; r < m_; ++r) {
            double sign = p.b[r] < 0.0 ? -1.0 : 1.0;
            for (int c = 0; c < n_; ++c) at(r, c) = sign * p.at(r, c);
            at(r, n_ + r) = 1.0;
            rhs(r) = sign * p.b[r];
            basis_[r] = n_ + r;
        }
        // Phase-1 objective: minimize sum of artificials, expressed in terms
        // of the non-basic columns.
        for (int c = 0; c < n_; ++c) {
            double s = 0.0;
            for (int r = 0; r < m_; ++r) s += at(r, c);
            at(m_ + 1, c) = -s;
        }
        double s = 0.0;
        for (int r = 0; r < m_; ++r) s += rhs(r);
        rhs(m_ + 1) = -s;
        min_pivot_ = std::numeric_limits<double>::infinity();
    }

    // Runs simplex on objective row `obj_row` over columns [0, ncols).
    // Returns false when unbounded.
    bool iterate(int obj_row, int ncols) {
        const long max_iter = 2000L + 50L * static_cast<long>(m_ + n_) * (m_ + n_);
        for (long it = 0; it < max_iter; ++it) {
            // Bland: entering = lowest-index column with negative reduced cost.
            int enter = -1;
            for (int c = 0; c < ncols; ++c) {
                if (at(obj_row, c) < -tol_) {
                    enter = c;
                    break;
                }
            }
            if (enter < 0) return true;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < m_; ++r) {
                double a = at(r, enter);
                if (a > tol_) {
                    double ratio = rhs(r) / a;
                    if (ratio < best - 1e-12 ||
                        (ratio < best + 1e-12 &&
                         (leave < 0 || basis_[r] < basis_[leave]))) {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
        throw std::runtime_error("simplex: iteration cap exceeded");
    }

    void pivot(int row, int col) {
        double p = at(row, col);
        double ap = std::abs(p);
        if (ap < min_pivot_) min_pivot_ = ap;
        double inv = 1.0 / p;
        for (int c = 0; c < width_; ++c) at(row, c) *= inv;
        at(row, col) = 1.0;
        for (int r = 0; r < m_ + 2; ++r) {
            if (r == row) continue;
            double f = at(r, col);
            if (f == 0.0) continue;
            for (int c = 0; c < width_; ++c) at(r, c) -= f * at(row, c);
            at(r, col) = 0.0;
        }
        basis_[row] = col;
    }

    double& at(int r, int c) { return t_[static_cast<std::size_t>(r) * width_ + c]; }
    double& rhs(int r) { return at(r, width_ - 1); }

    int m_, n_, width_;
    double tol_;
    double min_pivot_;
    std::vector<double> t_;
    std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const LpProblem& p, double tol) {
    Tableau tab(p, tol);
    LpResult res;

    // Phase 1.
    if (!tab.iterate(tab.m_ + 1, tab.n_ + tab.m_))
        throw std::runtime_error("simplex: phase-1 unbounded");
    if (-tab.rhs(tab.m_ + 1) > tol * 10.0) {
        res.status = LpStatus::infeasible;
        res.min_pivot = tab.min_pivot_;
        res.solver_warning = tab.min_pivot_ < tol * 10.0;
        return res;
    }
    // Drive any artificial still in the basis out of it; rows with no
    // structural pivot candidate are redundant and stay harmless at level 0.
    for (int r = 0; r < tab.m_; ++r) {
        if (tab.basis_[r] < tab.n_) continue;
        for (int c = 0; c < tab.n_; ++c) {
            if (std::abs(tab.at(r, c)) > tol * 100.0) {
                tab.pivot(r, c);
                break;
            }
        }
    }

    // Phase 2: install the real objective expressed over non-basic columns.
    for (int c = 0; c < tab.width_; ++c) tab.at(tab.m_, c) = 0.0;
    for (int c = 0; c < tab.n_; ++c) tab.at(tab.m_, c) = p.c[c];
    for (int r = 0; r < tab.m_; ++r) {
        int bc = tab.basis_[r];
        if (bc < tab.n_ && p.c[bc] != 0.0) {
            double f = p.c[bc];
            for (int c = 0; c < tab.width_; ++c)
                tab.at(tab.m_, c) -= f * tab.at(r, c);
            tab.at(tab.m_, bc) = 0.0;
        }
    }
    // Artificial columns are barred from re-entering.
    if (!tab.iterate(tab.m_, tab.n_)) {
        res.status = LpStatus::unbounded;
        res.min_pivot = tab.min_pivot_;
        return res;
    }

    res.status = LpStatus::optimal;
    res.x.assign(p.cols, 0.0);
    for (int r = 0; r < tab.m_; ++r)
        if (tab.basis_[r] < tab.n_) res.x[tab.basis_[r]] = tab.rhs(r);
    res.objective = -tab.rhs(tab.m_);
    res.min_pivot = tab.min_pivot_;
    res.solver_warning = tab.min_pivot_ < tol * 10.0;
    return res;
}

FeasResult feasible_system(const IneqSystem& sys, double tol) {
    const int d = sys.dim;
    const int nrows = static_cast<int>(sys.rows.size());
    const int box_rows = sys.box > 0.0 ? 2 * d : 0;

    // Variables: p_j, q_j (z = p - q), one surplus per >=-row, one slack per
    // box row.
    LpProblem lp;
    lp.rows = nrows + box_rows;
    lp.cols = 2 * d + nrows + box_rows;
    lp.a.assign(static_cast<std::size_t>(lp.rows) * lp.cols, 0.0);
    lp.b.assign(lp.rows, 0.0);
    lp.c.assign(lp.cols, 0.0);

    for (int r = 0; r < nrows; ++r) {
        for (int j = 0; j < d; ++j) {
            lp.at(r, j) = sys.rows[r][j];
            lp.at(r, d + j) = -sys.rows[r][j];
        }
        lp.at(r, 2 * d + r) = -1.0;  // surplus
        lp.b[r] = sys.rhs[r];
    }
    for (int j = 0; j < d && sys.box > 0.0; ++j) {
        int r1 = nrows + 2 * j;
        int r2 = nrows + 2 * j + 1;
        lp.at(r1, j) = 1.0;
        lp.at(r1, d + j) = -1.0;
        lp.at(r1, 2 * d + nrows + 2 * j) = 1.0;
        lp.b[r1] = sys.box;
        lp.at(r2, j) = -1.0;
        lp.at(r2, d + j) = 1.0;
        lp.at(r2, 2 * d + nrows + 2 * j + 1) = 1.0;
        lp.b[r2] = sys.box;
    }

    LpResult r = solve_lp(lp, tol);
    FeasResult out;
    out.solver_warning = r.solver_warning;
    out.feasible = r.status == LpStatus::optimal;
    if (out.feasible) {
        out.witness.resize(d);
        for (int j = 0; j < d; ++j) out.witness[j] = r.x[j] - r.x[d + j];
    }
    return out;
}

}  // namespace arpu
