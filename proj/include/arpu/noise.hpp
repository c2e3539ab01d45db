#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "arpu/errors.hpp"

namespace arpu {

// Monotone nondecreasing advantage curve g: [0, eps0] -> [0, 1/2].
// Beyond eps0 the curve is held at g(eps0) (the paper's notational
// convention for the bounded-noise tail). Two families are supported:
// the power family g(x) = m * x^(kappa-1) capped at 1/2, and a user
// table with monotone linear interpolation. Arbitrary code-valued
// functions are excluded so runs stay serializable.
class NoiseCurve {
public:
    static NoiseCurve power(double m, double kappa, double eps0) {
        if (m < 0.0 || kappa < 1.0 || eps0 <= 0.0)
            throw config_error("NoiseCurve::power: need m >= 0, kappa >= 1, eps0 > 0");
        NoiseCurve c;
        c.kind_ = Kind::Power;
        c.m_ = m;
        c.kappa_ = kappa;
        c.eps0_ = eps0;
        return c;
    }

    // Points must be sorted by x with nondecreasing g values in [0, 1/2].
    static NoiseCurve table(std::vector<std::pair<double, double>> pts, double eps0) {
        if (pts.size() < 2) throw config_error("NoiseCurve::table: need >= 2 points");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].second < 0.0 || pts[i].second > 0.5)
                throw config_error("NoiseCurve::table: values must lie in [0, 1/2]");
            if (i > 0 && (pts[i].first <= pts[i - 1].first ||
                          pts[i].second < pts[i - 1].second))
                throw config_error("NoiseCurve::table: points must be strictly "
                                   "increasing in x and nondecreasing in g");
        }
        NoiseCurve c;
        c.kind_ = Kind::Table;
        c.pts_ = std::move(pts);
        c.eps0_ = eps0;
        return c;
    }

    double eps0() const { return eps0_; }

    double operator()(double x) const {
        if (x < 0.0) x = 0.0;
        if (x > eps0_) x = eps0_;
        if (kind_ == Kind::Power) {
            if (kappa_ == 1.0) return std::min(m_, 0.5);
            return std::min(m_ * std::pow(x, kappa_ - 1.0), 0.5);
        }
        if (x <= pts_.front().first) return pts_.front().second;
        if (x >= pts_.back().first) return pts_.back().second;
        auto it = std::upper_bound(pts_.begin(), pts_.end(), x,
                                   [](double v, const std::pair<double, double>& p) {
                                       return v < p.first;
                                   });
        auto [x1, y1] = *it;
        auto [x0, y0] = *(it - 1);
        double t = (x - x0) / (x1 - x0);
        return y0 + t * (y1 - y0);
    }

    // Generalized inverse: smallest x in [0, eps0] with g(x) >= y.
    // `where` names the formula being evaluated for error reporting.
    double inverse(double y, const std::string& where = "g^-1") const {
        if (y < 0.0)
            throw config_error(where + ": argument " + std::to_string(y) +
                               " below curve range");
        if (y > (*this)(eps0_) + 1e-15)
            throw config_error(where + ": argument " + std::to_string(y) +
                               " exceeds g(eps0) = " + std::to_string((*this)(eps0_)));
        if (y <= (*this)(0.0)) return 0.0;
        if (kind_ == Kind::Power) {
            double x = std::pow(y / m_, 1.0 / (kappa_ - 1.0));
            return std::min(x, eps0_);
        }
        double lo = 0.0, hi = eps0_;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            if ((*this)(mid) >= y)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

private:
    enum class Kind { Power, Table };
    Kind kind_ = Kind::Power;
    double m_ = 0.0, kappa_ = 2.0, eps0_ = 1.0;
    std::vector<std::pair<double, double>> pts_;
};

}  // namespace arpu
