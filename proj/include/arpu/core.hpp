#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "arpu/errors.hpp"
#include "arpu/rng.hpp"

namespace arpu {

using PointId = std::uint64_t;

// A sample point. Ids are unique within one trial and never reused; oracle
// memoization keys on the id, so two draws at equal coordinates are distinct
// queries.
struct Point {
    PointId id = 0;
    std::vector<double> coords;

    int dim() const { return static_cast<int>(coords.size()); }
};

// Issues fresh point ids, one instance per trial.
class PointFactory {
public:
    Point make(std::vector<double> coords) {
        return Point{next_id_++, std::move(coords)};
    }
    PointId peek_next() const { return next_id_; }

private:
    PointId next_id_ = 1;
};

// Affine separator w.x + b. Houses the planted Bayes-optimal classifier.
struct Hypothesis {
    std::vector<double> weights;
    double offset = 0.0;

    int dim() const { return static_cast<int>(weights.size()); }

    double norm2() const {
        double s = 0.0;
        for (double w : weights) s += w * w;
        return std::sqrt(s);
    }
};

inline double evaluate(const Hypothesis& h, const Point& x) {
    if (h.dim() != x.dim())
        throw config_error("evaluate: hypothesis dimension " +
                           std::to_string(h.dim()) + " != point dimension " +
                           std::to_string(x.dim()));
    double v = h.offset;
    for (int i = 0; i < h.dim(); ++i) v += h.weights[i] * x.coords[i];
    return v;
}

// Sign of the hypothesis value; 0 only on the exact boundary, which callers
// must treat as degenerate.
inline int true_label(const Hypothesis& h, const Point& x) {
    double v = evaluate(h, x);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

inline double margin(const Hypothesis& h, const Point& x) {
    return std::abs(evaluate(h, x)) / h.norm2();
}

struct LabeledPoint {
    Point point;
    int measured_label = 0;  // +1 or -1, always from an oracle call
};

}  // namespace arpu
