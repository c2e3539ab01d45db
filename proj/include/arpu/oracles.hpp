#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "arpu/core.hpp"
#include "arpu/flat_map.hpp"
#include "arpu/noise.hpp"
#include "arpu/rng.hpp"

namespace arpu {

// Bounded noise: every answer is correct with probability >= 1/2 + lambda.
struct MassartModel {
    enum class Adversary {
        worst_case_flip,  // flip probability exactly 1/2 - lambda everywhere
        uniform_flip,     // per-query flip probability drawn once in [0, 1/2 - lambda]
    };
    double lambda = 0.5;  // in (0, 1/2]
    Adversary adversary = Adversary::worst_case_flip;
};

// Distance-based noise: correctness advantage over 1/2 sandwiched between
// monotone curves of the value gap. The adversary is a fixed envelope policy;
// the paper allows any beta in the band and the envelopes are the extremal
// testable cases.
struct GtncModel {
    enum class Adversary { lower_envelope, upper_envelope, midpoint };
    NoiseCurve g_lower;
    NoiseCurve g_upper;
    Adversary adversary = Adversary::lower_envelope;

    double advantage(double gap) const {
        switch (adversary) {
            case Adversary::lower_envelope: return g_lower(gap);
            case Adversary::upper_envelope: return g_upper(gap);
            case Adversary::midpoint: return 0.5 * (g_lower(gap) + g_upper(gap));
        }
        return 0.0;
    }
};

struct NoiselessModel {};

using NoiseModel = std::variant<NoiselessModel, MassartModel, GtncModel>;

// Deterministic lower bound on the model-true correctness probability at a
// given value gap. Simulation-side bookkeeping only (far/close tags, audits).
inline double model_correctness_bound(const NoiseModel& model, double gap) {
    if (std::holds_alternative<NoiselessModel>(model)) return 1.0;
    if (const auto* m = std::get_if<MassartModel>(&model)) return 0.5 + m->lambda;
    return 0.5 + std::get<GtncModel>(model).advantage(gap);
}

enum class CompareResult { x1_less, x2_less };

// Persistent noisy oracle against a planted hypothesis. First query of a
// point (or pair) draws the answer once; every repeat returns the memoized
// answer. Counters count distinct queries; repeats are tracked separately.
// Single-owner mutable per trial.
class Oracle {
public:
    Oracle(NoiseModel model, Hypothesis h_star, Rng rng)
        : model_(std::move(model)), h_star_(std::move(h_star)), rng_(rng) {}

    const Hypothesis& planted() const { return h_star_; }
    const NoiseModel& model() const { return model_; }

    int query_label(const Point& x) {
        double v = evaluate(h_star_, x);
        if (v == 0.0)
            throw degenerate_point_error("query_label: point " +
                                         std::to_string(x.id) +
                                         " lies exactly on the boundary");
        if (x.id < label_memo_.size() && label_memo_[x.id] != 0) {
            ++repeated_label_queries_;
            return label_memo_[x.id];
        }
        double beta = label_correct_prob(std::abs(v));
        int truth = v > 0.0 ? 1 : -1;
        int answer = rng_.next_bernoulli(beta) ? truth : -truth;
        if (x.id >= label_memo_.size()) label_memo_.resize(x.id + 1024, 0);
        label_memo_[x.id] = static_cast<std::int8_t>(answer);
        ++label_queries_;
        return answer;
    }

    CompareResult query_comparison(const Point& x1, const Point& x2) {
        if (x1.id == x2.id)
            throw std::invalid_argument("query_comparison: self-comparison on id " +
                                        std::to_string(x1.id));
        bool swapped = x1.id > x2.id;
        const Point& lo = swapped ? x2 : x1;
        const Point& hi = swapped ? x1 : x2;
        if (hi.id >> 32)
            throw std::invalid_argument("query_comparison: point ids must fit 32 bits");
        std::uint64_t key = (lo.id << 32) | hi.id;
        bool lo_less;
        if (const std::int8_t* hit = compare_memo_.find(key)) {
            ++repeated_comparison_queries_;
            lo_less = (*hit == 1);
        } else {
            double v_lo = evaluate(h_star_, lo);
            double v_hi = evaluate(h_star_, hi);
            double beta = comparison_correct_prob(std::abs(v_lo - v_hi));
            bool truth_lo_less = v_lo < v_hi;  // exact ties break toward hi-id less
            lo_less = rng_.next_bernoulli(beta) ? truth_lo_less : !truth_lo_less;
            compare_memo_.insert(key, lo_less ? 1 : 2);
            ++comparison_queries_;
        }
        bool x1_less = swapped ? !lo_less : lo_less;
        return x1_less ? CompareResult::x1_less : CompareResult::x2_less;
    }

    bool measures_less(const Point& a, const Point& b) {
        return query_comparison(a, b) == CompareResult::x1_less;
    }

    void reserve_comparisons(std::size_t expected) { compare_memo_.reserve(expected); }

    long label_queries() const { return label_queries_; }
    long comparison_queries() const { return comparison_queries_; }
    long repeated_label_queries() const { return repeated_label_queries_; }
    long repeated_comparison_queries() const { return repeated_comparison_queries_; }

    // Model-true correctness probabilities, exposed for simulation-side
    // bookkeeping (far/close tagging, audit); not consulted by learners.
    double label_correct_prob(double abs_value) const {
        return correct_prob(abs_value);
    }
    double comparison_correct_prob(double gap) const { return correct_prob(gap); }

private:
    double correct_prob(double gap) const {
        if (std::holds_alternative<NoiselessModel>(model_)) return 1.0;
        if (const auto* m = std::get_if<MassartModel>(&model_)) {
            switch (m->adversary) {
                case MassartModel::Adversary::worst_case_flip:
                    return 0.5 + m->lambda;
                case MassartModel::Adversary::uniform_flip: {
                    // Composite draw: flip prob uniform in [0, 1/2 - lambda],
                    // then Bernoulli; realized correctness >= 1/2 + lambda.
                    return 1.0 - rng_.next_double() * (0.5 - m->lambda);
                }
            }
        }
        const auto& g = std::get<GtncModel>(model_);
        return 0.5 + g.advantage(gap);
    }

    NoiseModel model_;
    Hypothesis h_star_;
    mutable Rng rng_;
    std::vector<std::int8_t> label_memo_;  // indexed by point id, 0 = unset
    FlatU64Map compare_memo_;              // (lo_id, hi_id) -> 1 if lo less, 2 if hi less
    long label_queries_ = 0;
    long comparison_queries_ = 0;
    long repeated_label_queries_ = 0;
    long repeated_comparison_queries_ = 0;
};

}  // namespace arpu
