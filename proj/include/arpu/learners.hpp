#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arpu/cluster.hpp"
#include "arpu/geometry.hpp"
#include "arpu/inference.hpp"
#include "arpu/oracles.hpp"
#include "arpu/ordering.hpp"

namespace arpu {

// Frozen product of a learner: maps any point to {+1, -1, bot} by LP
// feasibility against the frozen constraint set. In two dimensions the
// feasible (w1, w2, b) polytope's vertices are cached so classification is a
// handful of dot products; borderline cases and higher dimensions take the
// simplex route. Safe to share across threads once constructed.
class PartialClassifier {
public:
    explicit PartialClassifier(ConstraintSet cs);

    Verdict verdict(const Point& x) const;

    // +1 / -1 / 0 where 0 is bot; undetermined and inconsistent both abstain.
    int classify(const Point& x) const;

    const ConstraintSet& constraints() const { return cs_; }
    bool fast_path_active() const { return poly_ok_; }
    bool base_feasible() const { return base_feasible_; }

private:
    Verdict polytope_verdict(const Point& x) const;

    ConstraintSet cs_;
    ConvexPolytope3 poly_;
    bool poly_ok_ = false;
    bool base_feasible_ = true;
};

struct RoundLog {
    int round = 0;
    std::string branch;  // chain | no_chain | cluster | sort | skipped_*
    int constraints_added = 0;
};

struct LearnerReport {
    int rounds = 0;
    std::string stop_reason = "iteration_cap";  // converged | iteration_cap | budget
    bool truncated = false;
    long points_drawn = 0;
    long inconsistent_seen = 0;
    std::vector<RoundLog> round_log;
};

// Draws through the raw sampler, discarding (and counting) points already
// inferred by the current classifier. Firing the consecutive-inferred stop
// rule makes it refuse further draws.
class RejectionSampler {
public:
    RejectionSampler(std::function<Point()> draw, long consecutive_cap)
        : draw_(std::move(draw)), cap_(consecutive_cap) {}

    void set_classifier(const PartialClassifier* c) { classifier_ = c; }

    std::optional<Point> next_uninferred();

    bool stopped() const { return stopped_; }
    long drawn() const { return drawn_; }
    long inconsistent_seen() const { return inconsistent_seen_; }

private:
    std::function<Point()> draw_;
    long cap_;
    const PartialClassifier* classifier_ = nullptr;
    long consecutive_ = 0;
    bool stopped_ = false;
    long drawn_ = 0;
    long inconsistent_seen_ = 0;
};

struct MassartConfig {
    int dimension = 2;
    int k = 5;  // inference dimension parameter
    double lambda = 0.2;
    double epsilon = 0.05;
    double delta_r = 0.05;
    double delta_u = 0.05;

    long n = 0;          // per-round sample size; 0 = block_count * block_size
    int block_size = 8;
    int chain_gap = 8;
    int iteration_cap = 48;    // T
    long consecutive_cap = 0;  // C; 0 = ceil(2 log(N/delta_u) / epsilon)
    int slot_verify_gap = 4;   // re-test slotted block against +-gap; 0 = off
    double chain_vote_threshold = 0.58;  // mid-block audit supermajority; 0 = off
    double mult_n = 1.0;       // multiplier on the sample-size display
    long max_queries = 0;      // harness budget; 0 = unlimited
    int sort_exact_threshold = 18;
    int reinsert_window = 128;
    int max_sweeps = 60;

    int chain_target() const { return 4 * k; }
    int slot_count() const { return 32 * k + 16; }
    int block_count() const { return 32 * k + 16; }
    long working_n() const {
        return n > 0 ? n : static_cast<long>(block_count()) * block_size;
    }
    // Slot-bound sample-size display with the multiplier applied.
    double sample_size_display() const;
    long working_consecutive_cap() const;
    void validate() const;
};

struct GtncConfig {
    int dimension = 2;
    int k = 5;
    NoiseCurve g_lower = NoiseCurve::power(0.4, 2.0, 1.0);
    NoiseCurve g_upper = NoiseCurve::power(0.4, 2.0, 1.0);
    double gamma = 0.1;
    bool margin_gate = false;
    bool aid_mode = false;   // synthetic margin from anti-concentration
    double acc_c2 = 0.0;     // distribution's anti-concentration constant
    double epsilon = 0.05;
    double delta_r = 0.05;
    double delta_u = 0.05;

    long n = 240;
    long c_work = 8;
    long m_work = 14;  // equitable subset size = 2c + m
    long m_c = 0;      // cluster-branch draw; 0 = d log(d+1) n
    long m_s = 0;      // sort-branch slots; 0 = 32k + 16
    long cluster_min = 0;  // 0 = 24 d log(d+1) + labeling size (with mults)
    int chain_target = 0;  // 0 = 4 k_eff
    double eps_t_override = 0.0;
    double lambda1_override = 0.0;
    int block_size = 12;
    int chain_gap = 8;
    int iteration_cap = 48;
    long consecutive_cap = 0;
    int slot_verify_gap = 4;
    double chain_vote_threshold = 0.58;
    int equit_random_budget = 64;
    long max_queries = 0;
    int sort_exact_threshold = 18;
    int reinsert_window = 128;
    int max_sweeps = 60;
    GtncMultipliers mult;
    double mult_cluster = 1.0;
    double mult_label = 1.0;
    double k_eff_mult = 1.0;

    long working_consecutive_cap() const;
    void validate() const;
};

// Working parameters after overrides and the aid-mode margin synthesis.
struct GtncWorking {
    double eps_t = 0.0;
    double lambda_1 = 0.0;
    double gamma = 0.0;
    long subset_size = 0;
    long m_c = 0;
    long m_s = 0;
    long cluster_min = 0;
    long label_size = 0;
    int k_eff = 0;
};
GtncWorking resolve_gtnc(const GtncConfig& cfg);

struct LearnerOutcome {
    std::unique_ptr<PartialClassifier> classifier;
    LearnerReport report;
};

struct WeakRoundOutcome {
    bool chain_found = false;
    std::string branch;
    std::vector<Constraint> added;
    bool aborted = false;  // stop rule fired mid-round
};

// One Massart weak-learner round: sort a fresh sample with the sentinel,
// slot extra points, add the separated chain's labels and comparisons.
WeakRoundOutcome massart_weak_round(Oracle& oracle, RejectionSampler& sampler,
                                    const MassartConfig& cfg, Rng& rng, int round);

// One sample-test round: equitable subset -> cluster branch, else sort branch.
WeakRoundOutcome gtnc_weak_round(Oracle& oracle, RejectionSampler& sampler,
                                 const GtncConfig& cfg, const GtncWorking& work,
                                 Rng& rng, int round);

LearnerOutcome run_massart(Oracle& oracle, std::function<Point()> draw,
                           const MassartConfig& cfg, Rng learner_rng);

LearnerOutcome run_gtnc(Oracle& oracle, std::function<Point()> draw,
                        const GtncConfig& cfg, Rng learner_rng);

}  // namespace arpu
