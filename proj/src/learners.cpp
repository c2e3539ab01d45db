#include "arpu/learners.hpp"

#include <algorithm>
#include <cmath>

#include "arpu/errors.hpp"

namespace arpu {

namespace {
constexpr double kGreyBand = 1e-6;  // vertex-route margin to the LP decision
}

PartialClassifier::PartialClassifier(ConstraintSet cs)
    : cs_(std::move(cs)), poly_(ConvexPolytope3::box(1.0)) {
    if (cs_.dim() == 2) {
        IneqSystem sys = cs_.linear_system();
        for (std::size_t i = 0; i < sys.rows.size(); ++i) {
            poly_.clip({sys.rows[i][0], sys.rows[i][1], sys.rows[i][2]}, sys.rhs[i]);
            if (poly_.degenerate() || poly_.empty()) break;
        }
        poly_ok_ = !poly_.degenerate();
        if (poly_ok_) {
            base_feasible_ = !poly_.empty();
            return;
        }
    }
    base_feasible_ = cs_.feasible().feasible;
}

Verdict PartialClassifier::polytope_verdict(const Point& x) const {
    ConvexPolytope3::Vec3 f{x.coords[0], x.coords[1], 1.0};
    double mx = poly_.max_dot(f);
    double mn = poly_.min_dot(f);
    double s = cs_.slack();
    if (std::abs(mx - s) < kGreyBand || std::abs(mn + s) < kGreyBand)
        return cs_.lp_verdict(x);
    bool pos = mx > s;   // some feasible separator puts x strictly positive
    bool neg = mn < -s;  // some feasible separator puts x strictly negative
    if (pos && neg) return Verdict::undetermined;
    if (pos) return Verdict::forced_positive;
    if (neg) return Verdict::forced_negative;
    return Verdict::inconsistent;
}

Verdict PartialClassifier::verdict(const Point& x) const {
    Verdict lp;
    if (!base_feasible_)
        lp = Verdict::inconsistent;
    else if (poly_ok_ && cs_.dim() == 2)
        lp = polytope_verdict(x);
    else
        lp = cs_.lp_verdict(x);
    return merge_cluster_route(cs_, x, lp);
}

int PartialClassifier::classify(const Point& x) const {
    switch (verdict(x)) {
        case Verdict::forced_positive: return 1;
        case Verdict::forced_negative: return -1;
        default: return 0;
    }
}

std::optional<Point> RejectionSampler::next_uninferred() {
    if (stopped_) return std::nullopt;
    while (true) {
        Point p = draw_();
        ++drawn_;
        Verdict v = classifier_ ? classifier_->verdict(p) : Verdict::undetermined;
        if (v == Verdict::inconsistent) ++inconsistent_seen_;
        if (v == Verdict::forced_positive || v == Verdict::forced_negative) {
            if (++consecutive_ >= cap_) {
                stopped_ = true;
                return std::nullopt;
            }
            continue;
        }
        consecutive_ = 0;
        return p;
    }
}

double MassartConfig::sample_size_display() const {
    double l3 = std::pow(std::log(1.0 / lambda), 3.0);
    double nn = static_cast<double>(std::max<long>(working_n(), 2));
    return mult_n * k * l3 * std::log(nn * k / delta_r) / std::pow(lambda, 5.0);
}

long MassartConfig::working_consecutive_cap() const {
    if (consecutive_cap > 0) return consecutive_cap;
    double total = static_cast<double>(working_n() + slot_count()) * iteration_cap;
    return static_cast<long>(std::ceil(2.0 * std::log(total / delta_u) / epsilon));
}

void MassartConfig::validate() const {
    if (lambda <= 0.0 || lambda > 0.5)
        throw config_error("massart: lambda must lie in (0, 1/2]");
    if (k < 1 || dimension < 1) throw config_error("massart: k and dimension >= 1");
    if (epsilon <= 0.0 || delta_r <= 0.0 || delta_u <= 0.0)
        throw config_error("massart: epsilon, delta_r, delta_u must be positive");
    if (block_size < 1 || chain_gap < 1 || iteration_cap < 1)
        throw config_error("massart: block_size, chain_gap, iteration_cap >= 1");
    if (static_cast<double>(working_n()) < sample_size_display())
        throw config_error(
            "massart: n = " + std::to_string(working_n()) +
            " below the slot-bound sample display " +
            std::to_string(sample_size_display()) +
            " (adjust mult_n; all hidden constants are config)");
}

long GtncConfig::working_consecutive_cap() const {
    if (consecutive_cap > 0) return consecutive_cap;
    double total = static_cast<double>(n + std::max<long>(m_c, 1) + 64) * iteration_cap;
    return static_cast<long>(std::ceil(2.0 * std::log(total / delta_u) / epsilon));
}

void GtncConfig::validate() const {
    if (dimension < 1 || k < 1) throw config_error("gtnc: k and dimension >= 1");
    if (epsilon <= 0.0 || delta_r <= 0.0 || delta_u <= 0.0)
        throw config_error("gtnc: epsilon, delta_r, delta_u must be positive");
    if (n < 2 || c_work < 1 || m_work < 1)
        throw config_error("gtnc: n, c, m must be positive");
    if (2 * c_work + m_work > n)
        throw config_error("gtnc: subset size 2c+m exceeds the sample size");
    if (aid_mode && acc_c2 <= 0.0)
        throw config_error("gtnc: aid mode needs the distribution's c2 constant");
    if (!aid_mode && gamma <= 0.0) throw config_error("gtnc: gamma must be positive");
}

GtncWorking resolve_gtnc(const GtncConfig& cfg) {
    GtncWorking w;
    w.gamma = cfg.gamma;
    if (cfg.aid_mode) {
        double eps0 = cfg.g_lower.eps0();
        double eps_prime = std::min(cfg.epsilon / (4.0 * cfg.acc_c2), eps0 / 2.0);
        w.gamma = cfg.g_upper.inverse(cfg.g_lower(eps_prime) / 4.0,
                                      "aid gamma: g_U^-1(g_L(eps')/4)") /
                  2.0;
    }
    if (cfg.eps_t_override > 0.0) {
        w.eps_t = cfg.eps_t_override;
    } else {
        GtncDerivedConstants d = derive_gtnc_constants(cfg.g_lower, cfg.g_upper, w.gamma,
                                                       cfg.dimension, cfg.k, cfg.delta_r,
                                                       cfg.mult);
        w.eps_t = d.eps_t;
    }
    if (cfg.lambda1_override > 0.0) {
        w.lambda_1 = cfg.lambda1_override;
    } else {
        double y = std::min(4.0 * w.eps_t, cfg.g_lower(cfg.g_lower.eps0()));
        w.lambda_1 = 2.0 * cfg.g_upper(2.0 * cfg.g_lower.inverse(y, "lambda_1"));
    }
    w.subset_size = 2 * cfg.c_work + cfg.m_work;
    double dlogd = cfg.dimension * std::log(cfg.dimension + 1.0);
    w.m_c = cfg.m_c > 0 ? cfg.m_c : static_cast<long>(std::ceil(dlogd * cfg.n));
    w.k_eff = cfg.k;
    if (cfg.aid_mode) {
        double total = static_cast<double>(cfg.n) * cfg.iteration_cap;
        w.k_eff = std::max(1, static_cast<int>(std::ceil(
                                  cfg.k_eff_mult * dlogd * std::log(std::max(total, 2.0)))));
    }
    w.m_s = cfg.m_s > 0 ? cfg.m_s : 32L * w.k_eff + 16;
    double g_gamma = cfg.g_lower(w.gamma);
    w.label_size = g_gamma > 0.0
                       ? static_cast<long>(std::ceil(cfg.mult_label * 2.0 *
                                                     std::log(1.0 / cfg.delta_r) /
                                                     (g_gamma * g_gamma)))
                       : 1L << 30;
    w.cluster_min = cfg.cluster_min > 0
                        ? cfg.cluster_min
                        : static_cast<long>(std::ceil(cfg.mult_cluster * 24.0 * dlogd)) +
                              w.label_size;
    return w;
}

namespace {

struct SortChainParams {
    int block_size = 8;
    int chain_gap = 8;
    int chain_target = 8;
    long slot_count = 0;
    int slot_verify_gap = 4;
    double chain_vote_threshold = 0.58;  // 0 disables the mid-block audit
    MleParams mle;
};

// Sort the sample with the sentinel, slot fresh points, and turn the
// separated chain into label and comparison constraints.
WeakRoundOutcome sort_chain_round(Oracle& oracle, RejectionSampler& sampler,
                                  std::vector<Point> sample_points,
                                  const SortChainParams& params, int round) {
    WeakRoundOutcome out;
    out.branch = "sort";
    ComparisonTable table(oracle, std::move(sample_points), /*with_sentinel=*/true);
    NoisyOrder order = mle_order(table, params.mle);
    order.block_size = params.block_size;

    std::vector<int> pos = order.positions();
    int sentinel_block = order.block_of_rank(pos[table.sentinel_index()]);

    std::vector<SlottedPoint> slotted;
    for (long i = 0; i < params.slot_count; ++i) {
        auto x = sampler.next_uninferred();
        if (!x) {
            out.aborted = true;
            return out;
        }
        SlotResult slot = slot_point(order, table, *x);
        if (params.slot_verify_gap > 0) {
            // Re-test the landing block against blocks at one and two verify
            // offsets per side; a misrouted point fails with high probability
            // and is excluded from chain candidacy. Reliability over coverage.
            bool ok = true;
            for (int off : {params.slot_verify_gap, 2 * params.slot_verify_gap}) {
                int below = slot.block - off;
                int above = slot.block + off;
                if (below >= 0 && !majority_greater_than_block(order, table, *x, below))
                    ok = false;
                if (above < order.block_count() &&
                    majority_greater_than_block(order, table, *x, above))
                    ok = false;
                if (!ok) break;
            }
            if (!ok) continue;
        }
        slotted.push_back(SlottedPoint{std::move(*x), slot.block});
    }

    // Audit vote: an adjacency (a point's side of the sentinel, or a chain
    // pair) must win a supermajority against the members of the block midway
    // between the two. When rejection sampling has narrowed the sample to a
    // band where comparisons degrade toward coin flips, these votes fail and
    // the round yields nothing instead of junk constraints.
    auto supermajority = [&](const Point& x, int block, bool expect_greater) {
        if (params.chain_vote_threshold <= 0.0) return true;
        int lo = block * order.block_size;
        int hi = std::min(order.size(), lo + order.block_size);
        int agree = 0, total = 0;
        for (int r = lo; r < hi; ++r) {
            bool greater = !table.external_less(x, order.ranking[r]);
            if (greater == expect_greater) ++agree;
            ++total;
        }
        return total > 0 &&
               agree >= static_cast<int>(std::ceil(params.chain_vote_threshold * total));
    };

    // Label audit polls the sentinel-adjacent blocks: their members sit near
    // value zero, so each comparison against them carries the candidate's own
    // boundary distance as advantage.
    auto label_vote = [&](const Point& x, bool expect_greater) {
        if (params.chain_vote_threshold <= 0.0) return true;
        int lo = std::max(0, (sentinel_block - 1) * order.block_size);
        int hi = std::min(order.size(), (sentinel_block + 2) * order.block_size);
        int agree = 0, total = 0;
        for (int r = lo; r < hi; ++r) {
            bool greater = !table.external_less(x, order.ranking[r]);
            if (greater == expect_greater) ++agree;
            ++total;
        }
        return total > 0 &&
               agree >= static_cast<int>(std::ceil(params.chain_vote_threshold * total));
    };

    // Labels need separation from the sentinel only; every slotted point that
    // clears that bar contributes one. Pairwise comparisons additionally need
    // chain separation and the pair audit.
    std::vector<SlottedPoint> labelable;
    for (const auto& s : slotted) {
        if (std::abs(s.block - sentinel_block) < params.chain_gap) continue;
        if (!label_vote(s.point, s.block > sentinel_block)) continue;
        labelable.push_back(s);
    }

    std::vector<SlottedPoint> chain =
        select_separated_chain(labelable, sentinel_block, params.chain_gap);
    std::vector<SlottedPoint> audited;
    for (const auto& s : chain) {
        if (!audited.empty()) {
            int mid = (audited.back().block + s.block) / 2;
            if (!supermajority(s.point, mid, true)) continue;
            if (!supermajority(audited.back().point, mid, false)) continue;
        }
        audited.push_back(s);
    }

    if (static_cast<int>(audited.size()) < params.chain_target) {
        out.branch = "no_chain";
        return out;
    }
    out.chain_found = true;
    std::string tag = "round " + std::to_string(round) + " chain";
    for (const auto& s : labelable) {
        int side = s.block > sentinel_block ? 1 : -1;
        out.added.push_back(make_label(s.point, side, tag));
    }
    for (std::size_t i = 0; i + 1 < audited.size(); ++i)
        out.added.push_back(make_comparison(audited[i + 1].point, audited[i].point, tag));
    return out;
}

std::vector<Point> draw_batch(RejectionSampler& sampler, long count, bool* aborted) {
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        auto p = sampler.next_uninferred();
        if (!p) {
            *aborted = true;
            return pts;
        }
        pts.push_back(std::move(*p));
    }
    return pts;
}

}  // namespace

WeakRoundOutcome massart_weak_round(Oracle& oracle, RejectionSampler& sampler,
                                    const MassartConfig& cfg, Rng& rng, int round) {
    WeakRoundOutcome out;
    bool aborted = false;
    std::vector<Point> s = draw_batch(sampler, cfg.working_n(), &aborted);
    if (aborted) {
        out.aborted = true;
        return out;
    }
    SortChainParams params;
    params.block_size = cfg.block_size;
    params.chain_gap = cfg.chain_gap;
    params.chain_target = cfg.chain_target();
    params.slot_count = cfg.slot_count();
    params.slot_verify_gap = cfg.slot_verify_gap;
    params.chain_vote_threshold = cfg.chain_vote_threshold;
    params.mle.exact_threshold = cfg.sort_exact_threshold;
    params.mle.reinsert_window = cfg.reinsert_window;
    params.mle.max_sweeps = cfg.max_sweeps;
    params.mle.finalize_score = false;
    params.mle.seed = rng.next_u64();
    return sort_chain_round(oracle, sampler, std::move(s), params, round);
}

WeakRoundOutcome gtnc_weak_round(Oracle& oracle, RejectionSampler& sampler,
                                 const GtncConfig& cfg, const GtncWorking& work,
                                 Rng& rng, int round) {
    WeakRoundOutcome out;
    bool aborted = false;
    std::vector<Point> s = draw_batch(sampler, cfg.n, &aborted);
    if (aborted) {
        out.aborted = true;
        return out;
    }
    ComparisonTable table(oracle, std::move(s), /*with_sentinel=*/true);
    auto subset = find_equitable_subset(table, static_cast<int>(work.subset_size),
                                        work.eps_t, cfg.equit_random_budget,
                                        Rng(rng.next_u64()));

    if (!subset) {
        // Low-noise branch: the sample certified cluster-free, so separated
        // positions in its order are trustworthy.
        std::vector<Point> pts;
        pts.reserve(table.point_count());
        for (int i = 0; i < table.point_count(); ++i) pts.push_back(table.point(i));
        SortChainParams params;
        params.block_size = cfg.block_size;
        params.chain_gap = cfg.chain_gap;
        params.chain_target = cfg.chain_target > 0 ? cfg.chain_target : 4 * work.k_eff;
        params.slot_count = work.m_s;
        params.slot_verify_gap = cfg.slot_verify_gap;
        params.chain_vote_threshold = cfg.chain_vote_threshold;
        params.mle.exact_threshold = cfg.sort_exact_threshold;
        params.mle.reinsert_window = cfg.reinsert_window;
        params.mle.max_sweeps = cfg.max_sweeps;
        params.mle.finalize_score = false;
        params.mle.seed = rng.next_u64();
        return sort_chain_round(oracle, sampler, std::move(pts), params, round);
    }

    out.branch = "cluster";
    std::vector<Point> kept;
    for (long i = 0; i < work.m_c; ++i) {
        auto x = sampler.next_uninferred();
        if (!x) {
            out.aborted = true;
            return out;
        }
        if (point_joins_cluster(table, *subset, *x, work.lambda_1))
            kept.push_back(std::move(*x));
    }
    if (static_cast<long>(kept.size()) < work.cluster_min) {
        out.branch = "skipped_small";
        return out;
    }
    std::vector<int> labels;
    labels.reserve(kept.size());
    for (const Point& p : kept) labels.push_back(oracle.query_label(p));
    auto maj = majority_label(labels);
    if (!maj) {
        out.branch = "skipped_tie";
        return out;
    }
    if (cfg.margin_gate) {
        double g = cfg.g_upper(2.0 * work.gamma);
        double delta_eff =
            std::max(cfg.delta_r, 4.0001 * std::exp(-static_cast<double>(kept.size()) *
                                                    g * g / 16.0));
        if (margin_test(labels, work.gamma, cfg.g_upper, delta_eff) ==
            MarginVerdict::too_close) {
            out.branch = "skipped_margin";
            return out;
        }
    }
    std::string tag = "round " + std::to_string(round) + " cluster";
    out.added.push_back(make_cluster(std::move(kept), work.gamma / cfg.dimension,
                                     work.gamma, *maj, tag));
    out.chain_found = true;
    return out;
}

namespace {

LearnerOutcome boost_loop(Oracle& oracle, std::function<Point()> draw, int dimension,
                          int iteration_cap, long consecutive_cap, long max_queries,
                          Rng& rng,
                          const std::function<WeakRoundOutcome(RejectionSampler&, Rng&, int)>& round_fn) {
    ConstraintSet cs(dimension);
    auto classifier = std::make_unique<PartialClassifier>(cs);
    RejectionSampler sampler(std::move(draw), consecutive_cap);
    sampler.set_classifier(classifier.get());

    LearnerReport report;
    for (int round = 1; round <= iteration_cap; ++round) {
        WeakRoundOutcome outcome = round_fn(sampler, rng, round);
        report.rounds = round;
        if (outcome.aborted) {
            report.stop_reason = "converged";
            break;
        }
        RoundLog log;
        log.round = round;
        log.branch = outcome.branch;
        log.constraints_added = static_cast<int>(outcome.added.size());
        report.round_log.push_back(log);
        if (!outcome.added.empty()) {
            for (auto& c : outcome.added) cs.add(std::move(c));
            classifier = std::make_unique<PartialClassifier>(cs);
            sampler.set_classifier(classifier.get());
        }
        if (max_queries > 0 &&
            oracle.label_queries() + oracle.comparison_queries() > max_queries) {
            report.stop_reason = "budget";
            report.truncated = true;
            break;
        }
    }
    report.points_drawn = sampler.drawn();
    report.inconsistent_seen = sampler.inconsistent_seen();
    return LearnerOutcome{std::move(classifier), std::move(report)};
}

}  // namespace

LearnerOutcome run_massart(Oracle& oracle, std::function<Point()> draw,
                           const MassartConfig& cfg, Rng learner_rng) {
    cfg.validate();
    return boost_loop(oracle, std::move(draw), cfg.dimension, cfg.iteration_cap,
                      cfg.working_consecutive_cap(), cfg.max_queries, learner_rng,
                      [&](RejectionSampler& sampler, Rng& rng, int round) {
                          return massart_weak_round(oracle, sampler, cfg, rng, round);
                      });
}

LearnerOutcome run_gtnc(Oracle& oracle, std::function<Point()> draw,
                        const GtncConfig& cfg, Rng learner_rng) {
    cfg.validate();
    GtncWorking work = resolve_gtnc(cfg);
    return boost_loop(oracle, std::move(draw), cfg.dimension, cfg.iteration_cap,
                      cfg.working_consecutive_cap(), cfg.max_queries, learner_rng,
                      [&](RejectionSampler& sampler, Rng& rng, int round) {
                          return gtnc_weak_round(oracle, sampler, cfg, work, rng, round);
                      });
}

}  // namespace arpu
