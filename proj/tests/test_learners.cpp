#include <doctest.h>

#include <cmath>
#include <set>

#include "arpu/distributions.hpp"
#include "arpu/harness.hpp"
#include "arpu/learners.hpp"

using namespace arpu;

namespace {

// Small-geometry massart config for fast tests; chain of 4 over 64 blocks.
MassartConfig small_massart(double lambda) {
    MassartConfig mc;
    mc.dimension = 2;
    mc.k = 1;
    mc.lambda = lambda;
    mc.epsilon = 0.05;
    mc.delta_r = 0.05;
    mc.delta_u = 0.05;
    mc.n = 3072;
    mc.block_size = 48;
    mc.chain_gap = 8;
    mc.iteration_cap = 10;
    mc.slot_verify_gap = 4;
    mc.mult_n = 1e-9;  // desk scale; the lemma constant is surfaced as config
    mc.reinsert_window = 128;
    mc.max_sweeps = 40;
    return mc;
}

struct TrialSetup {
    PointFactory factory;
    Hypothesis h_star;
    DistributionSpec spec;
    Rng sampler_rng{0};

    explicit TrialSetup(std::uint64_t seed,
                        DistributionSpec::Family family =
                            DistributionSpec::Family::uniform_ball) {
        RunSeed rs{seed};
        Rng plant = rs.stream_for(stream::harness);
        spec.family = family;
        spec.dimension = 2;
        h_star = plant_hypothesis(spec, plant);
        sampler_rng = rs.stream_for(stream::sampler);
    }

    std::function<Point()> draw() {
        return [this]() { return sample_one(spec, &h_star, sampler_rng, factory); };
    }
};

}  // namespace

TEST_CASE("classifier vertex route matches the simplex route") {
    Rng rng(11);
    PointFactory factory;
    DistributionSpec spec;
    spec.family = DistributionSpec::Family::gaussian_isotropic;
    spec.dimension = 2;
    int disagreements = 0, checked = 0;
    for (int trial = 0; trial < 30; ++trial) {
        Hypothesis h = plant_hypothesis(spec, rng);
        ConstraintSet cs(2);
        int m = 2 + static_cast<int>(rng.next_below(10));
        for (int i = 0; i < m; ++i) {
            Point p = sample_one(spec, &h, rng, factory);
            double v = evaluate(h, p);
            if (v == 0.0) continue;
            int sign = v > 0 ? 1 : -1;
            if (rng.next_bernoulli(0.15)) sign = -sign;  // inject wrong answers
            cs.add(make_label(p, sign));
            if (i > 0 && rng.next_bernoulli(0.5)) {
                Point q = sample_one(spec, &h, rng, factory);
                cs.add(rng.next_bernoulli(0.5) ? make_comparison(p, q)
                                               : make_comparison(q, p));
            }
        }
        PartialClassifier classifier(cs);
        REQUIRE(classifier.fast_path_active());
        for (int probe = 0; probe < 40; ++probe) {
            Point x = sample_one(spec, &h, rng, factory);
            ++checked;
            if (classifier.verdict(x) != cs.infer_label(x)) ++disagreements;
        }
    }
    CHECK(checked >= 1000);
    CHECK(disagreements == 0);
}

TEST_CASE("noiseless weak round adds only truthful constraints") {
    for (int t = 0; t < 5; ++t) {
        TrialSetup setup(100 + t);
        Oracle oracle(NoiselessModel{}, setup.h_star, Rng(200 + t));
        MassartConfig cfg = small_massart(0.5);
        RejectionSampler sampler(setup.draw(), cfg.working_consecutive_cap());
        Rng round_rng(300 + t);
        WeakRoundOutcome out = massart_weak_round(oracle, sampler, cfg, round_rng, 1);
        REQUIRE(out.chain_found);
        CHECK(out.added.size() >= static_cast<std::size_t>(cfg.chain_target()));
        for (const Constraint& c : out.added)
            CHECK(constraint_holds(c, setup.h_star));
    }
}

TEST_CASE("massart weak rounds keep the added-constraint error rate low") {
    // 3 delta_r band on the per-round probability that any added constraint
    // contradicts the planted separator.
    int bad_rounds = 0, rounds = 0;
    for (int t = 0; t < 40; ++t) {
        TrialSetup setup(1100 + t);
        Oracle oracle(MassartModel{0.2, MassartModel::Adversary::worst_case_flip},
                      setup.h_star, Rng(1200 + t));
        MassartConfig cfg = small_massart(0.2);
        RejectionSampler sampler(setup.draw(), cfg.working_consecutive_cap());
        Rng round_rng(1300 + t);
        WeakRoundOutcome out = massart_weak_round(oracle, sampler, cfg, round_rng, 1);
        if (!out.chain_found) continue;
        ++rounds;
        for (const Constraint& c : out.added)
            if (!constraint_holds(c, setup.h_star)) {
                ++bad_rounds;
                break;
            }
    }
    REQUIRE(rounds >= 15);
    CHECK(rate_within(bad_rounds, rounds, 3.0 * 0.05));
}

TEST_CASE("weak round coverage beats the configured weak constant") {
    // Expected coverage of a successful round must clear c1 = 1/120 in at
    // least a c1 fraction of trials; empirically it does far better.
    const double c1 = 1.0 / 120.0;
    int covered_enough = 0, rounds = 0;
    for (int t = 0; t < 12; ++t) {
        TrialSetup setup(2100 + t);
        Oracle oracle(MassartModel{0.2, MassartModel::Adversary::worst_case_flip},
                      setup.h_star, Rng(2200 + t));
        MassartConfig cfg = small_massart(0.2);
        RejectionSampler sampler(setup.draw(), cfg.working_consecutive_cap());
        Rng round_rng(2300 + t);
        WeakRoundOutcome out = massart_weak_round(oracle, sampler, cfg, round_rng, 1);
        if (!out.chain_found) continue;
        ++rounds;
        ConstraintSet cs(2);
        for (const Constraint& c : out.added) cs.add(c);
        PartialClassifier classifier(cs);
        EvalResult eval = evaluate_classifier(classifier, setup.h_star, setup.spec,
                                              2000, Rng(2400 + t), setup.factory);
        if (eval.coverage >= c1) ++covered_enough;
    }
    REQUIRE(rounds >= 6);
    CHECK(static_cast<double>(covered_enough) / rounds >= c1);
}

TEST_CASE("noiseless full run reaches high coverage with zero mislabels") {
    for (int t = 0; t < 3; ++t) {
        TrialSetup setup(3100 + t);
        Oracle oracle(NoiselessModel{}, setup.h_star, Rng(3200 + t));
        MassartConfig cfg = small_massart(0.5);
        cfg.iteration_cap = 12;
        LearnerOutcome out = run_massart(oracle, setup.draw(), cfg, Rng(3300 + t));
        EvalResult eval = evaluate_classifier(*out.classifier, setup.h_star, setup.spec,
                                              5000, Rng(3400 + t), setup.factory);
        CHECK(eval.mislabels == 0);
        CHECK(eval.coverage >= 0.95);
        CHECK(out.report.stop_reason == "converged");
    }
}

TEST_CASE("coverage is nondecreasing over clean rounds") {
    TrialSetup setup(4100);
    Oracle oracle(NoiselessModel{}, setup.h_star, Rng(4200));
    MassartConfig cfg = small_massart(0.5);
    RejectionSampler sampler(setup.draw(), 1L << 40);
    Rng round_rng(4300);
    ConstraintSet cs(2);
    PartialClassifier classifier(cs);
    sampler.set_classifier(&classifier);
    // A frozen probe set measures coverage between rounds.
    std::vector<Point> probes;
    for (int i = 0; i < 1500; ++i)
        probes.push_back(sample_one(setup.spec, &setup.h_star, round_rng, setup.factory));
    double prev = -1.0;
    for (int round = 1; round <= 5; ++round) {
        WeakRoundOutcome out = massart_weak_round(oracle, sampler, cfg, round_rng, round);
        if (out.aborted) break;
        for (auto& c : out.added) cs.add(std::move(c));
        classifier = PartialClassifier(cs);
        sampler.set_classifier(&classifier);
        long covered = 0;
        for (const Point& p : probes)
            if (classifier.classify(p) != 0) ++covered;
        double cov = static_cast<double>(covered) / probes.size();
        CHECK(cov >= prev - 1e-12);
        prev = cov;
    }
}

TEST_CASE("stop rule fires only when residual abstention is small") {
    // When the consecutive-inferred stop fires at cap C = 2 log(N/delta)/eps,
    // the measured abstention mass must stay within eps for most trials.
    const double eps = 0.2;
    int fired = 0, sound = 0;
    for (int t = 0; t < 10; ++t) {
        TrialSetup setup(5100 + t);
        Oracle oracle(NoiselessModel{}, setup.h_star, Rng(5200 + t));
        MassartConfig cfg = small_massart(0.5);
        cfg.epsilon = eps;
        cfg.iteration_cap = 12;
        LearnerOutcome out = run_massart(oracle, setup.draw(), cfg, Rng(5300 + t));
        if (out.report.stop_reason != "converged") continue;
        ++fired;
        EvalResult eval = evaluate_classifier(*out.classifier, setup.h_star, setup.spec,
                                              4000, Rng(5400 + t), setup.factory);
        if (1.0 - eval.coverage <= eps) ++sound;
    }
    REQUIRE(fired >= 5);
    CHECK(sound == fired);
}

TEST_CASE("finite-sample training transfers to whole-distribution coverage") {
    // Train on draws from a fixed pool; fresh-point coverage must be at
    // least the pool coverage minus the queried fraction and slack.
    TrialSetup setup(6100);
    const int pool_size = 120000;
    std::vector<Point> pool;
    pool.reserve(pool_size);
    for (int i = 0; i < pool_size; ++i)
        pool.push_back(sample_one(setup.spec, &setup.h_star, setup.sampler_rng,
                                  setup.factory));
    Oracle oracle(NoiselessModel{}, setup.h_star, Rng(6200));
    Rng pick(6300);
    std::vector<int> deck(pool_size);
    for (int i = 0; i < pool_size; ++i) deck[i] = i;
    for (int i = pool_size - 1; i > 0; --i)
        std::swap(deck[i], deck[pick.next_below(static_cast<std::uint64_t>(i) + 1)]);
    std::size_t next = 0;
    std::set<PointId> drawn_ids;
    auto draw = [&]() {
        // Uniform order without replacement: the finite-sample regime.
        const Point& p = pool[deck[next++ % deck.size()]];
        drawn_ids.insert(p.id);
        return p;
    };
    MassartConfig cfg = small_massart(0.5);
    cfg.iteration_cap = 8;
    LearnerOutcome out = run_massart(oracle, draw, cfg, Rng(6400));

    long learned = 0;
    for (const Point& p : pool)
        if (out.classifier->classify(p) != 0) ++learned;
    double eps1 = 1.0 - static_cast<double>(learned) / pool_size;
    double eps2 = static_cast<double>(drawn_ids.size()) / pool_size;

    EvalResult fresh = evaluate_classifier(*out.classifier, setup.h_star, setup.spec,
                                           20000, Rng(6500), setup.factory);
    CHECK(fresh.coverage >= 1.0 - eps1 - eps2 - 0.05);
    CHECK(fresh.mislabels == 0);
}

namespace {

GtncConfig small_gtnc() {
    GtncConfig gc;
    gc.dimension = 2;
    gc.k = 1;
    gc.g_lower = NoiseCurve::power(0.4, 2.0, 1.0);
    gc.g_upper = gc.g_lower;
    gc.gamma = 0.1;
    gc.epsilon = 0.05;
    gc.delta_r = 0.05;
    gc.delta_u = 0.05;
    gc.n = 240;
    gc.c_work = 15;
    gc.m_work = 30;
    gc.m_c = 320;
    gc.m_s = 48;
    gc.cluster_min = 56;
    gc.eps_t_override = 0.2;
    gc.lambda1_override = 0.22;  // the join band must dominate the eps_t band
    gc.block_size = 0;  // set by caller for the sort branch
    gc.iteration_cap = 6;
    gc.equit_random_budget = 48;
    gc.reinsert_window = 128;
    gc.max_sweeps = 40;
    return gc;
}

// Background mass on a coarse separated value grid: no large value cluster
// can form, so only deliberately planted clusters measure equitable.
double separated_background(Rng& rng) {
    double v = -40.0 + 1.6 * static_cast<double>(rng.next_below(50)) +
               0.001 * rng.next_double();
    return v == 0.0 ? 1e-6 : v;
}

}  // namespace

TEST_CASE("gtnc round takes the cluster branch on a planted cluster") {
    int cluster_rounds = 0, truthful = 0;
    for (int t = 0; t < 12; ++t) {
        PointFactory factory;
        Hypothesis h{{1.0, 0.0}, 0.0};
        // Mixture: a tight value-cluster far from the boundary plus
        // separated background mass.
        Rng mix(7100 + 31 * t);
        auto draw = [&]() {
            if (mix.next_bernoulli(0.35)) {
                double v = 0.8 + 0.01 * mix.next_double();
                return factory.make({v, 2.0 * mix.next_double() - 1.0});
            }
            return factory.make({separated_background(mix),
                                 2.0 * mix.next_double() - 1.0});
        };
        Oracle oracle(GtncModel{NoiseCurve::power(0.4, 2.0, 1.0),
                                NoiseCurve::power(0.4, 2.0, 1.0),
                                GtncModel::Adversary::lower_envelope},
                      h, Rng(7200 + t));
        GtncConfig cfg = small_gtnc();
        cfg.block_size = 12;
        GtncWorking work = resolve_gtnc(cfg);
        RejectionSampler sampler(draw, cfg.working_consecutive_cap());
        Rng round_rng(7300 + t);
        WeakRoundOutcome out = gtnc_weak_round(oracle, sampler, cfg, work, round_rng, 1);
        if (out.branch != "cluster" || out.added.empty()) continue;
        ++cluster_rounds;
        bool ok = true;
        for (const Constraint& c : out.added) {
            const auto* cl = std::get_if<ClusterConstraint>(&c.body);
            if (!cl) continue;
            for (const Point& p : cl->points)
                if (cl->label * evaluate(h, p) <= 0.0) ok = false;
        }
        if (ok) ++truthful;
    }
    REQUIRE(cluster_rounds >= 6);
    CHECK(truthful >= cluster_rounds - 1);
}

TEST_CASE("gtnc round takes the sort branch on separated samples") {
    int sort_or_none = 0;
    const int trials = 10;
    for (int t = 0; t < trials; ++t) {
        PointFactory factory;
        Hypothesis h{{1.0, 0.0}, 0.0};
        Rng mix(8100 + t);
        auto draw = [&]() {
            return factory.make({separated_background(mix),
                                 2.0 * mix.next_double() - 1.0});
        };
        Oracle oracle(GtncModel{NoiseCurve::power(0.4, 2.0, 1.0),
                                NoiseCurve::power(0.4, 2.0, 1.0),
                                GtncModel::Adversary::lower_envelope},
                      h, Rng(8200 + t));
        GtncConfig cfg = small_gtnc();
        cfg.n = 576;
        cfg.m_s = 48;
        cfg.block_size = 12;
        GtncWorking work = resolve_gtnc(cfg);
        RejectionSampler sampler(draw, cfg.working_consecutive_cap());
        Rng round_rng(8300 + t);
        WeakRoundOutcome out = gtnc_weak_round(oracle, sampler, cfg, work, round_rng, 1);
        if (out.branch == "sort" || out.branch == "no_chain") ++sort_or_none;
    }
    CHECK(sort_or_none >= trials - 1);
}

TEST_CASE("margin gate skips straddling clusters without constraints") {
    int gated = 0;
    for (int t = 0; t < 10; ++t) {
        PointFactory factory;
        Hypothesis h{{1.0, 0.0}, 0.0};
        // Tight cluster straddling the boundary plus separated background.
        Rng mix(9100 + t);
        auto draw = [&]() {
            if (mix.next_bernoulli(0.4)) {
                double v = -0.02 + 0.04 * mix.next_double();
                if (v == 0.0) v = 1e-6;
                return factory.make({v, 2.0 * mix.next_double() - 1.0});
            }
            return factory.make({separated_background(mix),
                                 2.0 * mix.next_double() - 1.0});
        };
        Oracle oracle(GtncModel{NoiseCurve::power(0.4, 2.0, 1.0),
                                NoiseCurve::power(0.4, 2.0, 1.0),
                                GtncModel::Adversary::lower_envelope},
                      h, Rng(9200 + t));
        GtncConfig cfg = small_gtnc();
        cfg.margin_gate = true;
        cfg.gamma = 0.1;
        cfg.block_size = 12;
        GtncWorking work = resolve_gtnc(cfg);
        RejectionSampler sampler(draw, cfg.working_consecutive_cap());
        Rng round_rng(9300 + t);
        WeakRoundOutcome out = gtnc_weak_round(oracle, sampler, cfg, work, round_rng, 1);
        if (out.branch == "skipped_margin") {
            CHECK(out.added.empty());
            ++gated;
        }
    }
    CHECK(gated >= 5);
}

TEST_CASE("config validation rejects bad parameter combinations") {
    MassartConfig mc = small_massart(0.2);
    mc.lambda = 0.7;
    CHECK_THROWS_AS(mc.validate(), config_error);
    mc = small_massart(0.2);
    mc.mult_n = 1.0;  // the lemma display dwarfs any desk-scale n
    CHECK_THROWS_AS(mc.validate(), config_error);

    GtncConfig gc = small_gtnc();
    gc.c_work = 200;  // subset larger than the sample
    CHECK_THROWS_AS(gc.validate(), config_error);
    gc = small_gtnc();
    gc.aid_mode = true;
    gc.acc_c2 = 0.0;
    CHECK_THROWS_AS(gc.validate(), config_error);
}

TEST_CASE("tnc with kappa near one reduces to massart-like behavior") {
    // A constant-advantage power family: comparisons and labels are strong
    // everywhere, so the tsybakov learner should behave like the bounded
    // noise one: high coverage, no mislabels.
    for (int t = 0; t < 3; ++t) {
        TrialSetup setup(10100 + t);
        NoiseCurve g = NoiseCurve::power(0.45, 1.0, 1.0);
        Oracle oracle(GtncModel{g, g, GtncModel::Adversary::lower_envelope},
                      setup.h_star, Rng(10200 + t));
        GtncConfig cfg = small_gtnc();
        cfg.g_lower = g;
        cfg.g_upper = g;
        // Constant advantage supports the fine-grained massart geometry.
        cfg.n = 1920;
        cfg.m_s = 80;
        cfg.chain_target = 4;
        cfg.block_size = 24;
        cfg.chain_gap = 8;
        cfg.iteration_cap = 14;
        cfg.epsilon = 0.1;
        LearnerOutcome out = run_gtnc(oracle, setup.draw(), cfg, Rng(10300 + t));
        EvalResult eval = evaluate_classifier(*out.classifier, setup.h_star,
                                              setup.spec, 4000, Rng(10400 + t),
                                              setup.factory);
        CHECK(eval.mislabels == 0);
        CHECK(eval.coverage >= 0.9);
    }
}

TEST_CASE("aid mode synthesizes its margin from anti-concentration") {
    GtncConfig gc = small_gtnc();
    gc.aid_mode = true;
    gc.acc_c2 = 1.2732;  // uniform ball in the plane
    gc.epsilon = 0.05;
    GtncWorking work = resolve_gtnc(gc);
    // gamma = g_U^{-1}(g_L(eps')/4)/2 with eps' = min(eps/(4 c2), eps0/2).
    double eps_prime = std::min(0.05 / (4.0 * 1.2732), 0.5);
    double expect = 2.5 * (0.4 * eps_prime / 4.0) / 2.0;
    CHECK(work.gamma == doctest::Approx(expect));
    CHECK(work.k_eff >= 1);
}
