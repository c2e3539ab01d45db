#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "arpu/cluster.hpp"
#include "arpu/harness.hpp"

using namespace arpu;

namespace {

Hypothesis line_h() { return Hypothesis{{1.0}, 0.0}; }

std::vector<Point> at_values(const std::vector<double>& values, PointId base = 1) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < values.size(); ++i)
        pts.push_back(Point{base + i, {values[i]}});
    return pts;
}

GtncModel tnc(double m, double kappa = 2.0, double eps0 = 1.0) {
    return GtncModel{NoiseCurve::power(m, kappa, eps0),
                     NoiseCurve::power(m, kappa, eps0),
                     GtncModel::Adversary::lower_envelope};
}

std::vector<int> iota_subset(int n) {
    std::vector<int> s(n);
    std::iota(s.begin(), s.end(), 0);
    return s;
}

}  // namespace

TEST_CASE("two-element sets are never equitable at small epsilon") {
    Oracle oracle(NoiselessModel{}, line_h(), Rng(1));
    ComparisonTable table(oracle, at_values({1.0, 2.0}), false);
    EquitabilityReport rep = equitability(table, {0, 1}, 0.1);
    CHECK_FALSE(rep.equitable);
    CHECK(rep.v[0] == 0);
    CHECK(rep.v[1] == 1);
}

TEST_CASE("all-coin-flip comparisons measure equitable at eps 0.2") {
    // 100 equal-value points: every comparison is a fair coin. Binomial(99,
    // 1/2) concentrates inside the [30, 70] band, so the set should test
    // equitable in at least 95% of trials.
    int ok = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        Oracle oracle(tnc(0.4), line_h(), Rng(100 + t));
        std::vector<double> values(100, 0.5);
        ComparisonTable table(oracle, at_values(values), false);
        if (equitability(table, iota_subset(100), 0.2).equitable) ++ok;
    }
    CHECK(ok >= 190);
}

TEST_CASE("well-separated noiseless points are not equitable") {
    Oracle oracle(NoiselessModel{}, line_h(), Rng(2));
    std::vector<double> values;
    for (int i = 0; i < 100; ++i) values.push_back(1.0 + i);
    ComparisonTable table(oracle, at_values(values), false);
    EquitabilityReport rep = equitability(table, iota_subset(100), 0.2);
    CHECK_FALSE(rep.equitable);
    CHECK(*std::max_element(rep.v.begin(), rep.v.end()) == 99);
}

TEST_CASE("equitability is a deterministic function of the table") {
    Oracle oracle(tnc(0.4), line_h(), Rng(3));
    std::vector<double> values(40, 0.3);
    ComparisonTable table(oracle, at_values(values), false);
    EquitabilityReport a = equitability(table, iota_subset(40), 0.15);
    EquitabilityReport b = equitability(table, iota_subset(40), 0.15);
    CHECK(a.equitable == b.equitable);
    CHECK(a.v == b.v);
}

TEST_CASE("planted clusters are found, separated samples are not") {
    const double eps_t = 0.3;
    const int c = 8, m = 14;
    const int subset = 2 * c + m;  // 30
    int found_planted = 0, found_separated = 0;
    const int trials = 60;
    for (int t = 0; t < trials; ++t) {
        Rng rng(500 + t);
        // Planted: 30 points well inside width g_U^{-1}(eps_t/2) (any tighter
        // set is still such a cluster), 90 spread out.
        NoiseCurve g = NoiseCurve::power(0.4, 2.0, 1.0);
        double width = g.inverse(eps_t / 2.0) / 3.0;
        std::vector<double> values;
        for (int i = 0; i < subset; ++i)
            values.push_back(1.0 + width * rng.next_double());
        for (int i = 0; i < 90; ++i) {
            double v = -4.0 + 8.0 * rng.next_double();
            if (std::abs(v - 1.0) < 1.0) v += v > 1.0 ? 1.0 : -1.0;
            values.push_back(v);
        }
        Oracle oracle(tnc(0.4), line_h(), Rng(900 + t));
        ComparisonTable table(oracle, at_values(values), false);
        if (find_equitable_subset(table, subset, eps_t, 64, Rng(77 + t)))
            ++found_planted;

        // Separated: pairwise gaps all above g_L^{-1}(4 eps_t).
        double gap = g.inverse(std::min(4.0 * eps_t, g(1.0))) + 0.5;
        std::vector<double> spread;
        for (int i = 0; i < 60; ++i) spread.push_back(1.0 + gap * i);
        Oracle oracle2(tnc(0.4), line_h(), Rng(1300 + t));
        ComparisonTable table2(oracle2, at_values(spread), false);
        if (find_equitable_subset(table2, subset, eps_t, 64, Rng(177 + t)))
            ++found_separated;
    }
    CHECK(found_planted >= static_cast<int>(0.90 * trials));
    CHECK(found_separated <= static_cast<int>(0.05 * trials));
}

TEST_CASE("zero budget with no equitable window returns none") {
    Oracle oracle(NoiselessModel{}, line_h(), Rng(4));
    std::vector<double> values;
    for (int i = 0; i < 20; ++i) values.push_back(1.0 + 2.0 * i);
    ComparisonTable table(oracle, at_values(values), false);
    CHECK_FALSE(find_equitable_subset(table, 10, 0.1, 0, Rng(5)).has_value());
}

TEST_CASE("points join a cluster iff they sit near it in value") {
    const double lambda1 = 0.3;
    const int size = 60;
    int joined_inside = 0, joined_far = 0;
    const int trials = 120;
    for (int t = 0; t < trials; ++t) {
        Rng rng(2100 + t);
        std::vector<double> values;
        for (int i = 0; i < size; ++i) values.push_back(1.0 + 0.01 * rng.next_double());
        Oracle oracle(tnc(0.4), line_h(), Rng(2600 + t));
        ComparisonTable table(oracle, at_values(values), false);
        EquitabilityReport base = equitability(table, iota_subset(size), lambda1);
        Point inside{1000, {1.0 + 0.01 * rng.next_double()}};
        Point far_point{1001, {5.0}};
        if (point_joins_cluster(table, base, inside, lambda1)) ++joined_inside;
        if (point_joins_cluster(table, base, far_point, lambda1)) ++joined_far;
    }
    CHECK(joined_inside >= static_cast<int>(0.95 * trials));
    CHECK(joined_far <= static_cast<int>(0.05 * trials));
}

TEST_CASE("tiny reference sets leave the band vacuous but well-defined") {
    Oracle oracle(tnc(0.4), line_h(), Rng(6));
    ComparisonTable table(oracle, at_values({1.0, 1.001, 1.002}), false);
    EquitabilityReport base = equitability(table, {0, 1, 2}, 0.45);
    Point x{100, {1.0015}};
    // |S_eq| = 3 < 1/lambda1: the literal check still runs and returns a bool.
    bool joined = point_joins_cluster(table, base, x, 0.45);
    CHECK((joined == true || joined == false));
}

TEST_CASE("majority label basics and the tie path") {
    CHECK(majority_label({1, 1, 1}) == 1);
    CHECK(majority_label({-1, -1, 1}) == -1);
    CHECK_FALSE(majority_label({1, -1}).has_value());
    CHECK_THROWS_AS(majority_label({}), std::invalid_argument);
}

TEST_CASE("majority labeling wrong-rate obeys the chernoff size") {
    // Size 2 log(1/delta) / g_L(gamma)^2 at per-label correctness
    // 1/2 + g_L(gamma); wrong-majority rate must stay within delta = 0.05
    // plus Monte-Carlo slack over 1000 trials.
    const double gamma = 0.25;
    NoiseCurve g = NoiseCurve::power(0.4, 2.0, 1.0);
    const double adv = g(gamma);  // 0.1
    const long size =
        static_cast<long>(std::ceil(2.0 * std::log(1.0 / 0.05) / (adv * adv)));
    Hypothesis h = line_h();
    long wrong = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        Oracle oracle(tnc(0.4), h, Rng(3100 + t));
        std::vector<int> labels;
        for (long i = 0; i < size; ++i)
            labels.push_back(
                oracle.query_label(Point{static_cast<PointId>(i + 1), {gamma}}));
        auto maj = majority_label(labels);
        if (!maj || *maj != 1) ++wrong;
    }
    CHECK(rate_within(wrong, trials, 0.05));
}

TEST_CASE("margin test distinguishes straddling from far clusters") {
    const double gamma = 0.05;
    NoiseCurve g = NoiseCurve::power(0.4, 2.0, 1.0);
    const double delta = 0.05;
    const long size = static_cast<long>(std::ceil(margin_test_min_size(gamma, g, delta)));
    Hypothesis h = line_h();

    // Undersized input is a parameter error.
    CHECK_THROWS_AS(margin_test(std::vector<int>(8, 1), gamma, g, delta), config_error);

    // Noiseless one-sided cluster: |L_dif| = |C|, always far_enough.
    CHECK(margin_test(std::vector<int>(size, 1), gamma, g, delta) ==
          MarginVerdict::far_enough);

    int far_ok = 0, close_ok = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        // Far cluster: every point beyond g_L^{-1}(4 g_U(2 gamma)).
        double far_margin = g.inverse(std::min(4.0 * g(2.0 * gamma), g(1.0))) + 0.02;
        Oracle oracle(tnc(0.4), h, Rng(4100 + t));
        std::vector<int> labels;
        for (long i = 0; i < size; ++i)
            labels.push_back(
                oracle.query_label(Point{static_cast<PointId>(i + 1), {far_margin}}));
        if (margin_test(labels, gamma, g, delta) == MarginVerdict::far_enough) ++far_ok;

        // Straddling cluster: points on both sides within the margin band.
        Oracle oracle2(tnc(0.4), h, Rng(4600 + t));
        Rng side(5100 + t);
        std::vector<int> labels2;
        for (long i = 0; i < size; ++i) {
            double v = (side.next_bernoulli(0.5) ? 1.0 : -1.0) * 0.4 * gamma;
            labels2.push_back(
                oracle2.query_label(Point{static_cast<PointId>(i + 1), {v}}));
        }
        if (margin_test(labels2, gamma, g, delta) == MarginVerdict::too_close)
            ++close_ok;
    }
    CHECK(far_ok >= static_cast<int>((1.0 - delta) * trials) - 8);
    CHECK(close_ok >= static_cast<int>((1.0 - delta) * trials) - 8);
}

TEST_CASE("derived constants match the hand evaluation for the power family") {
    // m = M = 0.4, kappa = 2: g(x) = 0.4x and g^{-1}(y) = 2.5y, so the nested
    // display collapses to eps_T = gamma'/80, lambda_1 = 16 eps_T, and
    // g_eff = eps_T / 2.
    NoiseCurve g = NoiseCurve::power(0.4, 2.0, 1.0);
    GtncDerivedConstants d = derive_gtnc_constants(g, g, 0.1, 2, 5, 0.05);
    const double gamma_prime = 0.025;  // min(0.1 / 4, 0.5)
    CHECK(d.gamma_prime == doctest::Approx(gamma_prime));
    CHECK(d.eps_t == doctest::Approx(gamma_prime / 80.0));
    CHECK(d.lambda_1 == doctest::Approx(16.0 * d.eps_t));
    CHECK(d.g_eff == doctest::Approx(d.eps_t / 2.0));
    CHECK(d.c == doctest::Approx((48.0 * std::log(d.n) + std::log(1.0 / 0.05)) /
                                 (d.eps_t * d.eps_t)));
    CHECK(d.c2 == doctest::Approx(5.0 / d.g_eff));
    CHECK(d.block_gap == 8);

    // gamma >= 2 d eps0 / 2 takes the eps0/2 branch.
    GtncDerivedConstants wide = derive_gtnc_constants(g, g, 3.0, 1, 5, 0.05);
    CHECK(wide.gamma_prime == doctest::Approx(0.5));

    // The n fixed point converges quickly for every acceptance-scale config.
    for (double gamma : {0.05, 0.1, 0.5}) {
        for (int k : {2, 5, 8}) {
            GtncDerivedConstants c = derive_gtnc_constants(g, g, gamma, 2, k, 0.05);
            CHECK(c.fixed_point_iterations <= 50);
            CHECK(c.n > 0.0);
        }
    }

    // Domain violations of the nested inverses name the failing formula.
    NoiseCurve flat = NoiseCurve::power(0.0, 2.0, 1.0);
    CHECK_THROWS_AS(derive_gtnc_constants(flat, flat, 0.1, 2, 5, 0.05), config_error);
}

TEST_CASE("clusters measure equitable at the lemma rate") {
    // g_U^{-1}(eps/2)-clusters of size n0: non-equitable rate bounded by
    // 2 (n0+1) exp(-n0 (eps/2)^2 / (1 + 3 eps / 2)) plus slack.
    const double eps = 0.3;
    const int n0 = 600;
    NoiseCurve g = NoiseCurve::power(0.4, 2.0, 1.0);
    const double width = g.inverse(eps / 2.0);
    const double bound =
        2.0 * (n0 + 1) * std::exp(-n0 * 0.25 * eps * eps / (1.0 + 1.5 * eps));
    int bad = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        Rng rng(6100 + t);
        std::vector<double> values;
        for (int i = 0; i < n0; ++i) values.push_back(1.0 + width * rng.next_double());
        Oracle oracle(tnc(0.4), line_h(), Rng(6600 + t));
        ComparisonTable table(oracle, at_values(values), false);
        if (!equitability(table, iota_subset(n0), eps).equitable) ++bad;
    }
    CHECK(static_cast<double>(bad) / trials <= bound + 0.1);
}

TEST_CASE("equitable subsets have clustered middles") {
    // Among found equitable subsets, the middle m elements (true order) must
    // span at most 2 g_L^{-1}(4 eps_T) in at least 95% of trials.
    const double eps_t = 0.3;
    const int c = 8, m = 14;
    NoiseCurve g = NoiseCurve::power(0.4, 2.0, 1.0);
    const double width = g.inverse(eps_t / 2.0) / 3.0;
    const double span_bound = 2.0 * g.inverse(std::min(4.0 * eps_t, g(1.0)));
    int found = 0, clustered = 0;
    for (int t = 0; t < 80; ++t) {
        Rng rng(7100 + t);
        std::vector<double> values;
        for (int i = 0; i < 2 * c + m; ++i)
            values.push_back(1.0 + width * rng.next_double());
        for (int i = 0; i < 60; ++i) values.push_back(-75.0 + 1.2 * i);
        Oracle oracle(tnc(0.4), line_h(), Rng(7600 + t));
        ComparisonTable table(oracle, at_values(values), false);
        auto rep = find_equitable_subset(table, 2 * c + m, eps_t, 64, Rng(707 + t));
        if (!rep) continue;
        ++found;
        std::vector<double> vals;
        for (int idx : rep->subset) vals.push_back(table.point(idx).coords[0]);
        std::sort(vals.begin(), vals.end());
        double span = vals[c + m - 1] - vals[c];  // middle m of the true order
        if (span <= span_bound) ++clustered;
    }
    REQUIRE(found > 0);
    CHECK(clustered >= static_cast<int>(0.95 * found));
}
