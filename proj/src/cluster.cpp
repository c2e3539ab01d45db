#include "arpu/cluster.hpp"

#include <algorithm>
#include <cmath>

#include "arpu/errors.hpp"

namespace arpu {

EquitabilityReport equitability(ComparisonTable& table, const std::vector<int>& subset,
                                double epsilon) {
    EquitabilityReport rep;
    rep.subset = subset;
    rep.epsilon = epsilon;
    const int s = static_cast<int>(subset.size());
    rep.v.assign(s, 0);
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b)
            if (a != b && table.measures_less(subset[b], subset[a])) ++rep.v[a];
    double lo = (0.5 - epsilon) * s;
    double hi = (0.5 + epsilon) * s;
    rep.equitable = true;
    for (int a = 0; a < s; ++a)
        if (rep.v[a] < lo || rep.v[a] > hi) {
            rep.equitable = false;
            break;
        }
    return rep;
}

std::optional<EquitabilityReport> find_equitable_subset(ComparisonTable& table,
                                                        int subset_size, double epsilon,
                                                        int random_budget, Rng rng) {
    const int n = table.point_count();
    if (subset_size < 2 || subset_size > n) return std::nullopt;

    // Pre-order the points with a cheap local-search pass so that any value
    // cluster occupies a contiguous run of window positions.
    std::vector<Point> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) pts.push_back(table.point(i));
    ComparisonTable view(table.oracle(), std::move(pts), false);
    MleParams params;
    params.seed = rng.next_u64();
    params.exact_threshold = 0;  // windows care about locality, not optimality
    params.finalize_score = false;
    params.restarts = 1;
    NoisyOrder pre = mle_order(view, params);

    for (int start = 0; start + subset_size <= n; ++start) {
        std::vector<int> subset(pre.ranking.begin() + start,
                                pre.ranking.begin() + start + subset_size);
        EquitabilityReport rep = equitability(table, subset, epsilon);
        if (rep.equitable) return rep;
    }
    // Trimmed windows: a few stray elements interleaved into a cluster's run
    // of the pre-order would spoil every exact window, so drop the most
    // lopsided elements of a slightly wider window and retest.
    const int trim = 4;
    for (int start = 0; start + subset_size + trim <= n; ++start) {
        std::vector<int> window(pre.ranking.begin() + start,
                                pre.ranking.begin() + start + subset_size + trim);
        EquitabilityReport wide = equitability(table, window, epsilon);
        std::vector<int> order(window.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        double half = 0.5 * static_cast<double>(window.size() - 1);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(wide.v[a] - half) < std::abs(wide.v[b] - half);
        });
        std::vector<int> subset;
        for (int i = 0; i < subset_size; ++i) subset.push_back(window[order[i]]);
        std::sort(subset.begin(), subset.end());
        EquitabilityReport rep = equitability(table, subset, epsilon);
        if (rep.equitable) return rep;
    }
    for (int t = 0; t < random_budget; ++t) {
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        std::vector<int> subset;
        for (int j = 0; j < subset_size; ++j) {
            std::size_t pick = rng.next_below(pool.size() - j);
            std::swap(pool[pick], pool[pool.size() - 1 - j]);
            subset.push_back(pool[pool.size() - 1 - j]);
        }
        EquitabilityReport rep = equitability(table, subset, epsilon);
        if (rep.equitable) return rep;
    }
    return std::nullopt;
}

bool point_joins_cluster(ComparisonTable& table, const EquitabilityReport& base,
                         const Point& x, double lambda1) {
    const int s = static_cast<int>(base.subset.size());
    const int grown = s + 1;
    double lo = (0.5 - lambda1) * grown;
    double hi = (0.5 + lambda1) * grown;
    int vx = 0;
    for (int a = 0; a < s; ++a) {
        bool member_less_than_x = !table.external_less(x, base.subset[a]);
        if (member_less_than_x) ++vx;
        // The member's own count gains one when x measures below it.
        int vm = base.v[a] + (member_less_than_x ? 0 : 1);
        if (vm < lo || vm > hi) return false;
    }
    return vx >= lo && vx <= hi;
}

std::optional<int> majority_label(const std::vector<int>& labels) {
    if (labels.empty())
        throw std::invalid_argument("majority_label: empty label list");
    long pos = 0, neg = 0;
    for (int l : labels) (l > 0 ? pos : neg)++;
    if (pos == neg) return std::nullopt;
    return pos > neg ? 1 : -1;
}

double margin_test_min_size(double gamma, const NoiseCurve& g_upper, double delta) {
    double g = g_upper(2.0 * gamma);
    if (g <= 0.0) throw config_error("margin_test: g_U(2 gamma) must be positive");
    return 16.0 * std::log(4.0 / delta) / (g * g);
}

MarginVerdict margin_test(const std::vector<int>& cluster_labels, double gamma,
                          const NoiseCurve& g_upper, double delta) {
    const double need = margin_test_min_size(gamma, g_upper, delta);
    const double size = static_cast<double>(cluster_labels.size());
    if (size < need)
        throw config_error("margin_test: cluster size " + std::to_string(cluster_labels.size()) +
                           " below required " + std::to_string(need) + " for delta " +
                           std::to_string(delta));
    long pos = 0, neg = 0;
    for (int l : cluster_labels) (l > 0 ? pos : neg)++;
    // The label-imbalance event of the underlying tail bounds: the majority
    // side must reach a (1/2 + 2 g_U(2 gamma)) share. Far clusters have a
    // per-label advantage of at least 4 g_U(2 gamma), straddling ones at most
    // g_U(2 gamma), so the threshold separates them.
    double majority = static_cast<double>(std::max(pos, neg));
    double threshold = (0.5 + 2.0 * g_upper(2.0 * gamma)) * size;
    return majority >= threshold ? MarginVerdict::far_enough : MarginVerdict::too_close;
}

GtncDerivedConstants derive_gtnc_constants(const NoiseCurve& g_lower,
                                           const NoiseCurve& g_upper, double gamma,
                                           int d, int k, double delta_r,
                                           const GtncMultipliers& mult) {
    if (gamma <= 0.0 || d < 1 || k < 1 || delta_r <= 0.0 || delta_r >= 1.0)
        throw config_error("derive_gtnc_constants: invalid parameters");
    GtncDerivedConstants out;
    out.gamma_prime = std::min(gamma / (2.0 * d), g_lower.eps0() / 2.0);
    out.eps_t =
        g_lower(g_upper.inverse(g_lower(out.gamma_prime) / 4.0, "eps_T: g_U^-1(g_L(gamma')/4)") /
                2.0) /
        4.0;
    if (out.eps_t <= 0.0)
        throw config_error("derive_gtnc_constants: eps_T evaluated to zero; "
                           "g_L vanishes on the required range");
    out.lambda_1 =
        2.0 * g_upper(2.0 * g_lower.inverse(4.0 * out.eps_t, "lambda_1: g_L^-1(4 eps_T)"));
    out.g_eff = g_lower(g_upper.inverse(out.eps_t / 2.0, "g_eff: g_U^-1(eps_T/2)"));
    if (out.g_eff <= 0.0)
        throw config_error("derive_gtnc_constants: working advantage g_eff is zero");

    // n appears on both sides through log n; iterate to integer convergence.
    double g6 = std::pow(out.g_eff, 6.0);
    double n = 16.0;
    int it = 0;
    for (; it < 50; ++it) {
        double next = mult.n * (std::pow(static_cast<double>(k), 4.0) *
                                    std::log(std::max(n, 2.0) * k / (out.g_eff * delta_r)) / g6 +
                                std::pow(std::log(std::max(d, 2)), 4.0 / 3.0));
        if (std::abs(next - n) < 1.0) {
            n = next;
            break;
        }
        n = next;
    }
    out.fixed_point_iterations = it + 1;
    out.n = n;
    out.c = mult.c * (48.0 * std::log(std::max(n, 2.0)) + std::log(1.0 / delta_r)) /
            (out.eps_t * out.eps_t);
    out.c1 = std::sqrt(std::log(std::max(n, 2.0) / delta_r)) / out.g_eff;
    out.c2 = 5.0 / out.g_eff;
    out.m = mult.m * std::sqrt(out.c1) * std::pow(n, 0.75);
    out.m2 = mult.m2 * out.m;
    out.block_size = mult.block * out.c2 * out.m2;
    out.block_gap = 8;
    return out;
}

}  // namespace arpu
