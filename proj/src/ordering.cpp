#include "arpu/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace arpu {

ComparisonTable::ComparisonTable(Oracle& oracle, std::vector<Point> points,
                                 bool with_sentinel)
    : oracle_(&oracle),
      points_(std::move(points)),
      sentinel_(with_sentinel),
      n_(static_cast<int>(points_.size()) + (with_sentinel ? 1 : 0)) {
    cache_.assign(static_cast<std::size_t>(n_) * n_, 0);
}

bool ComparisonTable::measures_less(int i, int j) {
    std::int8_t& slot = cache_[static_cast<std::size_t>(i) * n_ + j];
    if (slot != 0) return slot == 1;
    bool less;
    if (is_sentinel(i))
        less = oracle_->query_label(points_[j]) == 1;  // 0 < x iff x positive
    else if (is_sentinel(j))
        less = oracle_->query_label(points_[i]) == -1;
    else
        less = oracle_->measures_less(points_[i], points_[j]);
    slot = less ? 1 : 2;
    cache_[static_cast<std::size_t>(j) * n_ + i] = less ? 2 : 1;
    return less;
}

void ComparisonTable::materialize() {
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) measures_less(i, j);
}

bool ComparisonTable::external_less(const Point& x, int i) {
    if (is_sentinel(i)) return oracle_->query_label(x) == -1;
    return oracle_->measures_less(x, points_[i]);
}

long disagreement_score(ComparisonTable& table, const std::vector<int>& ranking) {
    long score = 0;
    const int n = static_cast<int>(ranking.size());
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q)
            if (table.measures_less(ranking[q], ranking[p])) ++score;
    return score;
}

namespace {

std::vector<int> seeded_scan_order(int n, std::uint64_t seed) {
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(Rng::mix(seed + 0x5eedULL));
    for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.next_below(static_cast<std::uint64_t>(i) + 1)]);
    return order;
}

// Optimal ordering of <= ~20 elements by subset DP over the given table
// restricted to `elems`. Returns ranking in element ids of the table.
std::vector<int> subset_dp_order(ComparisonTable& table, const std::vector<int>& elems,
                                 const std::vector<int>& scan, long* out_score) {
    const int n = static_cast<int>(elems.size());
    std::vector<std::uint32_t> lessmask(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && table.measures_less(elems[i], elems[j]))
                lessmask[i] |= 1u << j;

    const std::uint32_t full = n == 32 ? 0xffffffffu : (1u << n) - 1;
    std::vector<int> dp(full + 1, 0);
    std::vector<std::int8_t> parent(full + 1, -1);
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        int best = 1 << 30;
        int arg = -1;
        for (int si = 0; si < n; ++si) {
            int e = scan[si];
            if (!(mask & (1u << e))) continue;
            std::uint32_t rest = mask & ~(1u << e);
            // e ranked last within mask: disagreements against every f in
            // rest that e measures less than.
            int cost = dp[rest] + __builtin_popcount(rest & lessmask[e]);
            if (cost < best) {
                best = cost;
                arg = e;
            }
        }
        dp[mask] = best;
        parent[mask] = static_cast<std::int8_t>(arg);
    }
    if (out_score) *out_score = dp[full];
    std::vector<int> ranking(n);
    std::uint32_t mask = full;
    for (int r = n - 1; r >= 0; --r) {
        int e = parent[mask];
        ranking[r] = elems[e];
        mask &= ~(1u << e);
    }
    return ranking;
}

// Merge-insertion seed: pairwise bouts, recursively order the winners, then
// binary-insert losers and the odd leftover.
std::vector<int> merge_insertion(ComparisonTable& table, const std::vector<int>& elems) {
    const int n = static_cast<int>(elems.size());
    if (n <= 1) return elems;
    if (n == 2) {
        if (table.measures_less(elems[1], elems[0]))
            return {elems[1], elems[0]};
        return elems;
    }
    std::vector<int> winners, losers;
    for (int i = 0; i + 1 < n; i += 2) {
        int a = elems[i], b = elems[i + 1];
        if (table.measures_less(a, b)) {
            winners.push_back(b);
            losers.push_back(a);
        } else {
            winners.push_back(a);
            losers.push_back(b);
        }
    }
    std::vector<int> order = merge_insertion(table, winners);
    auto binary_insert = [&](int x) {
        int lo = 0, hi = static_cast<int>(order.size());
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (table.measures_less(x, order[mid]))
                hi = mid;
            else
                lo = mid + 1;
        }
        order.insert(order.begin() + lo, x);
    };
    for (int x : losers) binary_insert(x);
    if (n % 2 != 0) binary_insert(elems[n - 1]);
    return order;
}

struct LocalSearch {
    ComparisonTable& table;
    std::vector<int> ranking;
    std::vector<int> pos;
    long score;  // absolute when seeded so, otherwise a delta from the seed
    const MleParams& params;

    LocalSearch(ComparisonTable& t, std::vector<int> seed_ranking, const MleParams& p,
                bool absolute_score)
        : table(t), ranking(std::move(seed_ranking)), params(p) {
        pos.resize(ranking.size());
        for (int r = 0; r < static_cast<int>(ranking.size()); ++r) pos[ranking[r]] = r;
        score = absolute_score ? disagreement_score(table, ranking) : 0;
        dirty.assign(ranking.size(), 1);
    }

    std::vector<std::uint8_t> dirty;

    void mark_dirty(int lo_rank, int hi_rank) {
        const int n = static_cast<int>(ranking.size());
        for (int r = std::max(0, lo_rank); r <= std::min(n - 1, hi_rank); ++r)
            dirty[ranking[r]] = 1;
    }

    bool adjacent_sweep() {
        bool improved = false;
        const int n = static_cast<int>(ranking.size());
        for (int p = 0; p + 1 < n; ++p) {
            int a = ranking[p], b = ranking[p + 1];
            if (table.measures_less(b, a)) {
                std::swap(ranking[p], ranking[p + 1]);
                pos[a] = p + 1;
                pos[b] = p;
                --score;
                improved = true;
                mark_dirty(p - 1, p + 2);
            }
        }
        return improved;
    }

    void move_element(int p, int q, long delta) {
        int e = ranking[p];
        if (q < p)
            std::rotate(ranking.begin() + q, ranking.begin() + p, ranking.begin() + p + 1);
        else
            std::rotate(ranking.begin() + p, ranking.begin() + p + 1, ranking.begin() + q + 1);
        for (int r = std::min(p, q); r <= std::max(p, q); ++r) pos[ranking[r]] = r;
        (void)e;
        score += delta;
    }

    // Scans only elements whose neighborhood changed since their last scan;
    // a moved element stays dirty so long walks can continue across sweeps.
    bool reinsert_sweep(const std::vector<int>& scan) {
        bool improved = false;
        const int n = static_cast<int>(ranking.size());
        const int w = params.reinsert_window > 0 ? params.reinsert_window : n;
        for (int e : scan) {
            if (!dirty[e]) continue;
            int p = pos[e];
            long best_delta = 0;
            int best_q = p;
            long run = 0;
            for (int q = p - 1; q >= std::max(0, p - w); --q) {
                int f = ranking[q];
                run += table.measures_less(e, f) ? -1 : 1;
                if (run < best_delta) {
                    best_delta = run;
                    best_q = q;
                }
            }
            run = 0;
            for (int q = p + 1; q <= std::min(n - 1, p + w); ++q) {
                int f = ranking[q];
                run += table.measures_less(f, e) ? -1 : 1;
                if (run < best_delta) {
                    best_delta = run;
                    best_q = q;
                }
            }
            if (best_delta < 0) {
                move_element(p, best_q, best_delta);
                mark_dirty(std::min(p, best_q) - 2, std::max(p, best_q) + 2);
                improved = true;
            } else {
                dirty[e] = 0;
            }
        }
        return improved;
    }

    bool polish_windows(const std::vector<int>& scan_w) {
        const int n = static_cast<int>(ranking.size());
        const int w = std::min(params.polish_window, n);
        if (w < 3) return false;
        bool improved = false;
        for (int start = 0; start + w <= n; ++start) {
            std::vector<int> window(ranking.begin() + start, ranking.begin() + start + w);
            long before = 0;
            for (int i = 0; i < w; ++i)
                for (int j = i + 1; j < w; ++j)
                    if (table.measures_less(window[j], window[i])) ++before;
            long after = 0;
            std::vector<int> best = subset_dp_order(table, window, scan_w, &after);
            if (after < before) {
                for (int i = 0; i < w; ++i) {
                    ranking[start + i] = best[i];
                    pos[best[i]] = start + i;
                }
                score -= before - after;
                improved = true;
                mark_dirty(start - 2, start + w + 1);
            }
        }
        return improved;
    }
};

}  // namespace

NoisyOrder mle_order(ComparisonTable& table, const MleParams& params) {
    const int n = table.size();
    if (n < 2) throw std::invalid_argument("mle_order: need at least 2 elements");
    NoisyOrder out;

    if (n <= params.exact_threshold && n <= 22) {
        std::vector<int> elems(n);
        for (int i = 0; i < n; ++i) elems[i] = i;
        table.materialize();
        out.ranking = subset_dp_order(table, elems, seeded_scan_order(n, params.seed),
                                      &out.score);
        out.method = OrderMethod::exact_dp;
        return out;
    }

    int restarts = params.restarts > 0 ? params.restarts : (n <= 128 ? 4 : 1);
    // Comparable scores across restarts need the absolute count; at small n
    // that is cheap. A single attempt tracks deltas only.
    bool absolute = restarts > 1 || (params.finalize_score && n <= 512);
    out.score = 1L << 60;
    for (int attempt = 0; attempt < restarts; ++attempt) {
        std::uint64_t attempt_seed = params.seed + 7919ULL * attempt;
        std::vector<int> start = seeded_scan_order(n, attempt_seed);

        LocalSearch ls(table, merge_insertion(table, start), params, absolute);
        std::vector<int> scan = seeded_scan_order(n, attempt_seed + 1);
        std::vector<int> scan_w =
            seeded_scan_order(std::min(params.polish_window, n), attempt_seed + 2);
        int budget = params.max_sweeps;
        while (budget > 0) {
            bool improved = false;
            for (; budget > 0; --budget) {
                // Adjacent passes are cheap (pairs repeat); drain them before
                // paying for windowed reinsertion scans.
                bool a = false;
                while (ls.adjacent_sweep()) a = true;
                bool b = ls.reinsert_sweep(scan);
                if (a || b) improved = true;
                if (!a && !b) break;
            }
            // Window polish can unlock further descent moves; loop to a
            // joint fixpoint.
            bool polished = false;
            for (int pass = 0; pass < 8 && budget > 0; ++pass, --budget)
                if (ls.polish_windows(scan_w))
                    polished = true;
                else
                    break;
            if (!improved && !polished) break;
        }
        if (ls.score < out.score) {
            out.ranking = std::move(ls.ranking);
            out.score = ls.score;
        }
    }
    out.method = OrderMethod::local_search;
    if (!absolute) out.score = params.finalize_score
                                   ? disagreement_score(table, out.ranking)
                                   : -1;
    return out;
}

bool majority_greater_than_block(const NoisyOrder& order, ComparisonTable& table,
                                 const Point& x, int block) {
    const int n = order.size();
    int lo = block * order.block_size;
    int hi = std::min(n, lo + order.block_size);
    int greater = 0, total = 0;
    for (int r = lo; r < hi; ++r) {
        if (!table.external_less(x, order.ranking[r])) ++greater;
        ++total;
    }
    return 2 * greater > total;
}

SlotResult slot_point(const NoisyOrder& order, ComparisonTable& table, const Point& x) {
    SlotResult res;
    int lo = 0, hi = order.block_count() - 1;
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        int members = std::min(order.size(), (mid + 1) * order.block_size) -
                      mid * order.block_size;
        res.comparisons_used += members;
        if (majority_greater_than_block(order, table, x, mid))
            lo = mid + 1;
        else
            hi = mid;
    }
    res.block = lo;
    return res;
}

std::vector<SlottedPoint> select_separated_chain(const std::vector<SlottedPoint>& slotted,
                                                 int sentinel_block, int gap_blocks) {
    std::vector<SlottedPoint> sorted = slotted;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const SlottedPoint& a, const SlottedPoint& b) {
                         return a.block < b.block;
                     });
    std::vector<SlottedPoint> chain;
    long last = -(1L << 40);
    for (const auto& s : sorted) {
        if (s.block < last + gap_blocks) continue;
        if (std::abs(s.block - sentinel_block) < gap_blocks) continue;
        chain.push_back(s);
        last = s.block;
    }
    return chain;
}

int max_displacement(const NoisyOrder& order, const std::vector<int>& true_ranking) {
    if (true_ranking.size() != order.ranking.size())
        throw std::invalid_argument("max_displacement: ranking size mismatch");
    std::vector<int> pos = order.positions();
    int worst = 0;
    for (int r = 0; r < static_cast<int>(true_ranking.size()); ++r)
        worst = std::max(worst, std::abs(pos[true_ranking[r]] - r));
    return worst;
}

FarClassification classify_far_pairs(const Oracle& oracle, const Hypothesis& h_star,
                                     const std::vector<Point>& points, double lambda) {
    FarClassification out;
    out.n = static_cast<int>(points.size());
    out.far.assign(static_cast<std::size_t>(out.n) * out.n, 0);
    std::vector<double> value(out.n);
    for (int i = 0; i < out.n; ++i) value[i] = evaluate(h_star, points[i]);
    for (int i = 0; i < out.n; ++i) {
        for (int j = 0; j < out.n; ++j) {
            if (i == j) continue;
            double p = model_correctness_bound(oracle.model(), std::abs(value[i] - value[j]));
            if (p >= 0.5 + lambda)
                out.far[static_cast<std::size_t>(i) * out.n + j] = 1;
        }
    }
    return out;
}

FarErrorCounts count_far_errors(const NoisyOrder& order, const FarClassification& tags,
                                const std::vector<int>& true_ranking) {
    FarErrorCounts counts;
    std::vector<int> pos = order.positions();
    const int n = static_cast<int>(true_ranking.size());
    for (int tp = 0; tp < n; ++tp) {
        for (int tq = tp + 1; tq < n; ++tq) {
            int i = true_ranking[tp], j = true_ranking[tq];
            if (i >= tags.n || j >= tags.n) continue;  // sentinel excluded
            if (pos[i] > pos[j]) {
                if (tags.is_far(i, j))
                    ++counts.far;
                else
                    ++counts.close;
            }
        }
    }
    return counts;
}

}  // namespace arpu
