#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "arpu/core.hpp"
#include "arpu/oracles.hpp"

namespace arpu {

// Measured pairwise orders over a working sample, pulled from the oracle on
// first access and cached densely. The optional sentinel is a synthetic
// element ordered at value zero; its comparisons against real points are
// label queries, so labels ride along in the sorted order.
class ComparisonTable {
public:
    ComparisonTable(Oracle& oracle, std::vector<Point> points, bool with_sentinel);

    int size() const { return n_; }
    bool has_sentinel() const { return sentinel_; }
    int sentinel_index() const { return sentinel_ ? n_ - 1 : -1; }
    bool is_sentinel(int i) const { return sentinel_ && i == n_ - 1; }
    const Point& point(int i) const { return points_[i]; }
    int point_count() const { return static_cast<int>(points_.size()); }
    Oracle& oracle() { return *oracle_; }

    // True iff element i measures as less than element j. i != j.
    bool measures_less(int i, int j);

    void materialize();

    // Comparison of an external point x against element i of the table:
    // returns true iff x measures less than element i.
    bool external_less(const Point& x, int i);

private:
    Oracle* oracle_;
    std::vector<Point> points_;
    bool sentinel_;
    int n_;
    std::vector<std::int8_t> cache_;  // 0 unknown, 1 less, 2 not-less
};

enum class OrderMethod { exact_dp, local_search };

// A permutation of table elements with its exact disagreement score and the
// block decomposition used by slotting. score is -1 when the caller skipped
// scoring (finalize_score off): the exact count costs all n(n-1)/2 oracle
// pairs, which learner rounds at large n cannot afford.
struct NoisyOrder {
    std::vector<int> ranking;  // ranking[r] = element at rank r (ascending)
    long score = 0;
    OrderMethod method = OrderMethod::exact_dp;
    int block_size = 1;

    int size() const { return static_cast<int>(ranking.size()); }
    int block_count() const {
        return (size() + block_size - 1) / block_size;
    }
    int block_of_rank(int rank) const { return rank / block_size; }
    std::vector<int> positions() const {
        std::vector<int> pos(ranking.size());
        for (int r = 0; r < size(); ++r) pos[ranking[r]] = r;
        return pos;
    }
};

// Exact count of measured-order disagreements for an arbitrary permutation.
long disagreement_score(ComparisonTable& table, const std::vector<int>& ranking);

struct MleParams {
    int exact_threshold = 18;   // subset DP up to this size
    std::uint64_t seed = 0;     // tie-break scan order
    int polish_window = 8;
    int reinsert_window = 0;    // 0 = unbounded single-element reinsertion
    int max_sweeps = 400;
    int restarts = 0;           // 0 = auto (several when small, one when large)
    bool finalize_score = true;
};

// Disagreement-minimizing order: global minimizer by subset DP for small
// sizes, local-search descent beyond. Ties broken first-found under a seeded
// scan order.
NoisyOrder mle_order(ComparisonTable& table, const MleParams& params = {});

struct SlotResult {
    int block = 0;
    long comparisons_used = 0;  // label queries included when the sentinel votes
};

// Binary search of x over the order's blocks; side of a block decided by
// majority of comparisons of x against all block members.
SlotResult slot_point(const NoisyOrder& order, ComparisonTable& table, const Point& x);

// True iff x measures greater than the majority of the block's members.
bool majority_greater_than_block(const NoisyOrder& order, ComparisonTable& table,
                                 const Point& x, int block);

struct SlottedPoint {
    Point point;
    int block = 0;
};

// Maximal chain of slotted points pairwise separated by >= gap_blocks blocks
// and >= gap_blocks from the sentinel's block; deterministic greedy
// left-to-right selection. Returned ascending by block.
std::vector<SlottedPoint> select_separated_chain(const std::vector<SlottedPoint>& slotted,
                                                 int sentinel_block, int gap_blocks);

// max_i |position(i) - true_position(i)|; simulation-side only.
int max_displacement(const NoisyOrder& order, const std::vector<int>& true_ranking);

// Per-pair far/close tags at threshold lambda: far iff the model-true
// correctness probability is >= 1/2 + lambda. Simulation-side.
struct FarClassification {
    int n = 0;
    std::vector<std::uint8_t> far;  // n x n, indexed like the table

    bool is_far(int i, int j) const { return far[static_cast<std::size_t>(i) * n + j] != 0; }
};

FarClassification classify_far_pairs(const Oracle& oracle, const Hypothesis& h_star,
                                     const std::vector<Point>& points, double lambda);

struct FarErrorCounts {
    long far = 0;
    long close = 0;
};

// True-order disagreements of `order` split by far/close tag. Sentinel
// elements are excluded; true_ranking ranks the same elements as the order.
FarErrorCounts count_far_errors(const NoisyOrder& order,
                                const FarClassification& tags,
                                const std::vector<int>& true_ranking);

}  // namespace arpu
