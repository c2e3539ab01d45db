#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arpu/config.hpp"
#include "arpu/distributions.hpp"
#include "arpu/learners.hpp"
#include "arpu/oracles.hpp"

namespace arpu {

struct NoiseSpec {
    enum class Kind { noiseless, massart, gtnc };
    Kind kind = Kind::noiseless;
    double lambda = 0.2;
    MassartModel::Adversary massart_adversary = MassartModel::Adversary::worst_case_flip;
    double power_m_lower = 0.4;
    double power_m_upper = 0.4;
    double kappa = 2.0;
    double eps0 = 1.0;
    GtncModel::Adversary gtnc_adversary = GtncModel::Adversary::lower_envelope;
    std::string table_lower;  // "x:y,x:y" alternative to the power family
    std::string table_upper;

    NoiseModel build() const;
    NoiseCurve lower_curve() const;
    NoiseCurve upper_curve() const;
};

struct LearnerSpec {
    enum class Algo { massart, gtnc, gtnc_aid };
    Algo algo = Algo::massart;
    MassartConfig massart;
    GtncConfig gtnc;

    std::string name() const;
};

struct RunConfig {
    std::string name = "experiment";
    int trials = 1;
    std::uint64_t seed = 1;
    long test_size = 10000;
    int parallel = 1;
    bool record_timing = true;
    std::string out_dir;
    DistributionSpec dist;
    NoiseSpec noise;
    LearnerSpec learner;
    Config raw;

    static RunConfig from_config(const Config& cfg);
    std::string hash() const { return raw.hash(); }
};

struct TrialRow {
    std::uint64_t seed = 0;
    std::string learner;
    int rounds = 0;
    std::string stop_reason;
    long label_queries = 0;
    long comparison_queries = 0;
    double coverage = 0.0;
    long mislabels = 0;
    long inconsistencies = 0;
    long wall_ms = 0;
    // Audit (JSON-side, not in the CSV schema).
    long unexplained_mislabels = 0;
    std::vector<std::string> violated_constraints;
    bool failed = false;
    std::string error;
};

struct EvalResult {
    double coverage = 0.0;
    long covered = 0;
    long mislabels = 0;
    long inconsistent = 0;
    long tested = 0;
    std::vector<Point> mislabeled_points;
};

// Coverage and mislabel counts of a frozen classifier over fresh i.i.d. test
// points.
EvalResult evaluate_classifier(const PartialClassifier& classifier,
                               const Hypothesis& h_star, const DistributionSpec& spec,
                               long test_size, Rng rng, PointFactory& factory);

struct WilsonInterval {
    double low = 0.0;
    double high = 1.0;
};
WilsonInterval wilson_interval(long successes, long n, double z = 1.959963984540054);

// True when the observed rate is statistically compatible with `threshold`
// (Wilson lower bound at or below it).
bool rate_within(long successes, long n, double threshold);

struct ExperimentResult {
    std::vector<TrialRow> rows;
    std::string csv;
    std::string summary_json;
    // Headline numbers consumed by acceptance checks.
    long trials_with_mislabel = 0;
    long total_unexplained = 0;
    double mean_coverage = 0.0;
    double mean_label_queries = 0.0;
    double mean_comparison_queries = 0.0;
    double fraction_coverage_at_least(double threshold) const;
};

ExperimentResult run_experiment(const RunConfig& config);

// Runs one trial in isolation; exposed for tests.
TrialRow run_trial(const RunConfig& config, int trial_index);

// Writes <name>.csv and <name>.summary.json under config.out_dir.
void write_outputs(const RunConfig& config, const ExperimentResult& result);

int resolve_parallel(int requested);  // ARPULAB_THREADS overrides

// Least-squares fit quality of y against x; the query-scaling check.
double r_squared(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace arpu
