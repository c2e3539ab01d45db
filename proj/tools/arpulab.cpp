// arpulab — simulation harness for reliable active learning with label and
// comparison queries under Massart and generalized Tsybakov noise.
//
// Subcommands:
//   run         execute a configured Monte-Carlo experiment (CSV + JSON out)
//   sort-demo   standalone noisy-sorting demonstration
//   infer-check inference-dimension verifier for random planted samples
//   constants   print the derived equitability constants for a config

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arpu/cluster.hpp"
#include "arpu/config.hpp"
#include "arpu/distributions.hpp"
#include "arpu/errors.hpp"
#include "arpu/harness.hpp"
#include "arpu/inference.hpp"
#include "arpu/ordering.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    long seed = -1;
    long trials = -1;
    std::string out_dir;
    int parallel = 0;
};

void apply_overrides(arpu::Config& cfg, const CommonFlags& flags) {
    if (flags.seed >= 0) cfg.set("experiment.seed", std::to_string(flags.seed));
    if (flags.trials >= 0) cfg.set("experiment.trials", std::to_string(flags.trials));
    if (!flags.out_dir.empty()) cfg.set("experiment.out", flags.out_dir);
    if (flags.parallel > 0) cfg.set("experiment.parallel", std::to_string(flags.parallel));
}

int cmd_run(const CommonFlags& flags, bool check_mode) {
    arpu::Config cfg = arpu::Config::load(flags.config_path);
    apply_overrides(cfg, flags);

    std::vector<double> sweep = cfg.get_doubles("sweep.epsilon");
    nlohmann::json grouped = nlohmann::json::array();
    bool check_failed = false;

    auto run_one = [&](arpu::Config one, const std::string& suffix) {
        if (!suffix.empty())
            one.set("experiment.name", one.get_string("experiment.name", "experiment") + suffix);
        arpu::RunConfig rc = arpu::RunConfig::from_config(one);
        arpu::ExperimentResult result = arpu::run_experiment(rc);
        arpu::write_outputs(rc, result);
        long ok = 0;
        for (const auto& r : result.rows)
            if (!r.failed) ++ok;
        nlohmann::json g;
        g["name"] = rc.name;
        g["epsilon"] = rc.learner.algo == arpu::LearnerSpec::Algo::massart
                           ? rc.learner.massart.epsilon
                           : rc.learner.gtnc.epsilon;
        g["query_total_mean"] =
            result.mean_label_queries + result.mean_comparison_queries;
        g["coverage_mean"] = result.mean_coverage;
        g["mislabel_trials"] = result.trials_with_mislabel;
        grouped.push_back(g);
        std::cout << result.summary_json << std::endl;

        if (check_mode) {
            double max_rate = one.get_double("check.max_mislabel_trial_rate", -1.0);
            if (max_rate >= 0.0 && ok > 0 &&
                !arpu::rate_within(result.trials_with_mislabel, ok, max_rate))
                check_failed = true;
            double min_cov = one.get_double("check.min_mean_coverage", -1.0);
            if (min_cov >= 0.0 && result.mean_coverage < min_cov) check_failed = true;
            double min_cov_frac = one.get_double("check.min_fraction_coverage_095", -1.0);
            if (min_cov_frac >= 0.0 &&
                result.fraction_coverage_at_least(0.95) < min_cov_frac)
                check_failed = true;
        }
    };

    if (sweep.empty()) {
        run_one(cfg, "");
    } else {
        for (double eps : sweep) {
            arpu::Config one = cfg;
            one.set("learner.epsilon", std::to_string(eps));
            char suffix[32];
            std::snprintf(suffix, sizeof(suffix), "_eps_%g", eps);
            run_one(one, suffix);
        }
        std::string out = cfg.get_string("experiment.out", "");
        if (!out.empty()) {
            std::filesystem::create_directories(out);
            std::ofstream f(std::filesystem::path(out) /
                            (cfg.get_string("experiment.name", "experiment") +
                             ".sweep.json"));
            f << grouped.dump(2) << '\n';
        }
    }
    return check_failed ? 3 : 0;
}

int cmd_sort_demo(long n, double lambda, std::uint64_t seed) {
    using namespace arpu;
    RunSeed rs{seed};
    Rng harness_rng = rs.stream_for(stream::harness);
    Rng oracle_rng = rs.stream_for(stream::oracle);
    Rng sampler_rng = rs.stream_for(stream::sampler);
    PointFactory factory;
    DistributionSpec spec;
    spec.family = DistributionSpec::Family::uniform_ball;
    spec.dimension = 2;
    Hypothesis h = plant_hypothesis(spec, harness_rng);
    Oracle oracle(MassartModel{lambda, MassartModel::Adversary::worst_case_flip}, h,
                  oracle_rng);
    std::vector<Point> pts = sample(spec, &h, sampler_rng, factory, n);

    std::vector<int> by_value(n);
    for (long i = 0; i < n; ++i) by_value[i] = static_cast<int>(i);
    std::sort(by_value.begin(), by_value.end(), [&](int a, int b) {
        return evaluate(h, pts[a]) < evaluate(h, pts[b]);
    });

    ComparisonTable table(oracle, pts, false);
    MleParams params;
    params.seed = seed;
    NoisyOrder order = mle_order(table, params);

    nlohmann::json j;
    j["n"] = n;
    j["lambda"] = lambda;
    j["method"] = order.method == OrderMethod::exact_dp ? "exact_dp" : "local_search";
    j["score"] = order.score;
    j["max_displacement"] = max_displacement(order, by_value);
    j["comparison_queries"] = oracle.comparison_queries();
    std::cout << j.dump(2) << std::endl;
    return 0;
}

int cmd_infer_check(int dimension, int sample_size, int samples, std::uint64_t seed,
                    bool check_mode) {
    using namespace arpu;
    RunSeed rs{seed};
    Rng rng = rs.stream_for(stream::harness);
    PointFactory factory;
    DistributionSpec spec;
    spec.family = DistributionSpec::Family::gaussian_isotropic;
    spec.dimension = dimension;
    int held = 0;
    for (int s = 0; s < samples; ++s) {
        Hypothesis h = plant_hypothesis(spec, rng);
        std::vector<Point> pts = sample(spec, &h, rng, factory, sample_size);
        if (check_inference_dimension(pts, h).holds) ++held;
    }
    nlohmann::json j;
    j["dimension"] = dimension;
    j["sample_size"] = sample_size;
    j["samples"] = samples;
    j["holds"] = held;
    j["holds_rate"] = samples > 0 ? static_cast<double>(held) / samples : 0.0;
    std::cout << j.dump(2) << std::endl;
    if (check_mode && held != samples) return 3;
    return 0;
}

int cmd_constants(const CommonFlags& flags) {
    arpu::Config cfg = arpu::Config::load(flags.config_path);
    arpu::RunConfig rc = arpu::RunConfig::from_config(cfg);
    const arpu::GtncConfig& gc = rc.learner.gtnc;
    arpu::GtncDerivedConstants d = arpu::derive_gtnc_constants(
        gc.g_lower, gc.g_upper, gc.gamma, gc.dimension, gc.k, gc.delta_r, gc.mult);
    nlohmann::json j;
    j["gamma_prime"] = d.gamma_prime;
    j["eps_T"] = d.eps_t;
    j["lambda_1"] = d.lambda_1;
    j["g_eff"] = d.g_eff;
    j["n"] = d.n;
    j["c"] = d.c;
    j["c1"] = d.c1;
    j["c2"] = d.c2;
    j["m"] = d.m;
    j["m2"] = d.m2;
    j["block_size"] = d.block_size;
    j["block_gap"] = d.block_gap;
    j["fixed_point_iterations"] = d.fixed_point_iterations;
    std::cout << j.dump(2) << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"arpulab: reliable active learning with comparisons, simulated"};
    app.require_subcommand(1);

    CommonFlags flags;
    bool check_mode = false;

    CLI::App* run = app.add_subcommand("run", "run a configured experiment");
    run->add_option("--config", flags.config_path, "config file path")->required();
    run->add_option("--seed", flags.seed, "override experiment.seed");
    run->add_option("--trials", flags.trials, "override experiment.trials");
    run->add_option("--out", flags.out_dir, "output directory");
    run->add_option("--parallel", flags.parallel, "worker threads");
    run->add_flag("--check", check_mode, "exit 3 when [check] thresholds fail");

    long demo_n = 200;
    double demo_lambda = 0.2;
    long demo_seed = 1;
    CLI::App* demo = app.add_subcommand("sort-demo", "noisy sorting demonstration");
    demo->add_option("--n", demo_n, "sample size");
    demo->add_option("--lambda", demo_lambda, "massart noise level");
    demo->add_option("--seed", demo_seed, "seed");

    int ic_dim = 2, ic_size = 5, ic_samples = 100;
    long ic_seed = 1;
    bool ic_check = false;
    CLI::App* ic = app.add_subcommand("infer-check", "inference-dimension verifier");
    ic->add_option("--d", ic_dim, "ambient dimension");
    ic->add_option("--sample-size", ic_size, "points per sample");
    ic->add_option("--samples", ic_samples, "number of random samples");
    ic->add_option("--seed", ic_seed, "seed");
    ic->add_flag("--check", ic_check, "exit 3 unless every sample has a witness");

    CLI::App* consts = app.add_subcommand("constants", "print derived constants");
    consts->add_option("--config", flags.config_path, "config file path")->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(flags, check_mode);
        if (demo->parsed())
            return cmd_sort_demo(demo_n, demo_lambda,
                                 static_cast<std::uint64_t>(demo_seed));
        if (ic->parsed())
            return cmd_infer_check(ic_dim, ic_size, ic_samples,
                                   static_cast<std::uint64_t>(ic_seed), ic_check);
        if (consts->parsed()) return cmd_constants(flags);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const arpu::config_error& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
