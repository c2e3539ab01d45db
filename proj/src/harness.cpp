#include "arpu/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "arpu/errors.hpp"

namespace arpu {

namespace {

NoiseCurve curve_from_table_string(const std::string& text, double eps0) {
    std::vector<std::pair<double, double>> pts;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw config_error("noise table entry needs x:y, got: " + item);
        pts.emplace_back(std::stod(item.substr(0, colon)),
                         std::stod(item.substr(colon + 1)));
    }
    return NoiseCurve::table(std::move(pts), eps0);
}

}  // namespace

NoiseCurve NoiseSpec::lower_curve() const {
    if (!table_lower.empty()) return curve_from_table_string(table_lower, eps0);
    return NoiseCurve::power(power_m_lower, kappa, eps0);
}

NoiseCurve NoiseSpec::upper_curve() const {
    if (!table_upper.empty()) return curve_from_table_string(table_upper, eps0);
    return NoiseCurve::power(power_m_upper, kappa, eps0);
}

NoiseModel NoiseSpec::build() const {
    switch (kind) {
        case Kind::noiseless: return NoiselessModel{};
        case Kind::massart: return MassartModel{lambda, massart_adversary};
        case Kind::gtnc: {
            GtncModel g{lower_curve(), upper_curve(), gtnc_adversary};
            return g;
        }
    }
    throw config_error("NoiseSpec::build: unhandled kind");
}

std::string LearnerSpec::name() const {
    switch (algo) {
        case Algo::massart: return "massart";
        case Algo::gtnc: return "gtnc";
        case Algo::gtnc_aid: return "gtnc_aid";
    }
    return "?";
}

RunConfig RunConfig::from_config(const Config& cfg) {
    RunConfig rc;
    rc.raw = cfg;
    rc.name = cfg.get_string("experiment.name", "experiment");
    rc.trials = static_cast<int>(cfg.get_long("experiment.trials", 1));
    rc.seed = static_cast<std::uint64_t>(cfg.get_long("experiment.seed", 1));
    rc.test_size = cfg.get_long("experiment.test_size", 10000);
    rc.parallel = static_cast<int>(cfg.get_long("experiment.parallel", 1));
    rc.record_timing = cfg.get_bool("experiment.record_timing", true);
    rc.out_dir = cfg.get_string("experiment.out", "");
    if (rc.trials < 0) throw config_error("experiment.trials: must be >= 0");

    rc.dist.family =
        distribution_family_from_string(cfg.get_string("distribution.family", "uniform_ball"));
    rc.dist.dimension = static_cast<int>(cfg.get_long("distribution.dimension", 2));
    rc.dist.radius = cfg.get_double("distribution.radius", 1.0);
    rc.dist.gamma = cfg.get_double("distribution.gamma", 0.0);
    rc.dist.offset_band = cfg.get_double("distribution.offset_band", 0.3);
    rc.dist.homogeneous = cfg.get_bool("distribution.homogeneous", false);
    if (rc.dist.dimension < 1) throw config_error("distribution.dimension: must be >= 1");

    std::string noise = cfg.get_string("noise.model", "noiseless");
    if (noise == "noiseless")
        rc.noise.kind = NoiseSpec::Kind::noiseless;
    else if (noise == "massart")
        rc.noise.kind = NoiseSpec::Kind::massart;
    else if (noise == "gtnc" || noise == "tnc")
        rc.noise.kind = NoiseSpec::Kind::gtnc;
    else
        throw config_error("noise.model: unknown model " + noise);
    rc.noise.lambda = cfg.get_double("noise.lambda", 0.2);
    std::string adv = cfg.get_string("noise.adversary", "");
    if (rc.noise.kind == NoiseSpec::Kind::massart) {
        if (adv.empty() || adv == "worst_case_flip")
            rc.noise.massart_adversary = MassartModel::Adversary::worst_case_flip;
        else if (adv == "uniform_flip")
            rc.noise.massart_adversary = MassartModel::Adversary::uniform_flip;
        else
            throw config_error("noise.adversary: unknown massart mode " + adv);
        if (rc.noise.lambda <= 0.0 || rc.noise.lambda > 0.5)
            throw config_error("noise.lambda: must lie in (0, 1/2]");
    }
    rc.noise.power_m_lower = cfg.get_double("noise.m", 0.4);
    rc.noise.power_m_upper = cfg.get_double("noise.m_upper", rc.noise.power_m_lower);
    rc.noise.kappa = cfg.get_double("noise.kappa", 2.0);
    rc.noise.eps0 = cfg.get_double("noise.eps0", 1.0);
    rc.noise.table_lower = cfg.get_string("noise.table_lower", "");
    rc.noise.table_upper = cfg.get_string("noise.table_upper", "");
    if (rc.noise.kind == NoiseSpec::Kind::gtnc) {
        if (!adv.empty()) {
            if (adv == "lower_envelope")
                rc.noise.gtnc_adversary = GtncModel::Adversary::lower_envelope;
            else if (adv == "upper_envelope")
                rc.noise.gtnc_adversary = GtncModel::Adversary::upper_envelope;
            else if (adv == "midpoint")
                rc.noise.gtnc_adversary = GtncModel::Adversary::midpoint;
            else
                throw config_error("noise.adversary: unknown gtnc mode " + adv);
        }
    }

    std::string algo = cfg.get_string("learner.algorithm", "massart");
    if (algo == "massart")
        rc.learner.algo = LearnerSpec::Algo::massart;
    else if (algo == "gtnc")
        rc.learner.algo = LearnerSpec::Algo::gtnc;
    else if (algo == "gtnc_aid")
        rc.learner.algo = LearnerSpec::Algo::gtnc_aid;
    else
        throw config_error("learner.algorithm: unknown algorithm " + algo);

    MassartConfig& mc = rc.learner.massart;
    mc.dimension = rc.dist.dimension;
    mc.k = static_cast<int>(cfg.get_long("learner.k", 5));
    mc.lambda = rc.noise.kind == NoiseSpec::Kind::massart ? rc.noise.lambda : 0.5;
    mc.lambda = cfg.get_double("learner.lambda", mc.lambda);
    mc.epsilon = cfg.get_double("learner.epsilon", 0.05);
    mc.delta_r = cfg.get_double("learner.delta_r", 0.05);
    mc.delta_u = cfg.get_double("learner.delta_u", 0.05);
    mc.n = cfg.get_long("learner.n", 0);
    mc.block_size = static_cast<int>(cfg.get_long("learner.block_size", 8));
    mc.chain_gap = static_cast<int>(cfg.get_long("learner.chain_gap", 8));
    mc.iteration_cap = static_cast<int>(cfg.get_long("learner.iteration_cap", 48));
    mc.consecutive_cap = cfg.get_long("learner.consecutive_cap", 0);
    mc.slot_verify_gap = static_cast<int>(cfg.get_long("learner.slot_verify_gap", 4));
    mc.chain_vote_threshold = cfg.get_double("learner.chain_vote_threshold", 0.58);
    mc.mult_n = cfg.get_double("learner.mult_n", 1.0);
    mc.max_queries = cfg.get_long("learner.max_queries", 0);
    mc.sort_exact_threshold =
        static_cast<int>(cfg.get_long("learner.sort_exact_threshold", 18));
    mc.reinsert_window = static_cast<int>(cfg.get_long("learner.reinsert_window", 128));
    mc.max_sweeps = static_cast<int>(cfg.get_long("learner.max_sweeps", 60));

    GtncConfig& gc = rc.learner.gtnc;
    gc.dimension = rc.dist.dimension;
    gc.k = mc.k;
    gc.g_lower = rc.noise.kind == NoiseSpec::Kind::gtnc
                     ? rc.noise.lower_curve()
                     : NoiseCurve::power(cfg.get_double("learner.g_m", 0.4),
                                         cfg.get_double("learner.g_kappa", 2.0),
                                         cfg.get_double("learner.g_eps0", 1.0));
    gc.g_upper = rc.noise.kind == NoiseSpec::Kind::gtnc
                     ? rc.noise.upper_curve()
                     : gc.g_lower;
    gc.gamma = cfg.get_double("learner.gamma", rc.dist.gamma > 0 ? rc.dist.gamma : 0.1);
    gc.aid_mode = rc.learner.algo == LearnerSpec::Algo::gtnc_aid;
    gc.margin_gate = cfg.get_bool("learner.margin_gate", gc.aid_mode);
    gc.acc_c2 = cfg.get_double("learner.acc_c2", rc.dist.anti_concentration_c2());
    gc.epsilon = mc.epsilon;
    gc.delta_r = mc.delta_r;
    gc.delta_u = mc.delta_u;
    gc.n = cfg.get_long("learner.n", 240);
    gc.c_work = cfg.get_long("learner.c", 8);
    gc.m_work = cfg.get_long("learner.m", 14);
    gc.m_c = cfg.get_long("learner.m_c", 0);
    gc.m_s = cfg.get_long("learner.m_s", 0);
    gc.cluster_min = cfg.get_long("learner.cluster_min", 0);
    gc.eps_t_override = cfg.get_double("learner.eps_t", 0.0);
    gc.lambda1_override = cfg.get_double("learner.lambda1", 0.0);
    gc.block_size = static_cast<int>(cfg.get_long("learner.block_size", 12));
    gc.chain_gap = mc.chain_gap;
    gc.iteration_cap = mc.iteration_cap;
    gc.consecutive_cap = mc.consecutive_cap;
    gc.slot_verify_gap = mc.slot_verify_gap;
    gc.chain_vote_threshold = mc.chain_vote_threshold;
    gc.chain_target = static_cast<int>(cfg.get_long("learner.chain_target", 0));
    gc.equit_random_budget =
        static_cast<int>(cfg.get_long("learner.equit_random_budget", 64));
    gc.max_queries = mc.max_queries;
    gc.sort_exact_threshold = mc.sort_exact_threshold;
    gc.reinsert_window = mc.reinsert_window;
    gc.max_sweeps = mc.max_sweeps;
    gc.mult.n = cfg.get_double("learner.mult_const_n", 1.0);
    gc.mult.c = cfg.get_double("learner.mult_const_c", 1.0);
    gc.mult.m = cfg.get_double("learner.mult_const_m", 1.0);
    gc.mult_cluster = cfg.get_double("learner.mult_cluster", 1.0);
    gc.mult_label = cfg.get_double("learner.mult_label", 1.0);
    gc.k_eff_mult = cfg.get_double("learner.k_eff_mult", 1.0);

    return rc;
}

EvalResult evaluate_classifier(const PartialClassifier& classifier,
                               const Hypothesis& h_star, const DistributionSpec& spec,
                               long test_size, Rng rng, PointFactory& factory) {
    EvalResult out;
    for (long i = 0; i < test_size; ++i) {
        Point p = sample_one(spec, &h_star, rng, factory);
        int truth = true_label(h_star, p);
        if (truth == 0) continue;  // boundary draw, measure zero
        Verdict v = classifier.verdict(p);
        if (v == Verdict::inconsistent) ++out.inconsistent;
        ++out.tested;
        int guess = v == Verdict::forced_positive ? 1
                    : v == Verdict::forced_negative ? -1
                                                    : 0;
        if (guess == 0) continue;
        ++out.covered;
        if (guess != truth) {
            ++out.mislabels;
            out.mislabeled_points.push_back(std::move(p));
        }
    }
    out.coverage = out.tested > 0
                       ? static_cast<double>(out.covered) / static_cast<double>(out.tested)
                       : 0.0;
    return out;
}

WilsonInterval wilson_interval(long successes, long n, double z) {
    WilsonInterval w;
    if (n <= 0) return w;
    double p = static_cast<double>(successes) / static_cast<double>(n);
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = p + z2 / (2.0 * n);
    double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    w.low = std::max(0.0, (center - spread) / denom);
    w.high = std::min(1.0, (center + spread) / denom);
    return w;
}

bool rate_within(long successes, long n, double threshold) {
    return wilson_interval(successes, n).low <= threshold;
}

TrialRow run_trial(const RunConfig& config, int trial_index) {
    TrialRow row;
    row.learner = config.learner.name();
    RunSeed rs{config.seed};
    Rng harness_rng = rs.stream_for(stream::harness, trial_index);
    Rng sampler_rng = rs.stream_for(stream::sampler, trial_index);
    Rng oracle_rng = rs.stream_for(stream::oracle, trial_index);
    Rng learner_rng = rs.stream_for(stream::learner, trial_index);
    row.seed = Rng::mix(config.seed + 0x9e3779b97f4a7c15ULL * (trial_index + 1));

    auto start = std::chrono::steady_clock::now();
    try {
        PointFactory factory;
        Hypothesis h_star = plant_hypothesis(config.dist, harness_rng);
        Oracle oracle(config.noise.build(), h_star, oracle_rng);
        if (config.learner.algo == LearnerSpec::Algo::massart &&
            config.learner.massart.working_n() >= 1024) {
            // A sorting round touches roughly 7x the reinsert window per
            // element; pre-size the memo for a typical run so it does not
            // rehash (and transiently double) mid-trial.
            double per_round =
                static_cast<double>(config.learner.massart.working_n()) * 7.0 *
                std::max(config.learner.massart.reinsert_window, 32);
            oracle.reserve_comparisons(static_cast<std::size_t>(
                std::min(per_round * 6.0, 4.0e7)));
        }
        auto draw = [&config, &h_star, &sampler_rng, &factory]() {
            return sample_one(config.dist, &h_star, sampler_rng, factory);
        };

        LearnerOutcome outcome =
            config.learner.algo == LearnerSpec::Algo::massart
                ? run_massart(oracle, draw, config.learner.massart, learner_rng)
                : run_gtnc(oracle, draw, config.learner.gtnc, learner_rng);

        row.rounds = outcome.report.rounds;
        row.stop_reason = outcome.report.stop_reason;
        row.label_queries = oracle.label_queries();
        row.comparison_queries = oracle.comparison_queries();

        EvalResult eval = evaluate_classifier(*outcome.classifier, h_star, config.dist,
                                              config.test_size, harness_rng, factory);
        row.coverage = eval.coverage;
        row.mislabels = eval.mislabels;
        row.inconsistencies = outcome.report.inconsistent_seen + eval.inconsistent;

        // Audit: every mislabel must trace to a violated trusted constraint.
        if (eval.mislabels > 0) {
            const auto& cons = outcome.classifier->constraints().constraints();
            bool any_violated = false;
            for (std::size_t i = 0; i < cons.size(); ++i) {
                if (!constraint_holds(cons[i], h_star)) {
                    any_violated = true;
                    row.violated_constraints.push_back(
                        cons[i].provenance.empty() ? "constraint " + std::to_string(i)
                                                   : cons[i].provenance);
                }
            }
            if (!any_violated) row.unexplained_mislabels = eval.mislabels;
        }
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
    }
    if (config.record_timing) {
        auto end = std::chrono::steady_clock::now();
        row.wall_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(end - start).count();
    }
    return row;
}

int resolve_parallel(int requested) {
    if (const char* env = std::getenv("ARPULAB_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v >= 1) return v;
        } catch (...) {
        }
    }
    if (requested < 1) requested = 1;
    return requested;
}

ExperimentResult run_experiment(const RunConfig& config) {
    ExperimentResult result;
    result.rows.resize(config.trials);

    int threads = std::min(resolve_parallel(config.parallel),
                           std::max(1, config.trials));
    if (threads <= 1) {
        for (int t = 0; t < config.trials; ++t) result.rows[t] = run_trial(config, t);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&]() {
                while (true) {
                    int t = next.fetch_add(1);
                    if (t >= config.trials) return;
                    result.rows[t] = run_trial(config, t);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // CSV body in trial order regardless of completion order.
    std::ostringstream csv;
    csv << "config_hash,seed,learner,rounds,stop_reason,label_queries,"
           "comparison_queries,coverage,mislabels,inconsistencies,wall_ms\n";
    std::string hash = config.hash();
    char cov[32];
    for (const TrialRow& r : result.rows) {
        std::snprintf(cov, sizeof(cov), "%.6f", r.coverage);
        csv << hash << ',' << r.seed << ',' << r.learner << ',' << r.rounds << ','
            << (r.failed ? "failed" : r.stop_reason) << ',' << r.label_queries << ','
            << r.comparison_queries << ',' << cov << ',' << r.mislabels << ','
            << r.inconsistencies << ',' << r.wall_ms << '\n';
    }
    result.csv = csv.str();

    long with_mislabel = 0, unexplained = 0;
    double cov_sum = 0.0, lq_sum = 0.0, cq_sum = 0.0, rounds_sum = 0.0;
    std::map<std::string, int> stops;
    long failed = 0;
    for (const TrialRow& r : result.rows) {
        if (r.failed) {
            ++failed;
            continue;
        }
        if (r.mislabels > 0) ++with_mislabel;
        unexplained += r.unexplained_mislabels;
        cov_sum += r.coverage;
        lq_sum += static_cast<double>(r.label_queries);
        cq_sum += static_cast<double>(r.comparison_queries);
        rounds_sum += r.rounds;
        ++stops[r.stop_reason];
    }
    long ok = config.trials - failed;
    result.trials_with_mislabel = with_mislabel;
    result.total_unexplained = unexplained;
    result.mean_coverage = ok > 0 ? cov_sum / ok : 0.0;
    result.mean_label_queries = ok > 0 ? lq_sum / ok : 0.0;
    result.mean_comparison_queries = ok > 0 ? cq_sum / ok : 0.0;

    WilsonInterval mis = wilson_interval(with_mislabel, std::max<long>(ok, 1));
    nlohmann::json j;
    j["experiment"] = config.name;
    j["config_hash"] = hash;
    j["learner"] = config.learner.name();
    j["trials"] = config.trials;
    j["failed_trials"] = failed;
    j["coverage"] = {{"mean", result.mean_coverage},
                     {"fraction_ge_095", result.fraction_coverage_at_least(0.95)}};
    j["queries"] = {{"label_mean", result.mean_label_queries},
                    {"comparison_mean", result.mean_comparison_queries},
                    {"total_mean",
                     result.mean_label_queries + result.mean_comparison_queries}};
    j["reliability"] = {{"trials_with_mislabel", with_mislabel},
                        {"rate", ok > 0 ? static_cast<double>(with_mislabel) / ok : 0.0},
                        {"wilson_low", mis.low},
                        {"wilson_high", mis.high},
                        {"unexplained_mislabels", unexplained}};
    j["rounds_mean"] = ok > 0 ? rounds_sum / ok : 0.0;
    j["stop_reasons"] = stops;
    nlohmann::json cfg_echo;
    for (const auto& [k, v] : config.raw.values()) cfg_echo[k] = v;
    j["config"] = cfg_echo;
    result.summary_json = j.dump(2);
    return result;
}

double ExperimentResult::fraction_coverage_at_least(double threshold) const {
    long ok = 0, hit = 0;
    for (const TrialRow& r : rows) {
        if (r.failed) continue;
        ++ok;
        if (r.coverage >= threshold) ++hit;
    }
    return ok > 0 ? static_cast<double>(hit) / ok : 0.0;
}

void write_outputs(const RunConfig& config, const ExperimentResult& result) {
    if (config.out_dir.empty()) return;
    std::filesystem::create_directories(config.out_dir);
    std::filesystem::path dir(config.out_dir);
    std::ofstream csv(dir / (config.name + ".csv"), std::ios::binary);
    csv << result.csv;
    std::ofstream json(dir / (config.name + ".summary.json"), std::ios::binary);
    json << result.summary_json << '\n';
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    double cov = n * sxy - sx * sy;
    double vx = n * sxx - sx * sx;
    double vy = n * syy - sy * sy;
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return (cov * cov) / (vx * vy);
}

}  // namespace arpu
