// Command-line front end: estimation runs (mcs/sus/sbss with replicates),
// chance-constrained gain optimization, and the SuS-vs-SBSS call-count
// benchmark. Consumes a JSON run config; emits report.json plus plot-ready
// CSV files. Exit codes: 0 success, 2 config rejected, 3 non-convergence or
// computation failure, 4 optimization found no feasible design.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <optional>

#include "raresim/config.hpp"
#include "raresim/parallel.hpp"
#include "raresim/report.hpp"
#include "raresim/stats.hpp"

namespace {

using namespace raresim;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;
constexpr int kExitInfeasible = 4;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicates;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_replicates) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration")->required();
    cmd->add_option("--seed", opts.seed, "override the config seed");
    if (with_replicates)
        cmd->add_option("--replicates", opts.replicates, "override the replicate count");
    cmd->add_option("--out", opts.out_dir, "override the output directory");
}

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

void dump_report(const nlohmann::ordered_json& report, const std::string& dir) {
    write_text_file(dir + "/report.json", report.dump(2) + "\n");
}

int run_estimate(const CommonOpts& opts) {
    nlohmann::json config_json = load_json_file(opts.config_path);
    if (opts.seed) config_json["seed"] = *opts.seed;
    if (opts.replicates) config_json["replicates"] = *opts.replicates;
    if (opts.out_dir) config_json["output"] = {{"dir", *opts.out_dir}};
    const RunConfig cfg = parse_run_config(config_json);
    for (const auto& w : cfg.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    const EstimationProblem problem = build_estimation_problem(cfg.problem);
    const std::size_t runs = static_cast<std::size_t>(cfg.replicates);
    std::vector<ReplicateResult> results(runs);
    std::vector<std::string> errors(runs);
    parallel_for(runs, [&](std::size_t r) {
        const std::uint64_t replicate_seed = derive_seed(cfg.seed, r);
        results[r].seed = replicate_seed;
        try {
            if (cfg.method.kind == "mcs") {
                results[r].estimate =
                    run_mcs(problem.h, problem.inputs, cfg.method.mcs_samples, replicate_seed);
            } else if (cfg.method.kind == "sus") {
                results[r].estimate =
                    run_sus(problem.h, problem.inputs, cfg.method.sbss.sus, replicate_seed);
            } else {
                results[r].estimate =
                    run_sbss(problem.h, problem.inputs, cfg.method.sbss, replicate_seed);
            }
        } catch (const std::exception& e) {
            errors[r] = e.what();
        }
    });
    for (std::size_t r = 0; r < runs; ++r) {
        if (!errors[r].empty()) {
            std::fprintf(stderr, "error: replicate %zu failed: %s\n", r, errors[r].c_str());
            return kExitCompute;
        }
    }

    ensure_dir(cfg.out_dir);
    const nlohmann::ordered_json report = estimation_report(config_json, cfg, results);
    dump_report(report, cfg.out_dir);
    write_text_file(cfg.out_dir + "/levels.csv", levels_csv(results));
    write_text_file(cfg.out_dir + "/cdf.csv", cdf_csv(results, cfg.method.sbss.sus.p0));

    bool all_converged = true;
    for (const auto& r : results) all_converged = all_converged && r.estimate.converged;
    const auto& agg = report.at("aggregate");
    std::printf("%s on %s: runs=%zu", cfg.method.kind.c_str(), problem.description.c_str(), runs);
    if (agg.contains("mean_p_hat") && !agg.at("mean_p_hat").is_null())
        std::printf(" mean_p_hat=%.6g", agg.at("mean_p_hat").get<double>());
    std::printf(" total_calls=%lld\n", agg.at("total_true_calls").get<long long>());
    if (!all_converged) {
        std::fprintf(stderr, "error: at least one replicate did not converge; partial report written\n");
        return kExitCompute;
    }
    return kExitOk;
}

int run_benchmark(const CommonOpts& opts) {
    nlohmann::json config_json = load_json_file(opts.config_path);
    if (opts.seed) config_json["seed"] = *opts.seed;
    if (opts.out_dir) config_json["output"] = {{"dir", *opts.out_dir}};
    const BenchmarkConfig cfg = parse_benchmark_config(config_json);

    std::vector<BenchmarkRowResult> rows(cfg.rows.size());
    for (std::size_t i = 0; i < cfg.rows.size(); ++i) {
        BenchmarkRowResult& row = rows[i];
        row.spec = cfg.rows[i];
        try {
            // Depth engineered so the true probability sits mid-band inside
            // the target level: p_f ~ 0.5 * p0^m.
            const double p0 = cfg.sbss.sus.p0;
            const double target_pf = 0.5 * std::pow(p0, row.spec.levels);
            AnalyticLimitState ls;
            ls.kind = LimitStateKind::Linear;
            ls.dim = 3;
            ls.beta = -normal_quantile(target_pf);
            row.true_pf = ls.true_pf();

            SbssConfig method = cfg.sbss;
            method.sus.samples_per_level = row.spec.samples_per_level;
            method.validate(3);
            const UncertainVector uv = ls.inputs();
            const EstimationResult sus =
                run_sus(ls.evaluator(), uv, method.sus, derive_seed(cfg.seed, 2 * i));
            const EstimationResult sbss =
                run_sbss(ls.evaluator(), uv, method, derive_seed(cfg.seed, 2 * i + 1));
            row.levels_sus = sus.levels;
            row.levels_sbss = sbss.levels;
            row.calls_sus = sus.true_calls;
            row.calls_sbss = sbss.true_calls;
            row.p_hat_sus = sus.p_hat;
            row.p_hat_sbss = sbss.p_hat;
            if (!sus.converged || !sbss.converged) {
                row.error = "run did not converge";
            } else if (sus.levels != row.spec.levels || sbss.levels != row.spec.levels) {
                row.error = "reached m=(" + std::to_string(sus.levels) + "," +
                            std::to_string(sbss.levels) + ") instead of target m=" +
                            std::to_string(row.spec.levels);
            } else {
                row.ok = true;
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    }

    ensure_dir(cfg.out_dir);
    const nlohmann::ordered_json report = benchmark_report(config_json, cfg, rows);
    dump_report(report, cfg.out_dir);
    write_text_file(cfg.out_dir + "/table.csv", benchmark_csv(rows));

    bool all_ok = true;
    for (const auto& row : rows) {
        if (row.ok) {
            std::printf("N=%zu m=%d  SuS calls=%lld  SBSS calls=%lld\n",
                        row.spec.samples_per_level, row.spec.levels, row.calls_sus,
                        row.calls_sbss);
        } else {
            std::printf("N=%zu m=%d  FAILED: %s\n", row.spec.samples_per_level, row.spec.levels,
                        row.error.c_str());
            all_ok = false;
        }
    }
    return all_ok ? kExitOk : kExitCompute;
}

int run_optimize(const CommonOpts& opts) {
    nlohmann::json config_json = load_json_file(opts.config_path);
    if (opts.seed) config_json["seed"] = *opts.seed;
    if (opts.out_dir) config_json["output"] = {{"dir", *opts.out_dir}};
    const OptimizeConfig cfg = parse_optimize_config(config_json);

    const OptimizationResult result = optimize(cfg.problem, cfg.seed);

    ensure_dir(cfg.out_dir);
    const nlohmann::ordered_json report = optimization_report(config_json, cfg, result);
    dump_report(report, cfg.out_dir);
    write_text_file(cfg.out_dir + "/table.csv", optimize_table_csv(result));

    const auto g = result.best_gains.as_array();
    std::printf("best gains: [%.6g, %.6g, %.6g, %.6g]\n", g[0], g[1], g[2], g[3]);
    std::printf("objective_p=%.6g feasible=%s evaluations=%zu\n", result.best.objective_p,
                result.feasible_found ? "yes" : "no", result.history.size());
    if (!result.feasible_found) {
        std::fprintf(stderr, "error: no verified feasible design within the budget\n");
        return kExitInfeasible;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rare-event probability estimation and chance-constrained gain tuning"};
    app.require_subcommand(1);

    CommonOpts estimate_opts;
    CommonOpts optimize_opts;
    CommonOpts benchmark_opts;
    CLI::App* estimate = app.add_subcommand("estimate", "run mcs/sus/sbss probability estimation");
    add_common(estimate, estimate_opts, true);
    CLI::App* optimize_cmd = app.add_subcommand("optimize", "chance-constrained gain optimization");
    add_common(optimize_cmd, optimize_opts, false);
    CLI::App* benchmark = app.add_subcommand("benchmark", "SuS vs SBSS call-count table");
    add_common(benchmark, benchmark_opts, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (estimate->parsed()) return run_estimate(estimate_opts);
        if (optimize_cmd->parsed()) return run_optimize(optimize_opts);
        if (benchmark->parsed()) return run_benchmark(benchmark_opts);
    } catch (const raresim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCompute;
    }
    return kExitOk;
}
