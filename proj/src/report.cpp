#include "raresim/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "raresim/stats.hpp"

namespace raresim {

namespace {

using nlohmann::ordered_json;

ordered_json num_or_null(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ordered_json estimate_to_json(const EstimationResult& r) {
    ordered_json j;
    j["method"] = r.method;
    j["p_hat"] = num_or_null(r.p_hat);
    j["levels"] = r.levels;
    j["n_f"] = r.n_f;
    j["cov_lower"] = num_or_null(r.cov_lower);
    j["cov_upper"] = num_or_null(r.cov_upper);
    j["true_calls"] = r.true_calls;
    j["converged"] = r.converged;
    j["thresholds"] = r.thresholds;
    j["cond_probs"] = r.cond_probs;
    j["level_records"] = ordered_json::array();
    for (const auto& rec : r.level_records) {
        ordered_json rj;
        rj["level"] = rec.level;
        rj["threshold"] = num_or_null(rec.threshold);
        rj["threshold_tilde"] = num_or_null(rec.threshold_tilde);
        rj["cond_prob"] = num_or_null(rec.cond_prob);
        rj["true_calls"] = rec.true_calls;
        if (rec.rsm_order >= 0) {
            rj["rsm_order"] = rec.rsm_order;
            rj["rsm_eps_loo_rel"] = num_or_null(rec.rsm_eps_loo_rel);
        }
        j["level_records"].push_back(rj);
    }
    return j;
}

ordered_json report_header(const char* command, std::uint64_t seed,
                           const nlohmann::json& config_echo) {
    ordered_json j;
    j["tool"] = "raresim";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = config_echo;
    return j;
}

}  // namespace

nlohmann::ordered_json estimation_report(const nlohmann::json& config_echo, const RunConfig& cfg,
                                         const std::vector<ReplicateResult>& replicates) {
    ordered_json j = report_header("estimate", cfg.seed, config_echo);
    j["replicates"] = ordered_json::array();
    std::vector<double> p_hats;
    std::vector<double> lowers;
    std::vector<double> uppers;
    long long total_calls = 0;
    bool all_converged = true;
    for (std::size_t i = 0; i < replicates.size(); ++i) {
        ordered_json rj = estimate_to_json(replicates[i].estimate);
        rj["replicate"] = i;
        rj["seed"] = replicates[i].seed;
        j["replicates"].push_back(rj);
        total_calls += replicates[i].estimate.true_calls;
        all_converged = all_converged && replicates[i].estimate.converged;
        if (replicates[i].estimate.converged) {
            p_hats.push_back(replicates[i].estimate.p_hat);
            if (std::isfinite(replicates[i].estimate.cov_lower))
                lowers.push_back(replicates[i].estimate.cov_lower);
            if (std::isfinite(replicates[i].estimate.cov_upper))
                uppers.push_back(replicates[i].estimate.cov_upper);
        }
    }
    ordered_json agg;
    agg["runs"] = replicates.size();
    agg["all_converged"] = all_converged;
    agg["total_true_calls"] = total_calls;
    if (!p_hats.empty()) {
        const double mean = mean_of(p_hats);
        agg["mean_p_hat"] = num_or_null(mean);
        if (p_hats.size() > 1 && mean > 0.0) {
            agg["empirical_cov"] = num_or_null(std::sqrt(variance_of(p_hats)) / mean);
        } else {
            agg["empirical_cov"] = nullptr;
        }
        agg["mean_cov_lower"] = lowers.empty() ? ordered_json(nullptr) : num_or_null(mean_of(lowers));
        agg["mean_cov_upper"] = uppers.empty() ? ordered_json(nullptr) : num_or_null(mean_of(uppers));
    }
    j["aggregate"] = agg;
    validate_report(j);
    return j;
}

nlohmann::ordered_json benchmark_report(const nlohmann::json& config_echo,
                                        const BenchmarkConfig& cfg,
                                        const std::vector<BenchmarkRowResult>& rows) {
    ordered_json j = report_header("benchmark", cfg.seed, config_echo);
    j["rows"] = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json rj;
        rj["samples_per_level"] = row.spec.samples_per_level;
        rj["target_levels"] = row.spec.levels;
        rj["ok"] = row.ok;
        if (!row.ok) {
            rj["error"] = row.error;
        } else {
            rj["levels_sus"] = row.levels_sus;
            rj["levels_sbss"] = row.levels_sbss;
            rj["calls_sus"] = row.calls_sus;
            rj["calls_sbss"] = row.calls_sbss;
            rj["p_hat_sus"] = num_or_null(row.p_hat_sus);
            rj["p_hat_sbss"] = num_or_null(row.p_hat_sbss);
            rj["true_pf"] = num_or_null(row.true_pf);
        }
        j["rows"].push_back(rj);
    }
    validate_report(j);
    return j;
}

namespace {

ordered_json design_to_json(const DesignEvaluation& e) {
    ordered_json j;
    j["gains"] = e.gains.as_array();
    j["seed"] = e.seed;
    j["failed"] = e.failed;
    if (e.failed) j["failure"] = e.failure;
    j["objective_p"] = num_or_null(e.objective_p);
    j["c1"] = num_or_null(e.c1);
    j["c2"] = num_or_null(e.c2);
    j["deterministic_ok"] = e.deterministic_ok;
    j["feasible"] = e.feasible;
    j["violation"] = num_or_null(e.violation);
    j["calls"] = {{"pce", e.calls_pce},
                  {"sbss", e.calls_sbss},
                  {"deterministic", e.calls_deterministic}};
    j["constraints"] = ordered_json::array();
    for (const auto& c : e.constraints) {
        ordered_json cj;
        cj["function"] = function_name(c.constraint.function_index);
        cj["direction"] = c.constraint.direction == Direction::BelowLimit ? "below" : "above";
        cj["limit"] = c.constraint.limit;
        cj["beta"] = c.constraint.beta;
        cj["estimator"] = c.constraint.estimator == EstimatorKind::Sbss ? "sbss" : "mcs";
        cj["p_hat"] = num_or_null(c.p_hat);
        cj["cov_lower"] = num_or_null(c.cov_lower);
        cj["cov_upper"] = num_or_null(c.cov_upper);
        cj["true_calls"] = c.true_calls;
        cj["inflated"] = c.constraint.inflate;
        cj["upper_bound_only"] = c.upper_bound_only;
        cj["comparison_value"] = num_or_null(c.comparison_value);
        cj["satisfied"] = c.satisfied;
        j["constraints"].push_back(cj);
    }
    return j;
}

}  // namespace

nlohmann::ordered_json optimization_report(const nlohmann::json& config_echo,
                                           const OptimizeConfig& cfg,
                                           const OptimizationResult& result) {
    ordered_json j = report_header("optimize", cfg.seed, config_echo);
    j["feasible_found"] = result.feasible_found;
    j["best_gains"] = result.best_gains.as_array();
    j["best"] = design_to_json(result.best);
    if (result.feasible_found) j["verification"] = design_to_json(result.verification);
    j["total_calls"] = {{"pce", result.total_calls_pce},
                        {"sbss", result.total_calls_sbss},
                        {"deterministic", result.total_calls_deterministic}};
    j["evaluations"] = result.history.size();
    j["history"] = ordered_json::array();
    for (const auto& e : result.history) {
        ordered_json h;
        h["gains"] = e.gains.as_array();
        h["feasible"] = e.feasible;
        h["failed"] = e.failed;
        h["objective_p"] = num_or_null(e.objective_p);
        h["violation"] = num_or_null(e.violation);
        j["history"].push_back(h);
    }
    validate_report(j);
    return j;
}

namespace {

void check_finite_numbers(const ordered_json& node, const std::string& path) {
    if (node.is_number_float()) {
        const double v = node.get<double>();
        if (!std::isfinite(v))
            throw std::runtime_error("report validation: non-finite number at " + path);
    } else if (node.is_object()) {
        for (const auto& [key, value] : node.items()) check_finite_numbers(value, path + "." + key);
    } else if (node.is_array()) {
        for (std::size_t i = 0; i < node.size(); ++i)
            check_finite_numbers(node.at(i), path + "[" + std::to_string(i) + "]");
    }
}

}  // namespace

void validate_report(const nlohmann::ordered_json& report) {
    for (const char* key : {"tool", "version", "command", "seed", "config"}) {
        if (!report.contains(key))
            throw std::runtime_error(std::string("report validation: missing key ") + key);
    }
    const std::string command = report.at("command").get<std::string>();
    if (command == "estimate") {
        if (!report.contains("replicates") || !report.contains("aggregate"))
            throw std::runtime_error("report validation: estimate report incomplete");
    } else if (command == "benchmark") {
        if (!report.contains("rows"))
            throw std::runtime_error("report validation: benchmark report incomplete");
    } else if (command == "optimize") {
        for (const char* key : {"feasible_found", "best_gains", "best", "total_calls"}) {
            if (!report.contains(key))
                throw std::runtime_error("report validation: optimize report incomplete");
        }
    } else {
        throw std::runtime_error("report validation: unknown command " + command);
    }
    check_finite_numbers(report, "$");
}

std::string levels_csv(const std::vector<ReplicateResult>& replicates) {
    std::string out =
        "replicate,level,threshold,threshold_tilde,cond_prob,true_calls,rsm_order,rsm_eps_loo_rel\n";
    for (std::size_t i = 0; i < replicates.size(); ++i) {
        for (const auto& rec : replicates[i].estimate.level_records) {
            out += std::to_string(i) + "," + std::to_string(rec.level) + "," + fmt(rec.threshold) +
                   ",";
            out += std::isfinite(rec.threshold_tilde) ? fmt(rec.threshold_tilde) : "";
            out += "," + fmt(rec.cond_prob) + "," + std::to_string(rec.true_calls) + ",";
            out += rec.rsm_order >= 0 ? std::to_string(rec.rsm_order) : "";
            out += ",";
            out += rec.rsm_order >= 0 ? fmt(rec.rsm_eps_loo_rel) : "";
            out += "\n";
        }
    }
    return out;
}

std::string cdf_csv(const std::vector<ReplicateResult>& replicates, double p0) {
    // Staircase points: P[h <= b_j] = p0^j for intermediate thresholds, the
    // final point is (0, p_hat).
    std::string out = "replicate,threshold,probability\n";
    for (std::size_t i = 0; i < replicates.size(); ++i) {
        const auto& est = replicates[i].estimate;
        double prob = 1.0;
        for (int j = 0; j + 1 < est.levels; ++j) {
            prob *= p0;
            out += std::to_string(i) + "," + fmt(est.thresholds[static_cast<std::size_t>(j)]) +
                   "," + fmt(prob) + "\n";
        }
        if (est.converged) {
            out += std::to_string(i) + ",0," + fmt(est.p_hat) + "\n";
        }
    }
    return out;
}

std::string benchmark_csv(const std::vector<BenchmarkRowResult>& rows) {
    std::string out = "samples_per_level,levels,calls_sus,calls_sbss,ok,error\n";
    for (const auto& row : rows) {
        out += std::to_string(row.spec.samples_per_level) + "," + std::to_string(row.spec.levels) +
               ",";
        if (row.ok) {
            out += std::to_string(row.calls_sus) + "," + std::to_string(row.calls_sbss) + ",1,";
        } else {
            out += ",,0," + row.error;
        }
        out += "\n";
    }
    return out;
}

std::string optimize_table_csv(const OptimizationResult& result) {
    std::string out = "function,description,p_v,cov_lower,cov_upper,N_call\n";
    const DesignEvaluation& e = result.feasible_found ? result.verification : result.best;
    out += "h0," + function_description(0) + "," + fmt(e.objective_p) + ",,," +
           std::to_string(e.objective_calls) + "\n";
    for (const auto& c : e.constraints) {
        out += function_name(c.constraint.function_index) + "," +
               function_description(c.constraint.function_index) + "," + fmt(c.p_hat) + ",";
        out += std::isfinite(c.cov_lower) ? fmt(c.cov_lower) : "";
        out += ",";
        out += std::isfinite(c.cov_upper) ? fmt(c.cov_upper) : "";
        out += "," + std::to_string(c.true_calls) + "\n";
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

}  // namespace raresim
