#pragma once

// Run-report assembly. Reports are deterministic functions of (config,
// seed): ordered keys, no timestamps, non-finite numbers mapped to null.
// Every report is schema-validated before it is written.

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "raresim/chanceopt.hpp"
#include "raresim/config.hpp"
#include "raresim/sus.hpp"

namespace raresim {

inline constexpr const char* kToolVersion = "1.0.0";

struct ReplicateResult {
    std::uint64_t seed = 0;
    EstimationResult estimate;
};

nlohmann::ordered_json estimation_report(const nlohmann::json& config_echo,
                                         const RunConfig& cfg,
                                         const std::vector<ReplicateResult>& replicates);

struct BenchmarkRowResult {
    BenchmarkRowSpec spec;
    bool ok = false;
    std::string error;
    int levels_sus = 0;
    int levels_sbss = 0;
    long long calls_sus = 0;
    long long calls_sbss = 0;
    double p_hat_sus = 0.0;
    double p_hat_sbss = 0.0;
    double true_pf = 0.0;
};

nlohmann::ordered_json benchmark_report(const nlohmann::json& config_echo,
                                        const BenchmarkConfig& cfg,
                                        const std::vector<BenchmarkRowResult>& rows);

nlohmann::ordered_json optimization_report(const nlohmann::json& config_echo,
                                           const OptimizeConfig& cfg,
                                           const OptimizationResult& result);

// Throws std::runtime_error when a report misses required keys or carries
// non-finite numbers.
void validate_report(const nlohmann::ordered_json& report);

std::string levels_csv(const std::vector<ReplicateResult>& replicates);
std::string cdf_csv(const std::vector<ReplicateResult>& replicates, double p0);
std::string benchmark_csv(const std::vector<BenchmarkRowResult>& rows);
std::string optimize_table_csv(const OptimizationResult& result);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace raresim
