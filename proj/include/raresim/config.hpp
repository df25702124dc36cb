#pragma once

// Run-config parsing and validation. Configs are JSON with nested sections;
// unknown keys are rejected so typos fail fast, and every value is checked
// against the consuming module's preconditions before any computation runs.

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "raresim/analytic.hpp"
#include "raresim/chanceopt.hpp"
#include "raresim/common.hpp"
#include "raresim/flight.hpp"
#include "raresim/sbss.hpp"

namespace raresim {

struct ProblemConfig {
    std::string kind;  // linear | quadratic | quartic | flight
    AnalyticLimitState analytic;
    int function_index = 1;  // flight: which h_i
    Direction direction = Direction::BelowLimit;
    double limit = 6.0;
    GainVector gains;
    FlightParams params;
    std::optional<std::vector<MarginalDistribution>> marginals;
};

struct MethodConfig {
    std::string kind = "sus";  // mcs | sus | sbss
    std::size_t mcs_samples = 100000;
    SbssConfig sbss;  // carries the SuS block for kind == "sus" too
};

struct RunConfig {
    ProblemConfig problem;
    MethodConfig method;
    int replicates = 1;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::vector<std::string> warnings;
};

struct BenchmarkRowSpec {
    std::size_t samples_per_level = 1000;
    int levels = 6;
};

struct BenchmarkConfig {
    std::vector<BenchmarkRowSpec> rows;
    SbssConfig sbss;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
};

struct OptimizeConfig {
    OptimizationProblem problem;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
};

RunConfig parse_run_config(const nlohmann::json& j);
BenchmarkConfig parse_benchmark_config(const nlohmann::json& j);
OptimizeConfig parse_optimize_config(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);

// The (evaluator, inputs) pair a run estimates on; failure is h <= 0.
struct EstimationProblem {
    Evaluator h;
    UncertainVector inputs;
    std::string description;
};

EstimationProblem build_estimation_problem(const ProblemConfig& problem);

// Default flight gains used by configs that do not specify their own; chosen
// so the nominal closed loop meets all Table-style requirements with margin.
GainVector default_flight_gains();

int function_index_from_name(const std::string& name);
std::string function_name(int index);
std::string function_description(int index);

}  // namespace raresim
