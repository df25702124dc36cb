#include "raresim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace raresim {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (ok.find(key) == ok.end()) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

double get_num(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) throw ConfigError(std::string("expected number for ") + key);
    return obj.at(key).get<double>();
}

std::size_t get_size(const json& obj, const char* key, std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw ConfigError(std::string("expected integer for ") + key);
    const long long raw = v.get<long long>();
    if (raw < 0) throw ConfigError(std::string("expected non-negative integer for ") + key);
    return static_cast<std::size_t>(raw);
}

int get_int(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer() && !obj.at(key).is_number_unsigned())
        throw ConfigError(std::string("expected integer for ") + key);
    return obj.at(key).get<int>();
}

std::vector<MarginalDistribution> parse_marginals(const json& arr) {
    if (!arr.is_array() || arr.empty()) throw ConfigError("distribution: marginals must be a non-empty array");
    std::vector<MarginalDistribution> out;
    for (const auto& m : arr) {
        check_keys(m, "marginal", {"family", "mean", "std", "lower", "upper"});
        const std::string family = m.at("family").get<std::string>();
        if (family == "gaussian") {
            out.push_back(MarginalDistribution::gaussian(get_num(m, "mean", 0.0), get_num(m, "std", 1.0)));
        } else if (family == "uniform") {
            out.push_back(MarginalDistribution::uniform(get_num(m, "lower", 0.0), get_num(m, "upper", 1.0)));
        } else {
            throw ConfigError("distribution: unknown family '" + family + "'");
        }
    }
    return out;
}

FlightParams parse_flight_params(const json& obj) {
    FlightParams p;
    if (obj.is_null()) return p;
    check_keys(obj, "model",
               {"airspeed", "gravity", "z_alpha", "z_eta", "m_alpha_ref", "m_q_ref", "m_eta_ref",
                "actuator_omega", "actuator_zeta", "bending_omega", "bending_zeta", "bending_gain",
                "notch_omega", "notch_zeta", "gust_length", "gust_amplitude", "sim_t_final",
                "sim_dt", "c_d1", "c_d2"});
    p.airspeed = get_num(obj, "airspeed", p.airspeed);
    p.gravity = get_num(obj, "gravity", p.gravity);
    p.z_alpha = get_num(obj, "z_alpha", p.z_alpha);
    p.z_eta = get_num(obj, "z_eta", p.z_eta);
    p.m_alpha_ref = get_num(obj, "m_alpha_ref", p.m_alpha_ref);
    p.m_q_ref = get_num(obj, "m_q_ref", p.m_q_ref);
    p.m_eta_ref = get_num(obj, "m_eta_ref", p.m_eta_ref);
    p.actuator_omega = get_num(obj, "actuator_omega", p.actuator_omega);
    p.actuator_zeta = get_num(obj, "actuator_zeta", p.actuator_zeta);
    p.bending_omega = get_num(obj, "bending_omega", p.bending_omega);
    p.bending_zeta = get_num(obj, "bending_zeta", p.bending_zeta);
    p.bending_gain = get_num(obj, "bending_gain", p.bending_gain);
    p.notch_omega = get_num(obj, "notch_omega", p.notch_omega);
    p.notch_zeta = get_num(obj, "notch_zeta", p.notch_zeta);
    p.gust.length_m = get_num(obj, "gust_length", p.gust.length_m);
    p.gust.amplitude_mps = get_num(obj, "gust_amplitude", p.gust.amplitude_mps);
    p.sim_t_final = get_num(obj, "sim_t_final", p.sim_t_final);
    p.sim_dt = get_num(obj, "sim_dt", p.sim_dt);
    p.c_d1 = get_num(obj, "c_d1", p.c_d1);
    p.c_d2 = get_num(obj, "c_d2", p.c_d2);
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    return p;
}

GainVector parse_gains(const json& arr) {
    if (!arr.is_array() || arr.size() != 4) throw ConfigError("gains: expected 4 values");
    std::vector<double> v = arr.get<std::vector<double>>();
    return GainVector::from_array(v);
}

Direction parse_direction(const std::string& s) {
    if (s == "below") return Direction::BelowLimit;
    if (s == "above") return Direction::AboveLimit;
    throw ConfigError("direction must be 'below' or 'above'");
}

SbssConfig parse_method_sbss(const json& m) {
    SbssConfig cfg;
    cfg.sus.samples_per_level = get_size(m, "samples_per_level", cfg.sus.samples_per_level);
    cfg.sus.p0 = get_num(m, "p0", cfg.sus.p0);
    cfg.sus.max_levels = get_int(m, "max_levels", cfg.sus.max_levels);
    cfg.sus.proposal_rho = get_num(m, "proposal_rho", cfg.sus.proposal_rho);
    cfg.p0_tilde = get_num(m, "p0_tilde", cfg.p0_tilde);
    cfg.pce_order = get_int(m, "pce_order", cfg.pce_order);
    cfg.quad_nodes_per_dim = get_int(m, "quad_nodes", cfg.quad_nodes_per_dim);
    if (m.contains("rsm_orders")) {
        const auto& r = m.at("rsm_orders");
        if (!r.is_array() || r.size() != 2) throw ConfigError("method: rsm_orders must be [min, max]");
        cfg.rsm_order_min = r.at(0).get<int>();
        cfg.rsm_order_max = r.at(1).get<int>();
    }
    return cfg;
}

}  // namespace

int function_index_from_name(const std::string& name) {
    if (name == "h0") return 0;
    if (name == "h1") return 1;
    if (name == "h2") return 2;
    if (name == "h3") return 3;
    if (name == "h4") return 4;
    throw ConfigError("unknown performance function '" + name + "' (expected h0..h4)");
}

std::string function_name(int index) { return "h" + std::to_string(index); }

std::string function_description(int index) {
    switch (index) {
        case 0: return "maximum negative deviation of gust reaction";
        case 1: return "gain margin";
        case 2: return "phase margin";
        case 3: return "overshoot of step response";
        case 4: return "80% rise time of step response";
        default: return "unknown";
    }
}

GainVector default_flight_gains() { return {2.0, -1.7, 3.6, -9.4}; }

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return j;
}

RunConfig parse_run_config(const json& j) {
    check_keys(j, "config", {"problem", "distribution", "method", "replicates", "seed", "output"});
    if (!j.contains("problem") || !j.contains("method"))
        throw ConfigError("config: 'problem' and 'method' sections are required");

    RunConfig cfg;
    const json& pj = j.at("problem");
    cfg.problem.kind = pj.value("kind", "");
    if (cfg.problem.kind == "linear" || cfg.problem.kind == "quadratic" ||
        cfg.problem.kind == "quartic") {
        check_keys(pj, "problem", {"kind", "dim", "beta", "ridge_a", "ridge_c", "ridge_e"});
        cfg.problem.analytic = AnalyticLimitState::from_name(cfg.problem.kind,
                                                             get_int(pj, "dim", 3),
                                                             get_num(pj, "beta", 3.0));
        cfg.problem.analytic.ridge_a = get_num(pj, "ridge_a", cfg.problem.analytic.ridge_a);
        cfg.problem.analytic.ridge_c = get_num(pj, "ridge_c", cfg.problem.analytic.ridge_c);
        cfg.problem.analytic.ridge_e = get_num(pj, "ridge_e", cfg.problem.analytic.ridge_e);
        if (cfg.problem.analytic.dim < 1) throw ConfigError("problem: dim must be >= 1");
    } else if (cfg.problem.kind == "flight") {
        check_keys(pj, "problem", {"kind", "function", "direction", "limit", "gains", "model"});
        cfg.problem.function_index = function_index_from_name(pj.value("function", "h1"));
        cfg.problem.direction = parse_direction(pj.value("direction", "below"));
        cfg.problem.limit = get_num(pj, "limit", 6.0);
        cfg.problem.gains =
            pj.contains("gains") ? parse_gains(pj.at("gains")) : default_flight_gains();
        cfg.problem.params = parse_flight_params(pj.value("model", json()));
    } else {
        throw ConfigError("problem: kind must be linear|quadratic|quartic|flight");
    }

    if (j.contains("distribution")) {
        check_keys(j.at("distribution"), "distribution", {"marginals"});
        cfg.problem.marginals = parse_marginals(j.at("distribution").at("marginals"));
    }

    const json& mj = j.at("method");
    check_keys(mj, "method",
               {"kind", "samples", "samples_per_level", "p0", "p0_tilde", "pce_order",
                "quad_nodes", "rsm_orders", "proposal_rho", "max_levels"});
    cfg.method.kind = mj.value("kind", "sus");
    if (cfg.method.kind != "mcs" && cfg.method.kind != "sus" && cfg.method.kind != "sbss")
        throw ConfigError("method: kind must be mcs|sus|sbss");
    cfg.method.mcs_samples = get_size(mj, "samples", cfg.method.mcs_samples);
    cfg.method.sbss = parse_method_sbss(mj);

    cfg.replicates = get_int(j, "replicates", 1);
    if (cfg.replicates < 1) throw ConfigError("config: replicates must be >= 1");
    cfg.seed = static_cast<std::uint64_t>(get_size(j, "seed", 1));
    if (j.contains("output")) {
        check_keys(j.at("output"), "output", {"dir"});
        cfg.out_dir = j.at("output").value("dir", cfg.out_dir);
    }

    // Validate the method block against module preconditions up front.
    const std::size_t dim = cfg.problem.kind == "flight"
                                ? 3
                                : static_cast<std::size_t>(cfg.problem.analytic.dim);
    if (cfg.problem.marginals && cfg.problem.marginals->size() != dim)
        throw ConfigError("distribution: marginal count must match the problem dimension");
    if (cfg.method.kind == "sus") {
        cfg.warnings = cfg.method.sbss.sus.validate();
    } else if (cfg.method.kind == "sbss") {
        cfg.warnings = cfg.method.sbss.validate(dim);
    } else if (cfg.method.mcs_samples < 10) {
        throw ConfigError("method: samples too small for mcs");
    }
    return cfg;
}

BenchmarkConfig parse_benchmark_config(const json& j) {
    check_keys(j, "config", {"benchmark", "seed", "output"});
    if (!j.contains("benchmark")) throw ConfigError("config: 'benchmark' section required");
    const json& b = j.at("benchmark");
    check_keys(b, "benchmark",
               {"rows", "p0", "p0_tilde", "pce_order", "quad_nodes", "rsm_orders",
                "proposal_rho", "max_levels"});
    BenchmarkConfig cfg;
    cfg.sbss = parse_method_sbss(b);
    if (!b.contains("rows") || !b.at("rows").is_array() || b.at("rows").empty())
        throw ConfigError("benchmark: non-empty 'rows' array required");
    for (const auto& row : b.at("rows")) {
        check_keys(row, "benchmark row", {"samples_per_level", "levels"});
        BenchmarkRowSpec spec;
        spec.samples_per_level = get_size(row, "samples_per_level", 1000);
        spec.levels = get_int(row, "levels", 6);
        if (spec.levels < 1) throw ConfigError("benchmark: levels must be >= 1");
        cfg.rows.push_back(spec);
    }
    cfg.seed = static_cast<std::uint64_t>(get_size(j, "seed", 1));
    if (j.contains("output")) {
        check_keys(j.at("output"), "output", {"dir"});
        cfg.out_dir = j.at("output").value("dir", cfg.out_dir);
    }
    // Row-specific N replaces the method default; validate each row.
    for (const auto& row : cfg.rows) {
        SbssConfig probe = cfg.sbss;
        probe.sus.samples_per_level = row.samples_per_level;
        probe.validate(3);
    }
    return cfg;
}

OptimizeConfig parse_optimize_config(const json& j) {
    check_keys(j, "config", {"problem", "budget", "sbss", "seed", "output"});
    if (!j.contains("problem")) throw ConfigError("config: 'problem' section required");
    const json& pj = j.at("problem");
    check_keys(pj, "problem",
               {"kind", "model", "gain_box", "objective", "constraints", "initial_gains"});
    if (pj.value("kind", "") != "flight-optimization")
        throw ConfigError("problem: kind must be flight-optimization");

    OptimizeConfig cfg;
    cfg.problem.params = parse_flight_params(pj.value("model", json()));
    if (!pj.contains("gain_box") || !pj.at("gain_box").is_array() || pj.at("gain_box").size() != 4)
        throw ConfigError("problem: gain_box must list 4 [lo, hi] pairs");
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& pair = pj.at("gain_box").at(i);
        if (!pair.is_array() || pair.size() != 2) throw ConfigError("problem: gain_box entries are [lo, hi]");
        cfg.problem.gain_box[i] = {pair.at(0).get<double>(), pair.at(1).get<double>()};
    }
    if (pj.contains("objective")) {
        const json& oj = pj.at("objective");
        check_keys(oj, "objective", {"function", "direction", "limit"});
        cfg.problem.objective_function = function_index_from_name(oj.value("function", "h0"));
        cfg.problem.objective_direction = parse_direction(oj.value("direction", "below"));
        cfg.problem.objective_limit = get_num(oj, "limit", -0.45);
    }
    if (!pj.contains("constraints") || !pj.at("constraints").is_array())
        throw ConfigError("problem: 'constraints' array required");
    for (const auto& cj : pj.at("constraints")) {
        check_keys(cj, "constraint",
                   {"function", "direction", "limit", "beta", "estimator", "inflate"});
        ChanceConstraint c;
        c.function_index = function_index_from_name(cj.at("function").get<std::string>());
        c.direction = parse_direction(cj.value("direction", "below"));
        c.limit = get_num(cj, "limit", 0.0);
        c.beta = get_num(cj, "beta", 0.1);
        const std::string est = cj.value("estimator", "mcs");
        if (est == "mcs") {
            c.estimator = EstimatorKind::SurrogateMcs;
        } else if (est == "sbss") {
            c.estimator = EstimatorKind::Sbss;
        } else {
            throw ConfigError("constraint: estimator must be mcs|sbss");
        }
        c.inflate = cj.value("inflate", c.estimator == EstimatorKind::Sbss);
        cfg.problem.constraints.push_back(c);
    }
    if (pj.contains("initial_gains")) cfg.problem.initial_guess = parse_gains(pj.at("initial_gains"));

    if (j.contains("budget")) {
        const json& bj = j.at("budget");
        check_keys(bj, "budget",
                   {"design_evaluations", "population", "mcs_samples", "pce_order", "quad_nodes",
                    "de_weight", "de_crossover"});
        cfg.problem.design_budget = get_size(bj, "design_evaluations", cfg.problem.design_budget);
        cfg.problem.population = get_size(bj, "population", cfg.problem.population);
        cfg.problem.mcs_samples = get_size(bj, "mcs_samples", cfg.problem.mcs_samples);
        cfg.problem.pce_order = get_int(bj, "pce_order", cfg.problem.pce_order);
        cfg.problem.quad_nodes_per_dim = get_int(bj, "quad_nodes", cfg.problem.quad_nodes_per_dim);
        cfg.problem.de_weight = get_num(bj, "de_weight", cfg.problem.de_weight);
        cfg.problem.de_crossover = get_num(bj, "de_crossover", cfg.problem.de_crossover);
    }
    if (j.contains("sbss")) cfg.problem.sbss = parse_method_sbss(j.at("sbss"));
    cfg.problem.sbss.validate(3);

    cfg.seed = static_cast<std::uint64_t>(get_size(j, "seed", 1));
    if (j.contains("output")) {
        check_keys(j.at("output"), "output", {"dir"});
        cfg.out_dir = j.at("output").value("dir", cfg.out_dir);
    }
    cfg.problem.validate();
    return cfg;
}

EstimationProblem build_estimation_problem(const ProblemConfig& problem) {
    if (problem.kind == "flight") {
        const int fi = problem.function_index;
        const Direction dir = problem.direction;
        const double limit = problem.limit;
        const GainVector gains = problem.gains;
        const FlightParams params = problem.params;
        PerformanceRequest req{fi == 0, fi == 1 || fi == 2, fi == 3 || fi == 4};
        Evaluator h = [fi, dir, limit, gains, params, req](std::span<const double> theta) {
            const PerformanceValues v = performance_functions(theta, gains, params, req);
            double raw;
            switch (fi) {
                case 0: raw = v.h0_gust_min; break;
                case 1: raw = v.h1_gain_margin_db; break;
                case 2: raw = v.h2_phase_margin_deg; break;
                case 3: raw = v.h3_overshoot_pct; break;
                default: raw = v.h4_rise_time_s; break;
            }
            return dir == Direction::BelowLimit ? raw - limit : limit - raw;
        };
        std::vector<MarginalDistribution> marginals =
            problem.marginals.value_or(std::vector<MarginalDistribution>(
                3, MarginalDistribution::gaussian(1.0, 0.15)));
        const std::string dir_text = dir == Direction::BelowLimit ? " < " : " > ";
        return {std::move(h), UncertainVector(std::move(marginals)),
                "flight " + function_name(fi) + dir_text + std::to_string(limit)};
    }
    const AnalyticLimitState ls = problem.analytic;
    UncertainVector uv = problem.marginals ? UncertainVector(*problem.marginals) : ls.inputs();
    return {ls.evaluator(), std::move(uv), problem.kind + " beta=" + std::to_string(ls.beta)};
}

}  // namespace raresim
