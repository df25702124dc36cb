#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace raresim {

// A performance-function evaluator h(theta). Must be pure and reentrant:
// fits and simulation levels may evaluate it from several threads.
using Evaluator = std::function<double(std::span<const double>)>;

// Configuration rejected before any computation.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Experimental design unusable for regression (rank deficiency, constant
// responses, no feasible order).
class DegenerateDesignError : public std::runtime_error {
public:
    explicit DegenerateDesignError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace raresim
