#pragma once

// Gaussian conditional-sampling MCMC in standard normal space. A candidate
// xi* = rho*xi + sqrt(1-rho^2)*eps leaves N(0,I) invariant and never equals
// the current state for rho < 1; acceptance is domain membership through a
// caller-provided screening closure.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "raresim/rng.hpp"

namespace raresim {

class ConditionalKernel {
public:
    explicit ConditionalKernel(double rho);

    double rho() const { return rho_; }

    std::vector<double> propose(std::span<const double> current, RngStream& rng) const;

private:
    double rho_;
};

// Returns true when the point lies inside the current intermediate domain.
// Called once per generated candidate, in chain order.
using ScreenFn = std::function<bool(std::span<const double>)>;

struct Chain {
    std::vector<std::vector<double>> states;  // length L, states[0] is the seed
    std::vector<bool> accepted;               // length L-1, per generated candidate
    long long screen_calls = 0;
};

// Chain of `length` samples starting from the seed, which is trusted to lie
// in the domain. Rejected candidates repeat the current state.
Chain advance_chain(const ConditionalKernel& kernel, std::span<const double> seed,
                    std::size_t length, const ScreenFn& screen, RngStream& rng);

}  // namespace raresim
