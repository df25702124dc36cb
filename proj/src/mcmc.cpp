#include "raresim/mcmc.hpp"

#include <cmath>
#include <stdexcept>

namespace raresim {

ConditionalKernel::ConditionalKernel(double rho) : rho_(rho) {
    if (!(rho >= 0.0 && rho < 1.0))
        throw std::invalid_argument("ConditionalKernel: rho must be in [0,1)");
}

std::vector<double> ConditionalKernel::propose(std::span<const double> current,
                                               RngStream& rng) const {
    const double spread = std::sqrt(1.0 - rho_ * rho_);
    std::vector<double> candidate(current.size());
    for (std::size_t r = 0; r < current.size(); ++r) {
        candidate[r] = rho_ * current[r] + spread * rng.normal();
    }
    return candidate;
}

Chain advance_chain(const ConditionalKernel& kernel, std::span<const double> seed,
                    std::size_t length, const ScreenFn& screen, RngStream& rng) {
    if (length < 1) throw std::invalid_argument("advance_chain: length must be >= 1");
    Chain chain;
    chain.states.reserve(length);
    chain.states.emplace_back(seed.begin(), seed.end());
    chain.accepted.reserve(length - 1);
    for (std::size_t k = 1; k < length; ++k) {
        std::vector<double> candidate = kernel.propose(chain.states.back(), rng);
        ++chain.screen_calls;
        if (screen(candidate)) {
            chain.states.push_back(std::move(candidate));
            chain.accepted.push_back(true);
        } else {
            std::vector<double> repeat = chain.states.back();
            chain.states.push_back(std::move(repeat));
            chain.accepted.push_back(false);
        }
    }
    return chain;
}

}  // namespace raresim
