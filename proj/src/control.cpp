#include "raresim/control.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace raresim {

double StateSpace::spectral_abscissa() const {
    const Eigen::VectorXcd eigs = A.eigenvalues();
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eigs.size(); ++i) worst = std::max(worst, eigs(i).real());
    return worst;
}

SimResult simulate_lti(const StateSpace& sys,
                       const std::function<Eigen::VectorXd(double)>& input, double t_final,
                       double dt) {
    if (!(dt > 0.0) || !(t_final > dt)) throw std::invalid_argument("simulate_lti: need T > dt > 0");
    const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
    SimResult sim;
    sim.time.resize(steps + 1);
    sim.outputs.resize(static_cast<Eigen::Index>(steps) + 1, sys.outputs());

    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.states());
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        sim.time[k] = t;
        const Eigen::VectorXd u_t = input(t);
        sim.outputs.row(static_cast<Eigen::Index>(k)) = (sys.C * x + sys.D * u_t).transpose();
        if (k == steps) break;

        const Eigen::VectorXd u_half = input(t + 0.5 * dt);
        const Eigen::VectorXd u_next = input(t + dt);
        const Eigen::VectorXd k1 = sys.A * x + sys.B * u_t;
        const Eigen::VectorXd k2 = sys.A * (x + 0.5 * dt * k1) + sys.B * u_half;
        const Eigen::VectorXd k3 = sys.A * (x + 0.5 * dt * k2) + sys.B * u_half;
        const Eigen::VectorXd k4 = sys.A * (x + dt * k3) + sys.B * u_next;
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e12) {
            sim.blew_up = true;
            sim.time.resize(k + 2);
            sim.outputs.conservativeResize(static_cast<Eigen::Index>(k) + 2, Eigen::NoChange);
            sim.outputs.row(static_cast<Eigen::Index>(k) + 1).setZero();
            return sim;
        }
    }
    return sim;
}

std::complex<double> transfer_at(const StateSpace& sys, std::complex<double> s) {
    if (sys.inputs() != 1 || sys.outputs() != 1)
        throw std::invalid_argument("transfer_at: SISO systems only");
    const Eigen::Index n = sys.states();
    Eigen::MatrixXcd m = -sys.A.cast<std::complex<double>>();
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) += s;
    const Eigen::VectorXcd sol = m.partialPivLu().solve(sys.B.cast<std::complex<double>>().col(0));
    const std::complex<double> y = (sys.C.cast<std::complex<double>>().row(0) * sol)(0, 0);
    return y + std::complex<double>(sys.D(0, 0), 0.0);
}

namespace {

// Bisect f to a root in [lo, hi] given opposite signs at the ends.
template <typename Fn>
double bisect(Fn&& f, double lo, double hi, double f_lo) {
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if ((f_mid <= 0.0) == (f_lo <= 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Phase in (-360, 0] so PM = 180 + phase follows the classical convention.
double wrapped_phase_deg(std::complex<double> z) {
    double deg = std::atan2(z.imag(), z.real()) * 57.29577951308232087679815;
    if (deg > 0.0) deg -= 360.0;
    return deg;
}

}  // namespace

Margins stability_margins(const StateSpace& loop, double w_min, double w_max,
                          int sweep_points) {
    if (loop.inputs() != 1 || loop.outputs() != 1)
        throw std::invalid_argument("stability_margins: SISO loop transfer required");
    const double inf = std::numeric_limits<double>::infinity();
    Margins margins{inf, inf};

    const double log_lo = std::log10(w_min);
    const double log_hi = std::log10(w_max);
    std::vector<double> w(static_cast<std::size_t>(sweep_points));
    std::vector<std::complex<double>> response(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(w.size() - 1);
        w[i] = std::pow(10.0, log_lo + frac * (log_hi - log_lo));
        response[i] = transfer_at(loop, {0.0, w[i]});
        if (!std::isfinite(response[i].real()) || !std::isfinite(response[i].imag()))
            throw std::runtime_error("stability_margins: frequency sweep failure");
    }

    // Phase crossovers: Im(L) changes sign on the negative-real side.
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const bool sign_change = (response[i].imag() <= 0.0) != (response[i + 1].imag() <= 0.0);
        if (!sign_change) continue;
        if (response[i].real() >= 0.0 && response[i + 1].real() >= 0.0) continue;
        const auto im_at = [&](double omega) { return transfer_at(loop, {0.0, omega}).imag(); };
        const double w_pc = bisect(im_at, w[i], w[i + 1], response[i].imag());
        const std::complex<double> l_pc = transfer_at(loop, {0.0, w_pc});
        if (l_pc.real() >= 0.0) continue;
        const double gm = -20.0 * std::log10(std::abs(l_pc));
        margins.gain_margin_db = std::min(margins.gain_margin_db, gm);
    }

    // Gain crossovers: |L| crosses 1.
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const double g0 = std::abs(response[i]) - 1.0;
        const double g1 = std::abs(response[i + 1]) - 1.0;
        if ((g0 <= 0.0) == (g1 <= 0.0)) continue;
        const auto mag_at = [&](double omega) {
            return std::abs(transfer_at(loop, {0.0, omega})) - 1.0;
        };
        const double w_gc = bisect(mag_at, w[i], w[i + 1], g0);
        const std::complex<double> l_gc = transfer_at(loop, {0.0, w_gc});
        const double pm = 180.0 + wrapped_phase_deg(l_gc);
        margins.phase_margin_deg = std::min(margins.phase_margin_deg, pm);
    }
    return margins;
}

double overshoot_percent(const SimResult& sim, int output, double commanded) {
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < sim.outputs.rows(); ++k) {
        peak = std::max(peak, sim.outputs(k, output));
    }
    if (commanded == 0.0) throw std::invalid_argument("overshoot_percent: zero command");
    return std::max(0.0, (peak - commanded) / std::abs(commanded)) * 100.0;
}

double rise_time_to_fraction(const SimResult& sim, int output, double commanded,
                             double fraction) {
    const double target = fraction * commanded;
    for (Eigen::Index k = 1; k < sim.outputs.rows(); ++k) {
        const double y0 = sim.outputs(k - 1, output);
        const double y1 = sim.outputs(k, output);
        if (y0 < target && y1 >= target) {
            const double t0 = sim.time[static_cast<std::size_t>(k) - 1];
            const double t1 = sim.time[static_cast<std::size_t>(k)];
            return t0 + (t1 - t0) * (target - y0) / (y1 - y0);
        }
    }
    return std::numeric_limits<double>::infinity();  // never reached the level
}

}  // namespace raresim
