#pragma once

// Minimal continuous-time LTI machinery: fixed-step RK4 simulation,
// frequency response, and gain/phase margins of a SISO loop transfer.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

namespace raresim {

struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    Eigen::MatrixXd D;

    Eigen::Index states() const { return A.rows(); }
    Eigen::Index inputs() const { return B.cols(); }
    Eigen::Index outputs() const { return C.rows(); }

    // Largest real part of the spectrum of A.
    double spectral_abscissa() const;
};

struct SimResult {
    std::vector<double> time;
    // samples x outputs, uniformly sampled including t=0
    Eigen::MatrixXd outputs;
    bool blew_up = false;
};

// Classic RK4 with the input sampled at t, t+dt/2, t+dt; global error O(dt^4).
// Divergence (state norm overflow) is flagged, not silently propagated.
SimResult simulate_lti(const StateSpace& sys,
                       const std::function<Eigen::VectorXd(double)>& input, double t_final,
                       double dt);

// SISO frequency response C(jw I - A)^{-1} B + D.
std::complex<double> transfer_at(const StateSpace& sys, std::complex<double> s);

struct Margins {
    double gain_margin_db = 0.0;
    double phase_margin_deg = 0.0;
};

// Worst-case margins of the SISO loop transfer over all crossovers found in
// [w_min, w_max]; +infinity when no crossover exists.
Margins stability_margins(const StateSpace& loop, double w_min = 1e-4, double w_max = 1e4,
                          int sweep_points = 1200);

// Step-response metrics against the commanded steady value.
double overshoot_percent(const SimResult& sim, int output, double commanded);
double rise_time_to_fraction(const SimResult& sim, int output, double commanded,
                             double fraction);

}  // namespace raresim
