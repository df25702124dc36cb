#pragma once

// Linear longitudinal closed-loop benchmark: short-period dynamics with
// uncertain pitch-moment derivatives, second-order actuator, structural
// bending mode and notch filter, and a PID-with-feedforward load-factor
// control law. The numeric defaults are a documented configurable model, not
// a reproduction of any particular aircraft's data.
//
// State layout: [x_I, alpha, q, eta, eta_dot, x_b, x_b_dot, x_n1, x_n2]
// Inputs:       [n_z_cmd, w_z]
// Outputs:      [n_z, qdot_cmd, qddot_cmd, nz_dot]

#include <array>
#include <span>
#include <utility>

#include "raresim/control.hpp"

namespace raresim {

struct GainVector {
    double k_h = 0.0;   // feedforward on n_z_cmd
    double k_nz = 0.0;  // load-factor feedback
    double k_i = 0.0;   // integral of tracking error
    double k_q = 0.0;   // pitch-rate feedback

    std::array<double, 4> as_array() const { return {k_h, k_nz, k_i, k_q}; }
    static GainVector from_array(std::span<const double> v);
};

struct GustProfile {
    double length_m = 91.4;      // d_g
    double amplitude_mps = 13.9; // v_g
};

// Standard "1-cosine" gust: 0 before the gust, half-cosine ramp over the
// gust length, saturated at the amplitude afterwards.
double gust_velocity(const GustProfile& profile, double x_g);

// Defaults place the nominal short-period mode at 3 rad/s with 0.7 damping
// (Z_alpha*M_q - M_alpha = 9, -(Z_alpha+M_q) = 4.2) at a 95 m/s cruise; the
// default gains keep both margin failure probabilities in the 1e-7..1e-9
// band under the +/-15% derivative uncertainty.
struct FlightParams {
    double airspeed = 95.0;        // m/s
    double gravity = 9.80665;      // m/s^2
    double z_alpha = -1.4;         // 1/s, lift-curve term
    double z_eta = 0.0;            // 1/s, elevator lift term
    double m_alpha_ref = -5.08;    // 1/s^2
    double m_q_ref = -2.8;         // 1/s
    double m_eta_ref = -11.0;      // 1/s^2
    double actuator_omega = 40.0;  // rad/s
    double actuator_zeta = 0.7;
    double bending_omega = 60.0;   // rad/s, lightly damped structural mode
    double bending_zeta = 0.02;
    double bending_gain = 5.0;     // elevator-to-bending excitation
    double notch_omega = 60.0;     // rad/s, centered on the structural mode
    double notch_zeta = 0.3;
    GustProfile gust;
    double sim_t_final = 10.0;
    double sim_dt = 1e-3;
    double c_d1 = 4.0;  // mean-square qddot_cmd threshold
    double c_d2 = 1.0;  // mean-square nz_dot threshold

    void validate() const;
};

// Closed loop with the uncertain ratios theta = (M_alpha, M_q, M_eta) /
// reference values; matrix entries are affine in theta.
StateSpace assemble(std::span<const double> theta, const GainVector& gains,
                    const FlightParams& params);

// Loop transfer broken at the actuator command input (negative-feedback
// convention: closed-loop poles are the roots of 1 + L).
StateSpace loop_transfer(std::span<const double> theta, const GainVector& gains,
                         const FlightParams& params);

struct PerformanceValues {
    double h0_gust_min = 0.0;       // most negative n_z deviation under the gust
    double h1_gain_margin_db = 0.0;
    double h2_phase_margin_deg = 0.0;
    double h3_overshoot_pct = 0.0;
    double h4_rise_time_s = 0.0;
};

// Which trajectory/margin evaluations a caller needs; estimating one
// performance function should not pay for the others.
struct PerformanceRequest {
    bool gust = true;
    bool margins = true;
    bool step = true;
};

PerformanceValues performance_functions(std::span<const double> theta, const GainVector& gains,
                                        const FlightParams& params,
                                        const PerformanceRequest& request = {});

// Deterministic constraints at the nominal theta = (1,1,1): mean-square
// control-rate and output-rate of the unit step response minus thresholds.
std::pair<double, double> deterministic_constraints(const GainVector& gains,
                                                    const FlightParams& params);

}  // namespace raresim
