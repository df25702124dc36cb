#include "raresim/flight.hpp"

#include <cmath>
#include <stdexcept>

namespace raresim {

GainVector GainVector::from_array(std::span<const double> v) {
    if (v.size() != 4) throw std::invalid_argument("GainVector: need 4 gains");
    return {v[0], v[1], v[2], v[3]};
}

double gust_velocity(const GustProfile& profile, double x_g) {
    if (x_g < 0.0) return 0.0;
    if (x_g >= profile.length_m) return profile.amplitude_mps;
    return 0.5 * profile.amplitude_mps *
           (1.0 - std::cos(3.14159265358979323846 * x_g / profile.length_m));
}

void FlightParams::validate() const {
    if (!(airspeed > 0.0)) throw std::invalid_argument("flight: airspeed must be > 0");
    if (!(actuator_omega > 0.0 && actuator_zeta > 0.0))
        throw std::invalid_argument("flight: actuator block needs positive frequency and damping");
    if (!(bending_omega > 0.0 && bending_zeta > 0.0))
        throw std::invalid_argument("flight: bending block needs positive frequency and damping");
    if (!(notch_omega > 0.0 && notch_zeta > 0.0))
        throw std::invalid_argument("flight: notch block needs positive frequency and damping");
    if (m_eta_ref == 0.0) throw std::invalid_argument("flight: m_eta_ref must be nonzero");
    if (!(gust.length_m > 0.0) || gust.amplitude_mps < 0.0)
        throw std::invalid_argument("flight: gust profile invalid");
    if (!(sim_dt > 0.0 && sim_t_final > sim_dt))
        throw std::invalid_argument("flight: simulation horizon invalid");
}

namespace {

// Indices into the state vector.
constexpr int kIntegrator = 0;
constexpr int kAlpha = 1;
constexpr int kPitchRate = 2;
constexpr int kElevator = 3;
constexpr int kElevatorRate = 4;
constexpr int kBending = 5;
constexpr int kBendingRate = 6;
constexpr int kNotch1 = 7;
constexpr int kNotch2 = 8;
constexpr int kStates = 9;

// Row vectors over [states..., n_z_cmd, w_z, v] for the signals the
// assembly composes; the trailing entries are input feedthrough. v is the
// external elevator command used only by the broken loop.
struct SignalRow {
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(kStates + 3);
    double& state(int i) { return v(i); }
    double& cmd() { return v(kStates); }
    double& gust() { return v(kStates + 1); }
    double& external() { return v(kStates + 2); }
};

struct Assembly {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(kStates, kStates);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(kStates, 3);
    SignalRow n_z;
    SignalRow qdot_cmd;

    void set_row(int state, const Eigen::RowVectorXd& row) {
        a.row(state) = row.head(kStates);
        b.row(state) = row.tail(3);
    }
};

// Everything except the elevator-command path, which differs between the
// closed loop and the broken loop.
Assembly build_plant(std::span<const double> theta, const GainVector& gains,
                     const FlightParams& p) {
    if (theta.size() != 3) throw std::invalid_argument("flight: theta must have 3 ratios");
    p.validate();
    const double m_alpha = theta[0] * p.m_alpha_ref;
    const double m_q = theta[1] * p.m_q_ref;
    const double m_eta = theta[2] * p.m_eta_ref;
    const double v_over_g = p.airspeed / p.gravity;

    Assembly sys;

    // alpha_eff = alpha + w_z/V enters lift and pitch moment alike.
    SignalRow alpha_eff;
    alpha_eff.state(kAlpha) = 1.0;
    alpha_eff.gust() = 1.0 / p.airspeed;

    // n_z = -(V/g) (Z_alpha alpha_eff + Z_eta eta), in g.
    sys.n_z.v = -v_over_g * p.z_alpha * alpha_eff.v;
    sys.n_z.state(kElevator) += -v_over_g * p.z_eta;

    // Short period.
    SignalRow alpha_dot;
    alpha_dot.v = p.z_alpha * alpha_eff.v;
    alpha_dot.state(kPitchRate) += 1.0;
    alpha_dot.state(kElevator) += p.z_eta;
    sys.set_row(kAlpha, alpha_dot.v);

    SignalRow q_dot;
    q_dot.v = m_alpha * alpha_eff.v;
    q_dot.state(kPitchRate) += m_q;
    q_dot.state(kElevator) += m_eta;
    sys.set_row(kPitchRate, q_dot.v);

    // Structural bending excited by elevator deflection.
    SignalRow bending_acc;
    bending_acc.state(kBending) = -p.bending_omega * p.bending_omega;
    bending_acc.state(kBendingRate) = -2.0 * p.bending_zeta * p.bending_omega;
    bending_acc.state(kElevator) = p.bending_gain;
    {
        SignalRow r;
        r.state(kBendingRate) = 1.0;
        sys.set_row(kBending, r.v);
    }
    sys.set_row(kBendingRate, bending_acc.v);

    // Gyro picks up bending rate; notch filter cleans it up.
    SignalRow omega_y_meas;
    omega_y_meas.state(kPitchRate) = 1.0;
    omega_y_meas.state(kBendingRate) = 1.0;

    {
        SignalRow r;
        r.state(kNotch2) = 1.0;
        sys.set_row(kNotch1, r.v);
    }
    SignalRow notch_acc;
    notch_acc.v = omega_y_meas.v;
    notch_acc.state(kNotch1) += -p.notch_omega * p.notch_omega;
    notch_acc.state(kNotch2) += -2.0 * p.notch_zeta * p.notch_omega;
    sys.set_row(kNotch2, notch_acc.v);

    SignalRow omega_y_filtered;
    omega_y_filtered.v = omega_y_meas.v;
    omega_y_filtered.v += -2.0 * p.notch_zeta * p.notch_omega *
                          Eigen::RowVectorXd::Unit(kStates + 3, kNotch2);

    // Integrator of the tracking error.
    SignalRow integrator_dot;
    integrator_dot.v = -sys.n_z.v;
    integrator_dot.cmd() += 1.0;
    sys.set_row(kIntegrator, integrator_dot.v);

    // Pitch-acceleration command.
    sys.qdot_cmd.v = gains.k_nz * sys.n_z.v + gains.k_q * omega_y_filtered.v;
    sys.qdot_cmd.state(kIntegrator) += gains.k_i;
    sys.qdot_cmd.cmd() += gains.k_h;

    return sys;
}

void close_actuator(Assembly& sys, const Eigen::RowVectorXd& elevator_cmd,
                    const FlightParams& p) {
    SignalRow eta_acc;
    eta_acc.v = p.actuator_omega * p.actuator_omega * elevator_cmd;
    eta_acc.state(kElevator) += -p.actuator_omega * p.actuator_omega;
    eta_acc.state(kElevatorRate) += -2.0 * p.actuator_zeta * p.actuator_omega;
    {
        SignalRow r;
        r.state(kElevatorRate) = 1.0;
        sys.set_row(kElevator, r.v);
    }
    sys.set_row(kElevatorRate, eta_acc.v);
}

}  // namespace

StateSpace assemble(std::span<const double> theta, const GainVector& gains,
                    const FlightParams& params) {
    Assembly sys = build_plant(theta, gains, params);
    // Commanded pitch acceleration mapped to elevator through the nominal
    // control effectiveness.
    const Eigen::RowVectorXd elevator_cmd = sys.qdot_cmd.v / params.m_eta_ref;
    close_actuator(sys, elevator_cmd, params);

    StateSpace ss;
    ss.A = sys.a;
    ss.B = sys.b.leftCols(2);
    ss.C = Eigen::MatrixXd::Zero(4, kStates);
    ss.D = Eigen::MatrixXd::Zero(4, 2);
    ss.C.row(0) = sys.n_z.v.head(kStates);
    ss.D.row(0) = sys.n_z.v.segment(kStates, 2);
    ss.C.row(1) = sys.qdot_cmd.v.head(kStates);
    ss.D.row(1) = sys.qdot_cmd.v.segment(kStates, 2);
    // Rates of the first two outputs through the state derivative; the input
    // derivative term vanishes almost everywhere for step and gust inputs.
    ss.C.row(2) = sys.qdot_cmd.v.head(kStates) * sys.a;
    ss.D.row(2) = sys.qdot_cmd.v.head(kStates) * sys.b.leftCols(2);
    ss.C.row(3) = sys.n_z.v.head(kStates) * sys.a;
    ss.D.row(3) = sys.n_z.v.head(kStates) * sys.b.leftCols(2);
    return ss;
}

StateSpace loop_transfer(std::span<const double> theta, const GainVector& gains,
                         const FlightParams& params) {
    Assembly sys = build_plant(theta, gains, params);
    // Break the loop at the actuator input: the elevator command becomes the
    // external input v, and the returned signal is what the control law
    // would command. L = -(return/v) so that 1 + L = 0 recovers the closed
    // loop.
    SignalRow external;
    external.external() = 1.0;
    close_actuator(sys, external.v, params);

    StateSpace ss;
    ss.A = sys.a;
    ss.B = sys.b.col(2);
    ss.C = -sys.qdot_cmd.v.head(kStates) / params.m_eta_ref;
    ss.D = Eigen::MatrixXd::Zero(1, 1);
    ss.D(0, 0) = -sys.qdot_cmd.v(kStates + 2) / params.m_eta_ref;
    return ss;
}

PerformanceValues performance_functions(std::span<const double> theta, const GainVector& gains,
                                        const FlightParams& params,
                                        const PerformanceRequest& request) {
    PerformanceValues values;
    const StateSpace closed = assemble(theta, gains, params);

    if (request.gust) {
        const GustProfile gust = params.gust;
        const double v = params.airspeed;
        const auto input = [&](double t) {
            Eigen::VectorXd u(2);
            u << 0.0, gust_velocity(gust, v * t);
            return u;
        };
        const SimResult sim = simulate_lti(closed, input, params.sim_t_final, params.sim_dt);
        if (sim.blew_up) throw std::runtime_error("flight: gust response diverged");
        double worst = 0.0;
        for (Eigen::Index k = 0; k < sim.outputs.rows(); ++k) {
            worst = std::min(worst, sim.outputs(k, 0));
        }
        values.h0_gust_min = worst;
    }

    if (request.margins) {
        const StateSpace loop = loop_transfer(theta, gains, params);
        const Margins margins = stability_margins(loop);
        values.h1_gain_margin_db = margins.gain_margin_db;
        values.h2_phase_margin_deg = margins.phase_margin_deg;
    }

    if (request.step) {
        const auto input = [](double) {
            Eigen::VectorXd u(2);
            u << 1.0, 0.0;
            return u;
        };
        const SimResult sim = simulate_lti(closed, input, params.sim_t_final, params.sim_dt);
        if (sim.blew_up) throw std::runtime_error("flight: step response diverged");
        values.h3_overshoot_pct = overshoot_percent(sim, 0, 1.0);
        values.h4_rise_time_s = rise_time_to_fraction(sim, 0, 1.0, 0.8);
    }
    return values;
}

std::pair<double, double> deterministic_constraints(const GainVector& gains,
                                                    const FlightParams& params) {
    const std::array<double, 3> nominal{1.0, 1.0, 1.0};
    const StateSpace closed = assemble(nominal, gains, params);
    const auto input = [](double) {
        Eigen::VectorXd u(2);
        u << 1.0, 0.0;
        return u;
    };
    const SimResult sim = simulate_lti(closed, input, params.sim_t_final, params.sim_dt);
    if (sim.blew_up) throw std::runtime_error("flight: deterministic constraint sim diverged");

    // Trapezoidal mean squares of qddot_cmd and nz_dot.
    double acc1 = 0.0;
    double acc2 = 0.0;
    const Eigen::Index last = sim.outputs.rows() - 1;
    for (Eigen::Index k = 0; k <= last; ++k) {
        const double w = (k == 0 || k == last) ? 0.5 : 1.0;
        acc1 += w * sim.outputs(k, 2) * sim.outputs(k, 2);
        acc2 += w * sim.outputs(k, 3) * sim.outputs(k, 3);
    }
    const double t_total = sim.time.back();
    acc1 *= params.sim_dt / t_total;
    acc2 *= params.sim_dt / t_total;
    return {acc1 - params.c_d1, acc2 - params.c_d2};
}

}  // namespace raresim
