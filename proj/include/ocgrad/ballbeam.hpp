#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace ocgrad {

/// Ball on a centrally pivoted beam, driven by a torque at the pivot.
/// The ball mass and beam inertia default to 0.1 kg and 0.05 kg m^2.
struct BallBeamParams {
    double m = 0.1;    // ball mass [kg]
    double I = 0.05;   // beam moment of inertia [kg m^2]
    double g = 9.81;   // gravity [m/s^2]
    double Ts = 0.01;  // sampling time [s]

    void validate() const {
        if (!(m > 0.0 && I > 0.0 && Ts > 0.0))
            throw std::invalid_argument("ball-beam params: m, I, Ts must be positive");
    }
};

/// Ball-and-beam with state (p [m], v [m/s], theta [rad], q [rad/s]) - ball
/// position/velocity and beam angle/rate - and input u [N m], the torque at
/// the pivot. Continuous dynamics solved for the accelerations:
///
///   (7/5) p'' + g sin(theta) - p q^2 = 0
///   (m p^2 + I) q'' + 2 m p v q + m g p cos(theta) = u
///
/// discretised with one explicit Euler step of size w (nominally Ts).
/// Stage cost |x|^2 + |u|^2, terminal cost 10 |x|^2. m p^2 + I >= I > 0.
class BallBeamModel {
public:
    explicit BallBeamModel(BallBeamParams params = {}) : p_(params), nominal_w_{params.Ts} {
        p_.validate();
    }

    std::size_t nx() const { return 4; }
    std::size_t nu() const { return 1; }
    std::size_t nw() const { return 1; }
    std::span<const double> nominal_w() const { return nominal_w_; }
    const BallBeamParams& params() const { return p_; }

    void dynamics(std::span<const double> x, std::span<const double> u,
                  std::span<const double> w, std::span<double> out) const {
        const double pos = x[0], vel = x[1], th = x[2], rate = x[3];
        const double ts = w[0];
        const double acc_ball = (5.0 / 7.0) * (pos * rate * rate - p_.g * std::sin(th));
        const double denom = p_.m * pos * pos + p_.I;
        const double acc_beam =
            (u[0] - 2.0 * p_.m * pos * vel * rate - p_.m * p_.g * pos * std::cos(th)) / denom;
        out[0] = pos + ts * vel;
        out[1] = vel + ts * acc_ball;
        out[2] = th + ts * rate;
        out[3] = rate + ts * acc_beam;
    }

    void dynamics_adj_x(std::span<const double> x, std::span<const double> u,
                        std::span<const double> w, std::span<const double> d,
                        std::span<double> out) const {
        const double ts = w[0];
        const Partials pd = partials(x, u[0]);
        // out = d + ts * J_rhs^T d, with J_rhs the continuous-time Jacobian
        out[0] = d[0] + ts * (pd.vdot_p * d[1] + pd.qdot_p * d[3]);
        out[1] = d[1] + ts * (d[0] + pd.qdot_v * d[3]);
        out[2] = d[2] + ts * (pd.vdot_th * d[1] + pd.qdot_th * d[3]);
        out[3] = d[3] + ts * (pd.vdot_q * d[1] + d[2] + pd.qdot_q * d[3]);
    }

    void dynamics_adj_u(std::span<const double> x, std::span<const double> /*u*/,
                        std::span<const double> w, std::span<const double> d,
                        std::span<double> out) const {
        const double denom = p_.m * x[0] * x[0] + p_.I;
        out[0] = w[0] * d[3] / denom;
    }

    double stage_cost(std::span<const double> x, std::span<const double> u,
                      std::span<const double> /*w*/) const {
        double acc = u[0] * u[0];
        for (double xi : x) acc += xi * xi;
        return acc;
    }

    void stage_cost_grad_x(std::span<const double> x, std::span<const double> /*u*/,
                           std::span<const double> /*w*/, std::span<double> out) const {
        for (std::size_t i = 0; i < 4; ++i) out[i] = 2.0 * x[i];
    }

    void stage_cost_grad_u(std::span<const double> /*x*/, std::span<const double> u,
                           std::span<const double> /*w*/, std::span<double> out) const {
        out[0] = 2.0 * u[0];
    }

    double terminal_cost(std::span<const double> x) const {
        double acc = 0.0;
        for (double xi : x) acc += xi * xi;
        return 10.0 * acc;
    }

    void terminal_cost_grad(std::span<const double> x, std::span<double> out) const {
        for (std::size_t i = 0; i < 4; ++i) out[i] = 20.0 * x[i];
    }

private:
    struct Partials {
        double vdot_p, vdot_th, vdot_q;
        double qdot_p, qdot_v, qdot_th, qdot_q;
    };

    Partials partials(std::span<const double> x, double torque) const {
        const double pos = x[0], vel = x[1], th = x[2], rate = x[3];
        const double s = std::sin(th), c = std::cos(th);
        const double numer = torque - 2.0 * p_.m * pos * vel * rate - p_.m * p_.g * pos * c;
        const double denom = p_.m * pos * pos + p_.I;
        Partials pd;
        pd.vdot_p = (5.0 / 7.0) * rate * rate;
        pd.vdot_th = -(5.0 / 7.0) * p_.g * c;
        pd.vdot_q = (10.0 / 7.0) * pos * rate;
        const double numer_p = -2.0 * p_.m * vel * rate - p_.m * p_.g * c;
        const double denom_p = 2.0 * p_.m * pos;
        pd.qdot_p = (numer_p * denom - numer * denom_p) / (denom * denom);
        pd.qdot_v = -2.0 * p_.m * pos * rate / denom;
        pd.qdot_th = p_.m * p_.g * pos * s / denom;
        pd.qdot_q = -2.0 * p_.m * pos * vel / denom;
        return pd;
    }

    BallBeamParams p_;
    std::array<double, 1> nominal_w_;
};

}  // namespace ocgrad
