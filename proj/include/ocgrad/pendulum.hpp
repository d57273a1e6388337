#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace ocgrad {

/// Inverted pendulum on a cart. Defaults: rod 1 kg, cart 3 kg, Ts = 10 ms;
/// the rod half-length defaults to 0.5 m.
struct PendulumParams {
    double m = 1.0;    // rod mass [kg]
    double M = 3.0;    // cart mass [kg]
    double L = 0.5;    // rod half-length [m]
    double g = 9.81;   // gravity [m/s^2]
    double Ts = 0.01;  // sampling time [s]

    void validate() const {
        if (!(m > 0.0 && M > 0.0 && L > 0.0 && Ts > 0.0))
            throw std::invalid_argument("pendulum params: m, M, L, Ts must be positive");
    }
};

/// Cart-pole with state (theta [rad], omega [rad/s]) and input F [N], the
/// horizontal force on the cart. Continuous dynamics
///
///   theta' = omega
///   omega' = -3 (m L omega^2 sin(2 theta)/2 + F cos(theta) - Mtot g sin(theta))
///            / ((4 Mtot - 3 m cos^2(theta)) L),        Mtot = M + m,
///
/// discretised with one explicit Euler step whose step size is the
/// disturbance w (nominally Ts). Stage cost |x|^2 + |u|^2, terminal cost
/// 10 |x|^2. The denominator never vanishes for M > 0.
class PendulumModel {
public:
    explicit PendulumModel(PendulumParams params = {}) : p_(params), nominal_w_{params.Ts} {
        p_.validate();
    }

    std::size_t nx() const { return 2; }
    std::size_t nu() const { return 1; }
    std::size_t nw() const { return 1; }
    std::span<const double> nominal_w() const { return nominal_w_; }
    const PendulumParams& params() const { return p_; }

    void dynamics(std::span<const double> x, std::span<const double> u,
                  std::span<const double> w, std::span<double> out) const {
        const double theta = x[0], omega = x[1], ts = w[0];
        out[0] = theta + ts * omega;
        out[1] = omega + ts * omega_dot(theta, omega, u[0]);
    }

    void dynamics_adj_x(std::span<const double> x, std::span<const double> u,
                        std::span<const double> w, std::span<const double> d,
                        std::span<double> out) const {
        const double ts = w[0];
        const Partials pd = partials(x[0], x[1], u[0]);
        out[0] = d[0] + ts * pd.d_theta * d[1];
        out[1] = ts * d[0] + (1.0 + ts * pd.d_omega) * d[1];
    }

    void dynamics_adj_u(std::span<const double> x, std::span<const double> u,
                        std::span<const double> w, std::span<const double> d,
                        std::span<double> out) const {
        const double ts = w[0];
        const Partials pd = partials(x[0], x[1], u[0]);
        out[0] = ts * pd.d_force * d[1];
    }

    double stage_cost(std::span<const double> x, std::span<const double> u,
                      std::span<const double> /*w*/) const {
        return x[0] * x[0] + x[1] * x[1] + u[0] * u[0];
    }

    void stage_cost_grad_x(std::span<const double> x, std::span<const double> /*u*/,
                           std::span<const double> /*w*/, std::span<double> out) const {
        out[0] = 2.0 * x[0];
        out[1] = 2.0 * x[1];
    }

    void stage_cost_grad_u(std::span<const double> /*x*/, std::span<const double> u,
                           std::span<const double> /*w*/, std::span<double> out) const {
        out[0] = 2.0 * u[0];
    }

    double terminal_cost(std::span<const double> x) const {
        return 10.0 * (x[0] * x[0] + x[1] * x[1]);
    }

    void terminal_cost_grad(std::span<const double> x, std::span<double> out) const {
        out[0] = 20.0 * x[0];
        out[1] = 20.0 * x[1];
    }

private:
    struct Partials {
        double d_theta;
        double d_omega;
        double d_force;
    };

    double omega_dot(double theta, double omega, double force) const {
        const double mtot = p_.M + p_.m;
        const double num = 0.5 * p_.m * p_.L * omega * omega * std::sin(2.0 * theta) +
                           force * std::cos(theta) - mtot * p_.g * std::sin(theta);
        const double den = (4.0 * mtot - 3.0 * p_.m * std::cos(theta) * std::cos(theta)) * p_.L;
        return -3.0 * num / den;
    }

    Partials partials(double theta, double omega, double force) const {
        const double mtot = p_.M + p_.m;
        const double s = std::sin(theta), c = std::cos(theta);
        const double s2 = std::sin(2.0 * theta), c2 = std::cos(2.0 * theta);
        const double num = 0.5 * p_.m * p_.L * omega * omega * s2 + force * c - mtot * p_.g * s;
        const double den = (4.0 * mtot - 3.0 * p_.m * c * c) * p_.L;
        const double num_theta = p_.m * p_.L * omega * omega * c2 - force * s - mtot * p_.g * c;
        const double num_omega = p_.m * p_.L * omega * s2;
        const double den_theta = 3.0 * p_.m * s2 * p_.L;
        Partials pd;
        pd.d_theta = -3.0 * (num_theta * den - num * den_theta) / (den * den);
        pd.d_omega = -3.0 * num_omega / den;
        pd.d_force = -3.0 * c / den;
        return pd;
    }

    PendulumParams p_;
    std::array<double, 1> nominal_w_;
};

}  // namespace ocgrad
