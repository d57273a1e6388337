#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ocgrad/model.hpp"

namespace ocgrad {

/// Control sequence u_0..u_{N-1}, stored flat in stage order.
class ControlSeq {
public:
    ControlSeq(std::size_t horizon, std::size_t input_dim)
        : horizon_(horizon), nu_(input_dim), values_(horizon * input_dim, 0.0) {
        if (horizon == 0) throw std::invalid_argument("control sequence: horizon must be >= 1");
        if (input_dim == 0) throw std::invalid_argument("control sequence: input dimension must be >= 1");
    }

    static ControlSeq from_flat(std::size_t horizon, std::size_t input_dim,
                                std::vector<double> values) {
        ControlSeq u(horizon, input_dim);
        if (values.size() != horizon * input_dim)
            throw std::invalid_argument("control sequence: flat array has wrong length");
        u.values_ = std::move(values);
        return u;
    }

    std::size_t horizon() const { return horizon_; }
    std::size_t input_dim() const { return nu_; }

    std::span<double> block(std::size_t t) { return {values_.data() + t * nu_, nu_}; }
    std::span<const double> block(std::size_t t) const { return {values_.data() + t * nu_, nu_}; }
    std::span<double> flat() { return values_; }
    std::span<const double> flat() const { return values_; }

private:
    std::size_t horizon_;
    std::size_t nu_;
    std::vector<double> values_;
};

/// Gradient of the total cost with the rolled-out trajectory. grad holds one
/// input-sized block per stage; states holds x_0..x_N; adjoint_final is the
/// last adjoint a_0 of the backward recursion.
struct DetGradResult {
    std::vector<double> grad;
    std::vector<double> states;
    std::vector<double> adjoint_final;
    double cost = 0.0;
    std::size_t nx = 0;
    std::size_t nu = 0;

    std::span<const double> grad_block(std::size_t t) const { return {grad.data() + t * nu, nu}; }
    std::span<const double> state(std::size_t t) const { return {states.data() + t * nx, nx}; }
};

/// Scratch buffers reused across grad_det_into calls; keeps the backward
/// sweep allocation-free once warmed up.
struct DetWorkspace {
    std::vector<double> adj;
    std::vector<double> adj_prev;
    std::vector<double> tmp_x;
    std::vector<double> tmp_u;
};

namespace detail {

template <BaseModel M>
void check_det_dims(const M& model, std::span<const double> x0, const ControlSeq& u) {
    if (x0.size() != model.nx())
        throw std::invalid_argument("initial state dimension does not match the model");
    if (u.input_dim() != model.nu())
        throw std::invalid_argument("control dimension does not match the model");
}

}  // namespace detail

/// States x_0..x_N under x_{t+1} = f(x_t, u_t, nominal_w), returned flat.
template <BaseModel M>
std::vector<double> rollout_det(const M& model, std::span<const double> x0, const ControlSeq& u) {
    detail::check_det_dims(model, x0, u);
    const std::size_t nx = model.nx();
    const std::size_t N = u.horizon();
    const auto w = model.nominal_w();
    std::vector<double> states((N + 1) * nx);
    std::copy(x0.begin(), x0.end(), states.begin());
    for (std::size_t t = 0; t < N; ++t) {
        std::span<const double> xt{states.data() + t * nx, nx};
        std::span<double> xnext{states.data() + (t + 1) * nx, nx};
        model.dynamics(xt, u.block(t), w, xnext);
    }
    return states;
}

/// Total cost sum_t l(x_t, u_t, nominal_w) + Vf(x_N) along the rollout.
template <BaseModel M>
double cost_det(const M& model, std::span<const double> x0, const ControlSeq& u) {
    detail::check_det_dims(model, x0, u);
    const std::size_t nx = model.nx();
    const std::size_t N = u.horizon();
    const auto w = model.nominal_w();
    std::vector<double> cur(x0.begin(), x0.end());
    std::vector<double> next(nx);
    double cost = 0.0;
    for (std::size_t t = 0; t < N; ++t) {
        cost += model.stage_cost(cur, u.block(t), w);
        model.dynamics(cur, u.block(t), w, next);
        cur.swap(next);
    }
    return cost + model.terminal_cost(cur);
}

/// Gradient of the total cost with respect to every control block via one
/// forward rollout and one backward adjoint sweep:
///
///   a = Vf'(x_N)
///   for t = N-1 .. 1:   grad_t = lu_t + fu_t^T a;   a = lx_t + fx_t^T a
///   grad_0 = lu_0 + fu_0^T a
///
/// Exactly N dynamics calls, N input-side and N-1 state-side adjoint calls,
/// and one terminal-cost gradient; no Jacobian is ever formed. Sequential in
/// t by construction, re-entrant across calls with separate outputs.
template <Model M>
void grad_det_into(const M& model, std::span<const double> x0, const ControlSeq& u,
                   DetGradResult& out, DetWorkspace& ws) {
    detail::check_det_dims(model, x0, u);
    const std::size_t nx = model.nx();
    const std::size_t nu = model.nu();
    const std::size_t N = u.horizon();
    const auto w = model.nominal_w();

    out.nx = nx;
    out.nu = nu;
    out.states.resize((N + 1) * nx);
    out.grad.resize(N * nu);
    out.adjoint_final.resize(nx);
    ws.adj.resize(nx);
    ws.adj_prev.resize(nx);
    ws.tmp_x.resize(nx);
    ws.tmp_u.resize(nu);

    std::copy(x0.begin(), x0.end(), out.states.begin());
    double cost = 0.0;
    for (std::size_t t = 0; t < N; ++t) {
        std::span<const double> xt{out.states.data() + t * nx, nx};
        std::span<double> xnext{out.states.data() + (t + 1) * nx, nx};
        cost += model.stage_cost(xt, u.block(t), w);
        model.dynamics(xt, u.block(t), w, xnext);
    }
    std::span<const double> xN{out.states.data() + N * nx, nx};
    out.cost = cost + model.terminal_cost(xN);

    model.terminal_cost_grad(xN, ws.adj);
    for (std::size_t t = N; t-- > 1;) {
        std::span<const double> xt{out.states.data() + t * nx, nx};
        std::span<const double> ut = u.block(t);
        std::span<double> gb{out.grad.data() + t * nu, nu};
        model.stage_cost_grad_u(xt, ut, w, ws.tmp_u);
        model.dynamics_adj_u(xt, ut, w, ws.adj, gb);
        for (std::size_t k = 0; k < nu; ++k) gb[k] += ws.tmp_u[k];
        model.stage_cost_grad_x(xt, ut, w, ws.tmp_x);
        model.dynamics_adj_x(xt, ut, w, ws.adj, ws.adj_prev);
        for (std::size_t k = 0; k < nx; ++k) ws.adj_prev[k] += ws.tmp_x[k];
        ws.adj.swap(ws.adj_prev);
    }
    {
        std::span<const double> x0s{out.states.data(), nx};
        std::span<const double> u0 = u.block(0);
        std::span<double> gb{out.grad.data(), nu};
        model.stage_cost_grad_u(x0s, u0, w, ws.tmp_u);
        model.dynamics_adj_u(x0s, u0, w, ws.adj, gb);
        for (std::size_t k = 0; k < nu; ++k) gb[k] += ws.tmp_u[k];
    }
    std::copy(ws.adj.begin(), ws.adj.end(), out.adjoint_final.begin());
}

template <Model M>
DetGradResult grad_det(const M& model, std::span<const double> x0, const ControlSeq& u) {
    DetGradResult out;
    DetWorkspace ws;
    grad_det_into(model, x0, u, out, ws);
    return out;
}

}  // namespace ocgrad
