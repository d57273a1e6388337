#pragma once

#include <atomic>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace ocgrad {

/// Discrete-time system with stage and terminal costs, no derivatives:
///   x+ = dynamics(x, u, w),  stage_cost(x, u, w),  terminal_cost(x).
/// nominal_w() is the disturbance value used when the model runs
/// deterministically.
template <typename M>
concept BaseModel = requires(const M& m, std::span<const double> x, std::span<const double> u,
                             std::span<const double> w, std::span<double> out) {
    { m.nx() } -> std::convertible_to<std::size_t>;
    { m.nu() } -> std::convertible_to<std::size_t>;
    { m.nw() } -> std::convertible_to<std::size_t>;
    { m.nominal_w() } -> std::convertible_to<std::span<const double>>;
    { m.dynamics(x, u, w, out) };
    { m.stage_cost(x, u, w) } -> std::convertible_to<double>;
    { m.terminal_cost(x) } -> std::convertible_to<double>;
};

/// Full model: a BaseModel plus first-order information supplied as
/// transposed-Jacobian products and cost gradients. Jacobians are never
/// formed; for a direction d,
///   dynamics_adj_x computes J_x f(x,u,w)^T d,
///   dynamics_adj_u computes J_u f(x,u,w)^T d.
/// All operations must be pure and the adjoint products linear in d.
template <typename M>
concept Model = BaseModel<M> &&
    requires(const M& m, std::span<const double> x, std::span<const double> u,
             std::span<const double> w, std::span<const double> d, std::span<double> out) {
        { m.dynamics_adj_x(x, u, w, d, out) };
        { m.dynamics_adj_u(x, u, w, d, out) };
        { m.stage_cost_grad_x(x, u, w, out) };
        { m.stage_cost_grad_u(x, u, w, out) };
        { m.terminal_cost_grad(x, out) };
    };

/// Completes a derivative-free BaseModel into a full Model using central
/// finite differences with componentwise step h = h0 * (1 + |value|).
template <BaseModel B>
class FiniteDiffModel {
public:
    explicit FiniteDiffModel(B base, double h0 = 1e-6) : base_(std::move(base)), h0_(h0) {}

    std::size_t nx() const { return base_.nx(); }
    std::size_t nu() const { return base_.nu(); }
    std::size_t nw() const { return base_.nw(); }
    std::span<const double> nominal_w() const { return base_.nominal_w(); }

    void dynamics(std::span<const double> x, std::span<const double> u,
                  std::span<const double> w, std::span<double> out) const {
        base_.dynamics(x, u, w, out);
    }
    double stage_cost(std::span<const double> x, std::span<const double> u,
                      std::span<const double> w) const {
        return base_.stage_cost(x, u, w);
    }
    double terminal_cost(std::span<const double> x) const { return base_.terminal_cost(x); }

    void dynamics_adj_x(std::span<const double> x, std::span<const double> u,
                        std::span<const double> w, std::span<const double> d,
                        std::span<double> out) const {
        std::vector<double> pt(x.begin(), x.end());
        std::vector<double> fp(nx()), fm(nx());
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double h = h0_ * (1.0 + std::fabs(x[k]));
            pt[k] = x[k] + h;
            base_.dynamics(pt, u, w, fp);
            pt[k] = x[k] - h;
            base_.dynamics(pt, u, w, fm);
            pt[k] = x[k];
            double acc = 0.0;
            for (std::size_t j = 0; j < fp.size(); ++j) acc += d[j] * (fp[j] - fm[j]) / (2.0 * h);
            out[k] = acc;
        }
    }

    void dynamics_adj_u(std::span<const double> x, std::span<const double> u,
                        std::span<const double> w, std::span<const double> d,
                        std::span<double> out) const {
        std::vector<double> pt(u.begin(), u.end());
        std::vector<double> fp(nx()), fm(nx());
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double h = h0_ * (1.0 + std::fabs(u[k]));
            pt[k] = u[k] + h;
            base_.dynamics(x, pt, w, fp);
            pt[k] = u[k] - h;
            base_.dynamics(x, pt, w, fm);
            pt[k] = u[k];
            double acc = 0.0;
            for (std::size_t j = 0; j < fp.size(); ++j) acc += d[j] * (fp[j] - fm[j]) / (2.0 * h);
            out[k] = acc;
        }
    }

    void stage_cost_grad_x(std::span<const double> x, std::span<const double> u,
                           std::span<const double> w, std::span<double> out) const {
        std::vector<double> pt(x.begin(), x.end());
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double h = h0_ * (1.0 + std::fabs(x[k]));
            pt[k] = x[k] + h;
            const double cp = base_.stage_cost(pt, u, w);
            pt[k] = x[k] - h;
            const double cm = base_.stage_cost(pt, u, w);
            pt[k] = x[k];
            out[k] = (cp - cm) / (2.0 * h);
        }
    }

    void stage_cost_grad_u(std::span<const double> x, std::span<const double> u,
                           std::span<const double> w, std::span<double> out) const {
        std::vector<double> pt(u.begin(), u.end());
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double h = h0_ * (1.0 + std::fabs(u[k]));
            pt[k] = u[k] + h;
            const double cp = base_.stage_cost(x, pt, w);
            pt[k] = u[k] - h;
            const double cm = base_.stage_cost(x, pt, w);
            pt[k] = u[k];
            out[k] = (cp - cm) / (2.0 * h);
        }
    }

    void terminal_cost_grad(std::span<const double> x, std::span<double> out) const {
        std::vector<double> pt(x.begin(), x.end());
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double h = h0_ * (1.0 + std::fabs(x[k]));
            pt[k] = x[k] + h;
            const double cp = base_.terminal_cost(pt);
            pt[k] = x[k] - h;
            const double cm = base_.terminal_cost(pt);
            pt[k] = x[k];
            out[k] = (cp - cm) / (2.0 * h);
        }
    }

private:
    B base_;
    double h0_;
};

/// Per-operation invocation counters of a CountingModel.
struct ModelCallCounts {
    std::uint64_t dynamics = 0;
    std::uint64_t dynamics_adj_x = 0;
    std::uint64_t dynamics_adj_u = 0;
    std::uint64_t stage_cost = 0;
    std::uint64_t stage_cost_grad_x = 0;
    std::uint64_t stage_cost_grad_u = 0;
    std::uint64_t terminal_cost = 0;
    std::uint64_t terminal_cost_grad = 0;

    std::uint64_t total() const {
        return dynamics + dynamics_adj_x + dynamics_adj_u + stage_cost + stage_cost_grad_x +
               stage_cost_grad_u + terminal_cost + terminal_cost_grad;
    }
};

/// Wraps a Model and counts every operation invocation. Counters are shared
/// between copies and safe to bump from concurrent workers.
template <Model M>
class CountingModel {
public:
    explicit CountingModel(M inner)
        : inner_(std::move(inner)), counters_(std::make_shared<Counters>()) {}

    std::size_t nx() const { return inner_.nx(); }
    std::size_t nu() const { return inner_.nu(); }
    std::size_t nw() const { return inner_.nw(); }
    std::span<const double> nominal_w() const { return inner_.nominal_w(); }

    void dynamics(std::span<const double> x, std::span<const double> u,
                  std::span<const double> w, std::span<double> out) const {
        bump(counters_->dynamics);
        inner_.dynamics(x, u, w, out);
    }
    void dynamics_adj_x(std::span<const double> x, std::span<const double> u,
                        std::span<const double> w, std::span<const double> d,
                        std::span<double> out) const {
        bump(counters_->dynamics_adj_x);
        inner_.dynamics_adj_x(x, u, w, d, out);
    }
    void dynamics_adj_u(std::span<const double> x, std::span<const double> u,
                        std::span<const double> w, std::span<const double> d,
                        std::span<double> out) const {
        bump(counters_->dynamics_adj_u);
        inner_.dynamics_adj_u(x, u, w, d, out);
    }
    double stage_cost(std::span<const double> x, std::span<const double> u,
                      std::span<const double> w) const {
        bump(counters_->stage_cost);
        return inner_.stage_cost(x, u, w);
    }
    void stage_cost_grad_x(std::span<const double> x, std::span<const double> u,
                           std::span<const double> w, std::span<double> out) const {
        bump(counters_->stage_cost_grad_x);
        inner_.stage_cost_grad_x(x, u, w, out);
    }
    void stage_cost_grad_u(std::span<const double> x, std::span<const double> u,
                           std::span<const double> w, std::span<double> out) const {
        bump(counters_->stage_cost_grad_u);
        inner_.stage_cost_grad_u(x, u, w, out);
    }
    double terminal_cost(std::span<const double> x) const {
        bump(counters_->terminal_cost);
        return inner_.terminal_cost(x);
    }
    void terminal_cost_grad(std::span<const double> x, std::span<double> out) const {
        bump(counters_->terminal_cost_grad);
        inner_.terminal_cost_grad(x, out);
    }

    ModelCallCounts counts() const {
        ModelCallCounts c;
        c.dynamics = counters_->dynamics.load();
        c.dynamics_adj_x = counters_->dynamics_adj_x.load();
        c.dynamics_adj_u = counters_->dynamics_adj_u.load();
        c.stage_cost = counters_->stage_cost.load();
        c.stage_cost_grad_x = counters_->stage_cost_grad_x.load();
        c.stage_cost_grad_u = counters_->stage_cost_grad_u.load();
        c.terminal_cost = counters_->terminal_cost.load();
        c.terminal_cost_grad = counters_->terminal_cost_grad.load();
        return c;
    }

    void reset_counts() const {
        counters_->dynamics = 0;
        counters_->dynamics_adj_x = 0;
        counters_->dynamics_adj_u = 0;
        counters_->stage_cost = 0;
        counters_->stage_cost_grad_x = 0;
        counters_->stage_cost_grad_u = 0;
        counters_->terminal_cost = 0;
        counters_->terminal_cost_grad = 0;
    }

private:
    struct Counters {
        std::atomic<std::uint64_t> dynamics{0};
        std::atomic<std::uint64_t> dynamics_adj_x{0};
        std::atomic<std::uint64_t> dynamics_adj_u{0};
        std::atomic<std::uint64_t> stage_cost{0};
        std::atomic<std::uint64_t> stage_cost_grad_x{0};
        std::atomic<std::uint64_t> stage_cost_grad_u{0};
        std::atomic<std::uint64_t> terminal_cost{0};
        std::atomic<std::uint64_t> terminal_cost_grad{0};
    };

    static void bump(std::atomic<std::uint64_t>& c) { c.fetch_add(1, std::memory_order_relaxed); }

    M inner_;
    std::shared_ptr<Counters> counters_;
};

}  // namespace ocgrad
