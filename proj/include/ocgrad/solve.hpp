#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ocgrad/grad_det.hpp"
#include "ocgrad/grad_tree.hpp"

namespace ocgrad {

/// Gradient descent with Armijo backtracking. The cost trace it produces is
/// non-increasing: a step is taken only when the sufficient-decrease test
/// holds, and the iteration stops once no acceptable step exists (or the
/// gradient vanishes).
struct SolveOptions {
    std::size_t max_iters = 100;
    double alpha0 = 1.0;
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    std::size_t max_backtracks = 60;
    double grad_tol = 0.0;  // stop when the gradient norm drops to this
};

struct SolveTraceRow {
    std::size_t iter = 0;
    double cost = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;  // step size taken from this iterate (0 on the last row)
};

namespace detail {

inline double norm2(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

/// Shared descent loop; Eval recomputes (cost, grad) for the current point
/// and TryCost evaluates the cost of a trial point.
template <typename Eval, typename TryCost>
std::vector<SolveTraceRow> descend(std::span<double> u_flat, const SolveOptions& opt, Eval eval,
                                   TryCost try_cost) {
    std::vector<SolveTraceRow> trace;
    std::vector<double> grad(u_flat.size());
    std::vector<double> trial(u_flat.size());

    for (std::size_t iter = 0;; ++iter) {
        const double cost = eval(u_flat, grad);
        const double gnorm = norm2(grad);
        trace.push_back({iter, cost, gnorm, 0.0});
        if (iter >= opt.max_iters || gnorm <= opt.grad_tol || gnorm == 0.0) break;

        double alpha = opt.alpha0;
        bool accepted = false;
        for (std::size_t k = 0; k < opt.max_backtracks; ++k) {
            for (std::size_t i = 0; i < u_flat.size(); ++i)
                trial[i] = u_flat[i] - alpha * grad[i];
            const double trial_cost = try_cost(trial);
            // require a strict decrease so the loop stops at the numerical
            // floor instead of accepting steps whose decrease underflows
            if (trial_cost < cost &&
                trial_cost <= cost - opt.armijo_c * alpha * gnorm * gnorm) {
                accepted = true;
                break;
            }
            alpha *= opt.backtrack_factor;
        }
        if (!accepted) break;
        trace.back().step = alpha;
        std::copy(trial.begin(), trial.end(), u_flat.begin());
    }
    return trace;
}

}  // namespace detail

/// Minimises cost_det over the control sequence in place.
template <Model M>
std::vector<SolveTraceRow> solve_det(const M& model, std::span<const double> x0, ControlSeq& u,
                                     const SolveOptions& opt = {}) {
    DetGradResult res;
    DetWorkspace ws;
    auto eval = [&](std::span<const double>, std::span<double> grad) {
        grad_det_into(model, x0, u, res, ws);
        std::copy(res.grad.begin(), res.grad.end(), grad.begin());
        return res.cost;
    };
    auto try_cost = [&](std::span<const double> trial) {
        const ControlSeq probe = ControlSeq::from_flat(
            u.horizon(), u.input_dim(), std::vector<double>(trial.begin(), trial.end()));
        return cost_det(model, x0, probe);
    };
    return detail::descend(u.flat(), opt, eval, try_cost);
}

/// Minimises cost_tree over the control tree in place.
template <Model M>
std::vector<SolveTraceRow> solve_tree(const M& model, const ScenarioTree& tree,
                                      std::span<const double> x0, ControlTree& u,
                                      const SolveOptions& opt = {}, unsigned workers = 1) {
    TreeGradResult res;
    TreeWorkspace ws;
    auto eval = [&](std::span<const double>, std::span<double> grad) {
        grad_tree_into(model, tree, x0, u, workers, res, ws);
        std::copy(res.grad.begin(), res.grad.end(), grad.begin());
        return res.cost;
    };
    auto try_cost = [&](std::span<const double> trial) {
        const ControlTree probe = ControlTree::from_flat(
            tree, u.input_dim(), std::vector<double>(trial.begin(), trial.end()));
        return cost_tree(model, tree, x0, probe);
    };
    return detail::descend(u.flat(), opt, eval, try_cost);
}

}  // namespace ocgrad
