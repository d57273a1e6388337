#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ocgrad/grad_det.hpp"
#include "ocgrad/grad_tree.hpp"
#include "ocgrad/model.hpp"
#include "ocgrad/scenario_tree.hpp"

namespace ocgrad {

/// Central finite differences with componentwise step h = h0 * (1 + |value|);
/// `tolerance` is the relative tolerance used when the result serves as a
/// reference for a gradient check.
struct FdSpec {
    double h0 = 1e-6;
    double tolerance = 1e-5;
};

/// Central differences of cost_det in every control coordinate.
template <Model M>
std::vector<double> fd_grad_det(const M& model, std::span<const double> x0, const ControlSeq& u,
                                const FdSpec& spec = {}) {
    ControlSeq probe = u;
    std::span<double> flat = probe.flat();
    std::vector<double> grad(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double base = flat[i];
        const double h = spec.h0 * (1.0 + std::fabs(base));
        flat[i] = base + h;
        const double cp = cost_det(model, x0, probe);
        flat[i] = base - h;
        const double cm = cost_det(model, x0, probe);
        flat[i] = base;
        grad[i] = (cp - cm) / (2.0 * h);
    }
    return grad;
}

/// Central differences of cost_tree in every nonleaf control coordinate.
template <Model M>
std::vector<double> fd_grad_tree(const M& model, const ScenarioTree& tree,
                                 std::span<const double> x0, const ControlTree& u,
                                 const FdSpec& spec = {}) {
    ControlTree probe = u;
    std::span<double> flat = probe.flat();
    std::vector<double> grad(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double base = flat[i];
        const double h = spec.h0 * (1.0 + std::fabs(base));
        flat[i] = base + h;
        const double cp = cost_tree(model, tree, x0, probe);
        flat[i] = base - h;
        const double cm = cost_tree(model, tree, x0, probe);
        flat[i] = base;
        grad[i] = (cp - cm) / (2.0 * h);
    }
    return grad;
}

/// Brute-force tree gradient: enumerates every root-to-leaf path, runs the
/// deterministic backward chain rule along the path, weights the
/// contributions by the leaf probability and scatter-adds them into the
/// shared nonleaf node slots. States are shared with the tree, so
/// non-anticipativity is structural. Guarded to at most 10^4 leaf paths.
template <Model M>
std::vector<double> scenario_enum_grad(const M& model, const ScenarioTree& tree,
                                       std::span<const double> x0, const ControlTree& u) {
    detail::check_tree_dims(model, tree, x0, u);
    if (tree.num_leaf_nodes() > 10000)
        throw std::invalid_argument("scenario enumeration: more than 10^4 leaf paths");
    const std::size_t nx = model.nx();
    const std::size_t nu = model.nu();
    const std::size_t N = tree.horizon();

    std::vector<double> states;
    detail::rollout_tree_into(model, tree, x0, u, states);

    std::vector<double> grad(tree.num_nonleaf_nodes() * nu, 0.0);
    std::vector<std::size_t> path(N + 1);
    std::vector<double> adj(nx), adj_prev(nx), gx(nx), gu(nu);

    for (std::size_t leaf : tree.leaf_nodes()) {
        path[N] = leaf;
        for (std::size_t t = N; t-- > 0;) path[t] = tree.ancestor_of(path[t + 1]);
        const double weight = tree.probability_of(leaf);

        std::span<const double> xleaf{states.data() + leaf * nx, nx};
        model.terminal_cost_grad(xleaf, adj);
        for (std::size_t t = N; t-- > 0;) {
            const std::size_t i = path[t];
            const std::size_t c = path[t + 1];
            std::span<const double> xi{states.data() + i * nx, nx};
            std::span<const double> ui = u.block(i);
            std::span<const double> wc = tree.disturbance_of(c);
            model.stage_cost_grad_u(xi, ui, wc, gu);
            std::span<double> slot{grad.data() + i * nu, nu};
            for (std::size_t k = 0; k < nu; ++k) slot[k] += weight * gu[k];
            model.dynamics_adj_u(xi, ui, wc, adj, gu);
            for (std::size_t k = 0; k < nu; ++k) slot[k] += weight * gu[k];
            if (t > 0) {
                model.stage_cost_grad_x(xi, ui, wc, gx);
                model.dynamics_adj_x(xi, ui, wc, adj, adj_prev);
                for (std::size_t k = 0; k < nx; ++k) adj_prev[k] += gx[k];
                adj.swap(adj_prev);
            }
        }
    }
    return grad;
}

/// Closed-form gradient for linear dynamics x+ = A x + B u with stage cost
/// x'x + u'u and terminal cost `terminal_weight` * x'x. Stacks the prediction
/// matrices X = Phi x0 + Gamma u and differentiates the quadratic directly:
/// grad = 2 u + 2 Gamma' D X.
inline std::vector<double> lq_dense_grad(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                         std::span<const double> x0, const ControlSeq& u,
                                         double terminal_weight) {
    const auto nx = A.rows();
    const auto nu = B.cols();
    if (A.cols() != nx) throw std::invalid_argument("lq oracle: A must be square");
    if (B.rows() != nx) throw std::invalid_argument("lq oracle: B row count must match A");
    if (static_cast<Eigen::Index>(x0.size()) != nx)
        throw std::invalid_argument("lq oracle: initial state dimension mismatch");
    if (static_cast<Eigen::Index>(u.input_dim()) != nu)
        throw std::invalid_argument("lq oracle: control dimension mismatch");
    const Eigen::Index N = static_cast<Eigen::Index>(u.horizon());

    // powers[k] = A^k B
    std::vector<Eigen::MatrixXd> powers(N);
    powers[0] = B;
    for (Eigen::Index k = 1; k < N; ++k) powers[k] = A * powers[k - 1];

    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(N * nx, N * nu);
    for (Eigen::Index t = 1; t <= N; ++t)
        for (Eigen::Index s = 0; s < t; ++s)
            gamma.block((t - 1) * nx, s * nu, nx, nu) = powers[t - 1 - s];

    Eigen::VectorXd x0v = Eigen::Map<const Eigen::VectorXd>(x0.data(), nx);
    Eigen::VectorXd uv = Eigen::Map<const Eigen::VectorXd>(u.flat().data(), N * nu);

    Eigen::VectorXd X(N * nx);
    Eigen::VectorXd apow = x0v;
    for (Eigen::Index t = 1; t <= N; ++t) {
        apow = A * apow;  // A^t x0
        X.segment((t - 1) * nx, nx) = apow;
    }
    X += gamma * uv;

    Eigen::VectorXd weights = Eigen::VectorXd::Ones(N * nx);
    weights.tail(nx).setConstant(terminal_weight);

    Eigen::VectorXd grad = 2.0 * uv + 2.0 * (gamma.transpose() * weights.cwiseProduct(X).eval());
    return std::vector<double>(grad.data(), grad.data() + grad.size());
}

}  // namespace ocgrad
