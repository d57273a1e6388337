#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ocgrad/model.hpp"
#include "ocgrad/parallel.hpp"
#include "ocgrad/scenario_tree.hpp"

namespace ocgrad {

/// Control inputs on a scenario tree: one input block per nonleaf node,
/// stored flat in node order.
class ControlTree {
public:
    ControlTree(const ScenarioTree& tree, std::size_t input_dim)
        : num_blocks_(tree.num_nonleaf_nodes()),
          nu_(input_dim),
          values_(num_blocks_ * input_dim, 0.0) {
        if (input_dim == 0) throw std::invalid_argument("control tree: input dimension must be >= 1");
    }

    static ControlTree from_flat(const ScenarioTree& tree, std::size_t input_dim,
                                 std::vector<double> values) {
        ControlTree u(tree, input_dim);
        if (values.size() != u.values_.size())
            throw std::invalid_argument("control tree: flat array has wrong length");
        u.values_ = std::move(values);
        return u;
    }

    std::size_t num_blocks() const { return num_blocks_; }
    std::size_t input_dim() const { return nu_; }

    std::span<double> block(std::size_t node) { return {values_.data() + node * nu_, nu_}; }
    std::span<const double> block(std::size_t node) const {
        return {values_.data() + node * nu_, nu_};
    }
    std::span<double> flat() { return values_; }
    std::span<const double> flat() const { return values_; }

private:
    std::size_t num_blocks_;
    std::size_t nu_;
    std::vector<double> values_;
};

/// Gradient of the expected total cost on a tree. grad holds one input-sized
/// block per nonleaf node; states one state per node; adjoints one state-sized
/// vector per node of stages 1..N (leaf entries hold the probability-seeded
/// terminal gradients).
struct TreeGradResult {
    std::vector<double> grad;
    std::vector<double> states;
    std::vector<double> adjoints;
    double cost = 0.0;
    std::size_t nx = 0;
    std::size_t nu = 0;

    std::span<const double> grad_block(std::size_t node) const {
        return {grad.data() + node * nu, nu};
    }
    std::span<const double> state(std::size_t node) const {
        return {states.data() + node * nx, nx};
    }
    /// Adjoint of `node`; node must be >= 1.
    std::span<const double> adjoint(std::size_t node) const {
        return {adjoints.data() + (node - 1) * nx, nx};
    }
};

/// Per-worker scratch for the backward sweep.
struct TreeWorkspace {
    struct Scratch {
        std::vector<double> tmp_x;
        std::vector<double> tmp_u;
        std::vector<double> acc_x;
        std::vector<double> acc_u;
    };
    std::vector<Scratch> per_worker;
};

namespace detail {

template <BaseModel M>
void check_tree_dims(const M& model, const ScenarioTree& tree, std::span<const double> x0,
                     const ControlTree& u) {
    if (x0.size() != model.nx())
        throw std::invalid_argument("initial state dimension does not match the model");
    if (u.input_dim() != model.nu())
        throw std::invalid_argument("control dimension does not match the model");
    if (u.num_blocks() != tree.num_nonleaf_nodes())
        throw std::invalid_argument("control tree does not match the tree's nonleaf count");
    if (tree.nw() != model.nw())
        throw std::invalid_argument("tree disturbance dimension does not match the model");
}

/// x^i = f(x^anc(i), u^anc(i), w^i) for every non-root node, into `states`.
template <BaseModel M>
void rollout_tree_into(const M& model, const ScenarioTree& tree, std::span<const double> x0,
                       const ControlTree& u, std::vector<double>& states) {
    const std::size_t nx = model.nx();
    states.resize(tree.num_nodes() * nx);
    std::copy(x0.begin(), x0.end(), states.begin());
    for (std::size_t i = 1; i < tree.num_nodes(); ++i) {
        const std::size_t a = tree.ancestor_of(i);
        std::span<const double> xa{states.data() + a * nx, nx};
        std::span<double> xi{states.data() + i * nx, nx};
        model.dynamics(xa, u.block(a), tree.disturbance_of(i), xi);
    }
}

/// Expected total cost from precomputed node states: stage costs on every
/// edge plus probability-weighted terminal costs on the leaves.
template <BaseModel M>
double tree_cost_from_states(const M& model, const ScenarioTree& tree, const ControlTree& u,
                             const std::vector<double>& states) {
    const std::size_t nx = model.nx();
    double cost = 0.0;
    for (std::size_t i = 1; i < tree.num_nodes(); ++i) {
        const std::size_t a = tree.ancestor_of(i);
        std::span<const double> xa{states.data() + a * nx, nx};
        cost += tree.probability_of(i) *
                model.stage_cost(xa, u.block(a), tree.disturbance_of(i));
    }
    for (std::size_t j : tree.leaf_nodes()) {
        std::span<const double> xj{states.data() + j * nx, nx};
        cost += tree.probability_of(j) * model.terminal_cost(xj);
    }
    return cost;
}

}  // namespace detail

/// One state per node: x^0 = x0 and x^i = f(x^anc(i), u^anc(i), w^i).
template <BaseModel M>
std::vector<double> rollout_tree(const M& model, const ScenarioTree& tree,
                                 std::span<const double> x0, const ControlTree& u) {
    detail::check_tree_dims(model, tree, x0, u);
    std::vector<double> states;
    detail::rollout_tree_into(model, tree, x0, u, states);
    return states;
}

/// Expected total cost
///   sum_{i in nodes(1..N)} pi^i l(x^anc(i), u^anc(i), w^i)
///   + sum_{leaves j} pi^j Vf(x^j).
template <BaseModel M>
double cost_tree(const M& model, const ScenarioTree& tree, std::span<const double> x0,
                 const ControlTree& u) {
    detail::check_tree_dims(model, tree, x0, u);
    std::vector<double> states;
    detail::rollout_tree_into(model, tree, x0, u, states);
    return detail::tree_cost_from_states(model, tree, u, states);
}

/// Gradient of the expected total cost with respect to every nonleaf control
/// block, via a stage-parallel backward sweep over the tree.
///
/// Leaf adjoints are seeded with the probability-weighted terminal gradients,
/// a^j = pi^j Vf'(x^j), which folds the probability weighting into the
/// adjoints and makes one recursion cover every stage: for each node i,
///
///   grad_i = sum_{c in child(i)} pi^c lu^c + fu^c(a^c)
///   a_i    = sum_{c in child(i)} pi^c lx^c + fx^c(a^c)      (stages 1..N-1)
///
/// where lu^c, fu^c, ... are evaluated at (x^i, u^i, w^c). Stages run
/// back-to-front with a fork-join barrier between them; within a stage the
/// nodes are split across `workers`. Every output slot has exactly one
/// writer and children are reduced in ascending id, so results are bitwise
/// identical for any worker count.
template <Model M>
void grad_tree_into(const M& model, const ScenarioTree& tree, std::span<const double> x0,
                    const ControlTree& u, unsigned workers, TreeGradResult& out,
                    TreeWorkspace& ws) {
    detail::check_tree_dims(model, tree, x0, u);
    if (workers == 0) throw std::invalid_argument("grad_tree: workers must be >= 1");
    const std::size_t nx = model.nx();
    const std::size_t nu = model.nu();
    const std::size_t N = tree.horizon();

    out.nx = nx;
    out.nu = nu;
    out.grad.resize(tree.num_nonleaf_nodes() * nu);
    out.adjoints.resize((tree.num_nodes() - 1) * nx);
    ws.per_worker.resize(workers);
    for (auto& s : ws.per_worker) {
        s.tmp_x.resize(nx);
        s.tmp_u.resize(nu);
        s.acc_x.resize(nx);
        s.acc_u.resize(nu);
    }

    detail::rollout_tree_into(model, tree, x0, u, out.states);
    out.cost = detail::tree_cost_from_states(model, tree, u, out.states);

    double* const adj = out.adjoints.data();  // slot of node i starts at (i-1)*nx
    const double* const st = out.states.data();

    const NodeRange leaves = tree.leaf_nodes();
    for_each_chunk(leaves.first(), leaves.past(), workers,
                   [&](unsigned, std::size_t b, std::size_t e) {
                       for (std::size_t j = b; j < e; ++j) {
                           std::span<double> aj{adj + (j - 1) * nx, nx};
                           model.terminal_cost_grad({st + j * nx, nx}, aj);
                           const double pj = tree.probability_of(j);
                           for (double& v : aj) v *= pj;
                       }
                   });

    for (std::size_t t = N; t-- > 0;) {
        const NodeRange range = tree.nodes_at_stage(t);
        for_each_chunk(
            range.first(), range.past(), workers,
            [&, t](unsigned worker, std::size_t b, std::size_t e) {
                TreeWorkspace::Scratch& s = ws.per_worker[worker];
                for (std::size_t i = b; i < e; ++i) {
                    std::span<const double> xi{st + i * nx, nx};
                    std::span<const double> ui = u.block(i);
                    std::fill(s.acc_u.begin(), s.acc_u.end(), 0.0);
                    if (t >= 1) std::fill(s.acc_x.begin(), s.acc_x.end(), 0.0);
                    for (std::size_t c : tree.children_of(i)) {
                        const double pc = tree.probability_of(c);
                        std::span<const double> wc = tree.disturbance_of(c);
                        std::span<const double> ac{adj + (c - 1) * nx, nx};
                        model.stage_cost_grad_u(xi, ui, wc, s.tmp_u);
                        for (std::size_t k = 0; k < nu; ++k) s.acc_u[k] += pc * s.tmp_u[k];
                        model.dynamics_adj_u(xi, ui, wc, ac, s.tmp_u);
                        for (std::size_t k = 0; k < nu; ++k) s.acc_u[k] += s.tmp_u[k];
                        if (t >= 1) {
                            model.stage_cost_grad_x(xi, ui, wc, s.tmp_x);
                            for (std::size_t k = 0; k < nx; ++k) s.acc_x[k] += pc * s.tmp_x[k];
                            model.dynamics_adj_x(xi, ui, wc, ac, s.tmp_x);
                            for (std::size_t k = 0; k < nx; ++k) s.acc_x[k] += s.tmp_x[k];
                        }
                    }
                    std::copy(s.acc_u.begin(), s.acc_u.end(), out.grad.data() + i * nu);
                    if (t >= 1) std::copy(s.acc_x.begin(), s.acc_x.end(), adj + (i - 1) * nx);
                }
            });
    }
}

template <Model M>
TreeGradResult grad_tree(const M& model, const ScenarioTree& tree, std::span<const double> x0,
                         const ControlTree& u, unsigned workers = 1) {
    TreeGradResult out;
    TreeWorkspace ws;
    grad_tree_into(model, tree, x0, u, workers, out, ws);
    return out;
}

}  // namespace ocgrad
