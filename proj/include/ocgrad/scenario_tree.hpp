#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocgrad {

// Tolerance for probability-mass checks (row sums, stage sums, conservation).
inline constexpr double kProbTol = 1e-12;

/// Finitely-supported disturbance process: a set of disturbance values
/// ("modes"), a row-stochastic transition matrix and an initial distribution.
struct MarkovChain {
    std::vector<std::vector<double>> modes;       // modes[m] = disturbance vector, length nw
    std::vector<std::vector<double>> transition;  // num_modes x num_modes, rows sum to 1
    std::vector<double> initial;                  // length num_modes, sums to 1

    std::size_t num_modes() const { return modes.size(); }
    std::size_t nw() const { return modes.empty() ? 0 : modes.front().size(); }

    /// Throws std::invalid_argument naming the first failed check.
    void validate() const {
        if (modes.empty()) throw std::invalid_argument("markov chain: no modes given");
        const std::size_t m = modes.size();
        const std::size_t dim = modes.front().size();
        if (dim == 0) throw std::invalid_argument("markov chain: modes must have dimension >= 1");
        for (const auto& mode : modes) {
            if (mode.size() != dim)
                throw std::invalid_argument("markov chain: modes have inconsistent dimensions");
        }
        if (transition.size() != m)
            throw std::invalid_argument("markov chain: transition matrix must have one row per mode");
        for (std::size_t r = 0; r < m; ++r) {
            const auto& row = transition[r];
            if (row.size() != m)
                throw std::invalid_argument("markov chain: transition row " + std::to_string(r) +
                                            " has wrong length");
            long double sum = 0.0L;
            for (double p : row) {
                if (p < 0.0)
                    throw std::invalid_argument("markov chain: transition row " + std::to_string(r) +
                                                " has a negative entry");
                sum += p;
            }
            if (std::fabs(static_cast<double>(sum) - 1.0) > kProbTol)
                throw std::invalid_argument("markov chain: transition row " + std::to_string(r) +
                                            " does not sum to 1");
        }
        if (initial.size() != m)
            throw std::invalid_argument("markov chain: initial distribution has wrong length");
        long double sum = 0.0L;
        for (double p : initial) {
            if (p < 0.0)
                throw std::invalid_argument("markov chain: initial distribution has a negative entry");
            sum += p;
        }
        if (std::fabs(static_cast<double>(sum) - 1.0) > kProbTol)
            throw std::invalid_argument("markov chain: initial distribution does not sum to 1");
    }
};

/// Half-open, contiguous range of node ids.
class NodeRange {
public:
    class iterator {
    public:
        explicit iterator(std::size_t v) : v_(v) {}
        std::size_t operator*() const { return v_; }
        iterator& operator++() { ++v_; return *this; }
        bool operator!=(const iterator& o) const { return v_ != o.v_; }
        bool operator==(const iterator& o) const { return v_ == o.v_; }
    private:
        std::size_t v_;
    };

    NodeRange(std::size_t first, std::size_t past) : first_(first), past_(past) {}
    iterator begin() const { return iterator(first_); }
    iterator end() const { return iterator(past_); }
    std::size_t first() const { return first_; }
    std::size_t past() const { return past_; }
    std::size_t size() const { return past_ - first_; }
    bool empty() const { return past_ == first_; }

private:
    std::size_t first_;
    std::size_t past_;
};

/// Per-node input record for build_explicit. Describes one node at stage >= 1:
/// its ancestor id, its unconditional probability and the disturbance value
/// realised on the edge leading to it.
struct TreeNodeSpec {
    std::size_t anc = 0;
    double prob = 0.0;
    std::vector<double> disturbance;
};

/// Scenario-tree topology with unconditional node probabilities.
///
/// Node ids are breadth-first and stage-contiguous: all nodes of stage t
/// precede all nodes of stage t+1, and the children of any node form a
/// contiguous ascending id range. The root is node 0 with probability 1;
/// every other node carries the disturbance realised on its incoming edge.
/// Immutable after construction; concurrent reads are safe.
class ScenarioTree {
public:
    std::size_t horizon() const { return horizon_; }
    std::size_t num_nodes() const { return prob_.size(); }
    std::size_t num_nonleaf_nodes() const { return stage_first_[horizon_]; }
    std::size_t num_leaf_nodes() const { return num_nodes() - num_nonleaf_nodes(); }
    std::size_t nw() const { return nw_; }

    std::size_t stage_of(std::size_t node) const { return stage_[node]; }

    /// Ancestor of `node`; node must be >= 1.
    std::size_t ancestor_of(std::size_t node) const { return anc_[node]; }

    NodeRange children_of(std::size_t node) const {
        return NodeRange(child_first_[node], child_past_[node]);
    }

    NodeRange nodes_at_stage(std::size_t stage) const {
        return NodeRange(stage_first_[stage], stage_first_[stage + 1]);
    }

    NodeRange leaf_nodes() const { return nodes_at_stage(horizon_); }
    NodeRange nonleaf_nodes() const { return NodeRange(0, num_nonleaf_nodes()); }

    /// Unconditional probability pi of visiting `node`.
    double probability_of(std::size_t node) const { return prob_[node]; }

    /// Disturbance realised on the edge into `node`; node must be >= 1.
    std::span<const double> disturbance_of(std::size_t node) const {
        return {w_.data() + node * nw_, nw_};
    }

    friend ScenarioTree build_from_markov(const MarkovChain& chain, std::size_t horizon);
    friend ScenarioTree build_explicit(const std::vector<std::vector<TreeNodeSpec>>& stages);

private:
    ScenarioTree() = default;

    void validate() const {
        for (std::size_t t = 0; t <= horizon_; ++t) {
            long double mass = 0.0L;
            for (std::size_t i : nodes_at_stage(t)) {
                if (!(prob_[i] > 0.0))
                    throw std::invalid_argument("scenario tree: node " + std::to_string(i) +
                                                " has non-positive probability");
                mass += prob_[i];
            }
            if (std::fabs(static_cast<double>(mass) - 1.0) > kProbTol)
                throw std::invalid_argument("scenario tree: stage " + std::to_string(t) +
                                            " probabilities do not sum to 1");
        }
        for (std::size_t i = 1; i < num_nodes(); ++i) {
            if (stage_[anc_[i]] + 1 != stage_[i])
                throw std::invalid_argument("scenario tree: node " + std::to_string(i) +
                                            " has an ancestor outside the previous stage");
        }
        for (std::size_t i : nonleaf_nodes()) {
            long double mass = 0.0L;
            for (std::size_t c : children_of(i)) mass += prob_[c];
            if (std::fabs(static_cast<double>(mass) - prob_[i]) > kProbTol)
                throw std::invalid_argument("scenario tree: children of node " + std::to_string(i) +
                                            " do not conserve its probability mass");
        }
    }

    std::size_t horizon_ = 0;
    std::size_t nw_ = 0;
    std::vector<std::size_t> stage_first_;  // length horizon_+2; stage t = [stage_first_[t], stage_first_[t+1])
    std::vector<std::size_t> stage_;        // per node
    std::vector<std::size_t> anc_;          // per node; anc_[0] unused
    std::vector<std::size_t> child_first_;  // per node; leaves have empty ranges
    std::vector<std::size_t> child_past_;
    std::vector<double> prob_;              // per node, unconditional
    std::vector<double> w_;                 // num_nodes * nw_, node 0 slot zeroed
};

/// Unrolls a Markov chain over `horizon` stages. Stage-1 nodes are the modes
/// with positive initial probability; a node in mode m spawns one child per
/// mode m' reachable with positive transition probability. Zero-probability
/// branches are pruned so that every node satisfies prob > 0.
inline ScenarioTree build_from_markov(const MarkovChain& chain, std::size_t horizon) {
    chain.validate();
    if (horizon == 0) throw std::invalid_argument("scenario tree: horizon must be >= 1");

    const std::size_t m = chain.num_modes();
    ScenarioTree tree;
    tree.horizon_ = horizon;
    tree.nw_ = chain.nw();

    std::vector<std::size_t> mode_of;  // construction-time only
    tree.stage_first_.assign(horizon + 2, 0);

    auto append_node = [&](std::size_t stage, std::size_t anc, double prob, std::size_t mode) {
        tree.stage_.push_back(stage);
        tree.anc_.push_back(anc);
        tree.prob_.push_back(prob);
        mode_of.push_back(mode);
        if (stage == 0) {
            tree.w_.insert(tree.w_.end(), tree.nw_, 0.0);
        } else {
            const auto& w = chain.modes[mode];
            tree.w_.insert(tree.w_.end(), w.begin(), w.end());
        }
    };

    append_node(0, 0, 1.0, 0);
    tree.stage_first_[1] = 1;
    for (std::size_t mode = 0; mode < m; ++mode) {
        if (chain.initial[mode] > 0.0) append_node(1, 0, chain.initial[mode], mode);
    }
    tree.stage_first_[2] = tree.prob_.size();

    for (std::size_t t = 1; t < horizon; ++t) {
        for (std::size_t i = tree.stage_first_[t]; i < tree.stage_first_[t + 1]; ++i) {
            const auto& row = chain.transition[mode_of[i]];
            for (std::size_t mode = 0; mode < m; ++mode) {
                if (row[mode] > 0.0) append_node(t + 1, i, tree.prob_[i] * row[mode], mode);
            }
        }
        tree.stage_first_[t + 2] = tree.prob_.size();
    }

    const std::size_t n = tree.prob_.size();
    tree.child_first_.assign(n, 0);
    tree.child_past_.assign(n, 0);
    std::size_t cursor = 1;
    for (std::size_t i = 0; i < tree.stage_first_[horizon]; ++i) {
        tree.child_first_[i] = cursor;
        while (cursor < n && tree.anc_[cursor] == i) ++cursor;
        tree.child_past_[i] = cursor;
    }

    tree.validate();
    return tree;
}

/// Builds a tree from explicit per-node records. stages[k] lists the nodes of
/// stage k+1 in id order (the root is implicit). Within a stage the ancestor
/// ids must be non-decreasing so that child ranges stay contiguous. All tree
/// invariants are checked; violations are rejected.
inline ScenarioTree build_explicit(const std::vector<std::vector<TreeNodeSpec>>& stages) {
    if (stages.empty()) throw std::invalid_argument("scenario tree: horizon must be >= 1");
    for (std::size_t k = 0; k < stages.size(); ++k) {
        if (stages[k].empty())
            throw std::invalid_argument("scenario tree: stage " + std::to_string(k + 1) +
                                        " has no nodes (stages must be contiguous)");
    }

    ScenarioTree tree;
    tree.horizon_ = stages.size();
    tree.nw_ = stages.front().front().disturbance.size();
    if (tree.nw_ == 0)
        throw std::invalid_argument("scenario tree: disturbance dimension must be >= 1");

    tree.stage_first_.assign(tree.horizon_ + 2, 0);
    tree.stage_.push_back(0);
    tree.anc_.push_back(0);
    tree.prob_.push_back(1.0);
    tree.w_.insert(tree.w_.end(), tree.nw_, 0.0);
    tree.stage_first_[1] = 1;

    for (std::size_t k = 0; k < stages.size(); ++k) {
        const std::size_t stage = k + 1;
        const std::size_t prev_first = tree.stage_first_[stage - 1];
        const std::size_t prev_past = tree.stage_first_[stage];
        std::size_t last_anc = 0;
        bool first_record = true;
        for (const TreeNodeSpec& rec : stages[k]) {
            if (rec.anc < prev_first || rec.anc >= prev_past)
                throw std::invalid_argument("scenario tree: node at stage " + std::to_string(stage) +
                                            " has a dangling ancestor " + std::to_string(rec.anc));
            if (!first_record && rec.anc < last_anc)
                throw std::invalid_argument(
                    "scenario tree: ancestors must be non-decreasing within stage " +
                    std::to_string(stage));
            if (rec.disturbance.size() != tree.nw_)
                throw std::invalid_argument("scenario tree: inconsistent disturbance dimension at stage " +
                                            std::to_string(stage));
            last_anc = rec.anc;
            first_record = false;
            tree.stage_.push_back(stage);
            tree.anc_.push_back(rec.anc);
            tree.prob_.push_back(rec.prob);
            tree.w_.insert(tree.w_.end(), rec.disturbance.begin(), rec.disturbance.end());
        }
        tree.stage_first_[stage + 1] = tree.prob_.size();
    }

    const std::size_t n = tree.prob_.size();
    tree.child_first_.assign(n, 0);
    tree.child_past_.assign(n, 0);
    std::size_t cursor = 1;
    for (std::size_t i = 0; i < tree.stage_first_[tree.horizon_]; ++i) {
        tree.child_first_[i] = cursor;
        while (cursor < n && tree.anc_[cursor] == i) ++cursor;
        tree.child_past_[i] = cursor;
    }

    tree.validate();
    return tree;
}

}  // namespace ocgrad
