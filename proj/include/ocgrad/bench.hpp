#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>

#include "ocgrad/grad_det.hpp"
#include "ocgrad/grad_tree.hpp"
#include "ocgrad/model.hpp"

namespace ocgrad {

/// One benchmark measurement: repeated gradient evaluations of a fixed
/// problem. Times are per gradient, in nanoseconds; call counts are per
/// single gradient evaluation.
struct BenchRecord {
    std::string label;
    std::size_t size = 0;  // horizon N (deterministic) or node count (tree)
    std::size_t repetitions = 0;
    double mean_ns = 0.0;
    double min_ns = 0.0;
    ModelCallCounts calls;
};

namespace detail {

inline void sink(const double* p) { asm volatile("" : : "g"(p) : "memory"); }

template <typename Body>
void time_loop(std::size_t reps, std::size_t warmup, Body&& body, BenchRecord& rec) {
    using clock = std::chrono::steady_clock;
    for (std::size_t r = 0; r < warmup; ++r) body();
    double total = 0.0;
    double best = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const auto t0 = clock::now();
        body();
        const auto t1 = clock::now();
        const double ns = std::chrono::duration<double, std::nano>(t1 - t0).count();
        total += ns;
        if (r == 0 || ns < best) best = ns;
    }
    rec.repetitions = reps;
    rec.mean_ns = total / static_cast<double>(reps);
    rec.min_ns = best;
}

}  // namespace detail

/// Times grad_det on a fixed problem. Call counts come from one separate
/// instrumented evaluation so the counting overhead never enters the timings.
template <Model M>
BenchRecord bench_grad_det(const M& model, std::span<const double> x0, const ControlSeq& u,
                           std::size_t reps, std::size_t warmup, std::string label) {
    BenchRecord rec;
    rec.label = std::move(label);
    rec.size = u.horizon();

    CountingModel<M> counted(model);
    DetGradResult res;
    DetWorkspace ws;
    grad_det_into(counted, x0, u, res, ws);
    rec.calls = counted.counts();

    detail::time_loop(
        reps, warmup,
        [&] {
            grad_det_into(model, x0, u, res, ws);
            detail::sink(res.grad.data());
        },
        rec);
    return rec;
}

/// Times grad_tree on a fixed problem; size is the tree's node count.
template <Model M>
BenchRecord bench_grad_tree(const M& model, const ScenarioTree& tree, std::span<const double> x0,
                            const ControlTree& u, unsigned workers, std::size_t reps,
                            std::size_t warmup, std::string label) {
    BenchRecord rec;
    rec.label = std::move(label);
    rec.size = tree.num_nodes();

    CountingModel<M> counted(model);
    TreeGradResult res;
    TreeWorkspace ws;
    grad_tree_into(counted, tree, x0, u, workers, res, ws);
    rec.calls = counted.counts();

    detail::time_loop(
        reps, warmup,
        [&] {
            grad_tree_into(model, tree, x0, u, workers, res, ws);
            detail::sink(res.grad.data());
        },
        rec);
    return rec;
}

}  // namespace ocgrad
