#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ocgrad/ballbeam.hpp"
#include "ocgrad/bench.hpp"
#include "ocgrad/check.hpp"
#include "ocgrad/pendulum.hpp"
#include "ocgrad/solve.hpp"
#include "support/helpers.hpp"
#include "support/test_models.hpp"

using namespace ocgrad;
using namespace ocgrad::testing;

TEST_CASE("descent on the pendulum strictly decreases the cost") {
    const PendulumModel model;
    ControlSeq u(20, 1);
    const std::vector<double> x0{0.3, 0.0};
    SolveOptions opt;
    opt.max_iters = 100;
    const auto trace = solve_det(model, x0, u, opt);

    REQUIRE(trace.size() >= 2);
    for (std::size_t k = 1; k < trace.size(); ++k) {
        REQUIRE(trace[k].cost <= trace[k - 1].cost);
        if (trace[k - 1].step > 0.0) REQUIRE(trace[k].cost < trace[k - 1].cost);
    }
    REQUIRE(trace.back().grad_norm < trace.front().grad_norm);
}

TEST_CASE("a stationary start takes zero steps") {
    const PendulumModel model;
    ControlSeq u(10, 1);
    const std::vector<double> x0{0.0, 0.0};  // equilibrium, zero controls
    const auto trace = solve_det(model, x0, u, {});
    REQUIRE(trace.size() == 1);
    REQUIRE(trace[0].cost == 0.0);
    REQUIRE(trace[0].grad_norm == 0.0);
    for (double v : u.flat()) REQUIRE(v == 0.0);
}

TEST_CASE("stochastic descent is non-increasing for both systems") {
    auto rng = make_rng(2024);
    const MarkovChain chain = random_chain(rng, 3);
    const ScenarioTree tree = build_from_markov(chain, 4);

    SolveOptions opt;
    opt.max_iters = 60;

    const PendulumModel pend;
    ControlTree up(tree, 1);
    auto trace = solve_tree(pend, tree, std::vector<double>{0.3, 0.0}, up, opt, 2);
    REQUIRE(trace.size() >= 2);
    for (std::size_t k = 1; k < trace.size(); ++k) REQUIRE(trace[k].cost <= trace[k - 1].cost);

    const BallBeamModel beam;
    ControlTree ub(tree, 1);
    trace = solve_tree(beam, tree, std::vector<double>{0.15, 0.0, 0.0, 0.0}, ub, opt, 2);
    REQUIRE(trace.size() >= 2);
    for (std::size_t k = 1; k < trace.size(); ++k) REQUIRE(trace[k].cost <= trace[k - 1].cost);
}

TEST_CASE("gradient check passes for correct models and fails for a corrupted one") {
    const PendulumModel model;
    auto rng = make_rng(303);
    auto u = ControlSeq::from_flat(20, 1, uniform_vec(rng, 20, -1.0, 1.0));
    const std::vector<double> x0{0.2, -0.1};

    const GradCheckReport good = check_grad_det(model, x0, u);
    REQUIRE(good.pass);
    REQUIRE(good.max_rel_dev < 1e-5);

    const CorruptAdjU<PendulumModel> corrupted{model};
    const GradCheckReport bad = check_grad_det(corrupted, x0, u);
    REQUIRE_FALSE(bad.pass);
    REQUIRE(bad.max_rel_dev > 1e-3);
}

TEST_CASE("stochastic gradient check passes on a random tree") {
    const BallBeamModel model;
    auto rng = make_rng(404);
    const ScenarioTree tree = build_from_markov(random_chain(rng, 3), 4);
    auto u = ControlTree::from_flat(tree, 1, uniform_vec(rng, tree.num_nonleaf_nodes(), -0.5, 0.5));
    const GradCheckReport report =
        check_grad_tree(model, tree, std::vector<double>{0.1, 0.0, -0.1, 0.0}, u, {}, 2);
    REQUIRE(report.pass);
}

TEST_CASE("deterministic bench records are consistent") {
    const PendulumModel model;
    const ControlSeq u(12, 1);
    const std::vector<double> x0{0.2, 0.0};
    const BenchRecord rec = bench_grad_det(model, x0, u, 50, 10, "pendulum_det");

    REQUIRE(rec.label == "pendulum_det");
    REQUIRE(rec.size == 12);
    REQUIRE(rec.repetitions == 50);
    REQUIRE(rec.min_ns > 0.0);
    REQUIRE(rec.min_ns <= rec.mean_ns);
    REQUIRE(rec.calls.dynamics == 12);
    REQUIRE(rec.calls.dynamics_adj_x == 11);
    REQUIRE(rec.calls.terminal_cost_grad == 1);
}

TEST_CASE("single-repetition bench collapses mean and min") {
    const PendulumModel model;
    const ControlSeq u(5, 1);
    const std::vector<double> x0{0.1, 0.0};
    const BenchRecord rec = bench_grad_det(model, x0, u, 1, 0, "one");
    REQUIRE(rec.repetitions == 1);
    REQUIRE(rec.mean_ns == rec.min_ns);
}

TEST_CASE("tree bench reports the node count and per-gradient calls") {
    const PendulumModel model;
    auto rng = make_rng(505);
    const ScenarioTree tree = build_from_markov(random_chain(rng, 3), 3);
    const ControlTree u(tree, 1);
    const std::vector<double> x0{0.2, 0.0};
    const BenchRecord rec = bench_grad_tree(model, tree, x0, u, 2, 20, 5, "pendulum_tree");

    REQUIRE(rec.size == tree.num_nodes());
    REQUIRE(rec.calls.dynamics == tree.num_nodes() - 1);
    REQUIRE(rec.calls.terminal_cost_grad == tree.num_leaf_nodes());
    REQUIRE(rec.min_ns <= rec.mean_ns);
}
