#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ocgrad/ballbeam.hpp"
#include "ocgrad/model.hpp"
#include "ocgrad/pendulum.hpp"
#include "support/helpers.hpp"
#include "support/test_models.hpp"

using namespace ocgrad;
using namespace ocgrad::testing;

namespace {

// Test-local finite-difference oracle: dense Jacobian columns of the
// dynamics by central differences, then J^T d.
template <BaseModel M>
std::vector<double> fd_dynamics_adj(const M& model, std::vector<double> x, std::vector<double> u,
                                    const std::vector<double>& w, const std::vector<double>& d,
                                    bool wrt_state) {
    std::vector<double>& pt = wrt_state ? x : u;
    std::vector<double> fp(model.nx()), fm(model.nx()), out(pt.size());
    for (std::size_t k = 0; k < pt.size(); ++k) {
        const double base = pt[k];
        const double h = 1e-6 * (1.0 + std::fabs(base));
        pt[k] = base + h;
        model.dynamics(x, u, w, fp);
        pt[k] = base - h;
        model.dynamics(x, u, w, fm);
        pt[k] = base;
        double acc = 0.0;
        for (std::size_t j = 0; j < fp.size(); ++j) acc += d[j] * (fp[j] - fm[j]) / (2.0 * h);
        out[k] = acc;
    }
    return out;
}

template <BaseModel M>
std::vector<double> fd_cost_grad(const M& model, std::vector<double> x, std::vector<double> u,
                                 const std::vector<double>& w, bool wrt_state) {
    std::vector<double>& pt = wrt_state ? x : u;
    std::vector<double> out(pt.size());
    for (std::size_t k = 0; k < pt.size(); ++k) {
        const double base = pt[k];
        const double h = 1e-6 * (1.0 + std::fabs(base));
        pt[k] = base + h;
        const double cp = model.stage_cost(x, u, w);
        pt[k] = base - h;
        const double cm = model.stage_cost(x, u, w);
        pt[k] = base;
        out[k] = (cp - cm) / (2.0 * h);
    }
    return out;
}

template <Model M>
void check_derivatives_at(const M& model, const std::vector<double>& x,
                          const std::vector<double>& u, const std::vector<double>& w,
                          const std::vector<double>& d, double tol) {
    std::vector<double> got_x(model.nx()), got_u(model.nu());
    model.dynamics_adj_x(x, u, w, d, got_x);
    model.dynamics_adj_u(x, u, w, d, got_u);
    REQUIRE(max_rel_dev(got_x, fd_dynamics_adj(model, x, u, w, d, true)) < tol);
    REQUIRE(max_rel_dev(got_u, fd_dynamics_adj(model, x, u, w, d, false)) < tol);

    model.stage_cost_grad_x(x, u, w, got_x);
    model.stage_cost_grad_u(x, u, w, got_u);
    REQUIRE(max_rel_dev(got_x, fd_cost_grad(model, x, u, w, true)) < tol);
    REQUIRE(max_rel_dev(got_u, fd_cost_grad(model, x, u, w, false)) < tol);

    std::vector<double> vg(model.nx()), vg_fd(model.nx());
    model.terminal_cost_grad(x, vg);
    for (std::size_t k = 0; k < x.size(); ++k) {
        std::vector<double> pt = x;
        const double h = 1e-6 * (1.0 + std::fabs(x[k]));
        pt[k] = x[k] + h;
        const double cp = model.terminal_cost(pt);
        pt[k] = x[k] - h;
        const double cm = model.terminal_cost(pt);
        vg_fd[k] = (cp - cm) / (2.0 * h);
    }
    REQUIRE(max_rel_dev(vg, vg_fd) < tol);
}

template <Model M>
void check_adjoint_linearity(const M& model, std::mt19937_64& rng,
                             const std::vector<double>& x, const std::vector<double>& u,
                             const std::vector<double>& w) {
    const double alpha = uniform(rng, -2.0, 2.0);
    const double beta = uniform(rng, -2.0, 2.0);
    const auto d1 = uniform_vec(rng, model.nx(), -1.0, 1.0);
    const auto d2 = uniform_vec(rng, model.nx(), -1.0, 1.0);
    std::vector<double> combo(model.nx());
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = alpha * d1[i] + beta * d2[i];

    auto check = [&](auto&& op, std::size_t dim) {
        std::vector<double> lhs(dim), r1(dim), r2(dim), rhs(dim);
        op(combo, lhs);
        op(d1, r1);
        op(d2, r2);
        for (std::size_t i = 0; i < dim; ++i) rhs[i] = alpha * r1[i] + beta * r2[i];
        REQUIRE(max_rel_dev(lhs, rhs) < 1e-12);
    };
    check([&](std::span<const double> d, std::span<double> o) { model.dynamics_adj_x(x, u, w, d, o); },
          model.nx());
    check([&](std::span<const double> d, std::span<double> o) { model.dynamics_adj_u(x, u, w, d, o); },
          model.nu());
}

}  // namespace

TEST_CASE("pendulum equilibrium and force response at theta=0") {
    const PendulumModel model;
    const auto& p = model.params();
    std::vector<double> next(2);

    model.dynamics(std::vector<double>{0.0, 0.0}, std::vector<double>{0.0},
                   std::vector<double>{0.01}, next);
    REQUIRE(next[0] == 0.0);
    REQUIRE(next[1] == 0.0);

    const double force = 4.2, ts = 0.01;
    model.dynamics(std::vector<double>{0.0, 0.0}, std::vector<double>{force},
                   std::vector<double>{ts}, next);
    const double mtot = p.M + p.m;
    const double expected = -3.0 * force * ts / ((4.0 * mtot - 3.0 * p.m) * p.L);
    REQUIRE(next[0] == 0.0);
    REQUIRE(next[1] == Catch::Approx(expected).epsilon(1e-14));
}

TEST_CASE("pendulum adjoints match finite differences at random points") {
    const PendulumModel model;
    auto rng = make_rng(101);
    for (int i = 0; i < 20; ++i) {
        const std::vector<double> x{uniform(rng, -1.0, 1.0), uniform(rng, -5.0, 5.0)};
        const std::vector<double> u{uniform(rng, -20.0, 20.0)};
        const std::vector<double> w{uniform(rng, 0.01, 0.1)};
        const auto d = uniform_vec(rng, 2, -1.0, 1.0);
        std::vector<double> got(2);
        model.dynamics_adj_x(x, u, w, d, got);
        REQUIRE(max_rel_dev(got, fd_dynamics_adj(model, x, u, w, d, true)) < 1e-6);
        std::vector<double> got_u(1);
        model.dynamics_adj_u(x, u, w, d, got_u);
        REQUIRE(max_rel_dev(got_u, fd_dynamics_adj(model, x, u, w, d, false)) < 1e-6);
    }
}

TEST_CASE("pendulum derivatives over the operating box", "[property]") {
    const PendulumModel model;
    auto rng = make_rng(20231);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x{uniform(rng, -1.0, 1.0), uniform(rng, -5.0, 5.0)};
        const std::vector<double> u{uniform(rng, -20.0, 20.0)};
        const std::vector<double> w{uniform(rng, 0.01, 0.1)};
        const auto d = uniform_vec(rng, 2, -1.0, 1.0);
        check_derivatives_at(model, x, u, w, d, 1e-5);
    }
}

TEST_CASE("ball-beam origin is a fixed point; torque enters through the beam rate") {
    const BallBeamModel model;
    const auto& p = model.params();
    std::vector<double> next(4);

    model.dynamics(std::vector<double>(4, 0.0), std::vector<double>{0.0},
                   std::vector<double>{0.01}, next);
    for (double v : next) REQUIRE(v == 0.0);

    const double torque = 0.8, ts = 0.01;
    model.dynamics(std::vector<double>(4, 0.0), std::vector<double>{torque},
                   std::vector<double>{ts}, next);
    REQUIRE(next[0] == 0.0);
    REQUIRE(next[1] == 0.0);
    REQUIRE(next[2] == 0.0);
    REQUIRE(next[3] == Catch::Approx(ts * torque / p.I).epsilon(1e-14));
}

TEST_CASE("ball-beam derivatives over the operating box", "[property]") {
    const BallBeamModel model;
    auto rng = make_rng(4242);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x{uniform(rng, -0.5, 0.5), uniform(rng, -1.0, 1.0),
                                    uniform(rng, -0.5, 0.5), uniform(rng, -1.0, 1.0)};
        const std::vector<double> u{uniform(rng, -5.0, 5.0)};
        const std::vector<double> w{uniform(rng, 0.01, 0.1)};
        const auto d = uniform_vec(rng, 4, -1.0, 1.0);
        check_derivatives_at(model, x, u, w, d, 1e-5);
    }
}

TEST_CASE("adjoint products are linear in the direction", "[property]") {
    auto rng = make_rng(99);
    const PendulumModel pend;
    const BallBeamModel beam;
    for (int i = 0; i < 25; ++i) {
        check_adjoint_linearity(pend, rng, {uniform(rng, -1.0, 1.0), uniform(rng, -5.0, 5.0)},
                                {uniform(rng, -20.0, 20.0)}, {0.01});
        check_adjoint_linearity(beam, rng,
                                {uniform(rng, -0.5, 0.5), uniform(rng, -1.0, 1.0),
                                 uniform(rng, -0.5, 0.5), uniform(rng, -1.0, 1.0)},
                                {uniform(rng, -5.0, 5.0)}, {0.01});
    }
}

TEST_CASE("euler step is proportional to the sampling time", "[property]") {
    const PendulumModel pend;
    const BallBeamModel beam;
    auto rng = make_rng(31);

    auto check = [&](const auto& model, const std::vector<double>& x,
                     const std::vector<double>& u) {
        const std::vector<double> steps{0.01, 0.02, 0.1};
        std::vector<double> next(model.nx());
        std::vector<double> reference;
        for (double ts : steps) {
            model.dynamics(x, u, std::vector<double>{ts}, next);
            std::vector<double> rate(model.nx());
            for (std::size_t i = 0; i < rate.size(); ++i) rate[i] = (next[i] - x[i]) / ts;
            if (reference.empty()) {
                reference = rate;
            } else {
                REQUIRE(max_abs_dev(rate, reference) < 1e-12);
            }
        }
    };

    for (int i = 0; i < 20; ++i) {
        check(pend, {uniform(rng, -1.0, 1.0), uniform(rng, -3.0, 3.0)},
              {uniform(rng, -10.0, 10.0)});
        check(beam,
              {uniform(rng, -0.5, 0.5), uniform(rng, -1.0, 1.0), uniform(rng, -0.5, 0.5),
               uniform(rng, -1.0, 1.0)},
              {uniform(rng, -3.0, 3.0)});
    }
}

TEST_CASE("finite-difference wrapper agrees with the analytic pendulum") {
    const PendulumModel analytic;
    const FiniteDiffModel<StripDerivatives<PendulumModel>> wrapped{
        StripDerivatives<PendulumModel>(analytic)};
    auto rng = make_rng(555);
    for (int i = 0; i < 20; ++i) {
        const std::vector<double> x{uniform(rng, -1.0, 1.0), uniform(rng, -4.0, 4.0)};
        const std::vector<double> u{uniform(rng, -10.0, 10.0)};
        const std::vector<double> w{0.01};
        const auto d = uniform_vec(rng, 2, -1.0, 1.0);

        std::vector<double> a(2), b(2);
        analytic.dynamics_adj_x(x, u, w, d, a);
        wrapped.dynamics_adj_x(x, u, w, d, b);
        REQUIRE(max_rel_dev(b, a) < 1e-5);

        std::vector<double> au(1), bu(1);
        analytic.dynamics_adj_u(x, u, w, d, au);
        wrapped.dynamics_adj_u(x, u, w, d, bu);
        REQUIRE(max_rel_dev(bu, au) < 1e-5);

        analytic.stage_cost_grad_x(x, u, w, a);
        wrapped.stage_cost_grad_x(x, u, w, b);
        REQUIRE(max_rel_dev(b, a) < 1e-5);
        analytic.terminal_cost_grad(x, a);
        wrapped.terminal_cost_grad(x, b);
        REQUIRE(max_rel_dev(b, a) < 1e-5);
    }
}

TEST_CASE("finite-difference wrapper is near-exact on a linear map") {
    const LinearModel linear(2, 1, {0.5, -0.2, 0.1, 0.9}, {1.0, -0.5});
    const FiniteDiffModel<StripDerivatives<LinearModel>> wrapped{
        StripDerivatives<LinearModel>(linear)};
    auto rng = make_rng(7);
    for (int i = 0; i < 10; ++i) {
        const auto x = uniform_vec(rng, 2, -2.0, 2.0);
        const auto u = uniform_vec(rng, 1, -2.0, 2.0);
        const auto d = uniform_vec(rng, 2, -1.0, 1.0);
        const std::vector<double> w{0.0};

        std::vector<double> got(2), want(2);
        wrapped.dynamics_adj_x(x, u, w, d, got);
        linear.dynamics_adj_x(x, u, w, d, want);  // A^T d, exact
        REQUIRE(max_abs_dev(got, want) < 1e-9);

        std::vector<double> got_u(1), want_u(1);
        wrapped.dynamics_adj_u(x, u, w, d, got_u);
        linear.dynamics_adj_u(x, u, w, d, want_u);
        REQUIRE(max_abs_dev(got_u, want_u) < 1e-9);
    }
}

TEST_CASE("finite-difference wrapper on constant dynamics gives zero adjoints") {
    const FiniteDiffModel<ConstantDynamicsBase> wrapped{ConstantDynamicsBase{}};
    const std::vector<double> x{0.3, -0.7}, u{1.5}, w{0.0}, d{2.0, -1.0};
    std::vector<double> out(2);
    wrapped.dynamics_adj_x(x, u, w, d, out);
    REQUIRE(std::fabs(out[0]) < 1e-12);
    REQUIRE(std::fabs(out[1]) < 1e-12);
    std::vector<double> out_u(1);
    wrapped.dynamics_adj_u(x, u, w, d, out_u);
    REQUIRE(std::fabs(out_u[0]) < 1e-12);
}

TEST_CASE("parameter validation") {
    PendulumParams pp;
    pp.M = -1.0;
    REQUIRE_THROWS_AS(PendulumModel(pp), std::invalid_argument);
    BallBeamParams bp;
    bp.I = 0.0;
    REQUIRE_THROWS_AS(BallBeamModel(bp), std::invalid_argument);
}
