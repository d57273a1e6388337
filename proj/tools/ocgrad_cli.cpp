// Command-line front end: gradient runs, finite-difference verification,
// scaling benchmarks (CSV) and a demo gradient-descent loop, all driven by a
// JSON config document.

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ocgrad/config.hpp"
#include "ocgrad/ocgrad.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config_path;
    std::optional<unsigned> workers;
    std::optional<std::size_t> reps;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    double tol = 1e-5;
    std::vector<std::size_t> sizes;
    std::size_t steps = 100;
    double alpha0 = 1.0;
};

ocgrad::RunConfig load_config(const Options& opt) {
    ocgrad::RunConfig cfg = ocgrad::load_run_config(opt.config_path);
    if (opt.workers) cfg.workers = *opt.workers;
    if (opt.reps) cfg.repetitions = *opt.reps;
    if (opt.out) cfg.output = *opt.out;
    if (opt.seed) {
        cfg.control_init.kind = ocgrad::ControlInit::Kind::random;
        cfg.control_init.seed = *opt.seed;
    }
    if (cfg.workers == 0) throw ocgrad::ConfigError("config: 'workers' must be >= 1");
    return cfg;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ocgrad::ConfigError("cannot open output file '" + path + "'");
    out << text;
}

void emit(const ocgrad::RunConfig& cfg, const std::string& text) {
    std::cout << text;
    if (!cfg.output.empty()) write_text(cfg.output, text);
}

std::string csv_preamble(const ocgrad::RunConfig& cfg) {
    if (cfg.control_init.kind != ocgrad::ControlInit::Kind::random) return "";
    return "# seed=" + std::to_string(cfg.control_init.seed) + "\n";
}

void check_finite(double cost, std::span<const double> grad) {
    if (!std::isfinite(cost)) throw NumericalError("total cost is not finite");
    for (double g : grad)
        if (!std::isfinite(g)) throw NumericalError("gradient has a non-finite entry");
}

ocgrad::ScenarioTree tree_from(const ocgrad::RunConfig& cfg, std::size_t horizon) {
    return ocgrad::build_from_markov(*cfg.markov, horizon);
}

template <typename Fn>
int with_model(const ocgrad::RunConfig& cfg, Fn&& fn) {
    if (cfg.system == "pendulum")
        return fn(ocgrad::PendulumModel(ocgrad::pendulum_params_from_json(cfg.params)));
    return fn(ocgrad::BallBeamModel(ocgrad::ballbeam_params_from_json(cfg.params)));
}

nlohmann::json states_to_json(const std::vector<double>& flat, std::size_t nx) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i + nx <= flat.size(); i += nx)
        arr.push_back(std::vector<double>(flat.begin() + i, flat.begin() + i + nx));
    return arr;
}

// --- grad ---------------------------------------------------------------

template <ocgrad::Model M>
int run_grad(const M& model, const ocgrad::RunConfig& cfg) {
    nlohmann::json doc;
    doc["system"] = cfg.system;
    doc["horizon"] = cfg.horizon;
    if (cfg.control_init.kind == ocgrad::ControlInit::Kind::random)
        doc["seed"] = cfg.control_init.seed;

    if (cfg.mode == ocgrad::RunConfig::Mode::deterministic) {
        doc["mode"] = "deterministic";
        ocgrad::ControlSeq u(cfg.horizon, model.nu());
        ocgrad::fill_controls(u.flat(), cfg.control_init);
        const ocgrad::DetGradResult res = ocgrad::grad_det(model, cfg.initial_state, u);
        check_finite(res.cost, res.grad);
        doc["cost"] = res.cost;
        doc["gradient"] = res.grad;
        if (cfg.emit_states) doc["states"] = states_to_json(res.states, model.nx());
    } else {
        doc["mode"] = "stochastic";
        const ocgrad::ScenarioTree tree = tree_from(cfg, cfg.horizon);
        doc["num_nodes"] = tree.num_nodes();
        doc["workers"] = cfg.workers;
        ocgrad::ControlTree u(tree, model.nu());
        ocgrad::fill_controls(u.flat(), cfg.control_init);
        const ocgrad::TreeGradResult res =
            ocgrad::grad_tree(model, tree, cfg.initial_state, u, cfg.workers);
        check_finite(res.cost, res.grad);
        doc["cost"] = res.cost;
        doc["gradient"] = res.grad;
        if (cfg.emit_states) doc["states"] = states_to_json(res.states, model.nx());
    }
    emit(cfg, doc.dump(2) + "\n");
    return kExitOk;
}

// --- check ---------------------------------------------------------------

template <ocgrad::Model M>
int run_check(const M& model, const ocgrad::RunConfig& cfg, double tol) {
    ocgrad::FdSpec spec;
    spec.tolerance = tol;
    ocgrad::GradCheckReport report;
    if (cfg.mode == ocgrad::RunConfig::Mode::deterministic) {
        ocgrad::ControlSeq u(cfg.horizon, model.nu());
        ocgrad::fill_controls(u.flat(), cfg.control_init);
        report = ocgrad::check_grad_det(model, cfg.initial_state, u, spec);
    } else {
        const ocgrad::ScenarioTree tree = tree_from(cfg, cfg.horizon);
        ocgrad::ControlTree u(tree, model.nu());
        ocgrad::fill_controls(u.flat(), cfg.control_init);
        report = ocgrad::check_grad_tree(model, tree, cfg.initial_state, u, spec, cfg.workers);
    }
    std::ostringstream msg;
    msg << (report.pass ? "PASS" : "FAIL") << ": max relative deviation " << report.max_rel_dev
        << " (tolerance " << report.tolerance << ") at coordinate " << report.worst_index
        << ": adjoint " << fmt_double(report.worst_got) << ", finite-difference "
        << fmt_double(report.worst_ref) << "\n";
    emit(cfg, msg.str());
    return report.pass ? kExitOk : kExitNumerical;
}

// --- bench ---------------------------------------------------------------

std::string bench_csv_header() {
    return "label,size,reps,mean_ns,min_ns,calls_dynamics,calls_dynamics_adj_x,"
           "calls_dynamics_adj_u,calls_stage_cost,calls_stage_cost_grad_x,"
           "calls_stage_cost_grad_u,calls_terminal_cost,calls_terminal_cost_grad\n";
}

void append_record(std::ostringstream& csv, const ocgrad::BenchRecord& rec) {
    csv << rec.label << ',' << rec.size << ',' << rec.repetitions << ',' << fmt_double(rec.mean_ns)
        << ',' << fmt_double(rec.min_ns) << ',' << rec.calls.dynamics << ','
        << rec.calls.dynamics_adj_x << ',' << rec.calls.dynamics_adj_u << ','
        << rec.calls.stage_cost << ',' << rec.calls.stage_cost_grad_x << ','
        << rec.calls.stage_cost_grad_u << ',' << rec.calls.terminal_cost << ','
        << rec.calls.terminal_cost_grad << '\n';
}

template <ocgrad::Model M>
int run_bench(const M& model, const ocgrad::RunConfig& cfg, std::vector<std::size_t> sizes) {
    constexpr std::size_t kWarmup = 100;
    if (sizes.empty()) {
        sizes = cfg.mode == ocgrad::RunConfig::Mode::deterministic
                    ? std::vector<std::size_t>{10, 20, 40, 80}
                    : std::vector<std::size_t>{3, 4, 5, 6, 7};
    }
    std::ostringstream csv;
    csv << csv_preamble(cfg) << bench_csv_header();
    for (std::size_t size : sizes) {
        if (cfg.mode == ocgrad::RunConfig::Mode::deterministic) {
            ocgrad::ControlSeq u(size, model.nu());
            ocgrad::fill_controls(u.flat(), cfg.control_init);
            append_record(csv, ocgrad::bench_grad_det(model, cfg.initial_state, u,
                                                      cfg.repetitions, kWarmup,
                                                      cfg.system + "_det"));
        } else {
            const ocgrad::ScenarioTree tree = tree_from(cfg, size);
            ocgrad::ControlTree u(tree, model.nu());
            ocgrad::fill_controls(u.flat(), cfg.control_init);
            append_record(csv, ocgrad::bench_grad_tree(model, tree, cfg.initial_state, u,
                                                       cfg.workers, cfg.repetitions, kWarmup,
                                                       cfg.system + "_tree"));
        }
    }
    emit(cfg, csv.str());
    return kExitOk;
}

// --- solve ---------------------------------------------------------------

template <ocgrad::Model M>
int run_solve(const M& model, const ocgrad::RunConfig& cfg, std::size_t steps, double alpha0) {
    ocgrad::SolveOptions opt;
    opt.max_iters = steps;
    opt.alpha0 = alpha0;
    std::vector<ocgrad::SolveTraceRow> trace;
    if (cfg.mode == ocgrad::RunConfig::Mode::deterministic) {
        ocgrad::ControlSeq u(cfg.horizon, model.nu());
        ocgrad::fill_controls(u.flat(), cfg.control_init);
        trace = ocgrad::solve_det(model, cfg.initial_state, u, opt);
    } else {
        const ocgrad::ScenarioTree tree = tree_from(cfg, cfg.horizon);
        ocgrad::ControlTree u(tree, model.nu());
        ocgrad::fill_controls(u.flat(), cfg.control_init);
        trace = ocgrad::solve_tree(model, tree, cfg.initial_state, u, opt, cfg.workers);
    }
    std::ostringstream csv;
    csv << csv_preamble(cfg) << "iter,cost,grad_norm,step\n";
    for (const auto& row : trace) {
        csv << row.iter << ',' << fmt_double(row.cost) << ',' << fmt_double(row.grad_norm) << ','
            << fmt_double(row.step) << '\n';
        if (!std::isfinite(row.cost)) throw NumericalError("cost trace is not finite");
    }
    emit(cfg, csv.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adjoint cost gradients for nonlinear optimal control problems"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opt.config_path, "JSON config document")->required();
        cmd->add_option("--workers", [&](const auto& vals) {
            opt.workers = static_cast<unsigned>(std::stoul(vals.at(0)));
            return true;
        }, "Worker count for tree sweeps");
        cmd->add_option("--out", [&](const auto& vals) {
            opt.out = vals.at(0);
            return true;
        }, "Also write the output to this file");
        cmd->add_option("--seed", [&](const auto& vals) {
            opt.seed = static_cast<std::uint64_t>(std::stoull(vals.at(0)));
            return true;
        }, "Seeded-random control initialisation");
    };

    CLI::App* grad = app.add_subcommand("grad", "Compute the total-cost gradient");
    add_common(grad);

    CLI::App* check = app.add_subcommand("check", "Verify the gradient against finite differences");
    add_common(check);
    check->add_option("--tol", opt.tol, "Relative tolerance")->capture_default_str();

    CLI::App* bench = app.add_subcommand("bench", "Time repeated gradient evaluations (CSV)");
    add_common(bench);
    bench->add_option("--reps", [&](const auto& vals) {
        opt.reps = static_cast<std::size_t>(std::stoull(vals.at(0)));
        return true;
    }, "Repetitions per problem size");
    bench->add_option("--sizes", opt.sizes, "Horizons (deterministic) or tree depths (stochastic)")
        ->delimiter(',');

    CLI::App* solve = app.add_subcommand("solve", "Gradient descent with backtracking (CSV trace)");
    add_common(solve);
    solve->add_option("--steps", opt.steps, "Iteration budget")->capture_default_str();
    solve->add_option("--alpha0", opt.alpha0, "Initial step size")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        const ocgrad::RunConfig cfg = load_config(opt);
        if (grad->parsed()) return with_model(cfg, [&](const auto& m) { return run_grad(m, cfg); });
        if (check->parsed())
            return with_model(cfg, [&](const auto& m) { return run_check(m, cfg, opt.tol); });
        if (bench->parsed())
            return with_model(cfg, [&](const auto& m) { return run_bench(m, cfg, opt.sizes); });
        return with_model(cfg, [&](const auto& m) { return run_solve(m, cfg, opt.steps, opt.alpha0); });
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
