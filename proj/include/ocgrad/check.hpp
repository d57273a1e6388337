#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "ocgrad/grad_det.hpp"
#include "ocgrad/grad_tree.hpp"
#include "ocgrad/oracle.hpp"

namespace ocgrad {

/// Outcome of comparing a gradient against a reference, coordinate by
/// coordinate with deviation |got - ref| / (1 + |ref|).
struct GradCheckReport {
    bool pass = false;
    double max_rel_dev = 0.0;
    std::size_t worst_index = 0;
    double worst_got = 0.0;
    double worst_ref = 0.0;
    double tolerance = 0.0;
};

inline GradCheckReport compare_gradients(std::span<const double> got,
                                         std::span<const double> ref, double tolerance) {
    GradCheckReport report;
    report.tolerance = tolerance;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double dev = std::fabs(got[i] - ref[i]) / (1.0 + std::fabs(ref[i]));
        if (dev >= report.max_rel_dev) {
            report.max_rel_dev = dev;
            report.worst_index = i;
            report.worst_got = got[i];
            report.worst_ref = ref[i];
        }
    }
    report.pass = std::isfinite(report.max_rel_dev) && report.max_rel_dev <= tolerance;
    return report;
}

/// Adjoint gradient vs the finite-difference oracle, deterministic problem.
template <Model M>
GradCheckReport check_grad_det(const M& model, std::span<const double> x0, const ControlSeq& u,
                               const FdSpec& spec = {}) {
    const DetGradResult res = grad_det(model, x0, u);
    const std::vector<double> fd = fd_grad_det(model, x0, u, spec);
    return compare_gradients(res.grad, fd, spec.tolerance);
}

/// Adjoint gradient vs the finite-difference oracle, scenario-tree problem.
template <Model M>
GradCheckReport check_grad_tree(const M& model, const ScenarioTree& tree,
                                std::span<const double> x0, const ControlTree& u,
                                const FdSpec& spec = {}, unsigned workers = 1) {
    const TreeGradResult res = grad_tree(model, tree, x0, u, workers);
    const std::vector<double> fd = fd_grad_tree(model, tree, x0, u, spec);
    return compare_gradients(res.grad, fd, spec.tolerance);
}

}  // namespace ocgrad
