#pragma once

// Exact cost gradients for nonlinear optimal control problems, deterministic
// and scenario-tree stochastic, via backward adjoint sweeps.

#include "ocgrad/ballbeam.hpp"
#include "ocgrad/bench.hpp"
#include "ocgrad/check.hpp"
#include "ocgrad/grad_det.hpp"
#include "ocgrad/grad_tree.hpp"
#include "ocgrad/model.hpp"
#include "ocgrad/oracle.hpp"
#include "ocgrad/pendulum.hpp"
#include "ocgrad/scenario_tree.hpp"
#include "ocgrad/solve.hpp"
