#pragma once

// Grid sweeps over congruence and Burgers fields. Every sweep has a serial
// reference path and an OpenMP path; both produce identical output because
// each grid point is computed independently by the same code.

#include <cstddef>
#include <functional>
#include <vector>

#include "shearfree/congruence.hpp"

namespace shearfree::kernels {

enum class Execution { Serial, Parallel };

/// Sets the OpenMP thread count (n <= 0 keeps the runtime default) and
/// returns the effective maximum.
int configure_threads(int n);
int max_threads();

/// Runs body(i) for i in [0, n). Exceptions are captured per index and the
/// one with the lowest index is rethrown after the loop.
void for_each_index(std::size_t n, Execution exec, const std::function<void(std::size_t)>& body);

using congruence::Grid3;
using congruence::Grid4;

/// f at every grid point, y fastest, then x, then u.
std::vector<double> field_sweep(const std::function<double(double, double, double)>& f, const Grid3& grid,
                                Execution exec);

enum class Equation { L, M };

/// Per-slice PDE residuals of the L- or M-equation.
std::vector<double> residual_sweep(const congruence::KappaField& kappa, Equation eq, const Grid3& grid,
                                   double h, Execution exec);

/// Shear samples in Grid4 order; failures are recorded in the sample.
std::vector<congruence::ShearSample> shear_sweep(const congruence::Congruence& c, const Grid4& grid,
                                                 const congruence::ShearOptions& opts, Execution exec);

/// det of the congruence Jacobian in Grid4 order.
std::vector<double> det_sweep(const congruence::Congruence& c, const Grid4& grid, double h,
                              Execution exec);

}  // namespace shearfree::kernels
