#include "shearfree/kernels.hpp"

#include <omp.h>

#include <exception>

namespace shearfree::kernels {

int configure_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
  return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

void for_each_index(std::size_t n, Execution exec, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(n);
  if (exec == Execution::Serial) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> field_sweep(const std::function<double(double, double, double)>& f, const Grid3& grid,
                                Execution exec) {
  std::vector<double> out(grid.size());
  const std::size_t ny = grid.y.n, nx = grid.x.n;
  for_each_index(out.size(), exec, [&](std::size_t i) {
    const std::size_t iy = i % ny, ix = (i / ny) % nx, iu = i / (ny * nx);
    out[i] = f(grid.u.at(iu), grid.x.at(ix), grid.y.at(iy));
  });
  return out;
}

std::vector<double> residual_sweep(const congruence::KappaField& kappa, Equation eq, const Grid3& grid,
                                   double h, Execution exec) {
  return field_sweep(
      [&](double u, double x, double y) {
        return eq == Equation::L ? kappa.l_residual(u, x, y, h) : kappa.m_residual(u, x, y, h);
      },
      grid, exec);
}

namespace {

// One task per geodesic; the t samples share its stencil.
template <class T, class Fibre>
std::vector<T> fibre_sweep(const Grid4& grid, Execution exec, Fibre fibre) {
  const std::size_t nt = grid.t.n, ny = grid.y.n, nx = grid.x.n;
  std::vector<double> ts(nt);
  for (std::size_t k = 0; k < nt; ++k) ts[k] = grid.t.at(k);
  std::vector<T> out(grid.size());
  for_each_index(grid.u.n * nx * ny, exec, [&](std::size_t g) {
    const std::size_t iy = g % ny, ix = (g / ny) % nx, iu = g / (ny * nx);
    const std::vector<T> values = fibre(grid.u.at(iu), grid.x.at(ix), grid.y.at(iy), ts);
    for (std::size_t k = 0; k < nt; ++k) out[g * nt + k] = values[k];
  });
  return out;
}

}  // namespace

std::vector<congruence::ShearSample> shear_sweep(const congruence::Congruence& c, const Grid4& grid,
                                                 const congruence::ShearOptions& opts, Execution exec) {
  return fibre_sweep<congruence::ShearSample>(grid, exec, [&](double u, double x, double y, const std::vector<double>& ts) {
    try {
      return congruence::shear_fibre(c, u, x, y, ts, opts);
    } catch (const std::exception& e) {
      std::vector<congruence::ShearSample> failed(ts.size());
      for (std::size_t k = 0; k < ts.size(); ++k) {
        failed[k].u = u, failed[k].x = x, failed[k].y = y, failed[k].t = ts[k];
        failed[k].ok = false;
        failed[k].error = e.what();
      }
      return failed;
    }
  });
}

std::vector<double> det_sweep(const congruence::Congruence& c, const Grid4& grid, double h,
                              Execution exec) {
  return fibre_sweep<double>(grid, exec, [&](double u, double x, double y, const std::vector<double>& ts) {
    return congruence::jacobian_dets(c, u, x, y, ts, h);
  });
}

}  // namespace shearfree::kernels
