#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include "lapdmd/types.hpp"

namespace lapdmd {

struct OdeSystem {
  int dim = 0;
  std::function<Vector(const Vector&)> field;
  std::string name;
};

/// Classical fixed-step RK4. Column k of the result is the state after k
/// steps, so there are steps + 1 columns.
DataMatrix integrate_rk4(const OdeSystem& sys, const Vector& x0, double dt,
                         std::size_t steps);

OdeSystem lorenz63();  // sigma = 10, rho = 28, beta = 8/3
OdeSystem rossler();   // a = 0.2, b = 0.2, c = 5.7
OdeSystem duffing();   // damping 0.5, unit linear and cubic stiffness

/// Looks up a system by name: lorenz63 (or lorenz), rossler, duffing.
OdeSystem ode_system(const std::string& name);

inline const Vector& duffing_initial_state() {
  static const Vector x0 = (Vector(2) << -1.8760, 1.7868).finished();
  return x0;
}

/// Periodic viscous Burgers problem u_t + u u_x = nu u_xx on [x_min, x_max).
struct BurgersSetup {
  double nu = 0.1;
  int n_x = 256;
  int n_t = 101;
  double x_min = -8.0;
  double x_max = 8.0;
  double t_end = 10.0;
  std::function<double(double)> initial = [](double x) {
    return std::exp(-(x + 2.0) * (x + 2.0));
  };
  int substeps = 0;  // RK4 steps per output interval; 0 picks a stable count
};

/// Second-order central differences in space (skew-symmetric advection),
/// RK4 in time. Returns n_x rows and n_t columns at uniform output times.
DataMatrix burgers_solve(const BurgersSetup& setup);
DataMatrix burgers_solve(double nu, int n_x, int n_t);

}  // namespace lapdmd
