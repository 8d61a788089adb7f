#include "lapdmd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lapdmd/error.hpp"

namespace lapdmd {

namespace {

template <typename Rhs>
Vector rk4_step(const Rhs& rhs, const Vector& x, double dt) {
  const Vector k1 = rhs(x);
  const Vector k2 = rhs(x + 0.5 * dt * k1);
  const Vector k3 = rhs(x + 0.5 * dt * k2);
  const Vector k4 = rhs(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

DataMatrix integrate_rk4(const OdeSystem& sys, const Vector& x0, double dt, std::size_t steps) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw validation_error("rk4: dt must be positive");
  if (steps < 1) throw validation_error("rk4: need at least one step");
  if (x0.size() != sys.dim)
    throw validation_error("rk4: initial state has dimension " + std::to_string(x0.size()) +
                           ", system " + sys.name + " expects " + std::to_string(sys.dim));

  DataMatrix out;
  out.dt = dt;
  out.values.resize(sys.dim, static_cast<Eigen::Index>(steps + 1));
  out.values.col(0) = x0;
  Vector x = x0;
  for (std::size_t k = 1; k <= steps; ++k) {
    x = rk4_step(sys.field, x, dt);
    if (!x.allFinite())
      throw numerical_error("rk4: " + sys.name + " state became non-finite at step " +
                            std::to_string(k));
    out.values.col(static_cast<Eigen::Index>(k)) = x;
  }
  return out;
}

OdeSystem lorenz63() {
  constexpr double s = 10.0, rho = 28.0, beta = 8.0 / 3.0;
  return {3,
          [](const Vector& v) {
            Vector f(3);
            f << s * (v(1) - v(0)), v(0) * (rho - v(2)) - v(1), v(0) * v(1) - beta * v(2);
            return f;
          },
          "lorenz63"};
}

OdeSystem rossler() {
  constexpr double a = 0.2, b = 0.2, c = 5.7;
  return {3,
          [](const Vector& v) {
            Vector f(3);
            f << -v(1) - v(2), v(0) + a * v(1), b + v(2) * (v(0) - c);
            return f;
          },
          "rossler"};
}

OdeSystem duffing() {
  constexpr double damping = 0.5;
  return {2,
          [](const Vector& v) {
            Vector f(2);
            f << v(1), -damping * v(1) + v(0) - v(0) * v(0) * v(0);
            return f;
          },
          "duffing"};
}

OdeSystem ode_system(const std::string& name) {
  if (name == "lorenz63" || name == "lorenz") return lorenz63();
  if (name == "rossler") return rossler();
  if (name == "duffing") return duffing();
  throw validation_error("unknown ODE system '" + name + "'");
}

DataMatrix burgers_solve(const BurgersSetup& setup) {
  if (!(setup.nu > 0.0)) throw validation_error("burgers: nu must be positive");
  if (setup.n_x < 16) throw validation_error("burgers: n_x must be >= 16");
  if (setup.n_t < 2) throw validation_error("burgers: n_t must be >= 2");
  if (!(setup.x_max > setup.x_min)) throw validation_error("burgers: empty domain");
  if (!(setup.t_end > 0.0)) throw validation_error("burgers: t_end must be positive");

  const int n = setup.n_x;
  const double dx = (setup.x_max - setup.x_min) / n;
  const double dt_out = setup.t_end / (setup.n_t - 1);

  Vector u(n);
  for (int j = 0; j < n; ++j) u(j) = setup.initial(setup.x_min + j * dx);
  if (!u.allFinite()) throw validation_error("burgers: initial condition is not finite");

  int substeps = setup.substeps;
  if (substeps <= 0) {
    // RK4 reaches about 2.78 on the negative real axis and 2.83 on the
    // imaginary axis; keep half of that margin.
    const double umax = std::max(u.cwiseAbs().maxCoeff(), 1e-12);
    const double dt_diff = 0.5 * 2.78 * dx * dx / (4.0 * setup.nu);
    const double dt_adv = 0.5 * 2.83 * dx / umax;
    substeps = std::max(1, static_cast<int>(std::ceil(dt_out / std::min(dt_diff, dt_adv))));
  }
  const double dt = dt_out / substeps;
  const double nu = setup.nu;

  // Skew-symmetric split of u u_x keeps the discrete energy non-increasing.
  const auto rhs = [n, dx, nu](const Vector& v) {
    Vector f(n);
    for (int j = 0; j < n; ++j) {
      const double l = v((j + n - 1) % n);
      const double c = v(j);
      const double r = v((j + 1) % n);
      const double adv = (c * (r - l) + (r * r - l * l)) / (6.0 * dx);
      f(j) = -adv + nu * (r - 2.0 * c + l) / (dx * dx);
    }
    return f;
  };

  DataMatrix out;
  out.dt = dt_out;
  out.values.resize(n, setup.n_t);
  out.values.col(0) = u;
  for (int k = 1; k < setup.n_t; ++k) {
    for (int s = 0; s < substeps; ++s) u = rk4_step(rhs, u, dt);
    if (!u.allFinite())
      throw numerical_error("burgers: field became non-finite before output " +
                            std::to_string(k) + "; try substeps >= " +
                            std::to_string(2 * substeps));
    out.values.col(k) = u;
  }
  return out;
}

DataMatrix burgers_solve(double nu, int n_x, int n_t) {
  BurgersSetup setup;
  setup.nu = nu;
  setup.n_x = n_x;
  setup.n_t = n_t;
  return burgers_solve(setup);
}

}  // namespace lapdmd
