#include "parabolic.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ktwave {

namespace {

// series-stable evaluations in s = (r dx)^2
double rh_over_sinh(double s) {  // r dx / sinh(r dx)
  if (s < 1e-8) return 1.0 - s / 6.0 + 7.0 * s * s / 360.0;
  double rh = std::sqrt(s);
  return rh / std::sinh(rh);
}
double cosh_rh(double s) {
  if (s < 1e-8) return 1.0 + s / 2.0 + s * s / 24.0;
  return std::cosh(std::sqrt(s));
}
double coshm1_over_s(double s) {  // (cosh(r dx) - 1) / s
  if (s < 1e-8) return 0.5 + s / 24.0 + s * s / 720.0;
  return (std::cosh(std::sqrt(s)) - 1.0) / s;
}
double tanh_over_rh(double s) {  // tanh(r dx) / (r dx)
  if (s < 1e-8) return 1.0 - s / 3.0 + 2.0 * s * s / 15.0;
  double rh = std::sqrt(s);
  return std::tanh(rh) / rh;
}

}  // namespace

double lspline_signal_max_dt(const ModelParams& p, double dx) {
  // dx sinh(r dx) / (2 sqrt(alpha D_M) cosh(r dx)) = dx^2/(2 D_M) * tanh(r dx)/(r dx)
  double s = p.alpha * dx * dx / p.D_M;
  return dx * dx / (2.0 * p.D_M) * tanh_over_rh(s);
}

double lspline_nutrient_max_dt(const ModelParams& p, double dx, double rho_max) {
  double s = p.gamma * std::max(rho_max, 0.0) * dx * dx / p.D_N;
  // dx / (2 D r coth(r dx)) with r coth(r dx) -> 1/dx as rho -> 0
  double rh_coth = (s < 1e-8) ? 1.0 + s / 3.0 - s * s / 45.0
                              : std::sqrt(s) / std::tanh(std::sqrt(s));
  return dx * dx / (2.0 * p.D_N * rh_coth);
}

void lspline_step_signal(const FieldState& M, std::span<const double> rho,
                         const ModelParams& p, double dt, double dx, FieldState& out) {
  const int m = static_cast<int>(M.values.size());
  assert(m >= 3);
  assert(static_cast<int>(rho.size()) == m - 1);
  if (p.alpha <= 0.0)
    throw std::invalid_argument("lspline_step_signal: alpha must be positive");
  double bound = lspline_signal_max_dt(p, dx);
  if (dt > bound * (1.0 + 1e-12))
    throw std::invalid_argument("lspline_step_signal: dt above positivity bound " +
                                std::to_string(bound));
  const double s = p.alpha * dx * dx / p.D_M;
  const double pref = dt * (p.D_M / (dx * dx)) * rh_over_sinh(s);
  const double ch = cosh_rh(s);
  const double src = p.beta * dx * dx / p.D_M * coshm1_over_s(s);
  out.location = M.location;
  out.values.resize(m);
  const auto& u = M.values;
  for (int j = 0; j < m; ++j) {
    double ul = j > 0 ? u[j - 1] : u[1];
    double ur = j < m - 1 ? u[j + 1] : u[m - 2];
    double rl = j > 0 ? rho[j - 1] : rho[0];
    double rr = j < m - 1 ? rho[j] : rho[m - 2];
    out.values[j] = u[j] + pref * (ur - 2.0 * ch * u[j] + ul + src * (rl + rr));
  }
}

void lspline_step_nutrient(const FieldState& N, std::span<const double> rho,
                           const ModelParams& p, double dt, double dx, FieldState& out) {
  const int m = static_cast<int>(N.values.size());
  assert(m >= 3);
  assert(static_cast<int>(rho.size()) == m - 1);
  double rho_max = 0.0;
  for (double r : rho) {
    if (r < 0.0) throw std::invalid_argument("lspline_step_nutrient: negative density");
    rho_max = std::max(rho_max, r);
  }
  double bound = lspline_nutrient_max_dt(p, dx, rho_max);
  if (dt > bound * (1.0 + 1e-12))
    throw std::invalid_argument("lspline_step_nutrient: dt above positivity bound " +
                                std::to_string(bound));
  out.location = N.location;
  out.values.resize(m);
  const auto& u = N.values;
  auto coef = [&](double r) {
    double s = p.gamma * r * dx * dx / p.D_N;
    return std::pair{(p.D_N / dx) * rh_over_sinh(s), cosh_rh(s)};
  };
  for (int j = 0; j < m; ++j) {
    double rl = j > 0 ? rho[j - 1] : rho[0];
    double rr = j < m - 1 ? rho[j] : rho[m - 2];
    double ul = j > 0 ? u[j - 1] : u[1];
    double ur = j < m - 1 ? u[j + 1] : u[m - 2];
    auto [cl, chl] = coef(rl);
    auto [cr, chr] = coef(rr);
    out.values[j] =
        u[j] + dt / dx * (cr * (ur - chr * u[j]) - cl * (chl * u[j] - ul));
  }
  // nutrient is held at N_bar on the right boundary
  if (N.location == FieldState::Location::Interfaces) {
    out.values[m - 1] = p.N_bar;
  } else {
    double ghost = 2.0 * p.N_bar - u[m - 1];
    auto [cr, chr] = coef(rho[m - 2]);
    auto [cl, chl] = coef(rho[m - 2]);
    out.values[m - 1] = u[m - 1] + dt / dx *
        (cr * (ghost - chr * u[m - 1]) - cl * (chl * u[m - 1] - u[m - 2]));
  }
}

double ts_diffusion_max_dt(double D, double dx, double p_max) {
  return 1.0 / (2.0 * D / (dx * dx) + std::max(0.0, p_max));
}

void ts_step_diffusion(const FieldState& u, std::span<const double> p,
                       std::span<const double> q, double D, double dt, double dx,
                       FieldState& out, bool bc_dirichlet_right, double dirichlet_value) {
  const int m = static_cast<int>(u.values.size());
  assert(static_cast<int>(p.size()) == m && static_cast<int>(q.size()) == m);
  double p_max = *std::max_element(p.begin(), p.end());
  if ((2.0 * D / (dx * dx) - std::max(0.0, p_max)) * dt > 1.0 + 1e-12)
    throw std::invalid_argument("ts_step_diffusion: linear stability bound violated");
  out.location = u.location;
  out.values.resize(m);
  const auto& v = u.values;
  const bool at_interfaces = u.location == FieldState::Location::Interfaces;
  const double lam = D * dt / (dx * dx);
  for (int j = 0; j < m; ++j) {
    // Neumann mirror: about the entry itself when the field sits on the
    // boundary interface, about the boundary half-way otherwise
    double ul = j > 0 ? v[j - 1] : (at_interfaces ? v[1] : v[0]);
    double ur;
    if (j < m - 1)
      ur = v[j + 1];
    else if (bc_dirichlet_right)
      ur = at_interfaces ? v[m - 1] : 2.0 * dirichlet_value - v[m - 1];
    else
      ur = at_interfaces ? v[m - 2] : v[m - 1];
    out.values[j] = v[j] + lam * (ur - 2.0 * v[j] + ul) - dt * (p[j] * v[j] - q[j]);
  }
  if (bc_dirichlet_right && at_interfaces) out.values[m - 1] = dirichlet_value;
}

}  // namespace ktwave
