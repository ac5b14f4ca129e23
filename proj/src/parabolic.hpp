#ifndef KTWAVE_PARABOLIC_HPP
#define KTWAVE_PARABOLIC_HPP

#include <span>
#include <vector>

#include "model.hpp"

namespace ktwave {

// Concentration field on the 1D grid. The well-balanced (L-spline) solver
// keeps fields at the cell interfaces x_{j+1/2}; the time-splitting solver
// keeps them at the cell nodes.
struct FieldState {
  enum class Location { Interfaces, Nodes };
  std::vector<double> values;
  Location location = Location::Interfaces;
};

// Largest dt keeping the diagonal coefficient of the L-spline signal update
// nonnegative: dx sinh(r dx) / (2 sqrt(alpha D_M) cosh(r dx)), r = sqrt(alpha/D_M).
double lspline_signal_max_dt(const ModelParams& p, double dx);

// Same bound for the nutrient update with the largest interface coefficient
// r = sqrt(gamma rho_max / D_N); tends to the heat bound dx^2/(2 D_N) as
// rho_max -> 0.
double lspline_nutrient_max_dt(const ModelParams& p, double dx, double rho_max);

// Signal step of the exponential-fit (L-spline) scheme:
//   M_j += dt sqrt(alpha D_M)/(dx sinh(r dx)) *
//          [ M_{j+1} - 2 cosh(r dx) M_j + M_{j-1}
//            + (beta/alpha)(cosh(r dx) - 1)(rho_{j+1/2} + rho_{j-1/2}) ]
// which is exact on steady states of -D_M M'' + alpha M = beta rho with
// piecewise-constant rho. Homogeneous Neumann at both ends (mirror ghosts).
// rho has one entry per gap between field entries (cell densities when the
// field lives on interfaces); rho_{j+-1/2} are its two entries around j,
// replicated at the ends.
void lspline_step_signal(const FieldState& M, std::span<const double> rho,
                         const ModelParams& p, double dt, double dx, FieldState& out);

// Nutrient branch with per-interface r_{j+1/2} = sqrt(gamma rho_{j+1/2}/D_N);
// the coefficient sqrt(rho)/sinh(r dx) is continued through rho -> 0 by its
// series limit. Neumann at the left end, Dirichlet N = N_bar at the right.
void lspline_step_nutrient(const FieldState& N, std::span<const double> rho,
                           const ModelParams& p, double dt, double dx, FieldState& out);

// Explicit 3-point baseline for d_t u - D u_xx + p u = q, same boundary
// handling as the L-spline schemes (bc_dirichlet_right pins the value
// u(x_right) = dirichlet_value through a reflected ghost for node-located
// fields). Requires (2D/dx^2 - max(0, max p)) dt <= 1.
void ts_step_diffusion(const FieldState& u, std::span<const double> p,
                       std::span<const double> q, double D, double dt, double dx,
                       FieldState& out, bool bc_dirichlet_right = false,
                       double dirichlet_value = 0.0);

double ts_diffusion_max_dt(double D, double dx, double p_max);

}  // namespace ktwave

#endif
