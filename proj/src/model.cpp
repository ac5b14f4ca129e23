#include "model.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace ktwave {

void ModelParams::validate() const {
  if (chi_M < 0.0 || chi_M >= 1.0 || chi_N < 0.0 || chi_N >= 1.0)
    throw std::invalid_argument("ModelParams: chi_M, chi_N must lie in [0,1)");
  if (chi_M + chi_N >= 1.0)
    throw std::invalid_argument("ModelParams: chi_M + chi_N must be < 1 (rate positivity)");
  if (D_M <= 0.0 || D_N <= 0.0)
    throw std::invalid_argument("ModelParams: diffusivities must be positive");
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0)
    throw std::invalid_argument("ModelParams: reaction rates must be nonnegative");
  if (N_bar <= 0.0) throw std::invalid_argument("ModelParams: N_bar must be positive");
}

double material_derivative_md1(std::span<const double> M_now,
                               std::span<const double> M_prev,
                               double dt, double dx, int i, double v) {
  if (i < 1 || i >= static_cast<int>(M_now.size()))
    throw std::out_of_range("material_derivative_md1: interface index");
  assert(M_now.size() == M_prev.size());
  double dMdx = (M_now[i] - M_now[i - 1]) / dx;
  double dMdt = 0.5 * ((M_now[i] - M_prev[i]) + (M_now[i - 1] - M_prev[i - 1])) / dt;
  return dMdt + v * dMdx;
}

double material_derivative_md1_node(std::span<const double> M_now,
                                    std::span<const double> M_prev,
                                    double dt, double dx, int j, double v) {
  const int n = static_cast<int>(M_now.size());
  if (j < 0 || j >= n) throw std::out_of_range("material_derivative_md1_node: node index");
  int jl = j > 0 ? j - 1 : j;
  int jr = j < n - 1 ? j + 1 : j;
  double dMdx = (M_now[jr] - M_now[jl]) / ((jr - jl) * dx);
  double dMdt = (M_now[j] - M_prev[j]) / dt;
  return dMdt + v * dMdx;
}

namespace {

// linear interpolation of prev at x_i - v dt, upwinded; valid for 0 < i < n-1
// on the upwind side
double md2_interp(std::span<const double> prev, double theta, int i, double v) {
  if (v > 0.0) return (1.0 - theta) * prev[i] + theta * prev[i - 1];
  if (v < 0.0) return (1.0 + theta) * prev[i] - theta * prev[i + 1];
  return prev[i];
}

}  // namespace

double material_derivative_md2(std::span<const double> M_now,
                               std::span<const double> M_prev,
                               double dt, double dx, int i, double v) {
  const int n = static_cast<int>(M_now.size());
  if (i < 0 || i >= n) throw std::out_of_range("material_derivative_md2: interface index");
  assert(M_now.size() == M_prev.size());
  const double theta = v * dt / dx;  // foot of the characteristic, in cells
  assert(std::abs(theta) <= 1.0 + 1e-12 && "material_derivative_md2: CFL violated");
  int is = i;  // interface whose interpolated value we use
  if (v > 0.0 && i == 0) is = 1;
  if (v < 0.0 && i == n - 1) is = n - 2;
  double interp = md2_interp(M_prev, theta, is, v);
  return (M_now[i] - interp) / dt;
}

}  // namespace ktwave
