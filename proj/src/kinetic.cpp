#include "kinetic.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace ktwave {

double KineticState::total_mass() const {
  double m = 0.0;
  for (int j = 0; j < num_cells; ++j) m += moments(*grid, cell(j)).rho;
  return m * dx;
}

void KineticState::density(std::span<double> rho) const {
  assert(static_cast<int>(rho.size()) == num_cells);
  for (int j = 0; j < num_cells; ++j) rho[j] = moments(*grid, cell(j)).rho;
}

void KineticState::density_and_velocity(std::span<double> rho, std::span<double> u) const {
  assert(static_cast<int>(rho.size()) == num_cells);
  for (int j = 0; j < num_cells; ++j) {
    Moments m = moments(*grid, cell(j));
    rho[j] = m.rho;
    u[j] = m.rho > 0.0 ? m.flux / m.rho : 0.0;
  }
}

StepReport wb_step(const KineticState& state, KineticState& out,
                   const std::function<const SMatrix&(int)>& smatrix, double dt) {
  const VelocityGrid& grid = *state.grid;
  const int K = grid.half_count();
  const int n2 = grid.size();
  const int nc = state.num_cells;
  const double dx = state.dx;
  if (dt > cfl_max_dt(grid, dx) * (1.0 + 1e-12))
    throw std::invalid_argument("wb_step: dt violates the CFL condition");
  assert(out.num_cells == nc && out.grid == state.grid);

  // nu[k] = v_k dt/dx for the stacked positive magnitudes
  std::vector<double> nu(K);
  for (int p = 0; p < K; ++p) nu[p] = grid.node(grid.pos_index(p)) * dt / dx;

  // start from pure decay toward the interface states
  for (int j = 0; j < nc; ++j)
    for (int p = 0; p < K; ++p) {
      int ip = grid.pos_index(p), in = grid.neg_index(p);
      out.f(j, ip) = (1.0 - nu[p]) * state.f(j, ip);
      out.f(j, in) = (1.0 - nu[p]) * state.f(j, in);
    }

  // interior interfaces: i between cells i and i+1
  std::vector<double> in_vec(n2), out_vec(n2);
  for (int i = 0; i + 1 < nc; ++i) {
    for (int p = 0; p < K; ++p) {
      in_vec[p] = state.f(i, grid.pos_index(p));        // from the left cell
      in_vec[K + p] = state.f(i + 1, grid.neg_index(p));  // from the right cell
    }
    const SMatrix& S = smatrix(i);
    const double* srow = S.entries.data();
    for (int r = 0; r < n2; ++r, srow += n2) {
      double acc = 0.0;
      for (int c = 0; c < n2; ++c) acc += srow[c] * in_vec[c];
      out_vec[r] = acc;
    }
    for (int p = 0; p < K; ++p) {
      out.f(i + 1, grid.pos_index(p)) += nu[p] * out_vec[p];    // enters cell i+1
      out.f(i, grid.neg_index(p)) += nu[p] * out_vec[K + p];    // enters cell i
    }
  }

  // specular walls: incoming state for velocity v is the cell's own value at
  // -v; the wall flux then cancels exactly
  for (int p = 0; p < K; ++p) {
    out.f(0, grid.pos_index(p)) += nu[p] * state.f(0, grid.neg_index(p));
    out.f(nc - 1, grid.neg_index(p)) += nu[p] * state.f(nc - 1, grid.pos_index(p));
  }

  double mn = out.data[0];
  for (double v : out.data) mn = std::min(mn, v);
  return {mn};
}

StepReport ts_step(const KineticState& state, KineticState& out,
                   std::span<const double> rates_at_nodes, double dt) {
  const VelocityGrid& grid = *state.grid;
  const int K = grid.half_count();
  const int n2 = grid.size();
  const int nc = state.num_cells;
  const double dx = state.dx;
  if (dt > cfl_max_dt(grid, dx) * (1.0 + 1e-12))
    throw std::invalid_argument("ts_step: dt violates the CFL condition");
  assert(static_cast<int>(rates_at_nodes.size()) == nc * n2);

  // phase 1: upwind transport, specular walls
  std::vector<double> fstar(static_cast<size_t>(nc) * n2);
  for (int j = 0; j < nc; ++j) {
    for (int p = 0; p < K; ++p) {
      int ip = grid.pos_index(p), in = grid.neg_index(p);
      double nu = grid.node(ip) * dt / dx;
      double upw_p = (j > 0) ? state.f(j - 1, ip) : state.f(0, in);
      double upw_n = (j < nc - 1) ? state.f(j + 1, in) : state.f(nc - 1, ip);
      fstar[static_cast<size_t>(j) * n2 + ip] = state.f(j, ip) - nu * (state.f(j, ip) - upw_p);
      fstar[static_cast<size_t>(j) * n2 + in] = state.f(j, in) - nu * (state.f(j, in) - upw_n);
    }
  }

  // phase 2: explicit tumbling exchange with node-centered rates
  double max_rate = 0.0;
  for (int j = 0; j < nc; ++j) {
    const double* T = rates_at_nodes.data() + static_cast<size_t>(j) * n2;
    const double* fs = fstar.data() + static_cast<size_t>(j) * n2;
    double gain = 0.0;
    for (int k = 0; k < n2; ++k) {
      gain += grid.weight(k) * T[k] * fs[k];
      max_rate = std::max(max_rate, T[k]);
    }
    for (int k = 0; k < n2; ++k) out.f(j, k) = (1.0 - dt * T[k]) * fs[k] + dt * gain;
  }
  if (dt * max_rate > 1.0 + 1e-12)
    throw std::invalid_argument("ts_step: dt * max(T) > 1 breaks tumbling positivity");

  double mn = out.data[0];
  for (double v : out.data) mn = std::min(mn, v);
  return {mn};
}

}  // namespace ktwave
