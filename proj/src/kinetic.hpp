#ifndef KTWAVE_KINETIC_HPP
#define KTWAVE_KINETIC_HPP

#include <functional>
#include <span>
#include <vector>

#include "grid.hpp"
#include "scattering.hpp"

namespace ktwave {

// Cell-averaged phase-space density f[j][k] on a uniform grid of cells
// C_j = (x0 + j dx, x0 + (j+1) dx), velocities in the grid's ascending order.
struct KineticState {
  KineticState(const VelocityGrid& grid, int num_cells, double x0, double dx)
      : grid(&grid), num_cells(num_cells), x0(x0), dx(dx),
        data(static_cast<size_t>(num_cells) * grid.size(), 0.0) {}

  const VelocityGrid* grid;
  int num_cells;
  double x0, dx;
  std::vector<double> data;

  double& f(int j, int k) { return data[static_cast<size_t>(j) * grid->size() + k]; }
  double f(int j, int k) const { return data[static_cast<size_t>(j) * grid->size() + k]; }
  std::span<const double> cell(int j) const {
    return {data.data() + static_cast<size_t>(j) * grid->size(),
            static_cast<size_t>(grid->size())};
  }
  double cell_center(int j) const { return x0 + (j + 0.5) * dx; }

  double total_mass() const;
  void density(std::span<double> rho) const;
  void density_and_velocity(std::span<double> rho, std::span<double> u) const;
};

// Largest stable time step of the transport update: dx / max |v|.
inline double cfl_max_dt(const VelocityGrid& grid, double dx) {
  return dx / grid.max_speed();
}

struct StepReport {
  double min_value;   // smallest output entry (negative values are reported,
                      // never clipped)
};

// One step of the well-balanced Godunov scheme. smatrix(i) must return the
// scattering matrix of interior interface i (between cells i and i+1),
// i in [0, num_cells-2], built from rates frozen at that interface. Walls
// are specular: the wall interface state is the mirror image of the
// adjacent cell (identity scattering at the wall), which makes the wall flux
// vanish identically.
StepReport wb_step(const KineticState& state, KineticState& out,
                   const std::function<const SMatrix&(int)>& smatrix, double dt);

// One step of the time-splitting baseline: upwind free transport with
// specular walls, then explicit integration of the tumbling exchange with
// rates frozen at the cell nodes. rates_at_nodes is [num_cells][2K] in the
// grid's ascending velocity order. Requires dt * max(T) <= 1.
StepReport ts_step(const KineticState& state, KineticState& out,
                   std::span<const double> rates_at_nodes, double dt);

}  // namespace ktwave

#endif
