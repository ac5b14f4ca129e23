#ifndef KTWAVE_SIM_HPP
#define KTWAVE_SIM_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grid.hpp"
#include "kinetic.hpp"
#include "model.hpp"
#include "parabolic.hpp"
#include "scattering.hpp"

namespace ktwave {

enum class KineticScheme { WB, TS };
enum class ParabolicScheme { WB, TS };
enum class MdVariant { MD1, MD2 };
enum class SignalMode { Dynamic, Frozen };

struct GridSpec {
  enum class Kind { Gauss, Explicit } kind = Kind::Explicit;
  int K = 2;                                   // Gauss half-count
  std::vector<double> values{0.5, 1.0};        // explicit positive magnitudes
  std::vector<double> weights;                 // empty = uniform
  VelocityGrid build() const;
};

struct InitSpec {
  enum class FKind { Gaussian, Wave } f_kind = FKind::Gaussian;
  // f0 = amp * exp(-ax (x-x0)^2 - av v^2)
  double f_amp = 10.0, f_ax = 1.0, f_av = 1.0, f_x0 = 0.0;
  // moving-frame stationary profile translated to peak_position
  double wave_c = 0.0, wave_mass = 1.0, wave_peak = 0.0;
  double m_const = 0.0;
  enum class NKind { Const, Tanh } n_kind = NKind::Const;
  double n_const = 0.0;
  // N0 = amp (pi/2 + tanh(x/scale - shift))
  double n_tanh_amp = 400.0, n_tanh_scale = 3.0, n_tanh_shift = 3.0;
};

struct SimConfig {
  KineticScheme kinetic_scheme = KineticScheme::WB;
  ParabolicScheme parabolic_scheme = ParabolicScheme::WB;
  MdVariant md_variant = MdVariant::MD2;
  SVariant smatrix_variant = SVariant::Case;
  // Stepping evaluation of the scattering solve; Transfer conserves mass
  // exactly, Interface is the midpoint reconstruction.
  SEval smatrix_eval = SEval::Transfer;
  SignalMode signal_mode = SignalMode::Dynamic;

  GridSpec grid;
  double x_left = 0.0, x_right = 100.0;
  double dx = 0.05;
  double dt = 0.0;  // 0 = automatic (0.9 x tightest stability bound, per step)
  double t_end = 10.0;
  int output_every = 200;

  ModelParams params;
  InitSpec init;

  double rho_scale = 1.0;  // scales the density fed to the parabolic solvers
  double steady_tol = 0.0; // >0: stop when ||d rho/dt||_1 dx / mass < tol
  double stop_at_sym_err = 0.0;  // >0: stop once the symmetry error exceeds this
  bool track_symmetry = false;
  double negative_tol = 1e-9;  // abort when f < -tol * max f

  void validate() const;
};

struct SnapshotRow {
  double t;
  double mass;
  double c_est;
  double peak_x;
  double peak_rho;
  double sym_err;  // NaN when not tracked
  double min_f;
};

// Called on the snapshot cadence with cell-centered rho, u and the
// concentration fields interpolated to cell centers.
using FieldSink = std::function<void(double t, const KineticState& f,
                                     std::span<const double> rho,
                                     std::span<const double> u,
                                     std::span<const double> M,
                                     std::span<const double> N)>;

struct RunResult {
  std::vector<SnapshotRow> rows;
  std::unique_ptr<VelocityGrid> grid;
  std::unique_ptr<KineticState> state;
  FieldState M, N;
  double t_final = 0.0;
  int steps = 0;
  bool steady_reached = false;
  int smatrix_fallbacks = 0;
  double min_smatrix_entry = 1.0;
  std::string abort_reason;  // empty on clean completion

  const SnapshotRow& last() const { return rows.back(); }
};

RunResult run(const SimConfig& config, const FieldSink& sink = {});

// Mean macroscopic velocity over the cells where rho exceeds 10% of its
// maximum (strict inequality).
double wave_speed_estimate(std::span<const double> rho, std::span<const double> u);

// max_j |rho[center+j] - rho[center-j]|
double symmetry_error(std::span<const double> rho, int center_index);
// mirror-pair variant for grids whose symmetry point is a cell interface
double symmetry_error_mirror(std::span<const double> rho);

// argmax of rho refined by a 3-point parabolic fit, in cell-center coordinates
double peak_position(std::span<const double> rho, double x0, double dx);

}  // namespace ktwave

#endif
