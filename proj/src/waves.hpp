#ifndef KTWAVE_WAVES_HPP
#define KTWAVE_WAVES_HPP

#include <optional>
#include <vector>

#include "grid.hpp"
#include "kinetic.hpp"
#include "model.hpp"
#include "parabolic.hpp"

namespace ktwave {

// Tumbling rates of the moving-frame stationary problem under the wave
// ansatz (signal peaked at z=0 and decreasing to its right, nutrient
// increasing everywhere): four constants selected by the side of z=0 and
// the sign of v - c.
struct QuadrantRates {
  double chi_M, chi_N;
  double right(double w) const { return 1.0 + (chi_M - chi_N) * sgn0(w); }  // z > 0
  double left(double w) const { return 1.0 - (chi_M + chi_N) * sgn0(w); }   // z < 0
  double at(double z, double w) const { return z > 0.0 ? right(w) : left(w); }
};

struct CriticalSpeeds {
  double lower;  // c_*: below it no decaying mode exists ahead of the wave
  double upper;  // c^*: above it no decaying mode exists behind the wave
};

// Unique roots of sum_k w_k (v_k - c)/T_pm(v_k - c) = 0; the integrand is
// continuous and strictly decreasing in c, so plain bisection applies.
CriticalSpeeds critical_speeds(const VelocityGrid& grid, double chi_M, double chi_N);

struct DecayModes {
  double lambda_minus = 0.0;          // tail exponent behind the wave (z -> -inf)
  double lambda_plus = 0.0;           // tail exponent ahead of the wave
  std::vector<double> F_minus, F_plus;  // velocity profiles of the two modes
};

// Smallest positive roots of the two dispersion relations (lambda_plus from
// sum w (v-c)/(T_+(v-c) - lambda (v-c)) = 0 and the mirrored one for
// lambda_minus), bisected below the first positive pole. Requires
// c in (c_*, c^*) and c distinct from every node.
DecayModes decay_rates(double c, const VelocityGrid& grid, const QuadrantRates& rates);

struct WaveProfile {
  double c;
  double z0;   // leftmost node; nodes are z0 + m*dz with z=0 on the grid
  double dz;
  int num_nodes;
  std::vector<double> f;    // [node][velocity]
  std::vector<double> rho;
  std::vector<double> M;    // signal of the elliptic equation
  std::vector<double> N;    // stationary nutrient
  double lambda_minus = 0.0, lambda_plus = 0.0;
  int peak_index = 0;
};

struct WaveOptions {
  double dz = 0.01;
  double L_z = 0.0;          // 0 = automatic: max(15, 12/min(lambda)), capped
  double L_z_cap = 60.0;
  double mass = 1.0;
  bool upwind_advection = false;  // elliptic signal advection discretization
  double node_guard = 1e-3;       // stay this far from singular speeds c = v_k
};

// Stationary moving-frame kinetic profile on [-L_z, L_z]: staggered-cell
// second-order collocation with quadrant rates and zero inflow at the
// truncated ends, solved as the near-null vector of the sparse system and
// normalized to sum rho dz = mass.
void stationary_profile(double c, const VelocityGrid& grid, const QuadrantRates& rates,
                        double L_z, double dz, double mass,
                        std::vector<double>& f, std::vector<double>& rho);

// Tridiagonal solve of -c M' - D_M M'' + alpha M = beta rho with homogeneous
// Neumann ends.
std::vector<double> elliptic_signal(std::span<const double> rho, double c,
                                    const ModelParams& params, double dz,
                                    bool upwind = false);

// Tridiagonal solve of -c N' - D_N N'' + gamma rho N = 0 with N(-L_z) = 0 and
// N(+L_z) = N_bar.
std::vector<double> stationary_nutrient(std::span<const double> rho, double c,
                                        const ModelParams& params, double dz);

// Signal slope at the density peak: Upsilon(c) = dM/dz(0), centered.
double upsilon(double c, const VelocityGrid& grid, const ModelParams& params,
               const WaveOptions& opts = {});

// Full profile bundle (kinetic profile + signal + nutrient + decay rates).
WaveProfile wave_profile(double c, const VelocityGrid& grid, const ModelParams& params,
                         const WaveOptions& opts = {});

// Half-length of the truncated profile domain under the automatic policy
// max(15, 12/min(lambda)), capped; used to size simulation domains.
double profile_half_length(double c, const VelocityGrid& grid, const ModelParams& params,
                           const WaveOptions& opts = {});

struct UpsilonSample {
  double c;
  double value;
};

struct WaveSpeedScan {
  std::vector<double> roots;         // bisected zeros of Upsilon
  std::vector<double> jumps;         // speeds where Upsilon jumps across 0
  std::vector<UpsilonSample> table;  // the raw scan
};

// Scan Upsilon over (max(0, c_*), c^*), excluding guard bands around the
// grid velocities, and bisect every sign change; sign changes that do not
// shrink |Upsilon| (or that straddle a grid velocity) are reported as jumps.
WaveSpeedScan find_wave_speeds(const VelocityGrid& grid, const ModelParams& params,
                               int scan_points = 60, const WaveOptions& opts = {});

// Least-squares slopes of log rho over the two tail windows [L_z/2, 3L_z/4];
// returns {slope_left, slope_right} (approx +lambda_minus and -lambda_plus).
std::pair<double, double> profile_tail_slopes(const WaveProfile& profile);

struct WaveInitialData {
  KineticState f;
  FieldState M, N;          // interface-located
  FieldState M_prev, N_prev;  // back-propagated one dt along the wave
};

// Translate the moving-frame profile onto the lab simulation grid with the
// density peak at peak_position (snapped to a cell center), zero-padding f
// and M and padding N with its boundary values; prev fields are the current
// ones advected backward one dt. The profile is built with dz = dx so the
// translation is an exact index shift.
WaveInitialData wave_initial_data(double c, const VelocityGrid& grid,
                                  const ModelParams& params, double x_left, double dx,
                                  int num_cells, double peak_position, double mass,
                                  double dt, const WaveOptions& opts = {});

}  // namespace ktwave

#endif
