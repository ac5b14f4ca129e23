#ifndef KTWAVE_SCENARIOS_HPP
#define KTWAVE_SCENARIOS_HPP

#include <optional>
#include <string>
#include <vector>

#include "sim.hpp"
#include "waves.hpp"

namespace ktwave {

// Parameters of the bi-stability study (two co-existing waves on the
// four-velocity grid): chi_M=0.48, chi_N=0.44, D_M=0.5, alpha=40,
// D_N=beta=gamma=1.
ModelParams bistability_params();
GridSpec four_velocity_grid(double v_min = 0.5);

// Aggregation (no nutrient) symmetry experiment: all rate parameters 1,
// K=8 Gauss velocities, dx=0.01 on [-10,10]. chi_M is clamped just below 1
// to keep the tumbling rate positive.
SimConfig symmetry_preset(KineticScheme ks, ParabolicScheme ps, SignalMode mode);

// Travelling-pulse formation run: bistability parameters, half-Gaussian
// initial density at the left wall, tanh nutrient ramp, t_end = 100.
SimConfig wavespeed_preset();

// Cauchy run seeded with the moving-frame stationary profile at speed c0.
SimConfig bistability_preset(double c0, double dx, double t_end = 40.0);

struct ConditioningRow {
  int K;
  double dx;
  std::string variant;  // "case" or "fd"
  double condition;
  double stochastic_defect;
  double min_entry;
  bool nonresonance_ok;  // FD only; condition still reported when violated
};

std::vector<ConditioningRow> conditioning_study(const std::vector<int>& K_list,
                                                const std::vector<double>& dx_list);

struct SymmetryResult {
  std::string kinetic, parabolic, signal;
  double delta_rho;
  double t_final;
  bool steady_reached;
  std::vector<double> rho;  // final profile
};

SymmetryResult run_symmetry_variant(KineticScheme ks, ParabolicScheme ps, SignalMode mode,
                                    double t_cap, double stop_at_sym_err = 0.0);

struct SpeedHistory {
  double c0;
  std::vector<std::pair<double, double>> c_of_t;  // (t, estimated speed)
  double c_final;     // mean over the final quarter of the run
  double drift_max;   // max |c(t) - c0| over the run
  std::string abort_reason;
};

SpeedHistory run_bistability_case(double c0, double dx, double t_end);

struct BifurcationPoint {
  double v_min;
  std::string kind;  // "root", "jump" or "dynamic"
  double c;
};

std::vector<BifurcationPoint> bifurcation_sweep(const std::vector<double>& vmin_list,
                                                bool with_dynamics, double dx,
                                                int threads);

// CSV writers (out_dir is created if needed); every file starts with the
// echoed configuration of the runs it contains.
void write_conditioning_csv(const std::string& path, const std::vector<ConditioningRow>& rows);
void write_symmetry_csv(const std::string& dir, const std::vector<SymmetryResult>& results);
void write_speed_history_csv(const std::string& path, const std::vector<SpeedHistory>& runs);
void write_upsilon_csv(const std::string& path, const WaveSpeedScan& scan,
                       const SimConfig& cfg);
void write_bifurcation_csv(const std::string& path, const std::vector<BifurcationPoint>& pts);
void write_run_outputs(const std::string& dir, const std::string& tag, const SimConfig& cfg,
                       RunResult& result);

void ensure_dir(const std::string& path);

// Run jobs across at most `threads` workers (sweeps are independent runs).
void parallel_run(std::vector<std::function<void()>> jobs, int threads);

}  // namespace ktwave

#endif
