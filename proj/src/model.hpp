#ifndef KTWAVE_MODEL_HPP
#define KTWAVE_MODEL_HPP

#include <span>
#include <vector>

namespace ktwave {

// Physical parameters of the kinetic run-and-tumble model coupled to the
// signal (M) and nutrient (N) reaction-diffusion equations.
struct ModelParams {
  double chi_M = 0.0;   // signal sensitivity, in [0,1)
  double chi_N = 0.0;   // nutrient sensitivity, in [0,1)
  double D_M = 1.0;     // signal diffusivity
  double D_N = 1.0;     // nutrient diffusivity
  double alpha = 1.0;   // signal degradation rate
  double beta = 1.0;    // signal production rate
  double gamma = 1.0;   // nutrient consumption rate
  double N_bar = 1.0;   // nutrient level held at the right boundary

  void validate() const;
};

// sgn with sgn(0) = 0, so flat fields yield the neutral rate 1.
inline double sgn0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Tumbling rate 1 - chi_M sgn(DM/Dt) - chi_N sgn(DN/Dt); takes one of the
// four values 1 +- chi_M +- chi_N away from extrema of the fields.
inline double tumbling_rate(const ModelParams& p, double dM_material, double dN_material) {
  return 1.0 - p.chi_M * sgn0(dM_material) - p.chi_N * sgn0(dN_material);
}

// Interface-located concentration fields at two consecutive time levels.
// dt_used is the step separating prev from now; the material-derivative
// approximations need it when the time step adapts.
struct ChemFields {
  std::vector<double> M_now, M_prev;
  std::vector<double> N_now, N_prev;
  double dt_used = 0.0;
};

// MD-1: material derivative at interface i (between nodes i-1 and i) from
// node-located fields, using the centered space difference and the average
// of the two nodal backward time differences.
double material_derivative_md1(std::span<const double> M_nodes_now,
                               std::span<const double> M_nodes_prev,
                               double dt, double dx, int i, double v);

// MD-1 collocated at node j (used by the time-splitting kinetic scheme,
// whose rates live at cell nodes).
double material_derivative_md1_node(std::span<const double> M_nodes_now,
                                    std::span<const double> M_nodes_prev,
                                    double dt, double dx, int j, double v);

// MD-2: (M_now[i] - M_prev interpolated at x_i - v*dt)/dt, upwinded by the
// sign of v. Requires |v| dt <= dx. At the first/last entry the interpolated
// value of the nearest interior entry is replicated.
double material_derivative_md2(std::span<const double> M_now,
                               std::span<const double> M_prev,
                               double dt, double dx, int i, double v);

}  // namespace ktwave

#endif
