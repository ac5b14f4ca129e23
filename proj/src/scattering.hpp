#ifndef KTWAVE_SCATTERING_HPP
#define KTWAVE_SCATTERING_HPP

#include <Eigen/Dense>
#include <memory>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "grid.hpp"
#include "model.hpp"

namespace ktwave {

// Tumbling rates frozen at one interface, one entry per velocity node in the
// grid's ascending order. Entries take one of the four values
// 1 +- chi_M +- chi_N (or the sgn(0)=0 degenerate values).
using InterfaceRates = std::vector<double>;

// Interface scattering operator in the stacked ordering
// (v_1..v_K, -v_1..-v_K): the output vector holds the outgoing states for
// positive then negative velocities, the input stacks the incoming states
// from the left cell (positive v) and the right cell (negative v).
struct SMatrix {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> entries;
  double min_entry = 0.0;
};

struct SecularRoots {
  std::vector<double> roots;  // sorted ascending, one per gap between poles
  bool degenerate = false;    // mean flux == 0: lambda = 0 is a double root
  bool pole_collision = false;  // coinciding poles, mode basis incomplete
  int zero_gap = -1;          // index into roots of the root in the gap containing 0
};

// All real solutions of sum_k w_k / (T_k/v_k - lambda) = 0. There is exactly
// one root strictly inside each open interval between consecutive sorted
// poles T_k/v_k; the root of the gap straddling 0 lies on the side opposite
// to the sign of the mean flux sum_k w_k v_k / T_k (it is 0 exactly when the
// flux vanishes, degenerate with the conservation mode).
SecularRoots secular_roots(const InterfaceRates& rates, const VelocityGrid& grid);

// Where the scattering matrix evaluates the outgoing states of the staggered
// cell boundary-value problem:
//   Interface - at the cell interface (midpoint of the staggered cell); this
//     is the map that reproduces exact steady modes at the interface.
//   Transfer  - at the opposite node (full staggered-cell transfer); this
//     map conserves the |v|-weighted current exactly and is the one used for
//     time stepping, where it makes the scheme mass-conservative and exact
//     on steady modes sampled at the nodes.
enum class SEval { Interface, Transfer };

struct CaseMatrixError : std::runtime_error {
  CaseMatrixError(const std::string& msg, InterfaceRates pattern)
      : std::runtime_error(msg), rates(std::move(pattern)) {}
  InterfaceRates rates;
};

struct NonResonanceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// S-matrix from Case elementary modes: S = Mtilde M^{-1}, where M holds the
// mode values at the inflow nodes (local coordinates -dx/2 for v>0, +dx/2
// for v<0) and Mtilde the values at the evaluation points chosen by `eval`.
SMatrix case_smatrix(const InterfaceRates& rates, const VelocityGrid& grid,
                     double dx, SEval eval = SEval::Interface);

// S-matrix from the second-order finite-difference discretization on the
// half cells: S = Q^{-1} Qtilde. Requires the non-resonance condition
// v_min > dx * (T_max - T_min)/2 (equals dx*(chi_M+chi_N) for a four-value
// pattern); pass check_resonance=false to attempt the solve regardless
// (used by the conditioning study, which records failures as flagged rows).
SMatrix fd_smatrix(const InterfaceRates& rates, const VelocityGrid& grid,
                   double dx, bool check_resonance = true);

struct SMatrixReport {
  double condition_number;
  double min_entry;
  double stochastic_defect;  // max column-sum deviation of Gamma S Gamma^-1
};

SMatrixReport smatrix_diagnostics(const SMatrix& S, const VelocityGrid& grid);

enum class SVariant { Case, FD };

// Sign pattern of the two material derivatives per velocity; enough to
// reconstruct the rate vector given (chi_M, chi_N), and the S-matrix memo
// key. Code per node: (sgn_M+1)*3 + (sgn_N+1).
using RateSigns = std::string;

RateSigns encode_rate_signs(std::span<const double> dM, std::span<const double> dN);
InterfaceRates rates_from_signs(const RateSigns& signs, const ModelParams& params);

// Memoized S-matrix store for one (grid, dx, variant, eval) configuration.
// Rates take finitely many sign patterns per step, so matrices are built
// once per pattern. Concurrent readers, exclusive inserts.
class SMatrixCache {
public:
  SMatrixCache(const VelocityGrid& grid, double dx, const ModelParams& params,
               SVariant variant, SEval eval)
      : grid_(grid), dx_(dx), params_(params), variant_(variant), eval_(eval) {}

  const SMatrix& get(const RateSigns& signs);

  // Number of patterns where the Case construction was replaced by the FD
  // one (pole collisions / ill-conditioned mode matrix).
  int fallback_count() const { return fallbacks_; }
  double min_entry_seen() const { return min_entry_seen_; }

private:
  const VelocityGrid& grid_;
  double dx_;
  ModelParams params_;
  SVariant variant_;
  SEval eval_;
  std::shared_mutex mutex_;
  std::unordered_map<RateSigns, std::unique_ptr<SMatrix>> cache_;
  int fallbacks_ = 0;
  double min_entry_seen_ = 1.0;
};

}  // namespace ktwave

#endif
