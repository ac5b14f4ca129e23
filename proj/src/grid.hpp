#ifndef KTWAVE_GRID_HPP
#define KTWAVE_GRID_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ktwave {

// Symmetric discrete velocity set on (-1,1) with normalized weights.
//
// Nodes are stored ascending: {-v_K, ..., -v_1, v_1, ..., v_K} with v_k > 0.
// The negative side is built by negating the positive side, so the
// antisymmetry nodes[k] == -nodes[2K-1-k] holds at the bit level.
// Weights are normalized to sum to 1 and mirror the node symmetry.
//
// Several routines (scattering matrices, the kinetic update) work with the
// "stacked" ordering (v_1..v_K, -v_1..-v_K): positive velocities ascending,
// then their negatives in the same magnitude order. pos_index()/neg_index()
// translate stacked positions to indices into nodes().
class VelocityGrid {
public:
  static VelocityGrid gauss_legendre(int half_count);
  // values: strictly increasing positive magnitudes; weights per magnitude
  // (mirrored to the negative side) or empty for uniform 1/(2K).
  static VelocityGrid explicit_symmetric(std::span<const double> values,
                                         std::span<const double> weights = {});

  int half_count() const { return half_count_; }
  int size() const { return 2 * half_count_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  double node(int k) const { return nodes_[k]; }
  double weight(int k) const { return weights_[k]; }
  double max_speed() const { return nodes_.back(); }
  double min_speed() const { return nodes_[half_count_]; }

  // stacked ordering helpers: p in [0, K) is the p-th positive magnitude
  int pos_index(int p) const { return half_count_ + p; }
  int neg_index(int p) const { return half_count_ - 1 - p; }
  // grid index -> stacked index
  int stacked_of(int k) const {
    return k >= half_count_ ? k - half_count_ : 2 * half_count_ - 1 - k;
  }

private:
  VelocityGrid(std::vector<double> nodes, std::vector<double> weights);
  int half_count_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

struct Moments {
  double rho;
  double flux;
};

// rho = sum_k w_k f_k, flux = sum_k w_k v_k f_k for one spatial slice.
Moments moments(const VelocityGrid& grid, std::span<const double> f_slice);

}  // namespace ktwave

#endif
