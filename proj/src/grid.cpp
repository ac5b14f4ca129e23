#include "grid.hpp"

#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ktwave {

namespace {

// Legendre polynomial P_n and derivative at x, by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int m = 2; m <= n; ++m) {
    double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
    p0 = p1;
    p1 = p2;
  }
  double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

VelocityGrid::VelocityGrid(std::vector<double> nodes, std::vector<double> weights)
    : half_count_(static_cast<int>(nodes.size()) / 2),
      nodes_(std::move(nodes)),
      weights_(std::move(weights)) {
  assert(nodes_.size() == weights_.size());
  assert(nodes_.size() % 2 == 0 && !nodes_.empty());
}

VelocityGrid VelocityGrid::gauss_legendre(int half_count) {
  if (half_count < 1) throw std::invalid_argument("gauss_legendre: K must be >= 1");
  const int n = 2 * half_count;
  std::vector<double> pos(half_count), wpos(half_count);
  // Newton iteration from the Chebyshev estimate; only the positive half is
  // computed, the negative half is the mirror image.
  for (int i = 0; i < half_count; ++i) {
    // i-th positive root, ascending
    int root_index = half_count - 1 - i;  // 0 = largest
    double x = std::cos(M_PI * (root_index + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, dp] = legendre(n, x);
    (void)p;
    pos[i] = x;
    wpos[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < half_count; ++i) {
    nodes[half_count + i] = pos[i];
    nodes[half_count - 1 - i] = -pos[i];
    // classical weights sum to 2; halve so the discrete measure is a
    // probability measure
    weights[half_count + i] = 0.5 * wpos[i];
    weights[half_count - 1 - i] = 0.5 * wpos[i];
  }
  return VelocityGrid(std::move(nodes), std::move(weights));
}

VelocityGrid VelocityGrid::explicit_symmetric(std::span<const double> values,
                                              std::span<const double> weights) {
  const int k = static_cast<int>(values.size());
  if (k < 1) throw std::invalid_argument("explicit_symmetric: empty velocity set");
  for (int i = 0; i < k; ++i) {
    if (values[i] <= 0.0)
      throw std::invalid_argument("explicit_symmetric: values must be positive");
    if (i > 0 && values[i] <= values[i - 1])
      throw std::invalid_argument("explicit_symmetric: values must be strictly increasing");
  }
  if (!weights.empty() && static_cast<int>(weights.size()) != k)
    throw std::invalid_argument("explicit_symmetric: weights length mismatch");
  std::vector<double> nodes(2 * k), w(2 * k);
  double wsum = 0.0;
  if (!weights.empty()) {
    for (int i = 0; i < k; ++i) {
      if (weights[i] <= 0.0)
        throw std::invalid_argument("explicit_symmetric: weights must be positive");
      wsum += 2.0 * weights[i];
    }
  }
  for (int i = 0; i < k; ++i) {
    nodes[k + i] = values[i];
    nodes[k - 1 - i] = -values[i];
    double wi = weights.empty() ? 1.0 / (2 * k) : weights[i] / wsum;
    w[k + i] = wi;
    w[k - 1 - i] = wi;
  }
  return VelocityGrid(std::move(nodes), std::move(w));
}

Moments moments(const VelocityGrid& grid, std::span<const double> f_slice) {
  assert(static_cast<int>(f_slice.size()) == grid.size());
  // sum mirror pairs together so even slices have bitwise-zero flux
  double rho = 0.0, flux = 0.0;
  const int K = grid.half_count();
  for (int p = 0; p < K; ++p) {
    int ip = grid.pos_index(p), in = grid.neg_index(p);
    rho += grid.weight(ip) * (f_slice[ip] + f_slice[in]);
    flux += grid.weight(ip) * grid.node(ip) * (f_slice[ip] - f_slice[in]);
  }
  return {rho, flux};
}

}  // namespace ktwave
