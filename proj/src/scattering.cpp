#include "scattering.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <mutex>

namespace ktwave {

namespace {

double secular_fn(const std::vector<double>& poles, const std::vector<double>& w,
                  double lam) {
  double s = 0.0;
  for (size_t k = 0; k < poles.size(); ++k) s += w[k] / (poles[k] - lam);
  return s;
}

// bisection of the (increasing) secular function on (lo, hi) with
// g(lo) < 0 < g(hi)
double bisect_gap(const std::vector<double>& poles, const std::vector<double>& w,
                  double lo, double hi) {
  double span = hi - lo;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (secular_fn(poles, w, mid) < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-13 * std::max({1.0, std::abs(lo), std::abs(hi)})) return 0.5 * (lo + hi);
  }
  if (hi - lo > 1e-10 * span)
    throw std::runtime_error("secular_roots: bisection failed to converge");
  return 0.5 * (lo + hi);
}

}  // namespace

SecularRoots secular_roots(const InterfaceRates& rates, const VelocityGrid& grid) {
  const int n = grid.size();
  assert(static_cast<int>(rates.size()) == n);
  std::vector<double> poles(n), w(n);
  for (int k = 0; k < n; ++k) {
    if (rates[k] <= 0.0) throw std::invalid_argument("secular_roots: rates must be positive");
    poles[k] = rates[k] / grid.node(k);
    w[k] = grid.weight(k);
  }
  // sort poles, carrying weights; the pole values do not respect the order
  // of 1/v_k for general four-value patterns
  std::vector<int> order(n);
  for (int k = 0; k < n; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return poles[a] < poles[b]; });
  std::vector<double> ps(n), ws(n);
  for (int k = 0; k < n; ++k) {
    ps[k] = poles[order[k]];
    ws[k] = w[order[k]];
  }

  // mean flux sum w v / T, accumulated over mirror pairs so symmetric rate
  // patterns give an exact zero
  double flux = 0.0;
  for (int p = 0; p < grid.half_count(); ++p) {
    int ip = grid.pos_index(p), in = grid.neg_index(p);
    flux += grid.weight(ip) * grid.node(ip) * (1.0 / rates[ip] - 1.0 / rates[in]);
  }

  SecularRoots out;
  const double ctol = 1e-12;
  for (int g = 0; g < n - 1; ++g) {
    double a = ps[g], b = ps[g + 1];
    if (b - a <= ctol * std::max(1.0, std::abs(a))) {
      out.pole_collision = true;
      continue;
    }
    bool zero_gap = (a < 0.0 && b > 0.0);
    double eps = (b - a) * 1e-14;
    double root;
    if (zero_gap) {
      if (flux == 0.0) {
        root = 0.0;
        out.degenerate = true;
      } else if (flux > 0.0) {
        // g(0) = flux > 0 and g is increasing: the root is negative
        root = bisect_gap(ps, ws, a + eps, 0.0);
      } else {
        root = bisect_gap(ps, ws, 0.0, b - eps);
      }
      out.zero_gap = static_cast<int>(out.roots.size());
    } else {
      root = bisect_gap(ps, ws, a + eps, b - eps);
    }
    out.roots.push_back(root);
  }
  return out;
}

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Mode value of the reparametrized zero-gap column at local coordinate z:
// psi0 = (phi0 e^{-lam z} - 1/T)/lam, stable down to lam = 0 where it
// becomes the generalized linear mode (v - T z)/T^2 of the zero-flux case.
double zero_gap_mode(double T, double v, double lam, double z) {
  double em = (lam == 0.0) ? -z : std::expm1(-lam * z) / lam;
  return (T * em + v) / (T * (T - lam * v));
}

}  // namespace

SMatrix case_smatrix(const InterfaceRates& rates, const VelocityGrid& grid,
                     double dx, SEval eval) {
  const int n = grid.size();
  const int K = grid.half_count();
  SecularRoots sec = secular_roots(rates, grid);
  if (sec.pole_collision)
    throw CaseMatrixError("case_smatrix: coinciding secular poles, mode basis incomplete",
                          rates);

  // stacked row order: velocities v_1..v_K then -v_1..-v_K
  std::vector<int> gidx(n);
  std::vector<double> zin(n), zout(n);
  for (int p = 0; p < K; ++p) {
    gidx[p] = grid.pos_index(p);
    gidx[K + p] = grid.neg_index(p);
    zin[p] = -0.5 * dx;
    zin[K + p] = 0.5 * dx;
    zout[p] = (eval == SEval::Interface) ? 0.0 : 0.5 * dx;
    zout[K + p] = (eval == SEval::Interface) ? 0.0 : -0.5 * dx;
  }

  // zero-gap column: use the reparametrized mode when lambda_0 is small
  // relative to its bracket, otherwise the plain exponential mode
  bool use_psi0 = false;
  double lam0 = 0.0;
  if (sec.zero_gap >= 0) {
    lam0 = sec.roots[sec.zero_gap];
    double nearest = std::numeric_limits<double>::max();
    for (int k = 0; k < n; ++k)
      nearest = std::min(nearest, std::abs(rates[k] / grid.node(k)));
    use_psi0 = std::abs(lam0) < 1e-3 * nearest;
  }

  Eigen::MatrixXd M(n, n), Mt(n, n);
  for (int r = 0; r < n; ++r) {
    int k = gidx[r];
    double T = rates[k], v = grid.node(k);
    M(r, 0) = 1.0 / T;
    Mt(r, 0) = 1.0 / T;
    for (size_t l = 0; l < sec.roots.size(); ++l) {
      double lam = sec.roots[l];
      int c = static_cast<int>(l) + 1;
      if (static_cast<int>(l) == sec.zero_gap && use_psi0) {
        M(r, c) = zero_gap_mode(T, v, lam, zin[r]);
        Mt(r, c) = zero_gap_mode(T, v, lam, zout[r]);
      } else {
        double phi = 1.0 / (T - lam * v);
        M(r, c) = phi * std::exp(-lam * zin[r]);
        Mt(r, c) = phi * std::exp(-lam * zout[r]);
      }
    }
  }

  // normalize columns by their max entry in M; S is invariant
  for (int c = 0; c < n; ++c) {
    double s = M.col(c).cwiseAbs().maxCoeff();
    M.col(c) /= s;
    Mt.col(c) /= s;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  double smin = svd.singularValues()(n - 1);
  double smax = svd.singularValues()(0);
  if (smin <= 0.0 || smax / smin > 1e14)
    throw CaseMatrixError("case_smatrix: mode matrix numerically singular", rates);

  // S = Mt M^{-1}  <=>  M^T S^T = Mt^T
  Eigen::MatrixXd St = M.transpose().partialPivLu().solve(Mt.transpose());
  SMatrix out;
  out.entries = St.transpose();
  out.min_entry = out.entries.minCoeff();
  return out;
}

SMatrix fd_smatrix(const InterfaceRates& rates, const VelocityGrid& grid,
                   double dx, bool check_resonance) {
  const int n = grid.size();
  const int K = grid.half_count();
  double tmax = *std::max_element(rates.begin(), rates.end());
  double tmin = *std::min_element(rates.begin(), rates.end());
  if (check_resonance && grid.min_speed() <= dx * 0.5 * (tmax - tmin))
    throw NonResonanceError(
        "fd_smatrix: non-resonance condition v_min > dx*(T_max-T_min)/2 violated; "
        "refine the velocity grid or coarsen dx");

  Eigen::MatrixXd Q(n, n), Qt(n, n);
  std::vector<int> gidx(n);
  for (int p = 0; p < K; ++p) {
    gidx[p] = grid.pos_index(p);
    gidx[K + p] = grid.neg_index(p);
  }
  for (int r = 0; r < n; ++r) {
    double absv = std::abs(grid.node(gidx[r]));
    double Tr = rates[gidx[r]];
    for (int c = 0; c < n; ++c) {
      double wT = grid.weight(gidx[c]) * rates[gidx[c]];
      Q(r, c) = -0.5 * dx * wT;
      Qt(r, c) = 0.5 * dx * wT;
    }
    Q(r, r) += absv + 0.5 * dx * Tr;
    Qt(r, r) += absv - 0.5 * dx * Tr;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Q);
  SMatrix out;
  out.entries = lu.solve(Qt);
  if (!out.entries.allFinite())
    throw std::runtime_error("fd_smatrix: singular interface system");
  out.min_entry = out.entries.minCoeff();
  return out;
}

SMatrixReport smatrix_diagnostics(const SMatrix& S, const VelocityGrid& grid) {
  const int n = grid.size();
  const int K = grid.half_count();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S.entries);
  double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
  std::vector<double> g(n);
  for (int p = 0; p < K; ++p) {
    g[p] = grid.weight(grid.pos_index(p)) * grid.node(grid.pos_index(p));
    g[K + p] = g[p];
  }
  double defect = 0.0;
  for (int c = 0; c < n; ++c) {
    double colsum = 0.0;
    for (int r = 0; r < n; ++r) colsum += g[r] * S.entries(r, c);
    defect = std::max(defect, std::abs(colsum / g[c] - 1.0));
  }
  return {cond, S.entries.minCoeff(), defect};
}

RateSigns encode_rate_signs(std::span<const double> dM, std::span<const double> dN) {
  assert(dM.size() == dN.size());
  RateSigns key(dM.size(), '\0');
  for (size_t k = 0; k < dM.size(); ++k) {
    int sm = static_cast<int>(sgn0(dM[k]));
    int sn = static_cast<int>(sgn0(dN[k]));
    key[k] = static_cast<char>((sm + 1) * 3 + (sn + 1));
  }
  return key;
}

InterfaceRates rates_from_signs(const RateSigns& signs, const ModelParams& params) {
  InterfaceRates rates(signs.size());
  for (size_t k = 0; k < signs.size(); ++k) {
    int code = signs[k];
    int sm = code / 3 - 1;
    int sn = code % 3 - 1;
    rates[k] = 1.0 - params.chi_M * sm - params.chi_N * sn;
  }
  return rates;
}

const SMatrix& SMatrixCache::get(const RateSigns& signs) {
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(signs);
    if (it != cache_.end()) return *it->second;
  }
  std::unique_lock lock(mutex_);
  auto it = cache_.find(signs);
  if (it != cache_.end()) return *it->second;

  InterfaceRates rates = rates_from_signs(signs, params_);
  std::unique_ptr<SMatrix> built;
  if (variant_ == SVariant::Case) {
    try {
      built = std::make_unique<SMatrix>(case_smatrix(rates, grid_, dx_, eval_));
    } catch (const CaseMatrixError&) {
      // incomplete/ill-conditioned mode basis for this pattern: the FD
      // interface system covers it (it is exactly current-preserving too)
      built = std::make_unique<SMatrix>(fd_smatrix(rates, grid_, dx_));
      ++fallbacks_;
    }
  } else {
    built = std::make_unique<SMatrix>(fd_smatrix(rates, grid_, dx_));
  }
  min_entry_seen_ = std::min(min_entry_seen_, built->min_entry);
  auto [pos, inserted] = cache_.emplace(signs, std::move(built));
  (void)inserted;
  return *pos->second;
}

}  // namespace ktwave
