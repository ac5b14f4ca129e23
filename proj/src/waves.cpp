#include "waves.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>

namespace ktwave {

namespace {

double bisect(const std::function<double(double)>& fn, double lo, double hi,
              double flo, int iters = 200, double rtol = 1e-13) {
  for (int it = 0; it < iters; ++it) {
    double mid = 0.5 * (lo + hi);
    if (fn(mid) * flo > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= rtol * std::max({1.0, std::abs(lo), std::abs(hi)})) break;
  }
  return 0.5 * (lo + hi);
}

void solve_tridiagonal(std::vector<double>& a, std::vector<double>& b,
                       std::vector<double>& c, std::vector<double>& rhs) {
  // Thomas algorithm: a = sub, b = diag, c = super, solution in rhs
  const int n = static_cast<int>(b.size());
  for (int i = 1; i < n; ++i) {
    double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= b[n - 1];
  for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - c[i] * rhs[i + 1]) / b[i];
}

}  // namespace

CriticalSpeeds critical_speeds(const VelocityGrid& grid, double chi_M, double chi_N) {
  if (chi_M + chi_N >= 1.0)
    throw std::invalid_argument("critical_speeds: chi_M + chi_N must be < 1");
  QuadrantRates rates{chi_M, chi_N};
  auto solve = [&](auto&& T) {
    auto h = [&](double c) {
      double s = 0.0;
      for (int k = 0; k < grid.size(); ++k) {
        double w = grid.node(k) - c;
        s += grid.weight(k) * w / T(w);
      }
      return s;
    };
    double lo = -1.0 + 1e-9, hi = 1.0 - 1e-9;
    double flo = h(lo);
    if (flo * h(hi) > 0.0)
      throw std::runtime_error("critical_speeds: no sign change in (-1,1)");
    return bisect(h, lo, hi, flo);
  };
  double lower = solve([&](double w) { return rates.right(w); });
  double upper = solve([&](double w) { return rates.left(w); });
  return {lower, upper};
}

DecayModes decay_rates(double c, const VelocityGrid& grid, const QuadrantRates& rates) {
  const int n = grid.size();
  for (int k = 0; k < n; ++k)
    if (std::abs(grid.node(k) - c) < 1e-12)
      throw std::invalid_argument("decay_rates: c coincides with a grid velocity");
  DecayModes out;
  // lambda_plus: sum w (v-c)/(T_+(v-c) - lam (v-c)) = 0 on (0, first pole)
  auto solve = [&](auto&& T, double sign) {
    auto D = [&](double lam) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        double w = grid.node(k) - c;
        s += grid.weight(k) * w / (T(w) + sign * lam * w);
      }
      return s;
    };
    double pole = std::numeric_limits<double>::max();
    for (int k = 0; k < n; ++k) {
      double w = grid.node(k) - c;
      double p = -sign * T(w) / w;  // lambda where this denominator vanishes
      if (p > 0.0) pole = std::min(pole, p);
    }
    double lo = 0.0, hi = pole * (1.0 - 1e-12);
    double flo = D(1e-14);
    if (flo * D(hi) > 0.0)
      throw std::runtime_error(
          "decay_rates: no positive root below the first pole (c outside (c_*, c^*))");
    return bisect(D, lo, hi, flo);
  };
  out.lambda_plus = solve([&](double w) { return rates.right(w); }, -1.0);
  out.lambda_minus = solve([&](double w) { return rates.left(w); }, +1.0);
  out.F_plus.resize(n);
  out.F_minus.resize(n);
  for (int k = 0; k < n; ++k) {
    double w = grid.node(k) - c;
    out.F_plus[k] = 1.0 / (rates.right(w) - out.lambda_plus * w);
    out.F_minus[k] = 1.0 / (rates.left(w) + out.lambda_minus * w);
  }
  return out;
}

void stationary_profile(double c, const VelocityGrid& grid, const QuadrantRates& rates,
                        double L_z, double dz, double mass,
                        std::vector<double>& f, std::vector<double>& rho) {
  const int n2 = grid.size();
  for (int k = 0; k < n2; ++k)
    if (std::abs(grid.node(k) - c) < 1e-9)
      throw std::invalid_argument("stationary_profile: c at a resonance (grid velocity)");
  const int half = static_cast<int>(std::round(L_z / dz));
  const int nn = 2 * half + 1;  // nodes, z = 0 at index half
  const int N = nn * n2;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(nn) * n2 * (n2 + 2) * 2);
  int row = 0;
  std::vector<double> w(n2), Tk(n2);
  for (int k = 0; k < n2; ++k) w[k] = grid.node(k) - c;
  // staggered-cell collocation between nodes j-1, j
  for (int j = 1; j < nn; ++j) {
    double zmid = (j - half - 0.5) * dz;
    for (int k = 0; k < n2; ++k) Tk[k] = rates.at(zmid, w[k]);
    for (int k = 0; k < n2; ++k) {
      trip.emplace_back(row, j * n2 + k, w[k] / dz + 0.5 * Tk[k]);
      trip.emplace_back(row, (j - 1) * n2 + k, -w[k] / dz + 0.5 * Tk[k]);
      for (int l = 0; l < n2; ++l) {
        double g = -0.5 * grid.weight(l) * Tk[l];
        trip.emplace_back(row, j * n2 + l, g);
        trip.emplace_back(row, (j - 1) * n2 + l, g);
      }
      ++row;
    }
  }
  // zero inflow at the truncated ends
  for (int k = 0; k < n2; ++k) {
    if (w[k] > 0.0)
      trip.emplace_back(row++, 0 * n2 + k, 1.0);
    else
      trip.emplace_back(row++, (nn - 1) * n2 + k, 1.0);
  }
  assert(row == N);

  Eigen::SparseMatrix<double> A(N, N);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("stationary_profile: singular system (c at a resonance?)");

  // the wave is the near-null vector of the truncated operator: two rounds
  // of inverse iteration from a positive bump seed
  Eigen::VectorXd y(N);
  for (int j = 0; j < nn; ++j) {
    double z = (j - half) * dz;
    double b = std::exp(-z * z);
    for (int k = 0; k < n2; ++k) y[j * n2 + k] = b;
  }
  for (int pass = 0; pass < 2; ++pass) {
    y = lu.solve(y);
    y /= y.norm();
  }

  f.assign(y.data(), y.data() + N);
  rho.resize(nn);
  double sum = 0.0;
  for (int j = 0; j < nn; ++j) {
    rho[j] = moments(grid, {f.data() + static_cast<size_t>(j) * n2,
                            static_cast<size_t>(n2)}).rho;
    sum += rho[j];
  }
  if (rho[half] < 0.0) {
    for (auto& v : f) v = -v;
    for (auto& v : rho) v = -v;
    sum = -sum;
  }
  double scale = mass / (sum * dz);
  for (auto& v : f) v *= scale;
  for (auto& v : rho) v *= scale;

  double peak = *std::max_element(rho.begin(), rho.end());
  for (double v : rho)
    if (v < -1e-10 * peak)
      throw std::runtime_error("stationary_profile: negative density in the solve");
}

std::vector<double> elliptic_signal(std::span<const double> rho, double c,
                                    const ModelParams& params, double dz, bool upwind) {
  if (params.alpha <= 0.0)
    throw std::invalid_argument("elliptic_signal: alpha must be positive");
  const int n = static_cast<int>(rho.size());
  const double D = params.D_M;
  std::vector<double> sub(n, 0.0), dia(n, 0.0), sup(n, 0.0), rhs(n);
  for (int j = 0; j < n; ++j) {
    double al = -D / (dz * dz), ar = -D / (dz * dz);
    double ad = 2.0 * D / (dz * dz) + params.alpha;
    if (!upwind) {
      al += c / (2.0 * dz);
      ar += -c / (2.0 * dz);
    } else if (c >= 0.0) {
      // -c M': advection with leftward wind, one-sided toward z+
      ad += c / dz;
      ar += -c / dz;
    } else {
      ad += -c / dz;
      al += c / dz;
    }
    sub[j] = al;
    dia[j] = ad;
    sup[j] = ar;
    rhs[j] = params.beta * rho[j];
  }
  // Neumann folds
  sup[0] += sub[0];
  sub[n - 1] = sub[n - 1] + sup[n - 1];
  sup[n - 1] = 0.0;
  sub[0] = 0.0;
  solve_tridiagonal(sub, dia, sup, rhs);
  return rhs;
}

std::vector<double> stationary_nutrient(std::span<const double> rho, double c,
                                        const ModelParams& params, double dz) {
  const int n = static_cast<int>(rho.size());
  const double D = params.D_N;
  std::vector<double> sub(n), dia(n), sup(n), rhs(n, 0.0);
  for (int j = 0; j < n; ++j) {
    sub[j] = -D / (dz * dz) + c / (2.0 * dz);
    dia[j] = 2.0 * D / (dz * dz) + params.gamma * std::max(rho[j], 0.0);
    sup[j] = -D / (dz * dz) - c / (2.0 * dz);
  }
  // Dirichlet anchors
  sub[0] = sup[0] = 0.0;
  dia[0] = 1.0;
  rhs[0] = 0.0;
  sub[n - 1] = sup[n - 1] = 0.0;
  dia[n - 1] = 1.0;
  rhs[n - 1] = params.N_bar;
  solve_tridiagonal(sub, dia, sup, rhs);
  return rhs;
}

namespace {

struct DomainChoice {
  double L_z;
  DecayModes modes;
};

DomainChoice choose_domain(double c, const VelocityGrid& grid, const ModelParams& params,
                           const WaveOptions& opts) {
  QuadrantRates rates{params.chi_M, params.chi_N};
  DecayModes modes = decay_rates(c, grid, rates);
  double L = opts.L_z;
  if (L <= 0.0) {
    double lmin = std::min(modes.lambda_minus, modes.lambda_plus);
    L = std::max(15.0, 12.0 / lmin);
    L = std::min(L, opts.L_z_cap);
  }
  // land L on the dz lattice
  L = std::round(L / opts.dz) * opts.dz;
  return {L, modes};
}

}  // namespace

double profile_half_length(double c, const VelocityGrid& grid, const ModelParams& params,
                           const WaveOptions& opts) {
  return choose_domain(c, grid, params, opts).L_z;
}

WaveProfile wave_profile(double c, const VelocityGrid& grid, const ModelParams& params,
                         const WaveOptions& opts) {
  auto [L, modes] = choose_domain(c, grid, params, opts);
  WaveProfile p;
  p.c = c;
  p.dz = opts.dz;
  p.z0 = -L;
  p.lambda_minus = modes.lambda_minus;
  p.lambda_plus = modes.lambda_plus;
  QuadrantRates rates{params.chi_M, params.chi_N};
  stationary_profile(c, grid, rates, L, opts.dz, opts.mass, p.f, p.rho);
  p.num_nodes = static_cast<int>(p.rho.size());
  p.M = elliptic_signal(p.rho, c, params, opts.dz, opts.upwind_advection);
  p.N = stationary_nutrient(p.rho, c, params, opts.dz);
  p.peak_index =
      static_cast<int>(std::max_element(p.rho.begin(), p.rho.end()) - p.rho.begin());
  return p;
}

double upsilon(double c, const VelocityGrid& grid, const ModelParams& params,
               const WaveOptions& opts) {
  auto [L, modes] = choose_domain(c, grid, params, opts);
  (void)modes;
  QuadrantRates rates{params.chi_M, params.chi_N};
  std::vector<double> f, rho;
  stationary_profile(c, grid, rates, L, opts.dz, opts.mass, f, rho);
  std::vector<double> M = elliptic_signal(rho, c, params, opts.dz, opts.upwind_advection);
  int half = (static_cast<int>(rho.size()) - 1) / 2;
  return (M[half + 1] - M[half - 1]) / (2.0 * opts.dz);
}

WaveSpeedScan find_wave_speeds(const VelocityGrid& grid, const ModelParams& params,
                               int scan_points, const WaveOptions& opts) {
  if (scan_points < 50)
    throw std::invalid_argument("find_wave_speeds: need at least 50 scan points");
  CriticalSpeeds cs = critical_speeds(grid, params.chi_M, params.chi_N);
  double lo = std::max(0.0, cs.lower);
  double hi = cs.upper;
  double margin = 2e-3 * (hi - lo);
  lo += margin;
  hi -= margin;

  auto in_guard = [&](double c) {
    for (int k = 0; k < grid.size(); ++k)
      if (std::abs(c - grid.node(k)) < opts.node_guard) return true;
    return false;
  };

  WaveSpeedScan scan;
  std::vector<UpsilonSample>& table = scan.table;
  for (int i = 0; i < scan_points; ++i) {
    double c = lo + (hi - lo) * i / (scan_points - 1.0);
    if (in_guard(c)) continue;
    table.push_back({c, upsilon(c, grid, params, opts)});
  }

  auto node_between = [&](double a, double b) -> std::optional<double> {
    for (int k = 0; k < grid.size(); ++k)
      if (grid.node(k) > a && grid.node(k) < b) return grid.node(k);
    return std::nullopt;
  };

  for (size_t i = 1; i < table.size(); ++i) {
    double a = table[i - 1].c, fa = table[i - 1].value;
    double b = table[i].c, fb = table[i].value;
    if (fa == 0.0) {
      scan.roots.push_back(a);
      continue;
    }
    if (fa * fb >= 0.0) continue;
    if (auto vk = node_between(a, b)) {
      // the scan skips guard bands, so a bracket containing a grid velocity
      // is the singular transition, not a zero
      scan.jumps.push_back(*vk);
      continue;
    }
    double scale0 = std::min(std::abs(fa), std::abs(fb));
    while (b - a > 1e-6 && std::min(std::abs(fa), std::abs(fb)) > 1e-8) {
      double m = 0.5 * (a + b);
      double fm = upsilon(m, grid, params, opts);
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
        fb = fm;
      }
    }
    if (std::min(std::abs(fa), std::abs(fb)) > 0.25 * scale0) {
      scan.jumps.push_back(0.5 * (a + b));  // sign change without decay of |Upsilon|
    } else {
      scan.roots.push_back(std::abs(fa) < std::abs(fb) ? a : b);
    }
  }
  return scan;
}

std::pair<double, double> profile_tail_slopes(const WaveProfile& p) {
  const int n = p.num_nodes;
  const int half = (n - 1) / 2;
  auto fit = [&](int i0, int i1) {
    // least squares of log rho on [i0, i1]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int i = i0; i <= i1; ++i) {
      if (p.rho[i] <= 0.0) continue;
      double x = p.z0 + i * p.dz, y = std::log(p.rho[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };
  int a = half + static_cast<int>(0.5 * half), b = half + static_cast<int>(0.75 * half);
  double right = fit(a, b);
  int a2 = half - static_cast<int>(0.75 * half), b2 = half - static_cast<int>(0.5 * half);
  double left = fit(a2, b2);
  return {left, right};
}

WaveInitialData wave_initial_data(double c, const VelocityGrid& grid,
                                  const ModelParams& params, double x_left, double dx,
                                  int num_cells, double peak_position, double mass,
                                  double dt, const WaveOptions& opts_in) {
  WaveOptions opts = opts_in;
  opts.dz = dx;  // exact index-shift translation
  opts.mass = mass;
  WaveProfile prof = wave_profile(c, grid, params, opts);
  const int n2 = grid.size();
  const int nn = prof.num_nodes;
  const int half = (nn - 1) / 2;

  // snap the peak to a cell center
  int j_peak = static_cast<int>(std::round((peak_position - x_left) / dx - 0.5));
  if (j_peak < 0 || j_peak >= num_cells)
    throw std::invalid_argument("wave_initial_data: peak position outside the domain");

  double peak_rho = prof.rho[half];
  // profile node m maps to cell j = j_peak + (m - half)
  int j_lo = j_peak - half, j_hi = j_peak + half;
  if (j_lo < 0 || j_hi >= num_cells) {
    // the profile is truncated by the domain; reject if the clipped tails
    // are not negligible
    int m_lo = std::max(0, -j_lo), m_hi = std::min(nn - 1, nn - 1 - (j_hi - (num_cells - 1)));
    double clipped = 0.0;
    for (int m = 0; m < m_lo; ++m) clipped = std::max(clipped, prof.rho[m]);
    for (int m = m_hi + 1; m < nn; ++m) clipped = std::max(clipped, prof.rho[m]);
    if (clipped > 1e-8 * peak_rho)
      throw std::invalid_argument("wave_initial_data: domain too small for the profile");
  }

  WaveInitialData out{KineticState(grid, num_cells, x_left, dx), {}, {}, {}, {}};
  for (int j = 0; j < num_cells; ++j) {
    int m = j - j_peak + half;
    if (m < 0 || m >= nn) continue;
    for (int k = 0; k < n2; ++k)
      out.f.f(j, k) = prof.f[static_cast<size_t>(m) * n2 + k];
  }

  // interface i sits half a cell left of cell i's center: z = (i - j_peak - 1/2) dx,
  // i.e. between profile nodes m-1 and m with m = i - j_peak + half
  auto to_interfaces = [&](const std::vector<double>& src, double pad_left,
                           double pad_right) {
    std::vector<double> v(num_cells + 1);
    for (int i = 0; i <= num_cells; ++i) {
      int m = i - j_peak + half;
      if (m - 1 < 0)
        v[i] = pad_left;
      else if (m >= nn)
        v[i] = pad_right;
      else
        v[i] = 0.5 * (src[m - 1] + src[m]);
    }
    return v;
  };
  out.M = {to_interfaces(prof.M, 0.0, 0.0), FieldState::Location::Interfaces};
  out.N = {to_interfaces(prof.N, 0.0, params.N_bar), FieldState::Location::Interfaces};

  // previous-step fields see the same wave one dt earlier: u_prev(x) = u(x + c dt)
  auto back_propagate = [&](const std::vector<double>& now) {
    std::vector<double> prev(now.size());
    double shift = c * dt / dx;
    int s = static_cast<int>(std::floor(shift));
    double frac = shift - s;
    int n = static_cast<int>(now.size());
    for (int i = 0; i < n; ++i) {
      int a = std::clamp(i + s, 0, n - 1);
      int b = std::clamp(i + s + 1, 0, n - 1);
      prev[i] = (1.0 - frac) * now[a] + frac * now[b];
    }
    return prev;
  };
  out.M_prev = {back_propagate(out.M.values), FieldState::Location::Interfaces};
  out.N_prev = {back_propagate(out.N.values), FieldState::Location::Interfaces};
  return out;
}

}  // namespace ktwave
