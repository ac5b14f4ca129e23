#include "sim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "waves.hpp"

namespace ktwave {

VelocityGrid GridSpec::build() const {
  if (kind == Kind::Gauss) return VelocityGrid::gauss_legendre(K);
  return VelocityGrid::explicit_symmetric(values, weights);
}

void SimConfig::validate() const {
  params.validate();
  if (x_right <= x_left) throw std::invalid_argument("SimConfig: empty domain");
  if (dx <= 0.0 || t_end <= 0.0) throw std::invalid_argument("SimConfig: dx, t_end > 0");
  if (output_every < 1) throw std::invalid_argument("SimConfig: output_every >= 1");
  if (rho_scale <= 0.0) throw std::invalid_argument("SimConfig: rho_scale > 0");
}

double wave_speed_estimate(std::span<const double> rho, std::span<const double> u) {
  assert(rho.size() == u.size());
  double mx = *std::max_element(rho.begin(), rho.end());
  if (mx <= 0.0) throw std::invalid_argument("wave_speed_estimate: vanishing density");
  double thr = 0.1 * mx, acc = 0.0;
  int cnt = 0;
  for (size_t j = 0; j < rho.size(); ++j)
    if (rho[j] > thr) {
      acc += u[j];
      ++cnt;
    }
  return acc / cnt;
}

double symmetry_error(std::span<const double> rho, int center_index) {
  const int n = static_cast<int>(rho.size());
  if (center_index < 0 || center_index >= n)
    throw std::out_of_range("symmetry_error: center index");
  double err = 0.0;
  int span = std::min(center_index, n - 1 - center_index);
  for (int j = 1; j <= span; ++j)
    err = std::max(err, std::abs(rho[center_index + j] - rho[center_index - j]));
  return err;
}

double symmetry_error_mirror(std::span<const double> rho) {
  const int n = static_cast<int>(rho.size());
  double err = 0.0;
  for (int j = 0; j < n / 2; ++j)
    err = std::max(err, std::abs(rho[j] - rho[n - 1 - j]));
  return err;
}

double peak_position(std::span<const double> rho, double x0, double dx) {
  int jm = static_cast<int>(std::max_element(rho.begin(), rho.end()) - rho.begin());
  double x = x0 + (jm + 0.5) * dx;
  if (jm > 0 && jm + 1 < static_cast<int>(rho.size())) {
    double a = rho[jm - 1], b = rho[jm], c = rho[jm + 1];
    double den = a - 2.0 * b + c;
    if (den < 0.0) x += 0.5 * dx * (a - c) / den;
  }
  return x;
}

namespace {

std::vector<double> nodes_from_interfaces(std::span<const double> v) {
  std::vector<double> out(v.size() - 1);
  for (size_t j = 0; j + 1 < v.size(); ++j) out[j] = 0.5 * (v[j] + v[j + 1]);
  return out;
}

std::vector<double> interfaces_from_nodes(std::span<const double> v) {
  std::vector<double> out(v.size() + 1);
  for (size_t i = 1; i < v.size(); ++i) out[i] = 0.5 * (v[i - 1] + v[i]);
  out.front() = v.front();
  out.back() = v.back();
  return out;
}

struct Loop {
  const SimConfig& cfg;
  const VelocityGrid& grid;
  int n;          // cells
  int n2;         // velocities
  double dx;

  FieldState M, N;          // at the parabolic scheme's location
  std::vector<double> M_prev, N_prev;
  double dt_used = 0.0;

  std::vector<double> rho, u, rho_scaled;
  std::unique_ptr<SMatrixCache> cache;
  std::vector<const SMatrix*> mats;        // per interior interface
  std::vector<double> ts_rates;            // per node x velocity
  std::vector<double> dM, dN;              // per velocity scratch
  RateSigns key;
  std::vector<RateSigns> frozen_keys;      // static sign patterns, frozen mode

  Loop(const SimConfig& c, const VelocityGrid& g)
      : cfg(c), grid(g), n(0), n2(g.size()), dx(c.dx) {}

  bool wb() const { return cfg.kinetic_scheme == KineticScheme::WB; }
  bool parabolic_wb() const { return cfg.parabolic_scheme == ParabolicScheme::WB; }
  bool dynamic_signal() const { return cfg.signal_mode == SignalMode::Dynamic; }
};

}  // namespace

RunResult run(const SimConfig& cfg, const FieldSink& sink) {
  cfg.validate();
  RunResult res;
  res.grid = std::make_unique<VelocityGrid>(cfg.grid.build());
  const VelocityGrid& grid = *res.grid;
  const int n2 = grid.size();

  const double span = cfg.x_right - cfg.x_left;
  const int n = static_cast<int>(std::round(span / cfg.dx));
  if (n < 8) throw std::invalid_argument("run: domain shorter than 8 cells");
  const double dx = span / n;

  Loop L(cfg, grid);
  L.n = n;
  L.dx = dx;

  res.state = std::make_unique<KineticState>(grid, n, cfg.x_left, dx);
  KineticState& f = *res.state;
  KineticState fnew(grid, n, cfg.x_left, dx);

  const auto ploc = L.parabolic_wb() ? FieldState::Location::Interfaces
                                     : FieldState::Location::Nodes;
  const int npts = L.parabolic_wb() ? n + 1 : n;
  auto point_x = [&](int i) {
    return L.parabolic_wb() ? cfg.x_left + i * dx : f.cell_center(i);
  };

  // ---- initial data ----------------------------------------------------
  double pending_wave_dt_shift = 0.0;  // wave ICs: build prev once dt is known
  if (cfg.init.f_kind == InitSpec::FKind::Gaussian) {
    for (int j = 0; j < n; ++j) {
      double xj = f.cell_center(j) - cfg.init.f_x0;
      double gx = cfg.init.f_amp * std::exp(-cfg.init.f_ax * xj * xj);
      for (int k = 0; k < n2; ++k)
        f.f(j, k) = gx * std::exp(-cfg.init.f_av * grid.node(k) * grid.node(k));
    }
    L.M.location = ploc;
    L.M.values.assign(npts, cfg.init.m_const);
    L.N.location = ploc;
    L.N.values.resize(npts);
    for (int i = 0; i < npts; ++i) {
      if (cfg.init.n_kind == InitSpec::NKind::Const)
        L.N.values[i] = cfg.init.n_const;
      else
        L.N.values[i] = cfg.init.n_tanh_amp *
                        (M_PI / 2.0 + std::tanh(point_x(i) / cfg.init.n_tanh_scale -
                                                cfg.init.n_tanh_shift));
    }
    L.M_prev = L.M.values;
    L.N_prev = L.N.values;
  } else {
    WaveInitialData wid = wave_initial_data(cfg.init.wave_c, grid, cfg.params,
                                            cfg.x_left, dx, n, cfg.init.wave_peak,
                                            cfg.init.wave_mass, /*dt=*/0.0);
    f.data = wid.f.data;
    if (L.parabolic_wb()) {
      L.M = std::move(wid.M);
      L.N = std::move(wid.N);
    } else {
      L.M = {nodes_from_interfaces(wid.M.values), ploc};
      L.N = {nodes_from_interfaces(wid.N.values), ploc};
    }
    L.M_prev = L.M.values;
    L.N_prev = L.N.values;
    pending_wave_dt_shift = cfg.init.wave_c;
  }

  if (L.wb())
    L.cache = std::make_unique<SMatrixCache>(grid, dx, cfg.params, cfg.smatrix_variant,
                                             cfg.smatrix_eval);

  // frozen-signal rates depend only on sgn(v x_i); precompute the patterns
  if (cfg.signal_mode == SignalMode::Frozen) {
    auto frozen_signs = [&](double x) {
      RateSigns key(n2, '\0');
      for (int k = 0; k < n2; ++k) {
        int sm = -static_cast<int>(sgn0(grid.node(k) * x));  // T = 1 + chi_M sgn(v x)
        key[k] = static_cast<char>((sm + 1) * 3 + 1);
      }
      return key;
    };
    if (L.wb()) {
      L.frozen_keys.resize(n - 1);
      for (int i = 0; i + 1 < n; ++i)
        L.frozen_keys[i] = frozen_signs(cfg.x_left + (i + 1) * dx);
    } else {
      L.ts_rates.resize(static_cast<size_t>(n) * n2);
      for (int j = 0; j < n; ++j) {
        double x = f.cell_center(j);
        for (int k = 0; k < n2; ++k)
          L.ts_rates[static_cast<size_t>(j) * n2 + k] =
              1.0 + cfg.params.chi_M * sgn0(grid.node(k) * x);
      }
    }
  }

  L.rho.resize(n);
  L.u.resize(n);
  L.rho_scaled.resize(n);
  L.mats.resize(n > 1 ? n - 1 : 0);
  L.dM.resize(n2);
  L.dN.resize(n2);
  L.key.assign(n2, '\0');
  if (cfg.kinetic_scheme == KineticScheme::TS && cfg.signal_mode != SignalMode::Frozen)
    L.ts_rates.resize(static_cast<size_t>(n) * n2);

  FieldState M_out, N_out;
  std::vector<double> rho_prev_check;
  double t_prev_check = 0.0;

  const double max_rate_bound = 1.0 + cfg.params.chi_M + cfg.params.chi_N;
  auto compute_dt = [&](double rho_max) {
    double b = cfl_max_dt(grid, dx);
    if (L.dynamic_signal()) {
      if (L.parabolic_wb()) {
        b = std::min(b, lspline_signal_max_dt(cfg.params, dx));
        b = std::min(b, lspline_nutrient_max_dt(cfg.params, dx, rho_max * cfg.rho_scale));
      } else {
        b = std::min(b, 1.0 / (2.0 * cfg.params.D_M / (dx * dx) + cfg.params.alpha));
        b = std::min(b, 1.0 / (2.0 * cfg.params.D_N / (dx * dx) +
                               cfg.params.gamma * rho_max * cfg.rho_scale));
      }
    }
    if (cfg.kinetic_scheme == KineticScheme::TS) b = std::min(b, 1.0 / max_rate_bound);
    return 0.9 * b;
  };

  // interface- and node-located views of the two fields for the material
  // derivatives; rebuilt only when the parabolic location differs
  std::vector<double> Mi_now, Mi_prev, Ni_now, Ni_prev;  // interfaces
  std::vector<double> Mn_now, Mn_prev, Nn_now, Nn_prev;  // nodes

  auto emit_snapshot = [&](double t) {
    f.density_and_velocity(L.rho, L.u);
    double mass = 0.0;
    for (double r : L.rho) mass += r;
    mass *= dx;
    double mx = *std::max_element(L.rho.begin(), L.rho.end());
    double c_est = mx > 0.0 ? wave_speed_estimate(L.rho, L.u) : 0.0;
    double sym = cfg.track_symmetry ? symmetry_error_mirror(L.rho)
                                    : std::numeric_limits<double>::quiet_NaN();
    double mn = *std::min_element(f.data.begin(), f.data.end());
    res.rows.push_back({t, mass, c_est, peak_position(L.rho, cfg.x_left, dx), mx, sym, mn});
    if (sink) {
      std::vector<double> Mc = L.parabolic_wb() ? nodes_from_interfaces(L.M.values)
                                                : L.M.values;
      std::vector<double> Nc = L.parabolic_wb() ? nodes_from_interfaces(L.N.values)
                                                : L.N.values;
      sink(t, f, L.rho, L.u, Mc, Nc);
    }
  };

  double t = 0.0;
  emit_snapshot(0.0);
  rho_prev_check = L.rho;

  const double t_end = cfg.t_end;
  int step = 0;
  while (t < t_end * (1.0 - 1e-12)) {
    f.density(L.rho);
    double rho_max = *std::max_element(L.rho.begin(), L.rho.end());

    double dt = cfg.dt > 0.0 ? cfg.dt : compute_dt(rho_max);
    if (cfg.dt > 0.0 && cfg.dt > compute_dt(rho_max) / 0.9 * (1.0 + 1e-9))
      throw std::invalid_argument("run: fixed dt violates a stability bound");
    dt = std::min(dt, t_end - t);

    if (pending_wave_dt_shift != 0.0) {
      // first step of a wave-profile run: give the material derivatives a
      // translated previous state so they see the travelling wave at t=0
      double shift = pending_wave_dt_shift * dt / dx;
      auto back = [&](const std::vector<double>& now, std::vector<double>& prev) {
        int s = static_cast<int>(std::floor(shift));
        double fr = shift - s;
        int m = static_cast<int>(now.size());
        for (int i = 0; i < m; ++i) {
          int a = std::clamp(i + s, 0, m - 1);
          int b2 = std::clamp(i + s + 1, 0, m - 1);
          prev[i] = (1.0 - fr) * now[a] + fr * now[b2];
        }
      };
      back(L.M.values, L.M_prev);
      back(L.N.values, L.N_prev);
      L.dt_used = dt;
      pending_wave_dt_shift = 0.0;
    }
    if (L.dt_used == 0.0) L.dt_used = dt;

    // ---- tumbling rates -------------------------------------------------
    if (cfg.signal_mode == SignalMode::Dynamic) {
      const bool md2 = cfg.md_variant == MdVariant::MD2;
      if (L.wb()) {
        // rates at interfaces
        std::span<const double> Mn, Mp, Nn, Np;
        if (md2) {
          if (L.parabolic_wb()) {
            Mn = L.M.values; Mp = L.M_prev; Nn = L.N.values; Np = L.N_prev;
          } else {
            Mi_now = interfaces_from_nodes(L.M.values);
            Mi_prev = interfaces_from_nodes(L.M_prev);
            Ni_now = interfaces_from_nodes(L.N.values);
            Ni_prev = interfaces_from_nodes(L.N_prev);
            Mn = Mi_now; Mp = Mi_prev; Nn = Ni_now; Np = Ni_prev;
          }
        } else {
          if (L.parabolic_wb()) {
            Mn_now = nodes_from_interfaces(L.M.values);
            Mn_prev = nodes_from_interfaces(L.M_prev);
            Nn_now = nodes_from_interfaces(L.N.values);
            Nn_prev = nodes_from_interfaces(L.N_prev);
            Mn = Mn_now; Mp = Mn_prev; Nn = Nn_now; Np = Nn_prev;
          } else {
            Mn = L.M.values; Mp = L.M_prev; Nn = L.N.values; Np = L.N_prev;
          }
        }
        for (int i = 0; i + 1 < n; ++i) {
          int gi = i + 1;  // geometric interface between cells i, i+1
          for (int k = 0; k < n2; ++k) {
            double v = grid.node(k);
            if (md2) {
              L.dM[k] = material_derivative_md2(Mn, Mp, L.dt_used, dx, gi, v);
              L.dN[k] = material_derivative_md2(Nn, Np, L.dt_used, dx, gi, v);
            } else {
              L.dM[k] = material_derivative_md1(Mn, Mp, L.dt_used, dx, gi, v);
              L.dN[k] = material_derivative_md1(Nn, Np, L.dt_used, dx, gi, v);
            }
            int sm = static_cast<int>(sgn0(L.dM[k]));
            int sn = static_cast<int>(sgn0(L.dN[k]));
            L.key[k] = static_cast<char>((sm + 1) * 3 + (sn + 1));
          }
          L.mats[i] = &L.cache->get(L.key);
        }
      } else {
        // rates at nodes for the centered splitting scheme
        std::span<const double> Mn, Mp, Nn, Np;
        if (L.parabolic_wb()) {
          Mn_now = nodes_from_interfaces(L.M.values);
          Mn_prev = nodes_from_interfaces(L.M_prev);
          Nn_now = nodes_from_interfaces(L.N.values);
          Nn_prev = nodes_from_interfaces(L.N_prev);
          Mn = Mn_now; Mp = Mn_prev; Nn = Nn_now; Np = Nn_prev;
        } else {
          Mn = L.M.values; Mp = L.M_prev; Nn = L.N.values; Np = L.N_prev;
        }
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n2; ++k) {
            double v = grid.node(k);
            double dM, dN;
            if (md2) {
              dM = material_derivative_md2(Mn, Mp, L.dt_used, dx, j, v);
              dN = material_derivative_md2(Nn, Np, L.dt_used, dx, j, v);
            } else {
              dM = material_derivative_md1_node(Mn, Mp, L.dt_used, dx, j, v);
              dN = material_derivative_md1_node(Nn, Np, L.dt_used, dx, j, v);
            }
            L.ts_rates[static_cast<size_t>(j) * n2 + k] =
                tumbling_rate(cfg.params, dM, dN);
          }
      }
    } else if (L.wb()) {
      for (int i = 0; i + 1 < n; ++i) L.mats[i] = &L.cache->get(L.frozen_keys[i]);
    }

    // ---- kinetic advance -------------------------------------------------
    StepReport rep{};
    if (L.wb()) {
      rep = wb_step(f, fnew, [&](int i) -> const SMatrix& { return *L.mats[i]; }, dt);
    } else {
      rep = ts_step(f, fnew, L.ts_rates, dt);
    }

    // ---- parabolic advance (density frozen at the pre-step value) --------
    if (L.dynamic_signal()) {
      for (int j = 0; j < n; ++j) L.rho_scaled[j] = L.rho[j] * cfg.rho_scale;
      if (L.parabolic_wb()) {
        lspline_step_signal(L.M, L.rho_scaled, cfg.params, dt, dx, M_out);
        lspline_step_nutrient(L.N, L.rho_scaled, cfg.params, dt, dx, N_out);
      } else {
        std::vector<double> palpha(n, cfg.params.alpha), q(n), pgam(n), q0(n, 0.0);
        for (int j = 0; j < n; ++j) {
          q[j] = cfg.params.beta * L.rho_scaled[j];
          pgam[j] = cfg.params.gamma * L.rho_scaled[j];
        }
        ts_step_diffusion(L.M, palpha, q, cfg.params.D_M, dt, dx, M_out);
        ts_step_diffusion(L.N, pgam, q0, cfg.params.D_N, dt, dx, N_out, true,
                          cfg.params.N_bar);
      }
      L.M_prev = std::move(L.M.values);
      L.N_prev = std::move(L.N.values);
      L.M.values = std::move(M_out.values);
      L.N.values = std::move(N_out.values);
      L.dt_used = dt;
    }

    std::swap(f.data, fnew.data);
    t += dt;
    ++step;

    // ---- health checks ----------------------------------------------------
    if (!std::isfinite(rep.min_value)) {
      res.abort_reason = "non-finite kinetic state at step " + std::to_string(step);
      break;
    }
    double fmax = *std::max_element(f.data.begin(), f.data.end());
    if (rep.min_value < -cfg.negative_tol * std::max(fmax, 1e-300)) {
      res.abort_reason = "negative phase-space density at step " + std::to_string(step) +
                         " (min " + std::to_string(rep.min_value) + ")";
      break;
    }

    const bool last = t >= t_end * (1.0 - 1e-12);
    if (step % cfg.output_every == 0 || last) emit_snapshot(t);

    if (cfg.track_symmetry && cfg.stop_at_sym_err > 0.0 && !res.rows.empty() &&
        res.rows.back().sym_err >= cfg.stop_at_sym_err && res.rows.back().t == t)
      break;

    if (cfg.steady_tol > 0.0) {
      double window = t - t_prev_check;
      if (window >= 0.25) {
        f.density(L.rho);
        double del = 0.0, mass = 0.0;
        for (int j = 0; j < n; ++j) {
          del += std::abs(L.rho[j] - rho_prev_check[j]);
          mass += L.rho[j];
        }
        del = del * dx / (mass * dx * window);
        rho_prev_check = L.rho;
        t_prev_check = t;
        if (del < cfg.steady_tol) {
          res.steady_reached = true;
          if (res.rows.back().t != t) emit_snapshot(t);
          break;
        }
      }
    }
  }

  if (res.rows.empty() || res.rows.back().t != t) emit_snapshot(t);
  res.M = L.M;
  res.N = L.N;
  res.t_final = t;
  res.steps = step;
  if (L.cache) {
    res.smatrix_fallbacks = L.cache->fallback_count();
    res.min_smatrix_entry = L.cache->min_entry_seen();
  }
  return res;
}

}  // namespace ktwave
