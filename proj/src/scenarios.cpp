#include "scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "config.hpp"

namespace ktwave {

ModelParams bistability_params() {
  ModelParams p;
  p.chi_M = 0.48;
  p.chi_N = 0.44;
  p.D_M = 0.5;
  p.alpha = 40.0;
  p.D_N = 1.0;
  p.beta = 1.0;
  p.gamma = 1.0;
  p.N_bar = 1.0;
  return p;
}

GridSpec four_velocity_grid(double v_min) {
  GridSpec g;
  g.kind = GridSpec::Kind::Explicit;
  g.values = {v_min, 1.0};
  g.weights.clear();
  return g;
}

SimConfig symmetry_preset(KineticScheme ks, ParabolicScheme ps, SignalMode mode) {
  SimConfig cfg;
  cfg.kinetic_scheme = ks;
  cfg.parabolic_scheme = ps;
  cfg.signal_mode = mode;
  cfg.md_variant = MdVariant::MD2;
  cfg.grid.kind = GridSpec::Kind::Gauss;
  cfg.grid.K = 8;
  cfg.x_left = -10.0;
  cfg.x_right = 10.0;
  cfg.dx = 0.01;
  // the aggregation experiment is stated with chi_M = 1; the scheme needs a
  // strictly positive tumbling rate, so sit just below
  cfg.params.chi_M = 0.999;
  cfg.params.chi_N = 0.0;
  cfg.params.D_M = 1.0;
  cfg.params.alpha = 1.0;
  cfg.params.beta = 1.0;
  cfg.params.D_N = 1.0;
  cfg.params.gamma = 1.0;
  cfg.params.N_bar = 1.0;
  cfg.init.f_kind = InitSpec::FKind::Gaussian;
  cfg.init.f_amp = 10.0;
  cfg.init.f_ax = 1.0;
  cfg.init.f_av = 1.0;
  cfg.init.f_x0 = 0.0;
  cfg.init.m_const = 0.0;
  cfg.init.n_kind = InitSpec::NKind::Const;
  cfg.init.n_const = 0.0;
  cfg.t_end = 500.0;
  cfg.steady_tol = 1e-10;
  cfg.track_symmetry = true;
  cfg.output_every = 5000;
  return cfg;
}

SimConfig wavespeed_preset() {
  SimConfig cfg;
  cfg.params = bistability_params();
  cfg.grid = four_velocity_grid();
  cfg.x_left = 0.0;
  cfg.x_right = 100.0;
  cfg.dx = 0.05;
  cfg.t_end = 100.0;
  cfg.init.f_kind = InitSpec::FKind::Gaussian;
  cfg.init.f_amp = 3.0;
  cfg.init.f_ax = 2.0;
  cfg.init.f_av = 0.0;
  cfg.init.f_x0 = 0.0;
  cfg.init.m_const = 0.0;
  cfg.init.n_kind = InitSpec::NKind::Tanh;
  cfg.init.n_tanh_amp = 400.0;
  cfg.init.n_tanh_scale = 3.0;
  cfg.init.n_tanh_shift = 3.0;
  cfg.params.N_bar =
      400.0 * (M_PI / 2.0 + std::tanh(cfg.x_right / 3.0 - 3.0));
  cfg.output_every = 20000;
  return cfg;
}

SimConfig bistability_preset(double c0, double dx, double t_end) {
  SimConfig cfg;
  cfg.params = bistability_params();
  cfg.grid = four_velocity_grid();
  cfg.x_left = 0.0;
  cfg.dx = dx;
  cfg.t_end = t_end;
  cfg.init.f_kind = InitSpec::FKind::Wave;
  cfg.init.wave_c = c0;
  cfg.init.wave_mass = 1.0;
  // leave room for the profile tails on the left and for the travel plus
  // tails on the right
  double L = profile_half_length(c0, cfg.grid.build(), cfg.params);
  cfg.init.wave_peak = std::ceil(L) + 2.0;
  cfg.x_right = std::max(100.0, std::ceil(cfg.init.wave_peak + L + 0.7 * t_end + 5.0));
  cfg.output_every = 2000;
  return cfg;
}

std::vector<ConditioningRow> conditioning_study(const std::vector<int>& K_list,
                                                const std::vector<double>& dx_list) {
  ModelParams p = bistability_params();
  std::vector<ConditioningRow> rows;
  for (int K : K_list) {
    VelocityGrid grid = VelocityGrid::gauss_legendre(K);
    InterfaceRates rates(grid.size());
    for (int k = 0; k < grid.size(); ++k) {
      double v = grid.node(k);
      // generic four-value pattern: the two material-derivative signs cut at
      // v = -1/3 and v = +1/3
      rates[k] = 1.0 - p.chi_M * sgn0(v + 1.0 / 3.0) - p.chi_N * sgn0(v - 1.0 / 3.0);
    }
    for (double dx : dx_list) {
      SMatrix sc = case_smatrix(rates, grid, dx, SEval::Interface);
      SMatrixReport rc = smatrix_diagnostics(sc, grid);
      rows.push_back({K, dx, "case", rc.condition_number, rc.stochastic_defect,
                      rc.min_entry, true});
      bool ok = grid.min_speed() > dx * (p.chi_M + p.chi_N);
      SMatrix sf = fd_smatrix(rates, grid, dx, /*check_resonance=*/false);
      SMatrixReport rf = smatrix_diagnostics(sf, grid);
      rows.push_back({K, dx, "fd", rf.condition_number, rf.stochastic_defect,
                      rf.min_entry, ok});
    }
  }
  return rows;
}

SymmetryResult run_symmetry_variant(KineticScheme ks, ParabolicScheme ps, SignalMode mode,
                                    double t_cap, double stop_at_sym_err) {
  SimConfig cfg = symmetry_preset(ks, ps, mode);
  cfg.t_end = t_cap;
  cfg.stop_at_sym_err = stop_at_sym_err;
  RunResult r = run(cfg);
  SymmetryResult out;
  out.kinetic = ks == KineticScheme::WB ? "wb" : "ts";
  out.parabolic = ps == ParabolicScheme::WB ? "wb" : "ts";
  out.signal = mode == SignalMode::Dynamic ? "dynamic" : "frozen";
  out.t_final = r.t_final;
  out.steady_reached = r.steady_reached;
  out.rho.resize(r.state->num_cells);
  r.state->density(out.rho);
  out.delta_rho = symmetry_error_mirror(out.rho);
  return out;
}

SpeedHistory run_bistability_case(double c0, double dx, double t_end) {
  SimConfig cfg = bistability_preset(c0, dx, t_end);
  SpeedHistory h;
  h.c0 = c0;
  RunResult r = run(cfg);
  h.abort_reason = r.abort_reason;
  double t_quarter = 0.75 * r.t_final;
  double acc = 0.0;
  int cnt = 0;
  h.drift_max = 0.0;
  for (const auto& row : r.rows) {
    h.c_of_t.emplace_back(row.t, row.c_est);
    if (row.t > 0.5) h.drift_max = std::max(h.drift_max, std::abs(row.c_est - c0));
    if (row.t >= t_quarter) {
      acc += row.c_est;
      ++cnt;
    }
  }
  h.c_final = cnt > 0 ? acc / cnt : 0.0;
  return h;
}

std::vector<BifurcationPoint> bifurcation_sweep(const std::vector<double>& vmin_list,
                                                bool with_dynamics, double dx,
                                                int threads) {
  std::vector<BifurcationPoint> pts;
  std::mutex mtx;
  std::vector<std::function<void()>> jobs;
  for (double vmin : vmin_list) {
    jobs.push_back([&, vmin] {
      ModelParams p = bistability_params();
      VelocityGrid grid = four_velocity_grid(vmin).build();
      WaveSpeedScan scan = find_wave_speeds(grid, p, 80);
      std::vector<BifurcationPoint> local;
      for (double r : scan.roots) local.push_back({vmin, "root", r});
      for (double j : scan.jumps) local.push_back({vmin, "jump", j});
      if (with_dynamics) {
        for (double r : scan.roots) {
          SimConfig cfg = bistability_preset(r, dx, 40.0);
          cfg.grid = four_velocity_grid(vmin);
          SpeedHistory h;
          try {
            RunResult res = run(cfg);
            double t_quarter = 0.75 * res.t_final;
            double acc = 0.0;
            int cnt = 0;
            for (const auto& row : res.rows)
              if (row.t >= t_quarter) {
                acc += row.c_est;
                ++cnt;
              }
            local.push_back({vmin, "dynamic", cnt ? acc / cnt : 0.0});
          } catch (const std::exception&) {
            // missing/failed dynamic run terminates the branch silently
          }
        }
      }
      std::lock_guard lock(mtx);
      pts.insert(pts.end(), local.begin(), local.end());
    });
  }
  parallel_run(std::move(jobs), threads);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return std::tie(a.v_min, a.kind, a.c) < std::tie(b.v_min, b.kind, b.c);
  });
  return pts;
}

void ensure_dir(const std::string& path) {
  std::filesystem::create_directories(path);
}

void parallel_run(std::vector<std::function<void()>> jobs, int threads) {
  threads = std::max(1, threads);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      jobs[i]();
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < threads && i < static_cast<int>(jobs.size()); ++i)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

void write_conditioning_csv(const std::string& path,
                            const std::vector<ConditioningRow>& rows) {
  std::ofstream os(path);
  os.precision(12);
  os << "# conditioning study: bistability parameters, four-value rate pattern\n";
  os << "K,dx,variant,condition,stochastic_defect,min_entry,nonresonance_ok\n";
  for (const auto& r : rows)
    os << r.K << ',' << r.dx << ',' << r.variant << ',' << r.condition << ','
       << r.stochastic_defect << ',' << r.min_entry << ',' << (r.nonresonance_ok ? 1 : 0)
       << '\n';
}

void write_symmetry_csv(const std::string& dir, const std::vector<SymmetryResult>& results) {
  ensure_dir(dir);
  std::ofstream os(dir + "/symmetry.csv");
  os.precision(12);
  os << "kinetic,parabolic,signal,delta_rho,t_final,steady_reached\n";
  for (const auto& r : results) {
    os << r.kinetic << ',' << r.parabolic << ',' << r.signal << ',' << r.delta_rho << ','
       << r.t_final << ',' << (r.steady_reached ? 1 : 0) << '\n';
    std::ofstream pf(dir + "/symmetry_" + r.kinetic + r.parabolic + "_" + r.signal +
                     "_profile.csv");
    pf.precision(12);
    pf << "x,rho,delta_rho\n";
    int n = static_cast<int>(r.rho.size());
    for (int j = 0; j < n; ++j) {
      double x = -10.0 + (j + 0.5) * (20.0 / n);
      pf << x << ',' << r.rho[j] << ',' << r.rho[j] - r.rho[n - 1 - j] << '\n';
    }
  }
}

void write_speed_history_csv(const std::string& path, const std::vector<SpeedHistory>& runs) {
  std::ofstream os(path);
  os.precision(12);
  os << "c0,t,c_est\n";
  for (const auto& h : runs)
    for (auto [t, c] : h.c_of_t) os << h.c0 << ',' << t << ',' << c << '\n';
}

void write_upsilon_csv(const std::string& path, const WaveSpeedScan& scan,
                       const SimConfig& cfg) {
  std::ofstream os(path);
  os.precision(12);
  os << config_echo(cfg);
  os << "kind,c,upsilon\n";
  for (const auto& s : scan.table) os << "sample," << s.c << ',' << s.value << '\n';
  for (double r : scan.roots) os << "root," << r << ",0\n";
  for (double j : scan.jumps) os << "jump," << j << ",nan\n";
}

void write_bifurcation_csv(const std::string& path,
                           const std::vector<BifurcationPoint>& pts) {
  std::ofstream os(path);
  os.precision(12);
  os << "v_min,kind,c\n";
  for (const auto& p : pts) os << p.v_min << ',' << p.kind << ',' << p.c << '\n';
}

void write_run_outputs(const std::string& dir, const std::string& tag, const SimConfig& cfg,
                       RunResult& result) {
  ensure_dir(dir);
  {
    std::ofstream os(dir + "/" + tag + "_diag.csv");
    os.precision(12);
    os << config_echo(cfg);
    os << "t,mass,c_est,peak_x,peak_rho,sym_err,min_f\n";
    for (const auto& r : result.rows)
      os << r.t << ',' << r.mass << ',' << r.c_est << ',' << r.peak_x << ',' << r.peak_rho
         << ',' << r.sym_err << ',' << r.min_f << '\n';
  }
  {
    std::ofstream os(dir + "/" + tag + "_fields.csv");
    os.precision(12);
    os << config_echo(cfg);
    os << "x,rho,u,M,N\n";
    const KineticState& f = *result.state;
    std::vector<double> rho(f.num_cells), u(f.num_cells);
    f.density_and_velocity(rho, u);
    auto center = [&](const FieldState& F, int j) {
      if (F.location == FieldState::Location::Interfaces)
        return 0.5 * (F.values[j] + F.values[j + 1]);
      return F.values[j];
    };
    for (int j = 0; j < f.num_cells; ++j)
      os << f.cell_center(j) << ',' << rho[j] << ',' << u[j] << ',' << center(result.M, j)
         << ',' << center(result.N, j) << '\n';
  }
}

}  // namespace ktwave
