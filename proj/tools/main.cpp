#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

#include "config.hpp"
#include "scenarios.hpp"
#include "sim.hpp"
#include "waves.hpp"

using namespace ktwave;

namespace {

struct CommonOpts {
  std::string out = "out";
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  double dx = 0.0, dt = -1.0, t_end = 0.0;
};

void add_common(CLI::App* app, CommonOpts& o) {
  app->add_option("--out", o.out, "output directory");
  app->add_option("--threads", o.threads, "worker threads for sweeps");
  app->add_option("--dx", o.dx, "override space step");
  app->add_option("--dt", o.dt, "override time step (0 = auto)");
  app->add_option("--t-end", o.t_end, "override final time");
}

void apply_overrides(SimConfig& cfg, const CommonOpts& o) {
  if (o.dx > 0.0) cfg.dx = o.dx;
  if (o.dt >= 0.0) cfg.dt = o.dt;
  if (o.t_end > 0.0) cfg.t_end = o.t_end;
}

int cmd_conditioning(const CommonOpts& o) {
  std::vector<int> K_list;
  for (int K = 2; K <= 16; ++K) K_list.push_back(K);
  auto rows = conditioning_study(K_list, {0.1, 0.05, 0.025});
  ensure_dir(o.out);
  write_conditioning_csv(o.out + "/conditioning.csv", rows);
  std::printf("wrote %s/conditioning.csv (%zu rows)\n", o.out.c_str(), rows.size());
  return 0;
}

int cmd_symmetry(const CommonOpts& o) {
  double cap = o.t_end > 0.0 ? o.t_end : 500.0;
  std::vector<SymmetryResult> results;
  struct V {
    KineticScheme ks;
    ParabolicScheme ps;
    SignalMode mode;
  };
  std::vector<V> variants = {
      {KineticScheme::WB, ParabolicScheme::WB, SignalMode::Frozen},
      {KineticScheme::WB, ParabolicScheme::WB, SignalMode::Dynamic},
      {KineticScheme::TS, ParabolicScheme::TS, SignalMode::Frozen},
      {KineticScheme::TS, ParabolicScheme::TS, SignalMode::Dynamic},
  };
  for (auto v : variants) {
    SymmetryResult r = run_symmetry_variant(v.ks, v.ps, v.mode, cap);
    std::printf("%s-%s %s: delta_rho = %.3e (t = %.1f, steady = %d)\n", r.kinetic.c_str(),
                r.parabolic.c_str(), r.signal.c_str(), r.delta_rho, r.t_final,
                r.steady_reached);
    results.push_back(std::move(r));
  }
  write_symmetry_csv(o.out, results);
  return 0;
}

int cmd_wavespeed(const CommonOpts& o) {
  ensure_dir(o.out);
  struct V {
    KineticScheme ks;
    ParabolicScheme ps;
    const char* name;
  };
  std::vector<V> schemes = {{KineticScheme::WB, ParabolicScheme::WB, "wbwb"},
                            {KineticScheme::WB, ParabolicScheme::TS, "wbts"},
                            {KineticScheme::TS, ParabolicScheme::TS, "tsts"}};
  int failures = 0;
  std::vector<std::function<void()>> jobs;
  std::mutex mtx;
  for (auto v : schemes)
    for (auto md : {MdVariant::MD1, MdVariant::MD2}) {
      jobs.push_back([&, v, md] {
        SimConfig cfg = wavespeed_preset();
        cfg.kinetic_scheme = v.ks;
        cfg.parabolic_scheme = v.ps;
        cfg.md_variant = md;
        apply_overrides(cfg, o);
        std::string tag =
            std::string(v.name) + (md == MdVariant::MD1 ? "_md1" : "_md2");
        try {
          RunResult r = run(cfg);
          std::lock_guard lock(mtx);
          write_run_outputs(o.out, tag, cfg, r);
          std::printf("%s: c_est = %.4f at t = %.1f%s\n", tag.c_str(), r.last().c_est,
                      r.t_final,
                      r.abort_reason.empty() ? "" : (" [" + r.abort_reason + "]").c_str());
          if (!r.abort_reason.empty()) ++failures;
        } catch (const std::exception& e) {
          std::lock_guard lock(mtx);
          std::printf("%s: failed: %s\n", tag.c_str(), e.what());
          ++failures;
        }
      });
    }
  parallel_run(std::move(jobs), o.threads);
  return failures == 0 ? 0 : 1;
}

int cmd_bistability(const CommonOpts& o) {
  ensure_dir(o.out);
  double dx = o.dx > 0.0 ? o.dx : 0.018;
  double t_end = o.t_end > 0.0 ? o.t_end : 40.0;
  std::vector<double> seeds = {0.214, 0.45, 0.55, 0.58};
  std::vector<SpeedHistory> runs(seeds.size());
  std::vector<std::function<void()>> jobs;
  int failures = 0;
  std::mutex mtx;
  for (size_t i = 0; i < seeds.size(); ++i)
    jobs.push_back([&, i] {
      try {
        SpeedHistory h = run_bistability_case(seeds[i], dx, t_end);
        std::lock_guard lock(mtx);
        std::printf("c0 = %.3f -> c(final quarter) = %.4f%s\n", h.c0, h.c_final,
                    h.abort_reason.empty() ? "" : (" [" + h.abort_reason + "]").c_str());
        runs[i] = std::move(h);
      } catch (const std::exception& e) {
        std::lock_guard lock(mtx);
        std::printf("c0 = %.3f: failed: %s\n", seeds[i], e.what());
        ++failures;
      }
    });
  parallel_run(std::move(jobs), o.threads);
  write_speed_history_csv(o.out + "/bistability_c.csv", runs);
  return failures == 0 ? 0 : 1;
}

int cmd_bifurcation(const CommonOpts& o, bool with_dynamics,
                    std::vector<double> vmin_list) {
  ensure_dir(o.out);
  if (vmin_list.empty())
    for (double v = 0.1; v < 0.95; v += 0.1) vmin_list.push_back(v);
  double dx = o.dx > 0.0 ? o.dx : 0.018;
  auto pts = bifurcation_sweep(vmin_list, with_dynamics, dx, o.threads);
  write_bifurcation_csv(o.out + "/bifurcation.csv", pts);
  for (const auto& p : pts)
    std::printf("v_min = %.2f  %-8s c = %.4f\n", p.v_min, p.kind.c_str(), p.c);
  return 0;
}

int cmd_scan(const CommonOpts& o) {
  SimConfig cfg;
  cfg.params = bistability_params();
  cfg.grid = four_velocity_grid();
  VelocityGrid grid = cfg.grid.build();
  WaveSpeedScan scan = find_wave_speeds(grid, cfg.params, 80);
  ensure_dir(o.out);
  write_upsilon_csv(o.out + "/upsilon_scan.csv", scan, cfg);
  for (double r : scan.roots) std::printf("root: c = %.6f\n", r);
  for (double j : scan.jumps) std::printf("jump: c = %.6f\n", j);
  return 0;
}

int cmd_run(const CommonOpts& o, const std::string& config_path) {
  SimConfig cfg = parse_config_file(config_path);
  apply_overrides(cfg, o);
  RunResult r = run(cfg);
  write_run_outputs(o.out, "run", cfg, r);
  std::printf("t = %.3f  mass = %.6e  c_est = %.4f  peak_x = %.3f%s\n", r.t_final,
              r.last().mass, r.last().c_est, r.last().peak_x,
              r.abort_reason.empty() ? "" : (" [" + r.abort_reason + "]").c_str());
  return r.abort_reason.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinetic chemotaxis travelling-wave simulator"};
  app.require_subcommand(1);
  CommonOpts opts;

  auto* conditioning = app.add_subcommand("conditioning", "S-matrix conditioning study");
  add_common(conditioning, opts);
  auto* symmetry = app.add_subcommand("symmetry", "aggregation symmetry experiment");
  add_common(symmetry, opts);
  auto* wavespeed = app.add_subcommand("wavespeed", "scheme comparison on the pulse run");
  add_common(wavespeed, opts);
  auto* bistability = app.add_subcommand("bistability", "co-existing wave stability runs");
  add_common(bistability, opts);
  auto* bifurcation = app.add_subcommand("bifurcation", "wave speed vs v_min diagram");
  add_common(bifurcation, opts);
  bool with_dynamics = false;
  std::vector<double> vmin_list;
  bifurcation->add_flag("--dynamic", with_dynamics, "add long-time Cauchy estimates");
  bifurcation->add_option("--vmin", vmin_list, "v_min sample points");
  auto* scan = app.add_subcommand("scan", "Upsilon(c) scan and roots");
  add_common(scan, opts);
  auto* runc = app.add_subcommand("run", "run a custom configuration");
  add_common(runc, opts);
  std::string config_path;
  runc->add_option("config", config_path, "key = value config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (conditioning->parsed()) return cmd_conditioning(opts);
    if (symmetry->parsed()) return cmd_symmetry(opts);
    if (wavespeed->parsed()) return cmd_wavespeed(opts);
    if (bistability->parsed()) return cmd_bistability(opts);
    if (bifurcation->parsed()) return cmd_bifurcation(opts, with_dynamics, vmin_list);
    if (scan->parsed()) return cmd_scan(opts);
    if (runc->parsed()) return cmd_run(opts, config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
