#include "config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ktwave {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(trim(item)));
  return out;
}

template <typename T>
T keyword(const std::string& v, std::initializer_list<std::pair<const char*, T>> table,
          const std::string& key) {
  for (auto& [name, val] : table)
    if (v == name) return val;
  throw std::invalid_argument("config: invalid value '" + v + "' for " + key);
}

}  // namespace

void apply_config_entry(SimConfig& cfg, const std::string& key, const std::string& value) {
  using KS = KineticScheme;
  using PS = ParabolicScheme;
  auto num = [&] { return std::stod(value); };
  if (key == "kinetic")
    cfg.kinetic_scheme = keyword<KS>(value, {{"wb", KS::WB}, {"ts", KS::TS}}, key);
  else if (key == "parabolic")
    cfg.parabolic_scheme = keyword<PS>(value, {{"wb", PS::WB}, {"ts", PS::TS}}, key);
  else if (key == "md")
    cfg.md_variant = keyword<MdVariant>(
        value, {{"md1", MdVariant::MD1}, {"md2", MdVariant::MD2}}, key);
  else if (key == "smatrix")
    cfg.smatrix_variant =
        keyword<SVariant>(value, {{"case", SVariant::Case}, {"fd", SVariant::FD}}, key);
  else if (key == "smatrix_eval")
    cfg.smatrix_eval = keyword<SEval>(
        value, {{"transfer", SEval::Transfer}, {"interface", SEval::Interface}}, key);
  else if (key == "signal")
    cfg.signal_mode = keyword<SignalMode>(
        value, {{"dynamic", SignalMode::Dynamic}, {"frozen", SignalMode::Frozen}}, key);
  else if (key == "grid") {
    if (value.rfind("gauss:", 0) == 0) {
      cfg.grid.kind = GridSpec::Kind::Gauss;
      cfg.grid.K = std::stoi(value.substr(6));
    } else if (value.rfind("explicit:", 0) == 0) {
      cfg.grid.kind = GridSpec::Kind::Explicit;
      cfg.grid.values = parse_list(value.substr(9));
    } else {
      throw std::invalid_argument("config: grid must be gauss:K or explicit:v1,v2,...");
    }
  } else if (key == "grid_weights") {
    if (value == "uniform")
      cfg.grid.weights.clear();
    else
      cfg.grid.weights = parse_list(value);
  } else if (key == "x_left")
    cfg.x_left = num();
  else if (key == "x_right")
    cfg.x_right = num();
  else if (key == "dx")
    cfg.dx = num();
  else if (key == "dt")
    cfg.dt = (value == "auto") ? 0.0 : num();
  else if (key == "t_end")
    cfg.t_end = num();
  else if (key == "output_every")
    cfg.output_every = std::stoi(value);
  else if (key == "chi_m")
    cfg.params.chi_M = num();
  else if (key == "chi_n")
    cfg.params.chi_N = num();
  else if (key == "d_m")
    cfg.params.D_M = num();
  else if (key == "d_n")
    cfg.params.D_N = num();
  else if (key == "alpha")
    cfg.params.alpha = num();
  else if (key == "beta")
    cfg.params.beta = num();
  else if (key == "gamma")
    cfg.params.gamma = num();
  else if (key == "n_bar")
    cfg.params.N_bar = num();
  else if (key == "init_f") {
    if (value.rfind("gauss:", 0) == 0) {
      auto v = parse_list(value.substr(6));
      if (v.size() != 4)
        throw std::invalid_argument("config: init_f = gauss:amp,ax,av,x0");
      cfg.init.f_kind = InitSpec::FKind::Gaussian;
      cfg.init.f_amp = v[0];
      cfg.init.f_ax = v[1];
      cfg.init.f_av = v[2];
      cfg.init.f_x0 = v[3];
    } else if (value.rfind("wave:", 0) == 0) {
      auto v = parse_list(value.substr(5));
      if (v.size() != 3) throw std::invalid_argument("config: init_f = wave:c,mass,peak");
      cfg.init.f_kind = InitSpec::FKind::Wave;
      cfg.init.wave_c = v[0];
      cfg.init.wave_mass = v[1];
      cfg.init.wave_peak = v[2];
    } else {
      throw std::invalid_argument("config: init_f must be gauss:... or wave:...");
    }
  } else if (key == "init_m") {
    if (value.rfind("const:", 0) != 0)
      throw std::invalid_argument("config: init_m = const:value");
    cfg.init.m_const = std::stod(value.substr(6));
  } else if (key == "init_n") {
    if (value.rfind("const:", 0) == 0) {
      cfg.init.n_kind = InitSpec::NKind::Const;
      cfg.init.n_const = std::stod(value.substr(6));
    } else if (value.rfind("tanh:", 0) == 0) {
      auto v = parse_list(value.substr(5));
      if (v.size() != 3) throw std::invalid_argument("config: init_n = tanh:amp,scale,shift");
      cfg.init.n_kind = InitSpec::NKind::Tanh;
      cfg.init.n_tanh_amp = v[0];
      cfg.init.n_tanh_scale = v[1];
      cfg.init.n_tanh_shift = v[2];
    } else {
      throw std::invalid_argument("config: init_n must be const:value or tanh:...");
    }
  } else if (key == "rho_scale")
    cfg.rho_scale = num();
  else if (key == "steady_tol")
    cfg.steady_tol = num();
  else if (key == "track_symmetry")
    cfg.track_symmetry = std::stoi(value) != 0;
  else if (key == "stop_at_sym_err")
    cfg.stop_at_sym_err = num();
  else
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

SimConfig parse_config(std::istream& in, SimConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_entry(base, key, value);
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

SimConfig parse_config_file(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in, std::move(base));
}

std::string config_echo(const SimConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  auto kv = [&](const std::string& k, const auto& v) { os << "# " << k << " = " << v << "\n"; };
  kv("kinetic", cfg.kinetic_scheme == KineticScheme::WB ? "wb" : "ts");
  kv("parabolic", cfg.parabolic_scheme == ParabolicScheme::WB ? "wb" : "ts");
  kv("md", cfg.md_variant == MdVariant::MD1 ? "md1" : "md2");
  kv("smatrix", cfg.smatrix_variant == SVariant::Case ? "case" : "fd");
  kv("smatrix_eval", cfg.smatrix_eval == SEval::Transfer ? "transfer" : "interface");
  kv("signal", cfg.signal_mode == SignalMode::Dynamic ? "dynamic" : "frozen");
  if (cfg.grid.kind == GridSpec::Kind::Gauss) {
    kv("grid", "gauss:" + std::to_string(cfg.grid.K));
  } else {
    std::ostringstream g;
    g << "explicit:";
    for (size_t i = 0; i < cfg.grid.values.size(); ++i)
      g << (i ? "," : "") << cfg.grid.values[i];
    kv("grid", g.str());
    if (cfg.grid.weights.empty()) {
      kv("grid_weights", "uniform");
    } else {
      std::ostringstream w;
      for (size_t i = 0; i < cfg.grid.weights.size(); ++i)
        w << (i ? "," : "") << cfg.grid.weights[i];
      kv("grid_weights", w.str());
    }
  }
  kv("x_left", cfg.x_left);
  kv("x_right", cfg.x_right);
  kv("dx", cfg.dx);
  if (cfg.dt > 0.0)
    kv("dt", cfg.dt);
  else
    kv("dt", "auto");
  kv("t_end", cfg.t_end);
  kv("output_every", cfg.output_every);
  kv("chi_m", cfg.params.chi_M);
  kv("chi_n", cfg.params.chi_N);
  kv("d_m", cfg.params.D_M);
  kv("d_n", cfg.params.D_N);
  kv("alpha", cfg.params.alpha);
  kv("beta", cfg.params.beta);
  kv("gamma", cfg.params.gamma);
  kv("n_bar", cfg.params.N_bar);
  if (cfg.init.f_kind == InitSpec::FKind::Gaussian) {
    std::ostringstream s;
    s << "gauss:" << cfg.init.f_amp << "," << cfg.init.f_ax << "," << cfg.init.f_av << ","
      << cfg.init.f_x0;
    kv("init_f", s.str());
  } else {
    std::ostringstream s;
    s << "wave:" << cfg.init.wave_c << "," << cfg.init.wave_mass << ","
      << cfg.init.wave_peak;
    kv("init_f", s.str());
  }
  kv("init_m", "const:" + std::to_string(cfg.init.m_const));
  if (cfg.init.n_kind == InitSpec::NKind::Const) {
    kv("init_n", "const:" + std::to_string(cfg.init.n_const));
  } else {
    std::ostringstream s;
    s << "tanh:" << cfg.init.n_tanh_amp << "," << cfg.init.n_tanh_scale << ","
      << cfg.init.n_tanh_shift;
    kv("init_n", s.str());
  }
  kv("rho_scale", cfg.rho_scale);
  kv("steady_tol", cfg.steady_tol);
  kv("track_symmetry", cfg.track_symmetry ? 1 : 0);
  kv("stop_at_sym_err", cfg.stop_at_sym_err);
  return os.str();
}

}  // namespace ktwave
