#include "vspinn/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace vspinn {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw std::invalid_argument("config key '" + key + "': " + why);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) bad_key(key, "not a number: '" + value + "'");
    return v;
  } catch (const std::invalid_argument&) {
    bad_key(key, "not a number: '" + value + "'");
  } catch (const std::out_of_range&) {
    bad_key(key, "out of range: '" + value + "'");
  }
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) bad_key(key, "not an integer: '" + value + "'");
    return v;
  } catch (const std::invalid_argument&) {
    bad_key(key, "not an integer: '" + value + "'");
  } catch (const std::out_of_range&) {
    bad_key(key, "out of range: '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_key(key, "expected true/false");
}

/// "4x64" or "64,64,64,64" -> widths.
std::vector<int> parse_hidden(const std::string& key, const std::string& value) {
  std::vector<int> widths;
  const auto x = value.find('x');
  if (x != std::string::npos && value.find(',') == std::string::npos) {
    const long layers = parse_int(key, value.substr(0, x));
    const long width = parse_int(key, value.substr(x + 1));
    if (layers < 1 || width < 1) bad_key(key, "layers and width must be >= 1");
    widths.assign(static_cast<std::size_t>(layers), static_cast<int>(width));
    return widths;
  }
  std::istringstream ss(value);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const long w = parse_int(key, trim(cell));
    if (w < 1) bad_key(key, "widths must be >= 1");
    widths.push_back(static_cast<int>(w));
  }
  if (widths.empty()) bad_key(key, "no widths given");
  return widths;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::istringstream ss(value);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(parse_double(key, trim(cell)));
  if (out.empty()) bad_key(key, "empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value,
                                char sep = ',') {
  std::vector<int> out;
  std::istringstream ss(value);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(static_cast<int>(parse_int(key, trim(cell))));
  if (out.empty()) bad_key(key, "empty list");
  return out;
}

// Shipped experiment presets: `paper` carries the full setting of the
// corresponding experiment, `desk` the reduced setting the acceptance suite
// runs. Explicit config keys override preset keys.
const std::map<std::string, std::vector<std::pair<std::string, std::string>>>& presets() {
  static const std::map<std::string, std::vector<std::pair<std::string, std::string>>> table = {
      {"wave.paper",
       {{"problem", "wave1d"}, {"hidden", "4x128"}, {"activation", "tanh"},
        {"epochs", "60000"}, {"n_interior", "6400"}, {"n_boundary", "512"},
        {"N", "10"}, {"eval_grid", "256x101"}, {"eval_every", "500"}}},
      {"wave.desk",
       {{"problem", "wave1d"}, {"hidden", "4x64"}, {"activation", "tanh"},
        {"epochs", "20000"}, {"n_interior", "2000"}, {"n_boundary", "256"},
        {"N", "10"}, {"eval_grid", "256x101"}, {"eval_every", "200"}}},
      {"allen_cahn.paper",
       {{"problem", "allen_cahn"}, {"hidden", "4x64"}, {"activation", "tanh"},
        {"epochs", "60000"}, {"n_interior", "10000"}, {"n_boundary_per", "200,128,128"},
        {"N", "100"}, {"eval_every", "500"}}},
      {"allen_cahn.desk",
       {{"problem", "allen_cahn"}, {"hidden", "4x32"}, {"activation", "tanh"},
        {"epochs", "20000"}, {"n_interior", "2500"}, {"n_boundary_per", "200,128,128"},
        {"N", "100"}, {"eval_every", "200"}}},
      {"boundary_layer.paper",
       {{"problem", "boundary_layer"}, {"epsilon", "1e-6"}, {"hidden", "8x20"},
        {"activation", "tanh"}, {"epochs", "30000"}, {"n_interior", "1000"},
        {"n_boundary_per", "1,1"}, {"N", "1000"}, {"eval_grid", "10001"},
        {"eval_every", "200"}}},
      {"boundary_layer.desk",
       {{"problem", "boundary_layer"}, {"epsilon", "1e-6"}, {"hidden", "8x20"},
        {"activation", "tanh"}, {"epochs", "12000"}, {"n_interior", "1000"},
        {"n_boundary_per", "1,1"}, {"N", "1000"}, {"eval_grid", "10001"},
        {"eval_every", "200"}}},
      {"navier_stokes.paper",
       {{"problem", "navier_stokes"}, {"hidden", "5x40"}, {"activation", "tanh"},
        {"epochs", "40000"}, {"n_interior", "6000"}, {"n_near_feature", "600"},
        {"n_boundary", "1200"}, {"N", "10"}, {"eval_grid", "221x83"},
        {"eval_every", "500"}}},
      {"navier_stokes.desk",
       {{"problem", "navier_stokes"}, {"hidden", "5x40"}, {"activation", "tanh"},
        {"epochs", "10000"}, {"n_interior", "3000"}, {"n_near_feature", "300"},
        {"n_boundary", "600"}, {"N", "10"}, {"eval_grid", "221x83"},
        {"eval_every", "200"}}},
      {"poisson_sweep.paper",
       {{"problem", "poisson_sin"}, {"hidden", "1x40000"}, {"activation", "cubic_relu"},
        {"parameterization", "ntk_scaled"}, {"init", "gaussian"}, {"init_sigma", "0.1"},
        {"epochs", "5000"}, {"n_interior", "50"}, {"n_boundary", "2"},
        {"scale_list", "1,2,4,1000"}, {"eval_grid", "1001"}, {"eval_every", "100"}}},
      {"poisson_sweep.desk",
       {{"problem", "poisson_sin"}, {"hidden", "1x4096"}, {"activation", "cubic_relu"},
        {"parameterization", "ntk_scaled"}, {"init", "gaussian"}, {"init_sigma", "0.1"},
        {"epochs", "3000"}, {"n_interior", "50"}, {"n_boundary", "2"},
        {"scale_list", "1,2,1000"}, {"eval_grid", "1001"}, {"eval_every", "100"}}},
  };
  return table;
}

void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "problem") {
    c.problem = value;
  } else if (key == "epsilon") {
    c.epsilon = parse_double(key, value);
    if (!(c.epsilon > 0)) bad_key(key, "must be positive");
  } else if (key == "N") {
    c.N = parse_double(key, value);
    if (c.N < 1.0) bad_key(key, "scale factor N must be >= 1");
  } else if (key == "lambda_res") {
    c.lambda_res = parse_double(key, value);
    c.has_weights = true;
    if (!(c.lambda_res > 0)) bad_key(key, "must be positive");
  } else if (key == "lambda_data") {
    c.lambda_data = parse_double(key, value);
    c.has_weights = true;
    if (!(c.lambda_data > 0)) bad_key(key, "must be positive");
  } else if (key == "hidden") {
    c.hidden = parse_hidden(key, value);
  } else if (key == "activation") {
    if (value == "tanh") c.activation = ActKind::Tanh;
    else if (value == "cubic_relu") c.activation = ActKind::CubicRelu;
    else bad_key(key, "expected tanh or cubic_relu");
  } else if (key == "parameterization") {
    if (value == "standard") c.parameterization = Parameterization::Standard;
    else if (value == "ntk_scaled") c.parameterization = Parameterization::NtkScaled;
    else bad_key(key, "expected standard or ntk_scaled");
  } else if (key == "init") {
    if (value == "glorot") c.init.kind = InitSpec::Kind::Glorot;
    else if (value == "gaussian") c.init.kind = InitSpec::Kind::Gaussian;
    else bad_key(key, "expected glorot or gaussian");
  } else if (key == "init_sigma") {
    c.init.sigma = parse_double(key, value);
    if (!(c.init.sigma > 0)) bad_key(key, "must be positive");
  } else if (key == "epochs") {
    const long v = parse_int(key, value);
    if (v < 0) bad_key(key, "must be >= 0");
    c.epochs = static_cast<int>(v);
  } else if (key == "lr") {
    c.adam.lr = parse_double(key, value);
    if (!(c.adam.lr > 0)) bad_key(key, "must be positive");
  } else if (key == "lr_decay") {
    c.adam.lr_decay = parse_double(key, value);
  } else if (key == "beta1") {
    c.adam.beta1 = parse_double(key, value);
  } else if (key == "beta2") {
    c.adam.beta2 = parse_double(key, value);
  } else if (key == "eps_adam") {
    c.adam.eps = parse_double(key, value);
  } else if (key == "n_interior") {
    const long v = parse_int(key, value);
    if (v < 0) bad_key(key, "must be >= 0");
    c.n_interior = static_cast<int>(v);
  } else if (key == "n_boundary") {
    const long v = parse_int(key, value);
    if (v < 0) bad_key(key, "must be >= 0");
    c.n_boundary = static_cast<int>(v);
  } else if (key == "n_boundary_per") {
    c.n_boundary_per = parse_int_list(key, value);
    for (int v : c.n_boundary_per) {
      if (v < 0) bad_key(key, "must be >= 0");
    }
  } else if (key == "n_near_feature") {
    const long v = parse_int(key, value);
    if (v < 0) bad_key(key, "must be >= 0");
    c.n_near_feature = static_cast<int>(v);
  } else if (key == "annulus_inner") {
    c.annulus_inner = parse_double(key, value);
  } else if (key == "annulus_outer") {
    c.annulus_outer = parse_double(key, value);
  } else if (key == "resample_each_epoch") {
    c.resample_each_epoch = parse_bool(key, value);
  } else if (key == "eval_every") {
    const long v = parse_int(key, value);
    if (v < 1) bad_key(key, "must be >= 1");
    c.eval_every = static_cast<int>(v);
  } else if (key == "eval_grid") {
    c.eval_grid = parse_int_list(key, value, 'x');
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "out") {
    c.out_dir = value;
  } else if (key == "scale_list") {
    c.scale_list = parse_double_list(key, value);
    for (double n : c.scale_list) {
      if (n < 1.0) bad_key(key, "scale factors must be >= 1");
    }
  } else if (key == "ntk_scales") {
    c.ntk_scales = parse_double_list(key, value);
  } else if (key == "ntk_width") {
    c.ntk_width = static_cast<int>(parse_int(key, value));
    if (c.ntk_width < 1) bad_key(key, "must be >= 1");
  } else if (key == "ntk_seeds") {
    c.ntk_seeds = static_cast<int>(parse_int(key, value));
    if (c.ntk_seeds < 1) bad_key(key, "must be >= 1");
  } else if (key == "ntk_boundary") {
    c.ntk_boundary = static_cast<int>(parse_int(key, value));
  } else if (key == "ntk_interior") {
    c.ntk_interior = static_cast<int>(parse_int(key, value));
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, keys] : presets()) names.push_back(name);
  return names;
}

RunConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line is not key=value: '" + line + "'");
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  RunConfig config;
  // Apply the preset first (wherever it appears), then explicit keys.
  for (const auto& [key, value] : entries) {
    if (key != "preset") continue;
    const auto it = presets().find(value);
    if (it == presets().end()) {
      throw std::invalid_argument("unknown preset '" + value + "'");
    }
    config.preset = value;
    for (const auto& [pk, pv] : it->second) apply_key(config, pk, pv);
  }
  for (const auto& [key, value] : entries) {
    if (key == "preset") continue;
    apply_key(config, key, value);
  }
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

MlpConfig mlp_config_from(const RunConfig& config, int input_dim, int output_dim) {
  MlpConfig mlp;
  mlp.input_dim = input_dim;
  mlp.output_dim = output_dim;
  mlp.hidden = config.hidden;
  mlp.activation = config.activation;
  mlp.parameterization = config.parameterization;
  mlp.init = config.init;
  mlp.seed = config.seed;
  mlp.validate();
  return mlp;
}

SamplePlan sample_plan_from(const RunConfig& config) {
  SamplePlan plan;
  plan.n_interior = config.n_interior;
  plan.n_boundary = config.n_boundary_per;
  plan.n_boundary_total = config.n_boundary;
  plan.n_near_feature = config.n_near_feature;
  plan.annulus_inner = config.annulus_inner;
  plan.annulus_outer = config.annulus_outer;
  plan.seed = config.seed;
  plan.resample_each_epoch = config.resample_each_epoch;
  return plan;
}

std::vector<int> default_eval_grid(const std::string& problem) {
  if (problem == "wave1d" || problem == "allen_cahn") return {256, 101};
  if (problem == "navier_stokes") return {221, 83};
  return {10001};  // 1D problems
}

std::string effective_config(const RunConfig& c) {
  std::ostringstream out;
  char buf[48];
  auto emit_d = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << key << "=" << buf << "\n";
  };
  auto emit_list_d = [&](const char* key, const std::vector<double>& vs) {
    out << key << "=";
    for (std::size_t i = 0; i < vs.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", vs[i]);
      out << buf << (i + 1 < vs.size() ? "," : "");
    }
    out << "\n";
  };

  emit_d("N", c.N);
  out << "activation=" << act_name(c.activation) << "\n";
  if (c.annulus_inner > 0) emit_d("annulus_inner", c.annulus_inner);
  if (c.annulus_outer > 0) emit_d("annulus_outer", c.annulus_outer);
  emit_d("beta1", c.adam.beta1);
  emit_d("beta2", c.adam.beta2);
  emit_d("eps_adam", c.adam.eps);
  emit_d("epsilon", c.epsilon);
  out << "epochs=" << c.epochs << "\n";
  out << "eval_every=" << c.eval_every << "\n";
  {
    const auto grid = c.eval_grid.empty() ? default_eval_grid(c.problem) : c.eval_grid;
    out << "eval_grid=";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out << grid[i] << (i + 1 < grid.size() ? "x" : "");
    }
    out << "\n";
  }
  out << "hidden=";
  for (std::size_t i = 0; i < c.hidden.size(); ++i) {
    out << c.hidden[i] << (i + 1 < c.hidden.size() ? "," : "");
  }
  out << "\n";
  out << "init=" << (c.init.kind == InitSpec::Kind::Glorot ? "glorot" : "gaussian") << "\n";
  emit_d("init_sigma", c.init.sigma);
  if (c.has_weights) {
    emit_d("lambda_data", c.lambda_data);
    emit_d("lambda_res", c.lambda_res);
  }
  emit_d("lr", c.adam.lr);
  emit_d("lr_decay", c.adam.lr_decay);
  out << "n_boundary=" << c.n_boundary << "\n";
  if (!c.n_boundary_per.empty()) {
    out << "n_boundary_per=";
    for (std::size_t i = 0; i < c.n_boundary_per.size(); ++i) {
      out << c.n_boundary_per[i] << (i + 1 < c.n_boundary_per.size() ? "," : "");
    }
    out << "\n";
  }
  out << "n_interior=" << c.n_interior << "\n";
  out << "n_near_feature=" << c.n_near_feature << "\n";
  if (!c.ntk_scales.empty()) emit_list_d("ntk_scales", c.ntk_scales);
  out << "ntk_boundary=" << c.ntk_boundary << "\n";
  out << "ntk_interior=" << c.ntk_interior << "\n";
  out << "ntk_seeds=" << c.ntk_seeds << "\n";
  out << "ntk_width=" << c.ntk_width << "\n";
  out << "out=" << c.out_dir << "\n";
  out << "parameterization="
      << (c.parameterization == Parameterization::Standard ? "standard" : "ntk_scaled") << "\n";
  out << "problem=" << c.problem << "\n";
  out << "resample_each_epoch=" << (c.resample_each_epoch ? "true" : "false") << "\n";
  if (!c.scale_list.empty()) emit_list_d("scale_list", c.scale_list);
  out << "seed=" << c.seed << "\n";
  return out.str();
}

}  // namespace vspinn
