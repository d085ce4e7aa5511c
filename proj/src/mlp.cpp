#include "vspinn/mlp.hpp"

#include "vspinn/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vspinn {

void MlpConfig::validate() const {
  if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("mlp: dims must be >= 1");
  if (hidden.empty()) throw std::invalid_argument("mlp: hidden layers must be non-empty");
  for (int w : hidden) {
    if (w < 1) throw std::invalid_argument("mlp: hidden widths must be >= 1");
  }
  if (init.kind == InitSpec::Kind::Gaussian && !(init.sigma > 0.0)) {
    throw std::invalid_argument("mlp: init sigma must be positive");
  }
}

std::vector<int> MlpConfig::layer_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(input_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output_dim);
  return sizes;
}

std::int64_t MlpConfig::n_params() const {
  const auto sizes = layer_sizes();
  std::int64_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    n += static_cast<std::int64_t>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
  }
  return n;
}

double MlpConfig::layer_scale(int layer) const {
  if (parameterization == Parameterization::Standard) return 1.0;
  const auto sizes = layer_sizes();
  return 1.0 / std::sqrt(static_cast<double>(sizes[layer]));
}

std::int64_t MlpParams::n_params() const {
  std::int64_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Eigen::VectorXd MlpParams::flatten() const {
  Eigen::VectorXd flat(n_params());
  std::int64_t offset = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.segment(offset, weights[l].size()) =
        Eigen::Map<const Eigen::VectorXd>(weights[l].data(), weights[l].size());
    offset += weights[l].size();
    flat.segment(offset, biases[l].size()) = biases[l];
    offset += biases[l].size();
  }
  return flat;
}

MlpParams MlpParams::unflatten(const MlpConfig& config, const Eigen::VectorXd& flat) {
  if (flat.size() != config.n_params()) throw std::invalid_argument("unflatten: size mismatch");
  const auto sizes = config.layer_sizes();
  MlpParams params;
  std::int64_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int rows = sizes[l + 1], cols = sizes[l];
    params.weights.emplace_back(
        Eigen::Map<const Eigen::MatrixXd>(flat.data() + offset, rows, cols));
    offset += static_cast<std::int64_t>(rows) * cols;
    params.biases.emplace_back(Eigen::Map<const Eigen::VectorXd>(flat.data() + offset, rows));
    offset += rows;
  }
  return params;
}

MlpParams init_params(const MlpConfig& config) {
  config.validate();
  Rng rng(Rng::derive(config.seed, /*stream=*/0xA11C));
  const auto sizes = config.layer_sizes();
  MlpParams params;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l], fan_out = sizes[l + 1];
    Eigen::MatrixXd W(fan_out, fan_in);
    Eigen::VectorXd b(fan_out);
    if (config.init.kind == InitSpec::Kind::Glorot) {
      const double bound = std::sqrt(6.0 / (fan_in + fan_out));
      for (std::int64_t i = 0; i < W.size(); ++i) W.data()[i] = rng.uniform(-bound, bound);
      b.setZero();
    } else {
      for (std::int64_t i = 0; i < W.size(); ++i) W.data()[i] = rng.normal(0.0, config.init.sigma);
      for (int i = 0; i < fan_out; ++i) b[i] = rng.normal(0.0, config.init.sigma);
    }
    params.weights.push_back(std::move(W));
    params.biases.push_back(std::move(b));
  }
  return params;
}

LiftedMlp lift_params(Tape& tape, const MlpConfig& config, const MlpParams& params) {
  config.validate();
  if (params.weights.size() != static_cast<std::size_t>(config.n_layers())) {
    throw std::invalid_argument("lift_params: params do not match config");
  }
  LiftedMlp net;
  net.config = &config;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    net.w_base.push_back(tape.lift_block(LeafKind::Parameter, params.weights[l].data(),
                                         static_cast<std::uint32_t>(params.weights[l].size())));
    net.b_base.push_back(tape.lift_block(LeafKind::Parameter, params.biases[l].data(),
                                         static_cast<std::uint32_t>(params.biases[l].size())));
  }
  net.n_params = static_cast<std::uint32_t>(params.n_params());
  return net;
}

int BatchJets::dir_index(int dir) const {
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    if (dirs[j] == dir) return static_cast<int>(j);
  }
  throw std::invalid_argument("BatchJets: direction not propagated");
}

BatchJets forward_batch(Tape& tape, const LiftedMlp& net, const double* pts, int P,
                        std::span<const int> dirs) {
  const MlpConfig& config = *net.config;
  for (int d : dirs) {
    if (d < 0 || d >= config.input_dim) throw std::invalid_argument("forward: direction out of range");
  }
  const std::uint32_t K = 1 + 2 * static_cast<std::uint32_t>(dirs.size());
  const auto sizes = config.layer_sizes();

  std::uint32_t a_base =
      tape.input_jet_block(pts, static_cast<std::uint32_t>(config.input_dim),
                           static_cast<std::uint32_t>(P), dirs);
  for (int l = 0; l < config.n_layers(); ++l) {
    const std::uint32_t rows = static_cast<std::uint32_t>(sizes[l + 1]);
    const std::uint32_t inner = static_cast<std::uint32_t>(sizes[l]);
    const std::uint32_t z_base =
        tape.dense_jets(net.w_base[l], net.b_base[l], a_base, rows, inner,
                        static_cast<std::uint32_t>(P), K, config.layer_scale(l));
    const bool last = (l + 1 == config.n_layers());
    a_base = last ? z_base
                  : tape.act_jets(config.activation, z_base, rows,
                                  static_cast<std::uint32_t>(P), K);
  }

  BatchJets out;
  out.tape = &tape;
  out.out_base = a_base;
  out.n_out = config.output_dim;
  out.P = P;
  out.K = static_cast<int>(K);
  out.dirs.assign(dirs.begin(), dirs.end());
  return out;
}

std::vector<Var> forward(Tape& tape, const LiftedMlp& net, std::span<const double> x) {
  if (static_cast<int>(x.size()) != net.config->input_dim) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  BatchJets batch = forward_batch(tape, net, x.data(), 1, {});
  std::vector<Var> out;
  for (int c = 0; c < batch.n_out; ++c) out.push_back(batch.value(c, 0));
  return out;
}

std::vector<Jet2> forward_jet(Tape& tape, const LiftedMlp& net, std::span<const double> x,
                              int direction) {
  if (static_cast<int>(x.size()) != net.config->input_dim) {
    throw std::invalid_argument("forward_jet: input dimension mismatch");
  }
  if (direction < 0 || direction >= net.config->input_dim) {
    throw std::invalid_argument("forward_jet: direction out of range");
  }
  const int dirs[1] = {direction};
  BatchJets batch = forward_batch(tape, net, x.data(), 1, dirs);
  std::vector<Jet2> out;
  for (int c = 0; c < batch.n_out; ++c) out.push_back(batch.jet(c, 0, 0));
  return out;
}

// ---- off-tape evaluation ------------------------------------------------------

Eigen::MatrixXd forward_plain_batch(const MlpConfig& config, const MlpParams& params,
                                    const double* pts, int P) {
  // Evaluated point by point so values cannot depend on how a grid was
  // batched (zoom-out consistency is an exact-equality contract).
  Eigen::MatrixXd out(config.output_dim, P);
  Eigen::VectorXd a(config.input_dim), z;
  for (int p = 0; p < P; ++p) {
    a = Eigen::Map<const Eigen::VectorXd>(pts + static_cast<std::ptrdiff_t>(p) * config.input_dim,
                                          config.input_dim);
    for (int l = 0; l < config.n_layers(); ++l) {
      z.noalias() = params.weights[l] * a;
      z *= config.layer_scale(l);
      z += params.biases[l];
      if (l + 1 < config.n_layers()) {
        for (Eigen::Index i = 0; i < z.size(); ++i) {
          z[i] = act_derivs(config.activation, z[i]).s;
        }
      }
      a = z;
    }
    out.col(p) = a;
  }
  return out;
}

Eigen::VectorXd forward_plain(const MlpConfig& config, const MlpParams& params,
                              std::span<const double> x) {
  if (static_cast<int>(x.size()) != config.input_dim) {
    throw std::invalid_argument("forward_plain: input dimension mismatch");
  }
  return forward_plain_batch(config, params, x.data(), 1).col(0);
}

std::vector<PlainJet> forward_jet_plain(const MlpConfig& config, const MlpParams& params,
                                        std::span<const double> x, int direction) {
  if (static_cast<int>(x.size()) != config.input_dim) {
    throw std::invalid_argument("forward_jet_plain: input dimension mismatch");
  }
  if (direction < 0 || direction >= config.input_dim) {
    throw std::invalid_argument("forward_jet_plain: direction out of range");
  }
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  Eigen::VectorXd d1 = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd d2 = Eigen::VectorXd::Zero(x.size());
  d1[direction] = 1.0;
  for (int l = 0; l < config.n_layers(); ++l) {
    const double c = config.layer_scale(l);
    Eigen::VectorXd zv = c * (params.weights[l] * v) + params.biases[l];
    Eigen::VectorXd z1 = c * (params.weights[l] * d1);
    Eigen::VectorXd z2 = c * (params.weights[l] * d2);
    if (l + 1 < config.n_layers()) {
      for (int i = 0; i < zv.size(); ++i) {
        const ActDerivs d = act_derivs(config.activation, zv[i]);
        zv[i] = d.s;
        const double g1 = z1[i];
        z1[i] = d.s1 * g1;
        z2[i] = d.s2 * g1 * g1 + d.s1 * z2[i];
      }
    }
    v = std::move(zv);
    d1 = std::move(z1);
    d2 = std::move(z2);
  }
  std::vector<PlainJet> out(config.output_dim);
  for (int ccomp = 0; ccomp < config.output_dim; ++ccomp) {
    out[ccomp] = {v[ccomp], d1[ccomp], d2[ccomp]};
  }
  return out;
}

// ---- checkpoints ---------------------------------------------------------------

const char* act_name(ActKind kind) {
  switch (kind) {
    case ActKind::Tanh: return "tanh";
    case ActKind::Sin: return "sin";
    case ActKind::Cos: return "cos";
    case ActKind::Exp: return "exp";
    case ActKind::CubicRelu: return "cubic_relu";
  }
  return "?";
}

ActKind act_from_name(const std::string& name) {
  if (name == "tanh") return ActKind::Tanh;
  if (name == "sin") return ActKind::Sin;
  if (name == "cos") return ActKind::Cos;
  if (name == "exp") return ActKind::Exp;
  if (name == "cubic_relu") return ActKind::CubicRelu;
  throw std::invalid_argument("unknown activation: " + name);
}

void save_checkpoint(const std::string& path, const MlpConfig& config, const MlpParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out << "vspinn-checkpoint 1\n";
  out << "input_dim " << config.input_dim << "\n";
  out << "output_dim " << config.output_dim << "\n";
  out << "hidden";
  for (int w : config.hidden) out << " " << w;
  out << "\n";
  out << "activation " << act_name(config.activation) << "\n";
  out << "parameterization "
      << (config.parameterization == Parameterization::Standard ? "standard" : "ntk_scaled")
      << "\n";
  out << "init " << (config.init.kind == InitSpec::Kind::Glorot ? "glorot" : "gaussian") << " ";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", config.init.sigma);
  out << buf << "\n";
  out << "seed " << config.seed << "\n";
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const auto& W = params.weights[l];
    out << "layer " << l << " " << W.rows() << " " << W.cols() << "\n";
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", W(r, c));
        out << buf << (c + 1 == W.cols() ? "" : " ");
      }
      out << "\n";
    }
    out << "bias " << l << "\n";
    for (Eigen::Index r = 0; r < params.biases[l].size(); ++r) {
      std::snprintf(buf, sizeof buf, "%.17g", params.biases[l][r]);
      out << buf << (r + 1 == params.biases[l].size() ? "" : " ");
    }
    out << "\n";
  }
}

std::pair<MlpConfig, MlpParams> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "vspinn-checkpoint" || version != 1) {
    throw std::runtime_error("bad checkpoint header in " + path);
  }
  MlpConfig config;
  std::string key;
  in >> key >> config.input_dim;   // input_dim
  in >> key >> config.output_dim;  // output_dim
  in >> key;                       // hidden
  config.hidden.clear();
  std::string line;
  std::getline(in, line);
  {
    std::istringstream ss(line);
    int w;
    while (ss >> w) config.hidden.push_back(w);
  }
  std::string act, par, init_kind;
  in >> key >> act;
  config.activation = act_from_name(act);
  in >> key >> par;
  config.parameterization =
      (par == "ntk_scaled") ? Parameterization::NtkScaled : Parameterization::Standard;
  in >> key >> init_kind >> config.init.sigma;
  config.init.kind =
      (init_kind == "gaussian") ? InitSpec::Kind::Gaussian : InitSpec::Kind::Glorot;
  in >> key >> config.seed;
  config.validate();

  MlpParams params;
  for (int l = 0; l < config.n_layers(); ++l) {
    std::size_t idx;
    Eigen::Index rows, cols;
    in >> key >> idx >> rows >> cols;
    if (!in || key != "layer") throw std::runtime_error("checkpoint truncated at layer block");
    Eigen::MatrixXd W(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) in >> W(r, c);
    }
    in >> key >> idx;
    if (!in || key != "bias") throw std::runtime_error("checkpoint truncated at bias block");
    Eigen::VectorXd b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) in >> b[r];
    if (!in) throw std::runtime_error("checkpoint truncated");
    params.weights.push_back(std::move(W));
    params.biases.push_back(std::move(b));
  }
  return {config, params};
}

}  // namespace vspinn
