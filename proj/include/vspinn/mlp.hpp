#pragma once

#include "vspinn/jet.hpp"
#include "vspinn/tape.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vspinn {

enum class Parameterization : std::uint8_t { Standard, NtkScaled };

struct InitSpec {
  enum class Kind : std::uint8_t { Glorot, Gaussian };
  Kind kind = Kind::Glorot;
  double sigma = 1.0;  // stddev for Gaussian init

  static InitSpec glorot() { return {Kind::Glorot, 1.0}; }
  static InitSpec gaussian(double sigma) { return {Kind::Gaussian, sigma}; }
};

struct MlpConfig {
  int input_dim = 1;
  int output_dim = 1;
  std::vector<int> hidden;
  ActKind activation = ActKind::Tanh;
  Parameterization parameterization = Parameterization::Standard;
  InitSpec init = InitSpec::glorot();
  std::uint64_t seed = 0;

  void validate() const;
  /// [input_dim, hidden..., output_dim]
  std::vector<int> layer_sizes() const;
  int n_layers() const { return static_cast<int>(hidden.size()) + 1; }
  std::int64_t n_params() const;
  /// NtkScaled multiplies the weighted sum of layer l by 1/sqrt(fan_in);
  /// biases are never scaled.
  double layer_scale(int layer) const;
};

struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;  // per layer, rows = fan_out
  std::vector<Eigen::VectorXd> biases;

  std::int64_t n_params() const;
  /// Column-major weights then bias, layer by layer. This is also the leaf
  /// order produced by lift_params, so flat gradients line up.
  Eigen::VectorXd flatten() const;
  static MlpParams unflatten(const MlpConfig& config, const Eigen::VectorXd& flat);
};

/// Deterministic function of config.seed. Gaussian draws i.i.d.
/// N(0, sigma^2) for all weights and biases; Glorot draws weights uniform in
/// +-sqrt(6/(fan_in+fan_out)) with zero biases.
MlpParams init_params(const MlpConfig& config);

/// Parameter leaves recorded on a tape (weights column-major then bias per
/// layer). Must be the first thing lifted on the tape so parameter gradients
/// occupy ids [0, n_params).
struct LiftedMlp {
  const MlpConfig* config = nullptr;
  std::vector<std::uint32_t> w_base, b_base;
  std::uint32_t n_params = 0;
};

LiftedMlp lift_params(Tape& tape, const MlpConfig& config, const MlpParams& params);

/// Output block of a batched evaluation: n_out x (K*P) ids, column-major,
/// lanes [value, d1/dir, d2/dir, ...].
struct BatchJets {
  Tape* tape = nullptr;
  std::uint32_t out_base = 0;
  int n_out = 0, P = 0, K = 1;
  std::vector<int> dirs;

  Var value(int comp, int p) const {
    return {tape, out_base + static_cast<std::uint32_t>(p * n_out + comp)};
  }
  Var d1(int comp, int dir_index, int p) const {
    return {tape, out_base + static_cast<std::uint32_t>(((1 + 2 * dir_index) * P + p) * n_out + comp)};
  }
  Var d2(int comp, int dir_index, int p) const {
    return {tape, out_base + static_cast<std::uint32_t>(((2 + 2 * dir_index) * P + p) * n_out + comp)};
  }
  /// Index of dir within dirs; throws if absent.
  int dir_index(int dir) const;
  Jet2 jet(int comp, int dir_index, int p) const {
    return {value(comp, p), d1(comp, dir_index, p), d2(comp, dir_index, p)};
  }
};

/// Evaluates the network on P points at once, propagating order-2 jets for
/// each direction in dirs (empty dirs = plain values).
/// pts layout: pts[p*input_dim + i].
BatchJets forward_batch(Tape& tape, const LiftedMlp& net, const double* pts, int P,
                        std::span<const int> dirs);

/// Single-point forward on tape; returns one Var per output component.
std::vector<Var> forward(Tape& tape, const LiftedMlp& net, std::span<const double> x);

/// Single-point directional jets; returns one Jet2 per output component.
std::vector<Jet2> forward_jet(Tape& tape, const LiftedMlp& net, std::span<const double> x,
                              int direction);

// ---- off-tape evaluation (prediction grids, finite-difference probes) ------

Eigen::VectorXd forward_plain(const MlpConfig& config, const MlpParams& params,
                              std::span<const double> x);

/// Batched plain forward: pts[p*input_dim + i]; returns n_out x P matrix.
Eigen::MatrixXd forward_plain_batch(const MlpConfig& config, const MlpParams& params,
                                    const double* pts, int P);

struct PlainJet {
  double v = 0, d1 = 0, d2 = 0;
};
std::vector<PlainJet> forward_jet_plain(const MlpConfig& config, const MlpParams& params,
                                        std::span<const double> x, int direction);

// ---- checkpoints ------------------------------------------------------------

void save_checkpoint(const std::string& path, const MlpConfig& config, const MlpParams& params);
std::pair<MlpConfig, MlpParams> load_checkpoint(const std::string& path);

const char* act_name(ActKind kind);
ActKind act_from_name(const std::string& name);

}  // namespace vspinn
