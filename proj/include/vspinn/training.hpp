#pragma once

#include "vspinn/mlp.hpp"
#include "vspinn/problems.hpp"
#include "vspinn/reference.hpp"
#include "vspinn/sampling.hpp"

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace vspinn {

/// Raised when training hits a non-finite quantity (exit code 2 in the CLI,
/// as opposed to validation errors).
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Multiplicative decay of the learning rate per 1000 epochs (1 = none):
  /// lr(e) = lr * lr_decay^(e/1000).
  double lr_decay = 1.0;

  void validate() const;
  double lr_at(int epoch) const;
};

struct AdamState {
  Eigen::VectorXd m, v;
  std::int64_t step = 0;
  static AdamState zeros(Eigen::Index n) { return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0}; }
};

/// One bias-corrected Adam update. Throws on non-finite gradients.
void adam_step_inplace(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
                       const AdamConfig& config, double lr);
/// Functional form of the same update.
std::pair<AdamState, Eigen::VectorXd> adam_step(AdamState state, Eigen::VectorXd params,
                                                const Eigen::VectorXd& grads, double lr,
                                                const AdamConfig& config = {});

struct LearningCurveRow {
  int epoch = 0;
  double loss_total = 0, loss_res = 0, loss_data = 0;
  double rel_l2 = 0;
  bool has_rel = false;
};

struct LearningCurve {
  std::vector<LearningCurveRow> rows;
  /// CSV schema: header `epoch,loss_total,loss_res,loss_data,rel_l2`,
  /// decimal floats, `NA` for an absent metric.
  void write_csv(std::ostream& out) const;
  static LearningCurve read_csv(std::istream& in);
};

struct TrainConfig {
  int epochs = 1000;
  AdamConfig adam;
  SamplePlan plan;
  double N = 1.0;  // must match the scaled spec's cumulative factor
  int eval_every = 100;
  std::vector<int> eval_grid;  // per-coordinate resolutions (original coords)
  std::uint64_t seed = 0;
};

/// Evaluation grid in ORIGINAL coordinates with reference values for the
/// first field (closed box, hole-interior points excluded).
struct EvalGrid {
  int dim = 0;
  std::vector<double> points;  // flat, pts[p*dim+i]
  std::vector<double> ref;     // reference values, one per point (may be empty)
  std::size_t n_points() const { return ref.empty() ? points.size() / dim : ref.size(); }
};

EvalGrid make_eval_grid(const ProblemSpec& spec, const std::vector<int>& resolutions);
/// Grid on the reference's own axes with its first field as reference values.
EvalGrid eval_grid_from_reference(const ReferenceGrid& reference);

struct LossTerms {
  Var total, res_term, data_term;
};

/// Assembles the scaled physics-informed loss on the tape:
///   res_term  = mean over interior points of sum_c |residual_c|^2,
///   data_term = mean over boundary samples of |mismatch|^2,
///   total     = lambda_res * res_term + lambda_data * data_term,
/// with summation in fixed sample order. Throws (naming the point) if any
/// residual value is non-finite.
LossTerms assemble_loss(Tape& tape, const ProblemSpec& spec, const LiftedMlp& net,
                        std::span<const double> interior_pts,
                        const std::vector<BoundarySample>& boundary);

struct TrainResult {
  MlpParams params;
  LearningCurve curve;
};

/// Zoom-out prediction: evaluates the network at the per-coordinate scaled
/// grid points; grid points must lie inside the ORIGINAL closed geometry.
Eigen::MatrixXd predict_grid(const MlpConfig& config, const MlpParams& params,
                             const ProblemSpec& spec, const EvalGrid& grid);

/// ||u_pred - u_ref||_2 / ||u_ref||_2 over the grid, with
/// u_pred(x) = network(scale ⊙ x) (first output component).
double relative_l2(const MlpConfig& config, const MlpParams& params, const ProblemSpec& spec,
                   const EvalGrid& grid);

/// Full training loop: per epoch sample -> assemble_loss -> backward ->
/// adam_step; appends a learning-curve row every eval_every epochs (and at
/// the final epoch). rel_l2 uses the exact solution when available, else the
/// reference grid; rows carry has_rel=false when neither exists.
TrainResult train(const ProblemSpec& spec, const MlpConfig& mlp_config, const TrainConfig& tc,
                  const ReferenceGrid* reference = nullptr,
                  const std::function<void(int, const MlpParams&)>& on_eval = nullptr);

/// Root-mean-square of each residual component over the grid's points,
/// evaluated through the zoom-out map (derivatives in original coordinates).
std::vector<double> residual_rms_components(const MlpConfig& config, const MlpParams& params,
                                            const ProblemSpec& spec, const EvalGrid& grid);

/// RMS of the constraint mismatches over the given boundary samples.
double constraint_rms(const MlpConfig& config, const MlpParams& params, const ProblemSpec& spec,
                      const std::vector<BoundarySample>& samples);

/// Finite-difference check of the assembled-loss parameter gradient against
/// the reverse pass, per check_gradient's error formula.
double check_loss_gradient(const ProblemSpec& spec, const MlpConfig& config,
                           const MlpParams& params, std::span<const double> interior,
                           const std::vector<BoundarySample>& boundary, double h);

}  // namespace vspinn
