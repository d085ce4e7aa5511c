#include "vspinn/training.hpp"

#include "vspinn/gradcheck.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace vspinn {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("adam: learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("adam: betas must lie in (0,1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("adam: eps must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw std::invalid_argument("adam: lr_decay must lie in (0,1]");
  }
}

double AdamConfig::lr_at(int epoch) const {
  if (lr_decay == 1.0) return lr;
  return lr * std::pow(lr_decay, epoch / 1000.0);
}

void adam_step_inplace(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
                       const AdamConfig& config, double lr) {
  if (params.size() != grads.size() || state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  if (!grads.allFinite()) throw NumericalFailure("adam_step: non-finite gradient");
  state.step += 1;
  const double b1 = config.beta1, b2 = config.beta2;
  state.m = b1 * state.m + (1.0 - b1) * grads;
  state.v = b2 * state.v + (1.0 - b2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  params.array() -=
      lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + config.eps);
}

std::pair<AdamState, Eigen::VectorXd> adam_step(AdamState state, Eigen::VectorXd params,
                                                const Eigen::VectorXd& grads, double lr,
                                                const AdamConfig& config) {
  adam_step_inplace(state, params, grads, config, lr);
  return {std::move(state), std::move(params)};
}

// ---- learning curve ------------------------------------------------------------

void LearningCurve::write_csv(std::ostream& out) const {
  out << "epoch,loss_total,loss_res,loss_data,rel_l2\n";
  char buf[40];
  for (const auto& row : rows) {
    out << row.epoch;
    for (double v : {row.loss_total, row.loss_res, row.loss_data}) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << "," << buf;
    }
    if (row.has_rel) {
      std::snprintf(buf, sizeof buf, "%.17g", row.rel_l2);
      out << "," << buf << "\n";
    } else {
      out << ",NA\n";
    }
  }
}

LearningCurve LearningCurve::read_csv(std::istream& in) {
  LearningCurve curve;
  std::string line;
  if (!std::getline(in, line) || line != "epoch,loss_total,loss_res,loss_data,rel_l2") {
    throw std::runtime_error("learning curve: bad header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    LearningCurveRow row;
    std::getline(ss, cell, ',');
    row.epoch = std::stoi(cell);
    std::getline(ss, cell, ',');
    row.loss_total = std::stod(cell);
    std::getline(ss, cell, ',');
    row.loss_res = std::stod(cell);
    std::getline(ss, cell, ',');
    row.loss_data = std::stod(cell);
    if (!std::getline(ss, cell, ',')) throw std::runtime_error("learning curve: short row");
    if (cell == "NA") {
      row.has_rel = false;
    } else {
      row.has_rel = true;
      row.rel_l2 = std::stod(cell);
    }
    curve.rows.push_back(row);
  }
  return curve;
}

// ---- evaluation grids ------------------------------------------------------------

EvalGrid make_eval_grid(const ProblemSpec& spec, const std::vector<int>& resolutions) {
  if (static_cast<int>(resolutions.size()) != spec.dim()) {
    throw std::invalid_argument("eval grid: resolutions must match the problem dimension");
  }
  std::vector<std::vector<double>> axes(resolutions.size());
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    const int n = resolutions[i];
    if (n < 2) throw std::invalid_argument("eval grid: resolution must be >= 2");
    const double lo = spec.geometry.lo[i], hi = spec.geometry.hi[i];
    for (int k = 0; k < n; ++k) {
      axes[i].push_back(lo + (hi - lo) * static_cast<double>(k) / (n - 1));
    }
  }
  EvalGrid grid;
  grid.dim = spec.dim();
  std::vector<std::size_t> idx(axes.size(), 0);
  std::vector<double> pt(axes.size());
  while (true) {
    for (std::size_t i = 0; i < axes.size(); ++i) pt[i] = axes[i][idx[i]];
    bool keep = true;
    if (spec.geometry.hole) {
      const Circle& h = *spec.geometry.hole;
      const double dx = pt[0] - h.cx, dy = pt[1] - h.cy;
      keep = dx * dx + dy * dy >= h.r * h.r;
    }
    if (keep) {
      grid.points.insert(grid.points.end(), pt.begin(), pt.end());
      if (spec.has_exact()) grid.ref.push_back(spec.exact(pt)[0]);
    }
    int axis = static_cast<int>(axes.size()) - 1;
    for (; axis >= 0; --axis) {
      if (++idx[static_cast<std::size_t>(axis)] < axes[static_cast<std::size_t>(axis)].size()) break;
      idx[static_cast<std::size_t>(axis)] = 0;
    }
    if (axis < 0) break;
  }
  return grid;
}

EvalGrid eval_grid_from_reference(const ReferenceGrid& reference) {
  reference.validate();
  EvalGrid grid;
  grid.dim = reference.dim();
  grid.points = reference.flat_points();
  grid.ref = reference.fields[0];
  return grid;
}

// ---- loss assembly ------------------------------------------------------------

namespace {

std::string point_to_string(std::span<const double> pt) {
  std::string s = "(";
  char buf[32];
  for (std::size_t i = 0; i < pt.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%g", pt[i]);
    s += buf;
    if (i + 1 < pt.size()) s += ", ";
  }
  return s + ")";
}

}  // namespace

LossTerms assemble_loss(Tape& tape, const ProblemSpec& spec, const LiftedMlp& net,
                        std::span<const double> interior_pts,
                        const std::vector<BoundarySample>& boundary) {
  const int dim = spec.dim();
  const int n_interior = static_cast<int>(interior_pts.size()) / dim;
  if (n_interior == 0 || boundary.empty()) {
    throw std::invalid_argument("assemble_loss: point lists must be non-empty");
  }

  // Residual term: one batched jet evaluation for all interior points.
  const auto dirs = spec.jet_dirs();
  BatchJets batch = forward_batch(tape, net, interior_pts.data(), n_interior, dirs);
  std::vector<Var> point_sq;
  point_sq.reserve(static_cast<std::size_t>(n_interior));
  for (int p = 0; p < n_interior; ++p) {
    const std::span<const double> pt = interior_pts.subspan(
        static_cast<std::size_t>(p) * dim, static_cast<std::size_t>(dim));
    const auto residuals = residual_from_batch(tape, spec, batch, p, pt);
    Var sq = residuals[0] * residuals[0];
    for (std::size_t c = 1; c < residuals.size(); ++c) sq = sq + residuals[c] * residuals[c];
    if (!std::isfinite(tape.value(sq))) {
      throw NumericalFailure("assemble_loss: non-finite residual at point " +
                             point_to_string(pt));
    }
    point_sq.push_back(sq);
  }
  Var res_term = tape.sum(point_sq) * (1.0 / n_interior);

  // Data term: group samples by constraint, batch each group.
  std::map<int, std::vector<int>> groups;  // constraint index -> sample indices
  for (std::size_t s = 0; s < boundary.size(); ++s) {
    groups[boundary[s].constraint].push_back(static_cast<int>(s));
  }
  std::vector<Var> mismatch_sq;
  mismatch_sq.reserve(boundary.size());
  for (const auto& [ci, sample_ids] : groups) {
    const ConstraintSpec& c = spec.constraints[static_cast<std::size_t>(ci)];
    const int P = static_cast<int>(sample_ids.size());
    std::vector<double> pts(static_cast<std::size_t>(P) * dim);
    for (int k = 0; k < P; ++k) {
      const auto& src = boundary[static_cast<std::size_t>(sample_ids[static_cast<std::size_t>(k)])].point;
      std::copy(src.begin(), src.end(), pts.begin() + static_cast<std::size_t>(k) * dim);
    }
    const bool needs_d1 = c.kind == ConstraintKind::CoordinateDerivative ||
                          c.kind == ConstraintKind::PeriodicDerivativePair;
    const bool periodic = c.kind == ConstraintKind::PeriodicPair ||
                          c.kind == ConstraintKind::PeriodicDerivativePair;
    std::vector<int> bdirs;
    if (needs_d1) bdirs.push_back(c.deriv_coord);
    BatchJets a = forward_batch(tape, net, pts.data(), P, bdirs);
    BatchJets b;
    std::vector<double> partner_pts;
    if (periodic) {
      partner_pts.resize(pts.size());
      for (int k = 0; k < P; ++k) {
        const auto partner = periodic_partner(
            spec, c, std::span<const double>(pts).subspan(static_cast<std::size_t>(k) * dim, dim));
        std::copy(partner.begin(), partner.end(),
                  partner_pts.begin() + static_cast<std::size_t>(k) * dim);
      }
      b = forward_batch(tape, net, partner_pts.data(), P, bdirs);
    }
    for (int k = 0; k < P; ++k) {
      const std::span<const double> pt =
          std::span<const double>(pts).subspan(static_cast<std::size_t>(k) * dim, dim);
      Var mismatch;
      switch (c.kind) {
        case ConstraintKind::Dirichlet:
        case ConstraintKind::ComponentDirichlet: {
          double g = c.target ? c.target(spec.to_original(pt)) : 0.0;
          mismatch = a.value(c.output_component, k) - g;
          break;
        }
        case ConstraintKind::CoordinateDerivative: {
          double g = c.target ? c.target(spec.to_original(pt)) : 0.0;
          g /= spec.scale.factor(c.deriv_coord);
          mismatch = a.d1(c.output_component, 0, k) - g;
          break;
        }
        case ConstraintKind::PeriodicPair:
          mismatch = a.value(c.output_component, k) - b.value(c.output_component, k);
          break;
        case ConstraintKind::PeriodicDerivativePair:
          mismatch = a.d1(c.output_component, 0, k) - b.d1(c.output_component, 0, k);
          break;
      }
      mismatch_sq.push_back(mismatch * mismatch);
    }
  }
  Var data_term = tape.sum(mismatch_sq) * (1.0 / static_cast<double>(mismatch_sq.size()));

  Var total = spec.lambda_res * res_term + spec.lambda_data * data_term;
  return {total, res_term, data_term};
}

// ---- prediction / metrics ------------------------------------------------------------

Eigen::MatrixXd predict_grid(const MlpConfig& config, const MlpParams& params,
                             const ProblemSpec& spec, const EvalGrid& grid) {
  const int dim = grid.dim;
  const int P = static_cast<int>(grid.points.size()) / dim;
  std::vector<double> scaled(grid.points.size());
  for (int p = 0; p < P; ++p) {
    const std::span<const double> pt = std::span<const double>(grid.points)
                                           .subspan(static_cast<std::size_t>(p) * dim, dim);
    if (!spec.contains_scaled_closed(spec.to_scaled(pt), 1e-9)) {
      throw std::invalid_argument("predict_grid: point outside geometry " + point_to_string(pt));
    }
    for (int i = 0; i < dim; ++i) {
      scaled[static_cast<std::size_t>(p) * dim + i] = pt[i] * spec.scale.factor(i);
    }
  }
  return forward_plain_batch(config, params, scaled.data(), P);
}

double relative_l2(const MlpConfig& config, const MlpParams& params, const ProblemSpec& spec,
                   const EvalGrid& grid) {
  if (grid.ref.empty()) {
    throw std::invalid_argument("relative_l2: grid carries no reference values");
  }
  const Eigen::MatrixXd pred = predict_grid(config, params, spec, grid);
  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < grid.ref.size(); ++p) {
    const double diff = pred(0, static_cast<Eigen::Index>(p)) - grid.ref[p];
    num += diff * diff;
    den += grid.ref[p] * grid.ref[p];
  }
  if (den == 0.0) throw std::invalid_argument("relative_l2: reference norm is zero");
  return std::sqrt(num / den);
}

// ---- training loop ------------------------------------------------------------

TrainResult train(const ProblemSpec& spec, const MlpConfig& mlp_config, const TrainConfig& tc,
                  const ReferenceGrid* reference,
                  const std::function<void(int, const MlpParams&)>& on_eval) {
  tc.adam.validate();
  mlp_config.validate();
  if (std::abs(spec.scale_value - tc.N) > 1e-12 * std::max(1.0, tc.N)) {
    throw std::invalid_argument("train: spec scale does not match config N");
  }
  if (mlp_config.input_dim != spec.dim() || mlp_config.output_dim != spec.n_outputs) {
    throw std::invalid_argument("train: network shape does not match problem");
  }

  std::optional<EvalGrid> grid;
  if (spec.has_exact() && !tc.eval_grid.empty()) {
    grid = make_eval_grid(spec, tc.eval_grid);
  } else if (reference != nullptr) {
    grid = eval_grid_from_reference(*reference);
  }

  MlpParams params = init_params(mlp_config);
  Eigen::VectorXd flat = params.flatten();
  AdamState adam = AdamState::zeros(flat.size());

  TrainResult result;
  Tape tape;
  AlignedDoubles adjoints;
  Eigen::VectorXd grads(flat.size());

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const auto interior = sample_interior(spec, tc.plan, epoch);
    const auto boundary = sample_boundary(spec, tc.plan, epoch);

    tape.reset();
    params = MlpParams::unflatten(mlp_config, flat);
    const LiftedMlp net = lift_params(tape, mlp_config, params);
    LossTerms loss;
    try {
      loss = assemble_loss(tape, spec, net, interior, boundary);
    } catch (const NumericalFailure& err) {
      throw NumericalFailure("epoch " + std::to_string(epoch) + ": " + err.what());
    }
    const double loss_total = tape.value(loss.total);
    if (!std::isfinite(loss_total)) {
      throw NumericalFailure("epoch " + std::to_string(epoch) + ": non-finite loss");
    }
    const double loss_res = tape.value(loss.res_term);
    const double loss_data = tape.value(loss.data_term);

    tape.backward_into(loss.total.id, adjoints);
    for (Eigen::Index i = 0; i < flat.size(); ++i) grads[i] = adjoints[static_cast<std::size_t>(i)];
    adam_step_inplace(adam, flat, grads, tc.adam, tc.adam.lr_at(epoch));

    const bool eval_now = ((epoch + 1) % tc.eval_every == 0) || (epoch + 1 == tc.epochs);
    if (eval_now) {
      params = MlpParams::unflatten(mlp_config, flat);
      LearningCurveRow row;
      row.epoch = epoch;
      row.loss_total = loss_total;
      row.loss_res = loss_res;
      row.loss_data = loss_data;
      if (grid) {
        row.rel_l2 = relative_l2(mlp_config, params, spec, *grid);
        row.has_rel = true;
      }
      result.curve.rows.push_back(row);
      if (on_eval) on_eval(epoch, params);
    }
  }

  result.params = MlpParams::unflatten(mlp_config, flat);
  return result;
}

// ---- evaluation metrics ------------------------------------------------------------

std::vector<double> residual_rms_components(const MlpConfig& config, const MlpParams& params,
                                            const ProblemSpec& spec, const EvalGrid& grid) {
  const int dim = grid.dim;
  const int P = static_cast<int>(grid.points.size()) / dim;
  const auto dirs = spec.jet_dirs();
  std::vector<double> sum_sq(static_cast<std::size_t>(spec.n_outputs), 0.0);
  int n_components = 0;
  Tape tape;
  for (int p = 0; p < P; ++p) {
    const std::span<const double> pt = std::span<const double>(grid.points)
                                           .subspan(static_cast<std::size_t>(p) * dim, dim);
    const auto scaled = spec.to_scaled(pt);
    std::vector<PlainFieldJets> jets(static_cast<std::size_t>(spec.n_outputs));
    for (auto& j : jets) {
      j.d1.assign(static_cast<std::size_t>(dim), 0.0);
      j.d2.assign(static_cast<std::size_t>(dim), 0.0);
    }
    for (int d : dirs) {
      const auto per_output = forward_jet_plain(config, params, scaled, d);
      for (int c = 0; c < spec.n_outputs; ++c) {
        jets[static_cast<std::size_t>(c)].u = per_output[static_cast<std::size_t>(c)].v;
        jets[static_cast<std::size_t>(c)].d1[static_cast<std::size_t>(d)] =
            per_output[static_cast<std::size_t>(c)].d1;
        jets[static_cast<std::size_t>(c)].d2[static_cast<std::size_t>(d)] =
            per_output[static_cast<std::size_t>(c)].d2;
      }
    }
    tape.reset();
    const auto residuals = residual_from_values(tape, spec, scaled, jets);
    n_components = static_cast<int>(residuals.size());
    for (std::size_t c = 0; c < residuals.size(); ++c) {
      const double r = tape.value(residuals[c]);
      sum_sq[c] += r * r;
    }
  }
  std::vector<double> rms(static_cast<std::size_t>(n_components));
  for (std::size_t c = 0; c < rms.size(); ++c) rms[c] = std::sqrt(sum_sq[c] / P);
  return rms;
}

double constraint_rms(const MlpConfig& config, const MlpParams& params, const ProblemSpec& spec,
                      const std::vector<BoundarySample>& samples) {
  if (samples.empty()) throw std::invalid_argument("constraint_rms: no samples");
  Tape tape;
  const LiftedMlp net = lift_params(tape, config, params);
  double acc = 0.0;
  for (const auto& sample : samples) {
    const ConstraintSpec& c = spec.constraints[static_cast<std::size_t>(sample.constraint)];
    const double m = tape.value(constraint_at(tape, spec, net, c, sample.point));
    acc += m * m;
  }
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

double check_loss_gradient(const ProblemSpec& spec, const MlpConfig& config,
                           const MlpParams& params, std::span<const double> interior,
                           const std::vector<BoundarySample>& boundary, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("check_loss_gradient: h must be positive");
  auto loss_at = [&](const Eigen::VectorXd& theta) {
    Tape tape;
    const MlpParams p = MlpParams::unflatten(config, theta);
    const LiftedMlp net = lift_params(tape, config, p);
    const double value = tape.value(assemble_loss(tape, spec, net, interior, boundary).total);
    if (!std::isfinite(value)) throw NumericalFailure("check_loss_gradient: non-finite loss");
    return value;
  };

  Eigen::VectorXd flat = params.flatten();
  Tape tape;
  const LiftedMlp net = lift_params(tape, config, params);
  const LossTerms loss = assemble_loss(tape, spec, net, interior, boundary);
  AlignedDoubles adj;
  tape.backward_into(loss.total.id, adj);

  // Deeply saturated units carry gradients far below the finite-difference
  // noise floor; errors are therefore measured against the gradient scale.
  double scale = 1e-12;
  for (std::uint32_t i = 0; i < net.n_params; ++i) scale = std::max(scale, std::abs(adj[i]));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + h;
    const double fp = loss_at(flat);
    flat[i] = saved - h;
    const double fm = loss_at(flat);
    flat[i] = saved;
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(adj[static_cast<std::size_t>(i)] - fd) / scale);
  }
  return worst;
}

}  // namespace vspinn
