#include "vspinn/runner.hpp"

#include "vspinn/gradcheck.hpp"
#include "vspinn/jet.hpp"
#include "vspinn/ntk.hpp"
#include "vspinn/reference.hpp"
#include "vspinn/rng.hpp"
#include "vspinn/svg.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace vspinn {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> coord_names(const ProblemSpec& spec) {
  if (spec.name == "navier_stokes") return {"x", "y"};
  if (spec.dim() == 2) return {"x", "t"};
  return {"x"};
}

std::vector<std::string> field_names(const ProblemSpec& spec) {
  if (spec.name == "navier_stokes") return {"u", "v", "p"};
  return {"u"};
}

void write_prediction_csv(const std::string& path, const ProblemSpec& spec,
                          const EvalGrid& grid, const Eigen::MatrixXd& fields) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const auto coords = coord_names(spec);
  const auto names = field_names(spec);
  for (std::size_t i = 0; i < coords.size(); ++i) out << coords[i] << ",";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << (i + 1 < names.size() ? "," : "\n");
  }
  char buf[40];
  const int dim = grid.dim;
  const auto P = static_cast<Eigen::Index>(grid.points.size() / static_cast<std::size_t>(dim));
  for (Eigen::Index p = 0; p < P; ++p) {
    for (int i = 0; i < dim; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g",
                    grid.points[static_cast<std::size_t>(p) * dim + static_cast<std::size_t>(i)]);
      out << buf << ",";
    }
    for (Eigen::Index c = 0; c < fields.rows(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", fields(c, p));
      out << buf << (c + 1 < fields.rows() ? "," : "\n");
    }
  }
}

void write_manifest(const std::string& dir, const std::string& command, const RunConfig& config,
                    double wall_seconds, const std::vector<std::string>& artifacts) {
  {
    std::ofstream cfg(dir + "/config.cfg");
    cfg << "# effective configuration (defaults resolved); reusable as --config\n";
    cfg << effective_config(config);
  }
  std::ofstream out(dir + "/manifest.txt");
  out << "vspinn manifest 1\n";
  out << "command " << command << "\n";
  out << "seed " << config.seed << "\n";
  if (!config.preset.empty()) out << "preset " << config.preset << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", wall_seconds);
  out << "wall_time_seconds " << buf << "\n";
  out << "artifacts";
  for (const auto& a : artifacts) out << " " << a;
  out << " config.cfg\n";
  out << "\n# effective configuration\n" << effective_config(config);
}

}  // namespace

ResolvedRun resolve_run(const RunConfig& config) {
  ProblemParams pp;
  pp.epsilon = config.epsilon;
  ProblemSpec base = make_problem(config.problem, pp);
  ResolvedRun run{
      config.has_weights
          ? scale_problem(base, config.N, {config.lambda_res, config.lambda_data})
          : scale_problem(base, config.N),
      mlp_config_from(config, base.dim(), base.n_outputs),
      {}};
  run.tc.epochs = config.epochs;
  run.tc.adam = config.adam;
  run.tc.plan = sample_plan_from(config);
  run.tc.N = config.N;
  run.tc.eval_every = config.eval_every;
  run.tc.eval_grid = config.eval_grid.empty() ? default_eval_grid(config.problem) : config.eval_grid;
  run.tc.seed = config.seed;
  return run;
}

void run_train(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  ResolvedRun run = resolve_run(config);
  fs::create_directories(config.out_dir);

  std::optional<ReferenceGrid> reference;
  if (config.problem == "allen_cahn") reference = allen_cahn_reference(1024, 10000);

  TrainResult result = train(run.spec, run.mlp, run.tc, reference ? &*reference : nullptr);

  {
    std::ofstream out(config.out_dir + "/curve.csv");
    result.curve.write_csv(out);
  }
  const EvalGrid grid = reference ? eval_grid_from_reference(*reference)
                                  : make_eval_grid(run.spec, run.tc.eval_grid);
  const Eigen::MatrixXd fields = predict_grid(run.mlp, result.params, run.spec, grid);
  write_prediction_csv(config.out_dir + "/prediction.csv", run.spec, grid, fields);
  save_checkpoint(config.out_dir + "/checkpoint.txt", run.mlp, result.params);

  bool have_rel = false;
  std::vector<SvgSeries> series(1);
  series[0].label = "N=" + std::to_string(config.N);
  for (const auto& row : result.curve.rows) {
    if (row.has_rel) {
      series[0].points.emplace_back(row.epoch, row.rel_l2);
      have_rel = true;
    }
  }
  if (!have_rel) {
    series[0].points.clear();
    for (const auto& row : result.curve.rows) series[0].points.emplace_back(row.epoch, row.loss_total);
  }
  if (!series[0].points.empty()) {
    write_line_chart_svg(config.out_dir + "/curve.svg",
                         config.problem + (have_rel ? ": relative L2 error" : ": total loss"),
                         "epoch", have_rel ? "relative L2" : "loss", series, false, true);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(config.out_dir, "train", config, wall,
                 {"curve.csv", "prediction.csv", "checkpoint.txt", "curve.svg"});
  std::cout << "train: wrote " << config.out_dir << "/curve.csv";
  if (!result.curve.rows.empty() && result.curve.rows.back().has_rel) {
    std::cout << " (final rel_l2 " << result.curve.rows.back().rel_l2 << ")";
  }
  std::cout << "\n";
}

void run_sweep(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  if (config.scale_list.empty()) {
    throw std::invalid_argument("sweep needs scale_list (or --scale N1,N2,...)");
  }
  fs::create_directories(config.out_dir);

  std::vector<LearningCurve> curves;
  std::vector<std::string> labels;
  for (const double N : config.scale_list) {
    RunConfig member = config;
    member.N = N;
    char nbuf[32];
    std::snprintf(nbuf, sizeof nbuf, "%g", N);
    member.out_dir = config.out_dir + "/N_" + nbuf;
    run_train(member);
    std::ifstream in(member.out_dir + "/curve.csv");
    curves.push_back(LearningCurve::read_csv(in));
    labels.emplace_back(std::string("N=") + nbuf);
  }

  // Combined comparison: one rel_l2 column per scale, joined on epoch rows.
  {
    std::ofstream out(config.out_dir + "/comparison.csv");
    out << "epoch";
    for (const auto& label : labels) out << ",rel_l2_" << label.substr(2);
    out << "\n";
    char buf[40];
    const std::size_t n_rows = curves.front().rows.size();
    for (std::size_t r = 0; r < n_rows; ++r) {
      out << curves.front().rows[r].epoch;
      for (const auto& curve : curves) {
        if (r < curve.rows.size() && curve.rows[r].has_rel) {
          std::snprintf(buf, sizeof buf, "%.17g", curve.rows[r].rel_l2);
          out << "," << buf;
        } else {
          out << ",NA";
        }
      }
      out << "\n";
    }
  }

  std::vector<SvgSeries> series;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    SvgSeries s;
    s.label = labels[i];
    for (const auto& row : curves[i].rows) {
      if (row.has_rel) s.points.emplace_back(row.epoch, row.rel_l2);
    }
    if (!s.points.empty()) series.push_back(std::move(s));
  }
  if (!series.empty()) {
    write_line_chart_svg(config.out_dir + "/sweep.svg", config.problem + ": scale comparison",
                         "epoch", "relative L2", series, false, true);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(config.out_dir, "sweep", config, wall, {"comparison.csv", "sweep.svg"});
  std::cout << "sweep: wrote " << config.out_dir << "/comparison.csv\n";
}

void run_ntk(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(config.out_dir);

  MlpConfig arch;
  arch.input_dim = 1;
  arch.output_dim = 1;
  arch.hidden = {config.ntk_width};
  arch.activation = ActKind::CubicRelu;
  arch.parameterization = Parameterization::NtkScaled;
  arch.init = InitSpec::gaussian(1.0);

  const NtkReport report = measure_ntk(arch, config.ntk_scales, config.ntk_boundary,
                                       config.ntk_interior, config.ntk_seeds, config.seed);
  {
    std::ofstream out(config.out_dir + "/ntk_report.txt");
    report.write_report(out);
  }
  {
    std::ofstream out(config.out_dir + "/ntk_traces.csv");
    report.write_csv(out);
  }
  std::vector<SvgSeries> series(2);
  series[0].label = "Tr(K_uu)/N_b";
  series[1].label = "Tr(K_rr)/N_r";
  for (const auto& row : report.rows) {
    series[0].points.emplace_back(row.N, row.kuu);
    series[1].points.emplace_back(row.N, row.krr);
  }
  write_line_chart_svg(config.out_dir + "/ntk_loglog.svg", "averaged NTK traces vs scale", "N",
                       "trace", series, true, true);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(config.out_dir, "ntk", config, wall,
                 {"ntk_report.txt", "ntk_traces.csv", "ntk_loglog.svg"});
  std::cout << "ntk: slopes kuu " << report.kuu_fit.slope << ", krr " << report.krr_fit.slope
            << "\n";
}

int run_check(const RunConfig& config) {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, double value) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << value << ")\n";
    if (!ok) ++failures;
  };

  {
    Tape tape;
    Jet2 x{tape.lift(LeafKind::Input, 3.0), tape.constant(1.0), tape.constant(0.0)};
    Jet2 y = x * x;
    const double err = std::abs(tape.value(y.v) - 9.0) + std::abs(tape.value(y.d1) - 6.0) +
                       std::abs(tape.value(y.d2) - 2.0);
    report("jet: x^2 derivatives at x=3", err < 1e-12, err);
  }
  {
    Tape tape;
    Jet2 x{tape.lift(LeafKind::Input, 2.0), tape.constant(1.0), tape.constant(0.0)};
    Jet2 y = cubic_relu(x);
    const double err = std::abs(tape.value(y.v) - 8.0) + std::abs(tape.value(y.d1) - 12.0) +
                       std::abs(tape.value(y.d2) - 12.0);
    report("jet: cubic_relu derivatives at x=2", err < 1e-12, err);
  }
  {
    ScalarBuilder quad = [](Tape&, std::span<const Var> leaves) {
      return leaves[0] * leaves[0] + 2.5 * (leaves[0] * leaves[1]);
    };
    const double point[] = {0.8, -1.1};
    const double err = check_gradient(quad, point, 1e-4);
    report("gradcheck: quadratic", err < 1e-9, err);
  }

  const std::vector<std::pair<std::string, double>> cases = {
      {"poisson_sin", 1.0}, {"poisson_sin", 8.0},  {"boundary_layer", 1.0},
      {"boundary_layer", 50.0}, {"wave1d", 1.0},   {"wave1d", 10.0},
      {"allen_cahn", 1.0},  {"allen_cahn", 100.0}, {"navier_stokes", 1.0},
      {"navier_stokes", 10.0}};
  int case_idx = 0;
  for (const auto& [name, N] : cases) {
    ProblemParams pp;
    pp.epsilon = 1e-3;
    const ProblemSpec spec = scale_problem(make_problem(name, pp), N);
    MlpConfig mlp;
    mlp.input_dim = spec.dim();
    mlp.output_dim = spec.n_outputs;
    mlp.hidden = {8, 8};
    mlp.seed = config.seed + static_cast<std::uint64_t>(100 + case_idx);
    const MlpParams params = init_params(mlp);
    SamplePlan plan;
    plan.n_interior = 4;
    plan.n_boundary_total = static_cast<int>(2 * spec.constraints.size());
    plan.seed = config.seed + static_cast<std::uint64_t>(case_idx);
    const auto interior = sample_interior(spec, plan, 0);
    const auto boundary = sample_boundary(spec, plan, 0);
    const double err = check_loss_gradient(spec, mlp, params, interior, boundary, 1e-4);
    char label[96];
    std::snprintf(label, sizeof label, "loss gradient: %s N=%g", name.c_str(), N);
    report(label, err < 1e-5, err);
    ++case_idx;
  }
  std::cout << (failures == 0 ? "check: all gradient/jet self-tests passed\n"
                              : "check: FAILURES present\n");
  return failures;
}

}  // namespace vspinn
