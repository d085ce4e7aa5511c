// Acceptance suite: one self-contained check per criterion, each printing a
// single [PASS]/[FAIL] line. Run all (default) or one with --criterion k.

#include "vspinn/config.hpp"
#include "vspinn/gradcheck.hpp"
#include "vspinn/mlp.hpp"
#include "vspinn/ntk.hpp"
#include "vspinn/problems.hpp"
#include "vspinn/reference.hpp"
#include "vspinn/rng.hpp"
#include "vspinn/runner.hpp"
#include "vspinn/sampling.hpp"
#include "vspinn/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace vspinn;

struct Outcome {
  bool pass = false;
  std::string details;
};

// ---------------------------------------------------------------------------
// 1. Autodiff correctness, property-based: 200 seeded cases over all problem
//    residual pipelines. Loss parameter gradients vs central FD within 1e-5
//    relative (of the gradient scale); jet d1/d2 vs FD within 1e-6/1e-4.
// ---------------------------------------------------------------------------

double loss_gradient_max_error(const ProblemSpec& spec, const MlpConfig& mlp,
                               const MlpParams& params, std::span<const double> interior,
                               const std::vector<BoundarySample>& boundary) {
  Eigen::VectorXd flat = params.flatten();
  auto loss_at = [&](const Eigen::VectorXd& theta) {
    Tape tape;
    const MlpParams p = MlpParams::unflatten(mlp, theta);
    const LiftedMlp net = lift_params(tape, mlp, p);
    return tape.value(assemble_loss(tape, spec, net, interior, boundary).total);
  };

  Tape tape;
  const LiftedMlp net = lift_params(tape, mlp, params);
  const LossTerms loss = assemble_loss(tape, spec, net, interior, boundary);
  AlignedDoubles adj;
  tape.backward_into(loss.total.id, adj);

  double grad_scale = 1e-12;
  for (std::uint32_t i = 0; i < net.n_params; ++i) {
    grad_scale = std::max(grad_scale, std::abs(adj[i]));
  }
  const double h = 1e-4;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + h;
    const double fp = loss_at(flat);
    flat[i] = saved - h;
    const double fm = loss_at(flat);
    flat[i] = saved;
    const double fd = (fp - fm) / (2 * h);
    worst = std::max(worst, std::abs(adj[static_cast<std::size_t>(i)] - fd) / grad_scale);
  }
  return worst;
}

Outcome criterion_1() {
  const char* problems[] = {"poisson_sin", "boundary_layer", "wave1d", "allen_cahn",
                            "navier_stokes"};
  const double scales[] = {1.0, 3.0, 10.0};
  double worst_grad = 0.0, worst_d1 = 0.0, worst_d2 = 0.0;
  int n_cases = 0;

  for (int c = 0; c < 200; ++c) {
    const std::string name = problems[c % 5];
    const double N = scales[(c / 5) % 3];
    ProblemParams pp;
    pp.epsilon = 1e-6;
    const ProblemSpec spec = scale_problem(make_problem(name, pp), N);

    MlpConfig mlp;
    mlp.input_dim = spec.dim();
    mlp.output_dim = spec.n_outputs;
    const int width = 4 + 2 * ((c / 15) % 3);
    mlp.hidden = {width, width};
    mlp.activation = ActKind::Tanh;
    mlp.seed = 10000 + static_cast<std::uint64_t>(c);
    const MlpParams params = init_params(mlp);

    SamplePlan plan;
    plan.n_interior = 3;
    plan.n_boundary_total = static_cast<int>(2 * spec.constraints.size());
    plan.seed = 999 + static_cast<std::uint64_t>(c);
    const auto interior = sample_interior(spec, plan, 0);
    const auto boundary = sample_boundary(spec, plan, 0);

    worst_grad = std::max(worst_grad,
                          loss_gradient_max_error(spec, mlp, params, interior, boundary));

    // jet check at the first interior point, one direction per case
    const int dir = c % spec.dim();
    std::vector<double> x(interior.begin(), interior.begin() + spec.dim());
    const auto jets = forward_jet_plain(mlp, params, x, dir);
    auto eval = [&](double delta) {
      auto xx = x;
      xx[static_cast<std::size_t>(dir)] += delta;
      return forward_plain(mlp, params, xx)[0];
    };
    const double h = 1e-4;
    auto central = [&](double step) { return (eval(step) - eval(-step)) / (2 * step); };
    const double fd1 = (4.0 * central(h / 2) - central(h)) / 3.0;
    const double fd2 = (eval(h) - 2 * eval(0.0) + eval(-h)) / (h * h);
    worst_d1 = std::max(worst_d1, std::abs(jets[0].d1 - fd1) /
                                      std::max({std::abs(jets[0].d1), std::abs(fd1), 1.0}));
    worst_d2 = std::max(worst_d2, std::abs(jets[0].d2 - fd2) /
                                      std::max({std::abs(jets[0].d2), std::abs(fd2), 1.0}));
    ++n_cases;
  }

  Outcome out;
  out.pass = worst_grad < 1e-5 && worst_d1 < 1e-6 && worst_d2 < 1e-4;
  std::ostringstream ss;
  ss << n_cases << " cases; max grad err " << worst_grad << " (<1e-5), max d1 err " << worst_d1
     << " (<1e-6), max d2 err " << worst_d2 << " (<1e-4)";
  out.details = ss.str();
  return out;
}

// ---------------------------------------------------------------------------
// 2. NTK closed form: Tr(K_uu)/N_b at width 40000, one-hidden-layer
//    cubic_relu, N(0,1) init, 16 seeds, within 5% of
//    21x^6 + 63x^4 + 63x^2 + 21 at x in {0, 1, 2, 5}.
// ---------------------------------------------------------------------------

Outcome criterion_2() {
  const double xs[] = {0.0, 1.0, 2.0, 5.0};
  const int n_seeds = 16;
  double worst_rel = 0.0;
  std::ostringstream ss;
  for (const double x : xs) {
    double acc = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
      MlpConfig config;
      config.input_dim = 1;
      config.output_dim = 1;
      config.hidden = {40000};
      config.activation = ActKind::CubicRelu;
      config.parameterization = Parameterization::NtkScaled;
      config.init = InitSpec::gaussian(1.0);
      config.seed = 20260 + static_cast<std::uint64_t>(s);
      const double pt[1] = {x};
      acc += trace_kuu(config, init_params(config), pt);
    }
    const double measured = acc / n_seeds;
    const double limit = closed_form_kuu_limit(x);
    const double rel = std::abs(measured - limit) / limit;
    worst_rel = std::max(worst_rel, rel);
    ss << "x=" << x << ": " << measured << " vs " << limit << " (" << rel * 100 << "%); ";
  }
  Outcome out;
  out.pass = worst_rel < 0.05;
  out.details = ss.str() + "max rel " + std::to_string(worst_rel);
  return out;
}

// ---------------------------------------------------------------------------
// 3. NTK slopes over N in {2,4,8,16,32}: boundary-trace slope in [5.5, 6.5],
//    interior-trace slope <= 2.3.
// ---------------------------------------------------------------------------

Outcome criterion_3() {
  MlpConfig arch;
  arch.input_dim = 1;
  arch.output_dim = 1;
  arch.hidden = {40000};
  arch.activation = ActKind::CubicRelu;
  arch.parameterization = Parameterization::NtkScaled;
  arch.init = InitSpec::gaussian(1.0);
  const std::vector<double> scales = {2, 4, 8, 16, 32};
  const NtkReport report = measure_ntk(arch, scales, 64, 128, 16, 31);
  Outcome out;
  out.pass = report.kuu_fit.slope >= 5.5 && report.kuu_fit.slope <= 6.5 &&
             report.krr_fit.slope <= 2.3;
  std::ostringstream ss;
  ss << "kuu slope " << report.kuu_fit.slope << " (in [5.5,6.5]), krr slope "
     << report.krr_fit.slope << " (<=2.3)";
  out.details = ss.str();
  return out;
}

// ---------------------------------------------------------------------------
// 4. Boundary layer, eps=1e-6: VS (N=1000) reaches rel L2 < 5e-2 while the
//    standard PINN stays > 0.5 at the same budget (<= 30000 epochs).
// ---------------------------------------------------------------------------

double run_boundary_layer(double N, int epochs) {
  ProblemParams pp;
  pp.epsilon = 1e-6;
  const ProblemSpec spec = scale_problem(make_problem("boundary_layer", pp), N);
  MlpConfig mlp;
  mlp.input_dim = 1;
  mlp.output_dim = 1;
  mlp.hidden = std::vector<int>(8, 20);
  mlp.activation = ActKind::Tanh;
  mlp.seed = 404;
  TrainConfig tc;
  tc.epochs = epochs;
  tc.plan.n_interior = 1000;
  tc.plan.n_boundary = {1, 1};
  tc.plan.seed = 404;
  tc.N = N;
  tc.eval_every = 1000;
  tc.eval_grid = {10001};
  const TrainResult result = train(spec, mlp, tc);
  return result.curve.rows.back().rel_l2;
}

Outcome criterion_4() {
  const int budget = 12000;  // <= 30000 per the criterion
  const double rel_vs = run_boundary_layer(1000.0, budget);
  const double rel_std = run_boundary_layer(1.0, budget);
  Outcome out;
  out.pass = rel_vs < 5e-2 && rel_std > 0.5;
  std::ostringstream ss;
  ss << "N=1000 rel " << rel_vs << " (<5e-2), N=1 rel " << rel_std << " (>0.5) at " << budget
     << " epochs";
  out.details = ss.str();
  return out;
}

// ---------------------------------------------------------------------------
// 5. Wave, desk scale: rel(N=10) <= 0.2 * rel(N=1) and the final ordering
//    rel(10) < rel(4) < rel(1) at matched budget.
// ---------------------------------------------------------------------------

double run_wave(double N) {
  const ProblemSpec spec = scale_problem(make_problem("wave1d"), N);  // (1/N^4, 2)
  MlpConfig mlp;
  mlp.input_dim = 2;
  mlp.output_dim = 1;
  mlp.hidden = std::vector<int>(4, 64);
  mlp.activation = ActKind::Tanh;
  mlp.seed = 505;
  TrainConfig tc;
  tc.epochs = 20000;
  tc.plan.n_interior = 2000;
  tc.plan.n_boundary_total = 256;
  tc.plan.seed = 505;
  tc.N = N;
  tc.eval_every = 1000;
  tc.eval_grid = {256, 101};
  const TrainResult result = train(spec, mlp, tc);
  return result.curve.rows.back().rel_l2;
}

Outcome criterion_5() {
  const double rel_1 = run_wave(1.0);
  const double rel_4 = run_wave(4.0);
  const double rel_10 = run_wave(10.0);
  Outcome out;
  out.pass = (rel_10 <= 0.2 * rel_1) && (rel_10 < rel_4) && (rel_4 < rel_1);
  std::ostringstream ss;
  ss << "rel N=1 " << rel_1 << ", N=4 " << rel_4 << ", N=10 " << rel_10
     << "; need rel10<=0.2*rel1 and rel10<rel4<rel1";
  out.details = ss.str();
  return out;
}

// ---------------------------------------------------------------------------
// 6. Allen-Cahn, desk scale, unsupervised, error against the IMEX oracle:
//    final rel(N=100) <= 0.5 * rel(N=1).
// ---------------------------------------------------------------------------

double run_allen_cahn(double N, const ReferenceGrid& reference) {
  const ProblemSpec spec = scale_problem(make_problem("allen_cahn"), N);  // (0.3, 2)
  MlpConfig mlp;
  mlp.input_dim = 2;
  mlp.output_dim = 1;
  mlp.hidden = std::vector<int>(4, 32);
  mlp.activation = ActKind::Tanh;
  mlp.seed = 606;
  TrainConfig tc;
  tc.epochs = 20000;
  tc.plan.n_interior = 2500;
  tc.plan.n_boundary = {200, 128, 128};
  tc.plan.seed = 606;
  tc.N = N;
  tc.eval_every = 1000;
  const TrainResult result = train(spec, mlp, tc, &reference);
  return result.curve.rows.back().rel_l2;
}

Outcome criterion_6() {
  const ReferenceGrid reference = allen_cahn_reference(1024, 10000);
  const double rel_1 = run_allen_cahn(1.0, reference);
  const double rel_100 = run_allen_cahn(100.0, reference);
  Outcome out;
  out.pass = rel_100 <= 0.5 * rel_1;
  std::ostringstream ss;
  ss << "rel N=1 " << rel_1 << ", N=100 " << rel_100 << "; need rel100 <= 0.5*rel1";
  out.details = ss.str();
  return out;
}

// ---------------------------------------------------------------------------
// 7. Scale-factor failure mode on the Poisson sweep:
//    error(N=2) < error(N=1) < error(N=1000).
// ---------------------------------------------------------------------------

double run_poisson_sweep(double N) {
  const ProblemSpec spec = scale_problem(make_problem("poisson_sin"), N, {1.0, 1.0});
  MlpConfig mlp;
  mlp.input_dim = 1;
  mlp.output_dim = 1;
  mlp.hidden = {4096};
  mlp.activation = ActKind::CubicRelu;
  mlp.parameterization = Parameterization::NtkScaled;
  mlp.init = InitSpec::gaussian(0.1);
  mlp.seed = 707;
  TrainConfig tc;
  tc.epochs = 3000;
  tc.plan.n_interior = 50;
  tc.plan.n_boundary = {1, 1};
  tc.plan.seed = 707;
  tc.N = N;
  tc.eval_every = 500;
  tc.eval_grid = {1001};
  const TrainResult result = train(spec, mlp, tc);
  return result.curve.rows.back().rel_l2;
}

Outcome criterion_7() {
  const double e1 = run_poisson_sweep(1.0);
  const double e2 = run_poisson_sweep(2.0);
  const double e1000 = run_poisson_sweep(1000.0);
  Outcome out;
  out.pass = e2 < e1 && e1 < e1000;
  std::ostringstream ss;
  ss << "err N=1 " << e1 << ", N=2 " << e2 << ", N=1000 " << e1000
     << "; need e(2) < e(1) < e(1000)";
  out.details = ss.str();
  return out;
}

// ---------------------------------------------------------------------------
// 8. Navier-Stokes, desk scale (N=10): dense-grid residual RMS drops >= 100x
//    from initialization, boundary RMS < 5e-2, mass-conservation RMS < 5e-2.
// ---------------------------------------------------------------------------

Outcome criterion_8() {
  const ProblemSpec spec = scale_problem(make_problem("navier_stokes"), 10.0);  // (1/100, 2)
  MlpConfig mlp;
  mlp.input_dim = 2;
  mlp.output_dim = 3;
  mlp.hidden = std::vector<int>(5, 40);
  mlp.activation = ActKind::Tanh;
  mlp.seed = 808;
  TrainConfig tc;
  tc.epochs = 10000;
  tc.plan.n_interior = 3000;
  tc.plan.n_near_feature = 300;
  tc.plan.n_boundary_total = 600;
  tc.plan.seed = 808;
  tc.N = 10.0;
  tc.eval_every = 1000;
  tc.eval_grid = {221, 83};

  const EvalGrid grid = make_eval_grid(spec, tc.eval_grid);
  auto aggregate_rms = [&](const MlpParams& params) {
    const auto rms = residual_rms_components(mlp, params, spec, grid);
    double sq = 0.0;
    for (double r : rms) sq += r * r;
    return std::sqrt(sq);
  };

  const MlpParams init = init_params(mlp);
  const double rms_init = aggregate_rms(init);

  const TrainResult result = train(spec, mlp, tc);
  const double rms_final = aggregate_rms(result.params);
  const double mass_rms = residual_rms_components(mlp, result.params, spec, grid)[0];

  SamplePlan bc_plan;
  bc_plan.n_interior = 0;
  bc_plan.n_boundary_total = 600;
  bc_plan.seed = 2024;
  const auto bc_samples = sample_boundary(spec, bc_plan, 0);
  const double bc_rms = constraint_rms(mlp, result.params, spec, bc_samples);

  Outcome out;
  out.pass = rms_final * 100.0 <= rms_init && bc_rms < 5e-2 && mass_rms < 5e-2;
  std::ostringstream ss;
  ss << "residual RMS " << rms_init << " -> " << rms_final << " (need >=100x drop), bc RMS "
     << bc_rms << " (<5e-2), mass RMS " << mass_rms << " (<5e-2)";
  out.details = ss.str();
  return out;
}

// ---------------------------------------------------------------------------
// 9. Determinism: a train run repeated with identical config and seed yields
//    a bit-identical curve.csv.
// ---------------------------------------------------------------------------

Outcome criterion_9() {
  namespace fs = std::filesystem;
  const std::string text =
      "problem=poisson_sin\nhidden=2x16\nepochs=120\nn_interior=32\nn_boundary_per=1,1\n"
      "eval_every=20\neval_grid=101\nseed=99\n";
  RunConfig config = parse_config(text);
  const fs::path base = fs::temp_directory_path() / "vspinn_acceptance_det";
  fs::remove_all(base);
  config.out_dir = (base / "a").string();
  run_train(config);
  config.out_dir = (base / "b").string();
  run_train(config);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(base / "a" / "curve.csv");
  const std::string b = slurp(base / "b" / "curve.csv");
  Outcome out;
  out.pass = !a.empty() && a == b;
  out.details = out.pass ? "curve.csv bit-identical across reruns"
                         : "curve.csv differs between identical runs";
  fs::remove_all(base);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0) only = std::atoi(argv[i + 1]);
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"autodiff correctness (200 FD cases)", criterion_1},
      {"NTK closed form at width 40000", criterion_2},
      {"NTK log-log slopes", criterion_3},
      {"boundary layer: VS vs standard", criterion_4},
      {"wave desk scale: N ordering", criterion_5},
      {"Allen-Cahn desk scale vs IMEX oracle", criterion_6},
      {"Poisson sweep failure mode", criterion_7},
      {"Navier-Stokes desk run", criterion_8},
      {"determinism of train runs", criterion_9},
  };

  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    if (only != 0 && only != k) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& err) {
      outcome.pass = false;
      outcome.details = std::string("exception: ") + err.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char time_buf[32];
    std::snprintf(time_buf, sizeof time_buf, "%.1fs", secs);
    std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " criterion " << k << ": "
              << criteria[i].first << " — " << outcome.details << " [" << time_buf << "]\n"
              << std::flush;
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? 0 : 1;
}
