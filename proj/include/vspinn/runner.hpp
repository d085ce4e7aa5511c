#pragma once

#include "vspinn/config.hpp"
#include "vspinn/problems.hpp"
#include "vspinn/training.hpp"

#include <string>

namespace vspinn {

/// Scaled problem + derived objects for one run, resolved from a RunConfig.
struct ResolvedRun {
  ProblemSpec spec;     // already scaled by config.N with weights installed
  MlpConfig mlp;
  TrainConfig tc;
};
ResolvedRun resolve_run(const RunConfig& config);

/// `train`: one training run; writes curve.csv, prediction.csv,
/// checkpoint.txt, curve.svg, config.cfg and manifest.txt into config.out_dir.
void run_train(const RunConfig& config);

/// `sweep`: one training run per scale in config.scale_list (subdirectory
/// N_<scale> each) plus a combined comparison.csv and sweep.svg.
void run_sweep(const RunConfig& config);

/// `ntk`: trace measurement across config.ntk_scales; writes ntk_report.txt,
/// ntk_traces.csv and ntk_loglog.svg.
void run_ntk(const RunConfig& config);

/// `check`: autodiff self-test (gradient + jet checks over the problem
/// catalog). Prints one line per check; returns the number of failures.
int run_check(const RunConfig& config);

}  // namespace vspinn
