#pragma once

#include "vspinn/mlp.hpp"
#include "vspinn/training.hpp"

#include <string>
#include <vector>

namespace vspinn {

/// Everything a run needs, resolved from the flat key/value config text.
/// Unknown keys are rejected; defaults are documented in README and echoed
/// to the run manifest by effective_config().
struct RunConfig {
  // problem selection
  std::string problem = "poisson_sin";
  double epsilon = 1e-6;  // boundary_layer parameter
  double N = 1.0;
  bool has_weights = false;  // explicit lambda overrides problem defaults
  double lambda_res = 1.0, lambda_data = 1.0;

  // network
  std::vector<int> hidden = {2, 32};
  ActKind activation = ActKind::Tanh;
  Parameterization parameterization = Parameterization::Standard;
  InitSpec init = InitSpec::glorot();

  // optimization / sampling
  int epochs = 2000;
  AdamConfig adam;
  int n_interior = 1000;
  std::vector<int> n_boundary_per;  // per-constraint counts; empty = proportional
  int n_boundary = 64;              // total, used when per-constraint empty
  int n_near_feature = 0;
  double annulus_inner = -1.0, annulus_outer = -1.0;
  bool resample_each_epoch = true;
  int eval_every = 200;
  std::vector<int> eval_grid;  // defaults per problem when empty

  std::uint64_t seed = 0;
  std::string out_dir = "out";

  // sweep
  std::vector<double> scale_list;

  // ntk measurement
  std::vector<double> ntk_scales = {2, 4, 8, 16, 32};
  int ntk_width = 40000;
  int ntk_seeds = 16;
  int ntk_boundary = 64;
  int ntk_interior = 128;

  std::string preset;  // recorded for the manifest
};

/// Parses the flat key/value schema (UTF-8, '#' comments). A `preset=` key
/// loads one of the shipped experiment presets first; explicit keys override
/// preset values regardless of order. Throws std::invalid_argument naming
/// the offending key.
RunConfig parse_config(const std::string& text);

/// Convenience: read a file and parse it.
RunConfig parse_config_file(const std::string& path);

/// The fully-resolved configuration as sorted key=value lines (the manifest
/// echo). parse_config(effective_config(c)) reproduces c.
std::string effective_config(const RunConfig& config);

std::vector<std::string> preset_names();

/// Derived objects.
MlpConfig mlp_config_from(const RunConfig& config, int input_dim, int output_dim);
SamplePlan sample_plan_from(const RunConfig& config);
std::vector<int> default_eval_grid(const std::string& problem);

}  // namespace vspinn
