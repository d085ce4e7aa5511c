#include "vspinn/config.hpp"
#include "vspinn/runner.hpp"
#include "vspinn/training.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  CLI::App app{"vspinn: variable-scaling physics-informed neural network trainer"};
  app.require_subcommand(1);

  std::string config_path, out_dir, scale_arg;
  long seed = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key/value config file");
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", seed, "seed (overrides config)");
    cmd->add_option("--scale", scale_arg, "scale factor N, or comma list for sweep");
  };
  CLI::App* cmd_train = app.add_subcommand("train", "run one training");
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "train across a list of scale factors");
  CLI::App* cmd_ntk = app.add_subcommand("ntk", "measure NTK traces across scales");
  CLI::App* cmd_check = app.add_subcommand("check", "autodiff/jet self-test");
  for (CLI::App* cmd : {cmd_train, cmd_sweep, cmd_ntk, cmd_check}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    vspinn::RunConfig config = config_path.empty() ? vspinn::RunConfig{}
                                                   : vspinn::parse_config_file(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    if (!scale_arg.empty()) {
      if (app.got_subcommand(cmd_sweep) || app.got_subcommand(cmd_ntk)) {
        std::vector<double> scales;
        std::stringstream ss(scale_arg);
        std::string cell;
        while (std::getline(ss, cell, ',')) scales.push_back(std::stod(cell));
        if (app.got_subcommand(cmd_sweep)) {
          config.scale_list = scales;
        } else {
          config.ntk_scales = scales;
        }
      } else {
        config.N = std::stod(scale_arg);
        if (config.N < 1.0) throw std::invalid_argument("config key 'N': must be >= 1");
      }
    }

    if (app.got_subcommand(cmd_train)) {
      vspinn::run_train(config);
    } else if (app.got_subcommand(cmd_sweep)) {
      vspinn::run_sweep(config);
    } else if (app.got_subcommand(cmd_ntk)) {
      vspinn::run_ntk(config);
    } else if (app.got_subcommand(cmd_check)) {
      return vspinn::run_check(config) == 0 ? 0 : 1;
    }
    return 0;
  } catch (const vspinn::NumericalFailure& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
