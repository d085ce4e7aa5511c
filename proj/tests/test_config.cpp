#include "vspinn/config.hpp"

#include "vspinn/runner.hpp"

#include <doctest.h>

#include <string>

using namespace vspinn;

TEST_SUITE("config") {

TEST_CASE("minimal config applies documented defaults") {
  const RunConfig c = parse_config("problem=poisson_sin\n");
  CHECK(c.problem == "poisson_sin");
  CHECK(c.N == 1.0);
  CHECK(c.adam.lr == 1e-3);
  CHECK(c.resample_each_epoch);
  CHECK_FALSE(c.has_weights);
}

TEST_CASE("comments and blank lines are ignored") {
  const RunConfig c = parse_config("# a comment\n\nproblem=wave1d  # trailing\n  N = 4 \n");
  CHECK(c.problem == "wave1d");
  CHECK(c.N == 4.0);
}

TEST_CASE("N=0 is rejected naming the key") {
  try {
    parse_config("N=0\n");
    FAIL("expected an exception");
  } catch (const std::invalid_argument& err) {
    CHECK(std::string(err.what()).find("N") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected by name") {
  try {
    parse_config("problem=wave1d\nbogus_key=3\n");
    FAIL("expected an exception");
  } catch (const std::invalid_argument& err) {
    CHECK(std::string(err.what()).find("bogus_key") != std::string::npos);
  }
}

TEST_CASE("type errors carry the key path") {
  try {
    parse_config("epochs=ten\n");
    FAIL("expected an exception");
  } catch (const std::invalid_argument& err) {
    CHECK(std::string(err.what()).find("epochs") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("n_interior=-5\n"), std::invalid_argument);
}

TEST_CASE("wave paper preset reproduces the experiment setup") {
  const RunConfig c = parse_config("preset=wave.paper\n");
  CHECK(c.problem == "wave1d");
  CHECK(c.hidden == std::vector<int>{128, 128, 128, 128});
  CHECK(c.activation == ActKind::Tanh);
  CHECK(c.n_interior == 6400);
  CHECK(c.n_boundary == 512);
  CHECK(c.epochs == 60000);
  CHECK(c.N == 10.0);
  // weights resolve to the scaled-loss defaults (1/N^4, 2)
  const ResolvedRun run = resolve_run(c);
  CHECK(run.spec.lambda_res == doctest::Approx(1e-4));
  CHECK(run.spec.lambda_data == doctest::Approx(2.0));
  CHECK(run.spec.scale_value == doctest::Approx(10.0));
}

TEST_CASE("explicit keys override preset values") {
  const RunConfig c = parse_config("preset=wave.desk\nepochs=5\nN=4\n");
  CHECK(c.epochs == 5);
  CHECK(c.N == 4.0);
  CHECK(c.hidden == std::vector<int>{64, 64, 64, 64});
}

TEST_CASE("unknown preset is rejected") {
  CHECK_THROWS_AS(parse_config("preset=nonexistent.desk\n"), std::invalid_argument);
}

TEST_CASE("effective config echo round-trips") {
  const RunConfig c = parse_config(
      "preset=boundary_layer.desk\nseed=42\nlambda_res=1\nlambda_data=20\nlr=0.002\n");
  const std::string echo = effective_config(c);
  const RunConfig back = parse_config(echo);
  CHECK(effective_config(back) == echo);
  CHECK(back.problem == "boundary_layer");
  CHECK(back.seed == 42);
  CHECK(back.adam.lr == 0.002);
  CHECK(back.lambda_data == 20.0);
}

TEST_CASE("hidden accepts both LxW and comma forms") {
  CHECK(parse_config("hidden=3x7\n").hidden == std::vector<int>{7, 7, 7});
  CHECK(parse_config("hidden=4,8,16\n").hidden == std::vector<int>{4, 8, 16});
  CHECK_THROWS_AS(parse_config("hidden=0x7\n"), std::invalid_argument);
}

TEST_CASE("resolved run wires the sampling plan and eval grid") {
  const RunConfig c = parse_config("preset=navier_stokes.desk\nseed=3\n");
  const ResolvedRun run = resolve_run(c);
  CHECK(run.spec.name == "navier_stokes");
  CHECK(run.tc.plan.n_interior == 3000);
  CHECK(run.tc.plan.n_near_feature == 300);
  CHECK(run.tc.plan.n_boundary_total == 600);
  CHECK(run.tc.eval_grid == std::vector<int>{221, 83});
  CHECK(run.mlp.input_dim == 2);
  CHECK(run.mlp.output_dim == 3);
  CHECK(run.spec.lambda_res == doctest::Approx(0.01));
}

}  // TEST_SUITE
