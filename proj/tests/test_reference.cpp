#include "vspinn/reference.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace vspinn;

TEST_SUITE("reference") {

TEST_CASE("t=0 slice equals the initial condition exactly") {
  const ReferenceGrid grid = allen_cahn_reference(256, 1000);
  const std::size_t n_t = grid.axes[1].size();
  for (std::size_t i = 0; i < grid.axes[0].size(); ++i) {
    const double x = grid.axes[0][i];
    CHECK(grid.fields[0][i * n_t] == doctest::Approx(x * x * std::cos(M_PI * x)).epsilon(1e-14));
  }
}

TEST_CASE("periodic duplicated node matches at machine precision") {
  const ReferenceGrid grid = allen_cahn_reference(256, 1000);
  const std::size_t n_t = grid.axes[1].size();
  const std::size_t last_x = grid.axes[0].size() - 1;
  for (std::size_t j = 0; j < n_t; ++j) {
    CHECK(grid.fields[0][0 * n_t + j] == grid.fields[0][last_x * n_t + j]);
  }
}

TEST_CASE("solution respects the invariant region |u| <= 1") {
  const ReferenceGrid grid = allen_cahn_reference(1024, 10000);
  double sup = 0.0;
  for (double v : grid.fields[0]) sup = std::max(sup, std::abs(v));
  CHECK(sup <= 1.0 + 1e-6);
}

TEST_CASE("phase separation: plateaus at t=1 cover most of the domain") {
  const ReferenceGrid grid = allen_cahn_reference(1024, 10000);
  const std::size_t n_t = grid.axes[1].size();
  std::size_t plateau = 0;
  const std::size_t n_x = grid.axes[0].size();
  for (std::size_t i = 0; i < n_x; ++i) {
    if (std::abs(grid.fields[0][i * n_t + (n_t - 1)]) > 0.9) ++plateau;
  }
  CHECK(static_cast<double>(plateau) / static_cast<double>(n_x) >= 0.8);
}

TEST_CASE("self-convergence: doubling the resolution moves the solution < 1e-3") {
  const ReferenceGrid coarse = allen_cahn_reference(1024, 10000);
  const ReferenceGrid fine = allen_cahn_reference(2048, 20000);
  REQUIRE(coarse.axes[1].size() == fine.axes[1].size());
  double sup = 0.0;
  const std::size_t nt = coarse.axes[1].size();
  for (std::size_t i = 0; i + 1 < coarse.axes[0].size(); ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      const double a = coarse.fields[0][i * nt + j];
      const double b = fine.fields[0][(2 * i) * nt + j];
      sup = std::max(sup, std::abs(a - b));
    }
  }
  CHECK(sup < 1e-3);
}

TEST_CASE("resolution floor is enforced") {
  CHECK_THROWS_AS(allen_cahn_reference(128, 10000), std::invalid_argument);
  CHECK_THROWS_AS(allen_cahn_reference(512, 500), std::invalid_argument);
}

TEST_CASE("grid file round-trip is exact") {
  const ReferenceGrid grid = allen_cahn_reference(256, 1000);
  const std::string path =
      (std::filesystem::temp_directory_path() / "vspinn_grid_test.csv").string();
  save_reference(path, grid);
  const ReferenceGrid back = load_reference(path);
  REQUIRE(back.axes.size() == grid.axes.size());
  CHECK(back.axes[0] == grid.axes[0]);
  CHECK(back.axes[1] == grid.axes[1]);
  CHECK(back.fields[0] == grid.fields[0]);
  std::filesystem::remove(path);
}

TEST_CASE("malformed grid files are rejected with clear errors") {
  const auto dir = std::filesystem::temp_directory_path();
  {
    const std::string path = (dir / "vspinn_bad_axis.csv").string();
    std::ofstream out(path);
    out << "3,1\n0,2,1\n";  // non-monotone axis
    out << "1,2,3\n";
    out.close();
    CHECK_THROWS_AS(load_reference(path), std::invalid_argument);
    std::filesystem::remove(path);
  }
  {
    const std::string path = (dir / "vspinn_short_field.csv").string();
    std::ofstream out(path);
    out << "3,1\n0,1,2\n";
    out << "1,2\n";  // missing field values
    out.close();
    CHECK_THROWS_AS(load_reference(path), std::runtime_error);
    std::filesystem::remove(path);
  }
  {
    const std::string path = (dir / "vspinn_missing_field.csv").string();
    std::ofstream out(path);
    out << "2,2\n0,1\n";
    out << "1,2\n";  // second field absent entirely
    out.close();
    CHECK_THROWS_AS(load_reference(path), std::runtime_error);
    std::filesystem::remove(path);
  }
}

TEST_CASE("validate rejects shape mismatches") {
  ReferenceGrid grid;
  grid.axes = {{0.0, 1.0}};
  grid.fields = {{1.0, 2.0, 3.0}};  // wrong length
  CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
}

}  // TEST_SUITE
