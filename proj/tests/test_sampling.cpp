#include "vspinn/sampling.hpp"

#include <doctest.h>

#include <cmath>

using namespace vspinn;

TEST_SUITE("sampling") {

TEST_CASE("interior points stay strictly inside the unit square") {
  const ProblemSpec spec = make_problem("wave1d");
  SamplePlan plan;
  plan.n_interior = 100;
  plan.seed = 3;
  const auto pts = sample_interior(spec, plan, 0);
  REQUIRE(pts.size() == 200);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i] > 0.0);
    CHECK(pts[i] < 1.0);
  }
}

TEST_CASE("cylinder hole is rejected, near-feature ring respected") {
  const ProblemSpec spec = scale_problem(make_problem("navier_stokes"), 1.0, {1.0, 1.0});
  SamplePlan plan;
  plan.n_interior = 400;
  plan.n_near_feature = 100;
  plan.seed = 12;
  const auto pts = sample_interior(spec, plan, 0);
  REQUIRE(pts.size() == 1000);
  for (std::size_t p = 0; p < pts.size() / 2; ++p) {
    const double dx = pts[2 * p] - 0.2, dy = pts[2 * p + 1] - 0.2;
    CHECK(std::sqrt(dx * dx + dy * dy) > 0.05);
  }
  // near-feature points are inside the default annulus [r, 2r]
  for (std::size_t p = 400; p < 500; ++p) {
    const double dx = pts[2 * p] - 0.2, dy = pts[2 * p + 1] - 0.2;
    const double d = std::sqrt(dx * dx + dy * dy);
    CHECK(d >= 0.05);
    CHECK(d <= 0.10001);
  }
}

TEST_CASE("same (seed, epoch) reproduces the identical point list") {
  const ProblemSpec spec = scale_problem(make_problem("wave1d"), 10.0);
  SamplePlan plan;
  plan.n_interior = 64;
  plan.seed = 77;
  CHECK(sample_interior(spec, plan, 5) == sample_interior(spec, plan, 5));
  CHECK(sample_interior(spec, plan, 5) != sample_interior(spec, plan, 6));
  plan.resample_each_epoch = false;
  CHECK(sample_interior(spec, plan, 5) == sample_interior(spec, plan, 0));
}

TEST_CASE("1D problem with one point per Dirichlet end yields the endpoints") {
  ProblemParams pp;
  pp.epsilon = 1e-6;
  const ProblemSpec spec = scale_problem(make_problem("boundary_layer", pp), 1000.0);
  SamplePlan plan;
  plan.n_boundary = {1, 1};
  const auto samples = sample_boundary(spec, plan, 0);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].point[0] == doctest::Approx(0.0));
  CHECK(samples[1].point[0] == doctest::Approx(1000.0));
}

TEST_CASE("wave boundary total splits equally across the four segments") {
  const ProblemSpec spec = scale_problem(make_problem("wave1d"), 10.0);
  SamplePlan plan;
  plan.n_boundary_total = 512;
  const auto counts = boundary_counts(spec, plan);
  REQUIRE(counts.size() == 4);
  for (int c : counts) CHECK(c == 128);
  const auto samples = sample_boundary(spec, plan, 1);
  CHECK(samples.size() == 512);
}

TEST_CASE("periodic pair members share the free coordinate") {
  const ProblemSpec spec = scale_problem(make_problem("allen_cahn"), 100.0);
  SamplePlan plan;
  plan.n_boundary = {4, 6, 6};
  const auto samples = sample_boundary(spec, plan, 3);
  for (const auto& s : samples) {
    const ConstraintSpec& c = spec.constraints[static_cast<std::size_t>(s.constraint)];
    if (c.kind == ConstraintKind::PeriodicPair || c.kind == ConstraintKind::PeriodicDerivativePair) {
      const auto partner = periodic_partner(spec, c, s.point);
      CHECK(partner[1] == s.point[1]);
      CHECK(partner[0] == doctest::Approx(100.0));
      CHECK(s.point[0] == doctest::Approx(-100.0));
    }
  }
}

TEST_CASE("empirical mean approaches the domain centroid") {
  const ProblemSpec spec = scale_problem(make_problem("wave1d"), 2.0);
  SamplePlan plan;
  plan.n_interior = 10000;
  plan.seed = 5;
  const auto pts = sample_interior(spec, plan, 0);
  double mx = 0, mt = 0;
  for (std::size_t p = 0; p < pts.size() / 2; ++p) {
    mx += pts[2 * p];
    mt += pts[2 * p + 1];
  }
  mx /= 10000.0;
  mt /= 10000.0;
  const double se = (2.0 / std::sqrt(12.0)) / 100.0;  // sigma/sqrt(n)
  CHECK(std::abs(mx - 1.0) < 3 * se);
  CHECK(std::abs(mt - 1.0) < 3 * se);
}

TEST_CASE("invalid plans are rejected") {
  const ProblemSpec ns = make_problem("navier_stokes");
  SamplePlan plan;
  plan.n_interior = -1;
  CHECK_THROWS_AS(sample_interior(ns, plan, 0), std::invalid_argument);
  plan.n_interior = 10;
  plan.n_near_feature = 5;
  plan.annulus_outer = 1.0;  // extends past the channel walls
  CHECK_THROWS_AS(sample_interior(ns, plan, 0), std::invalid_argument);
  plan.annulus_outer = 0.08;
  plan.annulus_inner = 0.01;  // inside the cylinder
  CHECK_THROWS_AS(sample_interior(ns, plan, 0), std::invalid_argument);
}

TEST_CASE("zero-measure segment with a positive count is an error") {
  ProblemSpec degenerate = make_problem("wave1d");
  degenerate.geometry.hi[1] = 0.0;  // collapse the time extent
  SamplePlan plan;
  plan.n_boundary = {2, 0, 0, 0};  // x=0 face now has zero length
  CHECK_THROWS_AS(sample_boundary(degenerate, plan, 0), std::invalid_argument);
}

TEST_CASE("per-constraint counts must match the constraint list") {
  const ProblemSpec spec = make_problem("wave1d");
  SamplePlan plan;
  plan.n_boundary = {1, 2};
  CHECK_THROWS_AS(sample_boundary(spec, plan, 0), std::invalid_argument);
}

}  // TEST_SUITE
