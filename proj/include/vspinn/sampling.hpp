#pragma once

#include "vspinn/problems.hpp"

#include <cstdint>
#include <vector>

namespace vspinn {

/// Collocation plan. Boundary counts are per constraint when n_boundary is
/// given (one entry per ConstraintSpec); otherwise n_boundary_total is split
/// proportionally to segment measure. All draws are deterministic functions
/// of (seed, epoch) when resample_each_epoch, of seed alone otherwise.
struct SamplePlan {
  int n_interior = 1000;
  std::vector<int> n_boundary;
  int n_boundary_total = 0;
  int n_near_feature = 0;
  double annulus_inner = -1.0;  // original coords; default = hole radius
  double annulus_outer = -1.0;  // default = 2x hole radius
  std::uint64_t seed = 0;
  bool resample_each_epoch = true;

  void validate(const ProblemSpec& spec) const;
};

struct BoundarySample {
  std::vector<double> point;  // scaled coordinates, on the constraint's locus
  int constraint = 0;         // index into spec.constraints
};

/// Uniform interior points of the scaled domain (flat layout pts[p*dim+i]),
/// n_interior uniform draws plus n_near_feature in the annulus around the
/// hole. Points are strictly inside the geometry and outside the hole.
std::vector<double> sample_interior(const ProblemSpec& spec, const SamplePlan& plan, int epoch);

/// Per-constraint boundary samples; face points are uniform over the free
/// coordinates, cylinder points uniform in angle. Periodic constraints are
/// represented by their first-locus point (the partner shares every free
/// coordinate; see periodic_partner).
std::vector<BoundarySample> sample_boundary(const ProblemSpec& spec, const SamplePlan& plan,
                                            int epoch);

/// Resolved per-constraint counts (explicit, or proportional-to-measure
/// largest-remainder split of n_boundary_total).
std::vector<int> boundary_counts(const ProblemSpec& spec, const SamplePlan& plan);

}  // namespace vspinn
