#include "vspinn/sampling.hpp"

#include "vspinn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vspinn {

namespace {

constexpr std::uint64_t kInteriorStream = 0x11;
constexpr std::uint64_t kBoundaryStream = 0x22;

double face_measure(const ProblemSpec& spec, const Locus& locus) {
  if (locus.kind == Locus::Kind::Cylinder) {
    auto h = spec.scaled_hole();
    return h ? 2.0 * M_PI * h->r : 0.0;
  }
  double m = 1.0;  // a 1D face is a point; convention: measure 1
  for (int i = 0; i < spec.dim(); ++i) {
    if (i == locus.axis) continue;
    m *= spec.scaled_hi(i) - spec.scaled_lo(i);
  }
  return m;
}

}  // namespace

void SamplePlan::validate(const ProblemSpec& spec) const {
  if (n_interior < 0 || n_near_feature < 0 || n_boundary_total < 0) {
    throw std::invalid_argument("sample plan: counts must be >= 0");
  }
  for (int c : n_boundary) {
    if (c < 0) throw std::invalid_argument("sample plan: counts must be >= 0");
  }
  if (!n_boundary.empty() && n_boundary.size() != spec.constraints.size()) {
    throw std::invalid_argument("sample plan: per-constraint counts do not match constraints");
  }
  if (spec.geometry.hole) {
    const Circle& h = *spec.geometry.hole;
    double volume = 1.0;
    for (int i = 0; i < spec.dim(); ++i) volume *= spec.geometry.hi[i] - spec.geometry.lo[i];
    if (M_PI * h.r * h.r >= volume) {
      throw std::invalid_argument("sample plan: hole covers the domain, rejection cannot finish");
    }
  }
  if (n_near_feature > 0) {
    if (!spec.geometry.hole) {
      throw std::invalid_argument("sample plan: near-feature sampling needs a hole");
    }
    const Circle& h = *spec.geometry.hole;
    const double inner = annulus_inner > 0 ? annulus_inner : h.r;
    const double outer = annulus_outer > 0 ? annulus_outer : 2.0 * h.r;
    if (inner < h.r || outer <= inner) {
      throw std::invalid_argument("sample plan: annulus radii invalid (inner >= hole r < outer)");
    }
    if (h.cx - outer < spec.geometry.lo[0] || h.cx + outer > spec.geometry.hi[0] ||
        h.cy - outer < spec.geometry.lo[1] || h.cy + outer > spec.geometry.hi[1]) {
      throw std::invalid_argument("sample plan: annulus extends outside the domain");
    }
  }
}

std::vector<double> sample_interior(const ProblemSpec& spec, const SamplePlan& plan, int epoch) {
  plan.validate(spec);
  const int dim = spec.dim();
  for (int i = 0; i < dim; ++i) {
    if (!(spec.scaled_hi(i) > spec.scaled_lo(i))) {
      throw std::invalid_argument("sample_interior: geometry has no volume");
    }
  }
  const std::uint64_t eff_epoch = plan.resample_each_epoch ? static_cast<std::uint64_t>(epoch) : 0;
  Rng rng(Rng::derive(plan.seed, kInteriorStream, eff_epoch));

  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(plan.n_interior + plan.n_near_feature) * dim);
  std::vector<double> candidate(dim);
  for (int p = 0; p < plan.n_interior; ++p) {
    do {
      for (int i = 0; i < dim; ++i) {
        candidate[i] = rng.uniform(spec.scaled_lo(i), spec.scaled_hi(i));
      }
    } while (!spec.contains_scaled(candidate));
    pts.insert(pts.end(), candidate.begin(), candidate.end());
  }
  if (plan.n_near_feature > 0) {
    const Circle hole = *spec.scaled_hole();
    const double f = spec.scale.factor(0);
    const double inner = (plan.annulus_inner > 0 ? plan.annulus_inner : spec.geometry.hole->r) * f;
    const double outer =
        (plan.annulus_outer > 0 ? plan.annulus_outer : 2.0 * spec.geometry.hole->r) * f;
    for (int p = 0; p < plan.n_near_feature; ++p) {
      do {
        const double r = std::sqrt(rng.uniform(inner * inner, outer * outer));
        const double theta = rng.uniform(0.0, 2.0 * M_PI);
        candidate[0] = hole.cx + r * std::cos(theta);
        candidate[1] = hole.cy + r * std::sin(theta);
      } while (!spec.contains_scaled(candidate));
      pts.insert(pts.end(), candidate.begin(), candidate.end());
    }
  }
  return pts;
}

std::vector<int> boundary_counts(const ProblemSpec& spec, const SamplePlan& plan) {
  if (!plan.n_boundary.empty()) return plan.n_boundary;
  const int n_constraints = static_cast<int>(spec.constraints.size());
  std::vector<double> measures(n_constraints);
  double total_measure = 0.0;
  for (int c = 0; c < n_constraints; ++c) {
    measures[c] = face_measure(spec, spec.constraints[c].locus);
    total_measure += measures[c];
  }
  if (total_measure <= 0.0) {
    throw std::invalid_argument("boundary_counts: all segments have zero measure");
  }
  // Largest-remainder apportionment of the total count.
  std::vector<int> counts(n_constraints, 0);
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (int c = 0; c < n_constraints; ++c) {
    const double share = plan.n_boundary_total * measures[c] / total_measure;
    counts[c] = static_cast<int>(std::floor(share));
    assigned += counts[c];
    remainders.emplace_back(share - counts[c], c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < plan.n_boundary_total - assigned; ++k) {
    counts[remainders[static_cast<std::size_t>(k)].second] += 1;
  }
  return counts;
}

std::vector<BoundarySample> sample_boundary(const ProblemSpec& spec, const SamplePlan& plan,
                                            int epoch) {
  plan.validate(spec);
  if (spec.constraints.empty()) {
    throw std::invalid_argument("sample_boundary: problem has no constraints");
  }
  const auto counts = boundary_counts(spec, plan);
  const std::uint64_t eff_epoch = plan.resample_each_epoch ? static_cast<std::uint64_t>(epoch) : 0;
  Rng rng(Rng::derive(plan.seed, kBoundaryStream, eff_epoch));

  std::vector<BoundarySample> out;
  const int dim = spec.dim();
  for (std::size_t c = 0; c < spec.constraints.size(); ++c) {
    const ConstraintSpec& constraint = spec.constraints[c];
    const Locus& locus = constraint.locus;
    if (counts[c] > 0 && face_measure(spec, locus) <= 0.0) {
      throw std::invalid_argument("sample_boundary: segment '" + constraint.name +
                                  "' has zero measure but positive count");
    }
    for (int k = 0; k < counts[c]; ++k) {
      std::vector<double> pt(dim);
      if (locus.kind == Locus::Kind::Cylinder) {
        const Circle hole = *spec.scaled_hole();
        const double theta = rng.uniform(0.0, 2.0 * M_PI);
        pt[0] = hole.cx + hole.r * std::cos(theta);
        pt[1] = hole.cy + hole.r * std::sin(theta);
      } else {
        for (int i = 0; i < dim; ++i) {
          pt[i] = (i == locus.axis)
                      ? (locus.at_upper ? spec.scaled_hi(i) : spec.scaled_lo(i))
                      : rng.uniform(spec.scaled_lo(i), spec.scaled_hi(i));
        }
      }
      out.push_back({std::move(pt), static_cast<int>(c)});
    }
  }
  return out;
}

}  // namespace vspinn
