#pragma once

#include <string>
#include <vector>

namespace vspinn {

/// Tensor-product reference solution on original (unscaled) coordinates.
/// values[f][i0*len1*... + i1*... ] is row-major in axis order.
struct ReferenceGrid {
  std::vector<std::vector<double>> axes;    // strictly increasing per coordinate
  std::vector<std::vector<double>> fields;  // one flat array per field
  std::string provenance;

  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t n_points() const;
  void validate() const;
  /// Flat point list pts[p*dim + i] in row-major order matching the values.
  std::vector<double> flat_points() const;
};

/// Classical IMEX (implicit diffusion, explicit cubic reaction) solver for
/// u_t = 1e-4 u_xx - 5u^3 + 5u on the periodic domain [-1,1] x [0,1] with
/// u(x,0) = x^2 cos(pi x). nx is the number of spatial intervals (>= 256),
/// nt the number of time steps (>= 1000). About 101 time slices are kept.
/// The x axis includes both x=-1 and the duplicated periodic node x=+1.
ReferenceGrid allen_cahn_reference(int nx, int nt);

/// Grid CSV: first row = axis sizes then field count; one row per axis with
/// its values; then each field as row-major values, one row per leading
/// index. See README for the exact schema.
void save_reference(const std::string& path, const ReferenceGrid& grid);
ReferenceGrid load_reference(const std::string& path);

}  // namespace vspinn
