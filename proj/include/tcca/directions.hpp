#pragma once

#include <vector>

#include "tcca/tensor.hpp"
#include "tcca/types.hpp"

namespace tcca {

/// Rank-one canonical direction represented by its per-mode factor vectors.
/// `scale` is the variance-normalizing rescale of the composite direction:
/// scale * (U_1 o ... o U_m) has unit empirical second moment under the data
/// it was last fit to.
struct RankOneDirections {
  std::vector<Vector> factors;
  double scale = 1.0;

  Index order() const { return static_cast<Index>(factors.size()); }
  std::vector<Index> dims() const;

  /// kron(U_m, ..., U_1); equals vectorize(composite()).
  Vector composite_vec() const;
  DenseTensor composite() const { return outer_product(factors); }
};

}  // namespace tcca
