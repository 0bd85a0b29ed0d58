#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tcca/directions.hpp"
#include "tcca/tensor.hpp"

namespace tcca {

/// Unit-normalized standard-normal factors, deterministic per seed.
/// Draw order: all x-side factors in mode order, then the y side.
std::pair<RankOneDirections, RankOneDirections> init_random(const std::vector<Index>& dims_x,
                                                            const std::vector<Index>& dims_y,
                                                            std::uint64_t seed);

/// Seeds the solver with the best rank-1 factorization of the vectorized CCA
/// directions: cca_1d on vec'd samples, then peel unit factors off the
/// reshaped direction with best_rank1. Exact for 2-mode data; for more modes
/// the factors are peeled recursively, which is a heuristic.
/// ridge < 0 selects 1e-6 * mean diagonal of the vectorized covariances,
/// since those are typically singular.
std::pair<RankOneDirections, RankOneDirections> init_effective(const DataTensor& x,
                                                               const DataTensor& y,
                                                               double ridge = -1.0);

}  // namespace tcca
