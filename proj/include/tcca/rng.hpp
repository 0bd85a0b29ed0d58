#pragma once

#include <cstdint>
#include <random>

#include "tcca/types.hpp"

namespace tcca {

/// splitmix64 finalizer; used to derive independent sub-seeds from a master
/// seed and a cell index so parallel experiment cells stay deterministic.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t cell) {
  return splitmix64(splitmix64(master) ^ splitmix64(cell + 0x632be59bd9b4e019ull));
}

using Rng = std::mt19937_64;

inline Vector standard_normal_vector(Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline Matrix standard_normal_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  // Column-major fill, matching the tensor linearization.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

}  // namespace tcca
