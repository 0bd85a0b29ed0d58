#include "tcca/init.hpp"

#include "tcca/cca.hpp"
#include "tcca/errors.hpp"
#include "tcca/linalg.hpp"
#include "tcca/rng.hpp"

namespace tcca {

namespace {

RankOneDirections random_directions(const std::vector<Index>& dims, Rng& rng) {
  RankOneDirections out;
  out.factors.reserve(dims.size());
  for (Index d : dims) {
    Vector f = standard_normal_vector(d, rng);
    out.factors.push_back(f / f.norm());
  }
  return out;
}

// Splits a vectorized direction into unit factors: reshape to
// d_0 x (d_1*...*d_{m-1}), take the top singular pair, recurse on the right
// singular vector.
std::vector<Vector> peel_factors(const Vector& direction, const std::vector<Index>& dims) {
  std::vector<Vector> factors;
  Vector rest = direction;
  for (std::size_t j = 0; j + 1 < dims.size(); ++j) {
    const Index d = dims[j];
    const Index tail = rest.size() / d;
    const Rank1 top = best_rank1(Eigen::Map<const Matrix>(rest.data(), d, tail));
    factors.push_back(top.u);
    rest = top.v;
  }
  factors.push_back(rest / rest.norm());
  return factors;
}

}  // namespace

std::pair<RankOneDirections, RankOneDirections> init_random(const std::vector<Index>& dims_x,
                                                            const std::vector<Index>& dims_y,
                                                            std::uint64_t seed) {
  Rng rng(seed);
  RankOneDirections u = random_directions(dims_x, rng);
  RankOneDirections v = random_directions(dims_y, rng);
  return {std::move(u), std::move(v)};
}

std::pair<RankOneDirections, RankOneDirections> init_effective(const DataTensor& x,
                                                               const DataTensor& y,
                                                               double ridge) {
  const Matrix xs = x.stacked();
  const Matrix ys = y.stacked();
  if (ridge < 0.0) {
    const double n = static_cast<double>(xs.rows());
    const double scale_x = xs.squaredNorm() / n / static_cast<double>(xs.cols());
    const double scale_y = ys.squaredNorm() / n / static_cast<double>(ys.cols());
    ridge = 1e-6 * 0.5 * (scale_x + scale_y);
  }
  const CcaSolution cca = cca_1d(xs, ys, ridge, /*center=*/false);
  RankOneDirections u{peel_factors(cca.u, x.sample_dims()), 1.0};
  RankOneDirections v{peel_factors(cca.v, y.sample_dims()), 1.0};
  return {std::move(u), std::move(v)};
}

}  // namespace tcca
