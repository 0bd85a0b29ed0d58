#include "tcca/multiway.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>

#include "tcca/errors.hpp"
#include "tcca/init.hpp"
#include "tcca/linalg.hpp"
#include "tcca/rng.hpp"

namespace tcca {

namespace {

constexpr double kWhitenCheckTol = 1e-6;

Matrix solve_normal_columns(const Matrix& design, const Matrix& targets, double ridge, Index n) {
  const double n_inv = 1.0 / static_cast<double>(n);
  Matrix h = n_inv * (design.transpose() * design);
  const Matrix g = n_inv * (design.transpose() * targets);
  if (ridge != 0.0) h.diagonal().array() += ridge;
  Eigen::LDLT<Matrix> ldlt(h);
  const Vector d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  if (ldlt.info() != Eigen::Success || dmax <= 0.0 ||
      (ridge == 0.0 && d.minCoeff() < 1e-12 * dmax)) {
    if (ridge != 0.0) throw RankDeficientError("block update: singular regularized system");
    // Minimum-norm solve with eigenvalues below the rank cutoff zeroed.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    if (eig.info() != Eigen::Success)
      throw RankDeficientError("block update: singular system");
    const Vector& lam = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(lam.maxCoeff(), 0.0);
    if (cutoff <= 0.0) throw RankDeficientError("block update: zero system");
    Vector inv(lam.size());
    for (Index i = 0; i < lam.size(); ++i) inv[i] = lam[i] > cutoff ? 1.0 / lam[i] : 0.0;
    return eig.eigenvectors() * (inv.asDiagonal() * (eig.eigenvectors().transpose() * g));
  }
  return ldlt.solve(g);
}

// Whitens a block in its own data metric; the result satisfies
// B'(design'design/n)B == I. Throws NotPsdError when the Gram collapses.
Matrix whiten_block(const Matrix& raw, const Matrix& design, Index n) {
  const Matrix w = design * raw;
  const Matrix gram = w.transpose() * w / static_cast<double>(n);
  const Matrix inv_sqrt = spd_inv_sqrt(gram);
  const Matrix out = raw * inv_sqrt;
  const Matrix q = design * out;
  const Matrix check = q.transpose() * q / static_cast<double>(n);
  if ((check - Matrix::Identity(check.rows(), check.cols())).norm() > kWhitenCheckTol)
    throw NotPsdError("block whitening collapsed: data-metric Gram is rank deficient");
  return out;
}

BlockDirections random_blocks(const std::vector<Index>& dims, const std::vector<Index>& ranks,
                              Rng& rng) {
  BlockDirections out;
  out.factors.reserve(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j)
    out.factors.push_back(standard_normal_matrix(dims[j], ranks[j], rng));
  return out;
}

// side 0 gathers U scores, side 1 gathers V scores, skipping component `skip`
// and anything not yet fitted.
Matrix component_scores(const Matrix& stacked, const std::vector<HopmState>& components,
                        const std::vector<bool>& fitted, Index skip, int side) {
  std::vector<Vector> cols;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (static_cast<Index>(i) == skip || !fitted[i]) continue;
    const RankOneDirections& dirs = side == 0 ? components[i].u : components[i].v;
    cols.push_back(stacked * dirs.composite_vec());
  }
  Matrix out(stacked.rows(), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Index>(i)) = cols[i];
  return out;
}

// Orthonormal basis of the score span; rank-revealing so nearly dependent
// score columns do not destroy the projector.
Matrix orthonormal_basis(const Matrix& scores) {
  if (scores.cols() == 0) return scores;
  Eigen::ColPivHouseholderQR<Matrix> qr(scores);
  qr.setThreshold(1e-10);
  const Index rank = qr.rank();
  if (rank == 0) return Matrix(scores.rows(), 0);
  Matrix q = qr.householderQ() * Matrix::Identity(scores.rows(), rank);
  if ((q.transpose() * q - Matrix::Identity(rank, rank)).norm() > 1e-10)
    throw IllConditionedError("deflation: score basis could not be orthonormalized");
  return q;
}

}  // namespace

std::vector<Index> BlockDirections::dims() const {
  std::vector<Index> d;
  for (const auto& f : factors) d.push_back(f.rows());
  return d;
}

std::vector<Index> BlockDirections::ranks() const {
  std::vector<Index> r;
  for (const auto& f : factors) r.push_back(f.cols());
  return r;
}

Matrix block_design(const Matrix& stacked, const std::vector<Matrix>& blocks, Index skip,
                    Index skip_dim) {
  const Index m = static_cast<Index>(blocks.size());
  const Matrix wide = stacked * contraction_kernel(blocks, skip, skip_dim);
  // Column c of the kernel product flattens (c_0, ..., c_{m-1}) first index
  // fastest, where mode `skip` contributes skip_dim columns and mode q
  // contributes blocks[q].cols(). Rows of the design enumerate (sample,
  // cross-rank combination).
  std::vector<Index> cols(static_cast<std::size_t>(m));
  for (Index q = 0; q < m; ++q)
    cols[static_cast<std::size_t>(q)] = q == skip ? skip_dim : blocks[static_cast<std::size_t>(q)].cols();
  std::vector<Index> stride(static_cast<std::size_t>(m));
  Index acc = 1;
  for (Index q = 0; q < m; ++q) {
    stride[static_cast<std::size_t>(q)] = acc;
    acc *= cols[static_cast<std::size_t>(q)];
  }
  Index kappa = 1;
  for (Index q = 0; q < m; ++q)
    if (q != skip) kappa *= cols[static_cast<std::size_t>(q)];

  const Index n = stacked.rows();
  Matrix design(n * kappa, skip_dim);
  std::vector<Index> combo(static_cast<std::size_t>(m), 0);
  for (Index flat = 0; flat < kappa; ++flat) {
    Index base = 0;
    for (Index q = 0; q < m; ++q)
      if (q != skip) base += combo[static_cast<std::size_t>(q)] * stride[static_cast<std::size_t>(q)];
    for (Index u = 0; u < skip_dim; ++u) {
      const Index src = base + u * stride[static_cast<std::size_t>(skip)];
      for (Index t = 0; t < n; ++t) design(t * kappa + flat, u) = wide(t, src);
    }
    for (Index q = 0; q < m; ++q) {
      if (q == skip) continue;
      if (++combo[static_cast<std::size_t>(q)] < cols[static_cast<std::size_t>(q)]) break;
      combo[static_cast<std::size_t>(q)] = 0;
    }
  }
  return design;
}

BlockFit fit_block_tcca(const DataTensor& x, const DataTensor& y,
                        const std::vector<Index>& ranks, const HopmConfig& cfg,
                        std::optional<std::pair<BlockDirections, BlockDirections>> init) {
  const auto dx = x.sample_dims();
  const auto dy = y.sample_dims();
  const Index m = static_cast<Index>(dx.size());
  if (static_cast<Index>(ranks.size()) != m || static_cast<Index>(dy.size()) != m)
    throw InputError("fit_block_tcca: rank list must have one entry per mode");
  for (Index j = 0; j < m; ++j) {
    const auto js = static_cast<std::size_t>(j);
    if (ranks[js] < 1 || ranks[js] > dx[js] || ranks[js] > dy[js])
      throw InputError("fit_block_tcca: ranks must satisfy 1 <= k_j <= d_j");
  }
  const Index n = x.num_samples();
  if (n != y.num_samples()) throw InputError("fit_block_tcca: sample counts differ");

  const Matrix xs = x.stacked();
  const Matrix ys = y.stacked();

  BlockFit fit;
  if (init) {
    fit.u = std::move(init->first);
    fit.v = std::move(init->second);
    if (fit.u.dims() != dx || fit.v.dims() != dy || fit.u.ranks() != ranks ||
        fit.v.ranks() != ranks)
      throw InputError("fit_block_tcca: init shape mismatch");
  } else {
    Rng rng(cfg.seed);
    fit.u = random_blocks(dx, ranks, rng);
    fit.v = random_blocks(dy, ranks, rng);
  }

  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    const BlockDirections prev_u = fit.u;
    const BlockDirections prev_v = fit.v;
    for (Index j = 0; j < m; ++j) {
      const auto js = static_cast<std::size_t>(j);
      const Matrix xd = block_design(xs, fit.u.factors, j, dx[js]);
      const Matrix yd = block_design(ys, fit.v.factors, j, dy[js]);
      const Matrix raw_u =
          solve_normal_columns(xd, yd * fit.v.factors[js], cfg.ridge_x, n);
      fit.u.factors[js] = whiten_block(raw_u, xd, n);
      const Matrix raw_v =
          solve_normal_columns(yd, xd * fit.u.factors[js], cfg.ridge_y, n);
      fit.v.factors[js] = whiten_block(raw_v, yd, n);
    }
    double d = 0.0;
    for (Index j = 0; j < m; ++j) {
      const auto js = static_cast<std::size_t>(j);
      d += (fit.u.factors[js] - prev_u.factors[js]).norm();
      d += (fit.v.factors[js] - prev_v.factors[js]).norm();
    }
    Matrix all_u = Matrix::Ones(1, 1), all_v = Matrix::Ones(1, 1);
    for (Index j = m - 1; j >= 0; --j) {
      all_u = kronecker(all_u, fit.u.factors[static_cast<std::size_t>(j)]);
      all_v = kronecker(all_v, fit.v.factors[static_cast<std::size_t>(j)]);
    }
    const Matrix tx = xs * all_u;
    const Matrix ty = ys * all_v;
    const double corr = (tx.transpose() * ty).trace() /
                        std::sqrt((tx.transpose() * tx).trace() * (ty.transpose() * ty).trace());
    fit.trace.diff.push_back(d);
    fit.trace.score_corr.push_back(corr);
    fit.sweeps = sweep;
    if (d < cfg.tol) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

DeflationSet deflate(const DataTensor& x, const DataTensor& y, Index r, const HopmConfig& cfg,
                     int outer_rounds, DeflationInit init) {
  if (r < 1) throw InputError("deflate: need r >= 1");
  if (outer_rounds < 1) throw InputError("deflate: need outer_rounds >= 1");
  const Matrix xs = x.stacked();
  const Matrix ys = y.stacked();
  const auto dx = x.sample_dims();
  const auto dy = y.sample_dims();

  DeflationSet set;
  set.components.resize(static_cast<std::size_t>(r));
  set.x_scores.assign(static_cast<std::size_t>(r), Matrix(xs.rows(), 0));
  set.y_scores.assign(static_cast<std::size_t>(r), Matrix(ys.rows(), 0));
  std::vector<bool> fitted(static_cast<std::size_t>(r), false);

  // A single component has nothing to deflate against, so one round is exact.
  const int rounds = r == 1 ? 1 : outer_rounds;
  for (int round = 1; round <= rounds; ++round) {
    double movement = 0.0;
    for (Index k = 0; k < r; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const Matrix tk = component_scores(xs, set.components, fitted, k, 0);
      const Matrix sk = component_scores(ys, set.components, fitted, k, 1);
      Matrix xproj = xs;
      Matrix yproj = ys;
      if (tk.cols() > 0) {
        const Matrix qt = orthonormal_basis(tk);
        xproj -= qt * (qt.transpose() * xs);
      }
      if (sk.cols() > 0) {
        const Matrix qs = orthonormal_basis(sk);
        yproj -= qs * (qs.transpose() * ys);
      }
      DataTensor xres(fold(xproj, 0, x.body().dims()));
      DataTensor yres(fold(yproj, 0, y.body().dims()));

      std::pair<RankOneDirections, RankOneDirections> start;
      if (fitted[ks]) {
        start = {set.components[ks].u, set.components[ks].v};
      } else if (init == DeflationInit::Effective) {
        start = init_effective(xres, yres);
      } else {
        const std::uint64_t seed =
            k == 0 ? cfg.seed : sub_seed(cfg.seed, static_cast<std::uint64_t>(k));
        start = init_random(dx, dy, seed);
      }
      HopmState next = fit_tcca(xres, yres, start, cfg);
      if (fitted[ks]) movement += diff_metric(set.components[ks], next);
      set.components[ks] = std::move(next);
      set.x_scores[ks] = tk;
      set.y_scores[ks] = sk;
      fitted[ks] = true;
    }
    if (round > 1 && movement < cfg.tol) break;
  }
  return set;
}

}  // namespace tcca
