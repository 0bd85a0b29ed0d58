#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "tcca/hopm.hpp"
#include "tcca/tensor.hpp"

namespace tcca {

/// Per-mode factor matrices for block extraction; factors[j] is d_j x k_j.
struct BlockDirections {
  std::vector<Matrix> factors;

  Index order() const { return static_cast<Index>(factors.size()); }
  std::vector<Index> dims() const;
  std::vector<Index> ranks() const;
};

struct BlockTrace {
  std::vector<double> diff;        // factor movement per sweep
  std::vector<double> score_corr;  // trace-normalized score correlation per sweep
};

struct BlockFit {
  BlockDirections u;
  BlockDirections v;
  BlockTrace trace;
  bool converged = false;
  int sweeps = 0;
};

/// Stacked design matrix for a block update: one row per (sample,
/// cross-rank combination), columns indexed by mode `skip`. Its Gram over n
/// is the metric the block is whitened in.
Matrix block_design(const Matrix& stacked, const std::vector<Matrix>& blocks, Index skip,
                    Index skip_dim);

/// Alternating block updates: least-squares solve for each mode's factor
/// matrix followed by whitening with the inverse square root of its own
/// data-metric Gram, cycling U then V per mode until the block diff falls
/// below cfg.tol. Throws NotPsdError when a whitening Gram collapses.
BlockFit fit_block_tcca(const DataTensor& x, const DataTensor& y,
                        const std::vector<Index>& ranks, const HopmConfig& cfg,
                        std::optional<std::pair<BlockDirections, BlockDirections>> init = {});

/// One extracted component plus the score bases used to project it out.
struct DeflationSet {
  std::vector<HopmState> components;
  std::vector<Matrix> x_scores;  // T_k: raw scores of the other components, n x (r-1)
  std::vector<Matrix> y_scores;  // S_k
};

enum class DeflationInit {
  Effective,  // rank-1-of-CCA init on each component's deflated data
  Random,     // seeded random; component 0 uses cfg.seed verbatim, so r == 1
              // reproduces fit_tcca bit for bit
};

/// Cycles components k = 1..r for up to outer_rounds rounds; each refit sees
/// the samples projected orthogonally to the other components' score span
/// (score bases are orthonormalized before projecting). First-round inits
/// follow `init`; later rounds warm-start from the previous round's
/// component. The effective default makes component order track correlation
/// strength.
DeflationSet deflate(const DataTensor& x, const DataTensor& y, Index r, const HopmConfig& cfg,
                     int outer_rounds = 3, DeflationInit init = DeflationInit::Effective);

}  // namespace tcca
