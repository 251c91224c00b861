// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "s2t/numerics/tensor.hpp"

namespace s2t {

/// n samples x d dimensions.
using RepMatrix = Eigen::MatrixXd;

RepMatrix to_rep_matrix(const Tensor& t);

struct CcaResult {
  std::vector<double> rho;  ///< descending, in [0, 1]; size min(rank X, rank Y)
  Eigen::MatrixXd x_dirs;   ///< n x m unit canonical variates of X
  Eigen::MatrixXd x_centered;
};

/// Canonical correlations of column-centered X and Y (same n). Each side is
/// reduced to a whitened basis of its column space, with 1e-10 (relative to
/// the largest squared singular value) added to the diagonal, and the
/// correlations are the singular values of the cross product of the bases.
/// DataError when n <= max(d_X, d_Y) or the sample counts differ,
/// NumericError on non-finite input.
CcaResult cca_full(const RepMatrix& x, const RepMatrix& y);
std::vector<double> cca(const RepMatrix& x, const RepMatrix& y);

/// Projection-weighted mean of canonical correlations. Weights come from X:
/// alpha_i = sum_j |<h_i, x_j>| over the centered columns x_j of X.
double pwcca(const RepMatrix& x, const RepMatrix& y);

struct LayerScore {
  std::size_t layer = 0;
  double score = 0.0;
};

/// Layers sorted by pwcca(layer, reference), descending; ties keep the lower index first.
std::vector<LayerScore> layer_ranking(const std::vector<RepMatrix>& layers, const RepMatrix& reference);

}  // namespace s2t
