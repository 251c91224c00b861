// SPDX-License-Identifier: Apache-2.0
#include "s2t/analysis/cca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "s2t/error.hpp"

namespace s2t {
namespace {

constexpr double kRidge = 1e-10;

void check_input(const RepMatrix& x, const RepMatrix& y) {
  if (x.rows() != y.rows()) {
    throw DataError("cca: sample counts differ (" + std::to_string(x.rows()) + " vs " + std::to_string(y.rows()) + ")");
  }
  const auto d = std::max(x.cols(), y.cols());
  if (x.cols() == 0 || y.cols() == 0) throw DataError("cca: empty representation");
  if (x.rows() <= d) {
    throw DataError("cca: need more samples than dimensions (n=" + std::to_string(x.rows()) + ", d=" +
                    std::to_string(d) + "); subsample dimensions or project to a lower dimension first");
  }
  if (!x.allFinite() || !y.allFinite()) throw NumericError("cca: non-finite values in input");
}

// Whitened orthonormal basis of the centered column space.
Eigen::MatrixXd basis(const Eigen::MatrixXd& c) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double tol = static_cast<double>(std::max(c.rows(), c.cols())) * std::numeric_limits<double>::epsilon() * smax;
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;
  if (rank == 0) throw NumericError("cca: representation has zero variance");
  const double ridge = kRidge * smax * smax;
  Eigen::VectorXd scale(rank);
  for (Eigen::Index i = 0; i < rank; ++i) scale(i) = s(i) / std::sqrt(s(i) * s(i) + ridge);
  return svd.matrixU().leftCols(rank) * scale.asDiagonal();
}

}  // namespace

RepMatrix to_rep_matrix(const Tensor& t) {
  if (t.rank() != 2) throw DataError("representation must be a matrix, got " + shape_str(t.shape()));
  RepMatrix m(t.rows(), t.cols());
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.at(r, c);
  return m;
}

CcaResult cca_full(const RepMatrix& x, const RepMatrix& y) {
  check_input(x, y);
  CcaResult out;
  out.x_centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd yc = y.rowwise() - y.colwise().mean();
  const Eigen::MatrixXd bx = basis(out.x_centered), by = basis(yc);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(bx.transpose() * by, Eigen::ComputeThinU);
  const Eigen::Index m = std::min(bx.cols(), by.cols());
  for (Eigen::Index i = 0; i < m; ++i) out.rho.push_back(std::clamp(svd.singularValues()(i), 0.0, 1.0));
  out.x_dirs = bx * svd.matrixU().leftCols(m);
  out.x_dirs.colwise().normalize();
  return out;
}

std::vector<double> cca(const RepMatrix& x, const RepMatrix& y) { return cca_full(x, y).rho; }

double pwcca(const RepMatrix& x, const RepMatrix& y) {
  const CcaResult r = cca_full(x, y);
  const Eigen::VectorXd alpha = (r.x_dirs.transpose() * r.x_centered).cwiseAbs().rowwise().sum();
  const double total = alpha.sum();
  if (!(total > 0.0)) throw NumericError("pwcca: zero projection weights");
  double score = 0.0;
  for (std::size_t i = 0; i < r.rho.size(); ++i) score += alpha(static_cast<Eigen::Index>(i)) / total * r.rho[i];
  return score;
}

std::vector<LayerScore> layer_ranking(const std::vector<RepMatrix>& layers, const RepMatrix& reference) {
  std::vector<LayerScore> out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    try {
      out.push_back({i, pwcca(layers[i], reference)});
    } catch (const DataError& e) {
      throw DataError("layer " + std::to_string(i) + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError("layer " + std::to_string(i) + ": " + e.what());
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const LayerScore& a, const LayerScore& b) { return a.score > b.score; });
  return out;
}

}  // namespace s2t
