#include "netblock/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "netblock/errors.hpp"

namespace netblock {

namespace {

void require_finite(const Eigen::MatrixXd& M, const char* who) {
  if (!M.allFinite())
    throw NumericalError(std::string(who) + ": non-finite entries");
}

int dominant_index(const Eigen::VectorXd& v) {
  int best = 0;
  double mag = std::abs(v(0));
  for (int i = 1; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    if (m > mag) {
      mag = m;
      best = i;
    }
  }
  return best;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  if (v(dominant_index(v)) < 0.0) v = -v;
}

}  // namespace

SpectrumResult sym_eig_topk(const Eigen::MatrixXd& M, int k, EigOrder order) {
  require_finite(M, "sym_eig_topk");
  if (M.rows() != M.cols() || M.rows() < 1)
    throw DataError("sym_eig_topk: matrix must be square and nonempty");
  const int n = static_cast<int>(M.rows());
  if (k < 1 || k > n) throw DataError("sym_eig_topk: k out of range");
  const double scale = M.cwiseAbs().maxCoeff();
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(scale, 1.0))
    throw DataError("sym_eig_topk: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
  if (es.info() != Eigen::Success)
    throw NumericalError("sym_eig_topk: eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Eigen::MatrixXd& vecs = es.eigenvectors();

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> dom(n);
  for (int i = 0; i < n; ++i) dom[i] = dominant_index(vecs.col(i));
  auto key = [&](int i) {
    return order == EigOrder::by_magnitude ? std::abs(ev(i)) : ev(i);
  };
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double ka = key(a), kb = key(b);
    if (ka != kb) return ka > kb;
    return dom[a] < dom[b];
  });

  SpectrumResult out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  for (int j = 0; j < k; ++j) {
    out.values(j) = ev(idx[j]);
    out.vectors.col(j) = vecs.col(idx[j]);
    fix_sign(out.vectors.col(j));
  }
  return out;
}

SvdResult svd_full(const Eigen::MatrixXd& M) {
  require_finite(M, "svd_full");
  if (M.rows() < 1 || M.cols() < 1) throw DataError("svd_full: empty matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (int j = 0; j < out.U.cols(); ++j) {
    const int d = dominant_index(out.U.col(j));
    if (out.U(d, j) < 0.0) {
      out.U.col(j) = -out.U.col(j);
      out.V.col(j) = -out.V.col(j);
    }
  }
  return out;
}

SvtResult svt_with_rank(const Eigen::MatrixXd& M, double tau) {
  require_finite(M, "svt");
  if (tau < 0.0) throw DataError("svt: threshold must be nonnegative");
  const bool square = M.rows() == M.cols();
  const double scale = M.cwiseAbs().maxCoeff();
  const bool symmetric =
      square && (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(scale, 1.0);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  int rank = 0;
  for (int j = 0; j < sv.size(); ++j) {
    sv(j) = std::max(sv(j) - tau, 0.0);
    if (sv(j) > 0.0) ++rank;
  }
  Eigen::MatrixXd S = svd.matrixU().leftCols(rank) * sv.head(rank).asDiagonal() *
                      svd.matrixV().leftCols(rank).transpose();
  if (rank == 0) S = Eigen::MatrixXd::Zero(M.rows(), M.cols());
  // Floating-point SVD of a symmetric matrix can reconstruct slightly
  // asymmetrically; restore exact symmetry so downstream splitting keeps
  // W = W^T.
  if (symmetric) S = 0.5 * (S + S.transpose()).eval();
  return {std::move(S), rank};
}

Eigen::MatrixXd svt(const Eigen::MatrixXd& M, double tau) {
  return svt_with_rank(M, tau).value;
}

double operator_norm(const Eigen::MatrixXd& M) {
  require_finite(M, "operator_norm");
  if (M.rows() < 1 || M.cols() < 1) throw DataError("operator_norm: empty matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

int numerical_rank(const Eigen::MatrixXd& M, double rel_tol) {
  require_finite(M, "numerical_rank");
  if (rel_tol <= 0.0) throw DataError("numerical_rank: tolerance must be positive");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  int rank = 0;
  for (int j = 0; j < sv.size(); ++j)
    if (sv(j) > rel_tol * sv(0)) ++rank;
  return rank;
}

}  // namespace netblock
