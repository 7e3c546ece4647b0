#pragma once

#include <Eigen/Dense>

namespace netblock {

/// Eigen/singular pairs in the requested order. For full symmetric
/// decompositions the reconstruction error is within 1e-8 relative.
struct SpectrumResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // columns, orthonormal
};

enum class EigOrder { by_magnitude, by_value };

/// k leading eigenpairs of a symmetric matrix. by_magnitude sorts on |lambda|
/// descending (the ordering used for spectral clustering), by_value on lambda
/// descending. Exactly equal values are ordered by the ascending index of the
/// eigenvector's dominant coordinate; each vector is signed so its dominant
/// coordinate is positive.
SpectrumResult sym_eig_topk(const Eigen::MatrixXd& M, int k,
                            EigOrder order = EigOrder::by_magnitude);

struct SvdResult {
  Eigen::MatrixXd U;
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd V;
};

SvdResult svd_full(const Eigen::MatrixXd& M);

/// Soft-thresholds the singular values: sum_j max(sigma_j - tau, 0) a_j b_j^T.
/// Symmetric inputs (within 1e-10 relative) yield exactly symmetric outputs.
Eigen::MatrixXd svt(const Eigen::MatrixXd& M, double tau);

struct SvtResult {
  Eigen::MatrixXd value;
  int rank;  // count of singular values that survived the threshold
};

SvtResult svt_with_rank(const Eigen::MatrixXd& M, double tau);

/// Largest singular value.
double operator_norm(const Eigen::MatrixXd& M);

/// Count of singular values above rel_tol * sigma_1; 0 for the zero matrix.
int numerical_rank(const Eigen::MatrixXd& M, double rel_tol = 1e-8);

}  // namespace netblock
