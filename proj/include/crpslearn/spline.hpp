#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "crpslearn/grid_types.hpp"

namespace crpslearn {

enum class BasisKind { identity, constant, bspline };

/// A basis evaluated on a probability grid together with its difference
/// penalties and any precomputed smoother (hat) matrices.
struct BasisSystem {
  BasisKind kind = BasisKind::bspline;
  /// M x L evaluation matrix; rows sum to one.
  Matrix basis;
  /// Full clamped knot sequence (empty for the identity basis).
  std::vector<double> knots;
  int degree = 0;
  /// (L-1) x L first differences and (L-2) x L second differences. Zero rows
  /// when L is too small for the order.
  Matrix d1;
  Matrix d2;
  /// Smoother matrices keyed by (lambda, alpha). Filled by add_smoother before
  /// the system is shared; read-only afterwards.
  std::map<std::pair<double, double>, Matrix> smoothers;

  Eigen::Index size() const noexcept { return basis.cols(); }
  Eigen::Index grid_size() const noexcept { return basis.rows(); }
  bool has_full_column_rank() const;
  /// nullptr if (lambda, alpha) was never added.
  const Matrix* find_smoother(double lambda, double alpha) const;
};

/// Clamped B-spline basis of the given degree (0..3) on [0,1] with
/// n = round(1/knot_distance) equidistant intervals, evaluated on the grid by
/// the Cox-de Boor recursion.
BasisSystem bspline_basis(const ProbGrid& grid, double knot_distance, int degree);

/// B-spline basis for an explicit full knot sequence (boundary knots repeated
/// degree+1 times). Grid points outside [knots.front(), knots.back()] are an error.
BasisSystem bspline_basis_on_knots(const ProbGrid& grid, std::vector<double> knots, int degree);

/// The pointwise basis phi_i = 1{p_i}: B is the M x M identity.
BasisSystem identity_basis(const ProbGrid& grid);

/// The single constant function phi_1 = 1.
BasisSystem constant_basis(const ProbGrid& grid);

/// (L-order) x L matrix of forward differences of the given order (1 or 2).
Matrix difference_matrix(Eigen::Index size, int order);

/// S = B (B'B + lambda (alpha D1'D1 + (1-alpha) D2'D2))^{-1} B'.
/// Throws NumericalError when the bracketed system is singular.
Matrix smoother(const BasisSystem& basis, double lambda, double alpha);

/// Computes smoother(basis, lambda, alpha) and stores it in basis.smoothers.
const Matrix& add_smoother(BasisSystem& basis, double lambda, double alpha);

/// Least-squares minimum-norm solution of B beta = w0, column by column.
Matrix pinv_init(const BasisSystem& basis, const Matrix& w0);

}  // namespace crpslearn
