#include "crpslearn/spline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace crpslearn {
namespace {

void fill_penalties(BasisSystem& sys) {
  const Eigen::Index l = sys.size();
  sys.d1 = l > 1 ? difference_matrix(l, 1) : Matrix(0, l);
  sys.d2 = l > 2 ? difference_matrix(l, 2) : Matrix(0, l);
}

// Index i with knots[i] <= x < knots[i+1]; the right boundary belongs to the
// last non-empty interval.
std::size_t find_span(const std::vector<double>& knots, int degree, double x) {
  const std::size_t n_basis = knots.size() - static_cast<std::size_t>(degree) - 1;
  if (x >= knots[n_basis]) {
    std::size_t i = n_basis - 1;
    while (i > static_cast<std::size_t>(degree) && knots[i] == knots[i + 1]) --i;
    return i;
  }
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  return static_cast<std::size_t>(it - knots.begin()) - 1;
}

}  // namespace

bool BasisSystem::has_full_column_rank() const {
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  return qr.rank() == basis.cols();
}

const Matrix* BasisSystem::find_smoother(double lambda, double alpha) const {
  const auto it = smoothers.find({lambda, alpha});
  return it == smoothers.end() ? nullptr : &it->second;
}

BasisSystem bspline_basis_on_knots(const ProbGrid& grid, std::vector<double> knots, int degree) {
  if (degree < 0 || degree > 3) throw InputError("B-spline degree must be in 0..3");
  if (knots.size() < static_cast<std::size_t>(2 * degree + 2)) throw InputError("too few knots for the degree");
  if (!std::is_sorted(knots.begin(), knots.end())) throw InputError("knot sequence must be nondecreasing");

  const std::size_t n_basis = knots.size() - static_cast<std::size_t>(degree) - 1;
  const std::size_t m_size = grid.size();
  Matrix b = Matrix::Zero(static_cast<Eigen::Index>(m_size), static_cast<Eigen::Index>(n_basis));

  std::vector<double> left(degree + 1), right(degree + 1), values(degree + 1);
  for (std::size_t m = 0; m < m_size; ++m) {
    const double x = grid[m];
    if (x < knots.front() || x > knots.back()) {
      std::ostringstream msg;
      msg << "grid point " << x << " outside the knot range";
      throw InputError(msg.str());
    }
    const std::size_t span = find_span(knots, degree, x);
    // Triangular Cox-de Boor evaluation of the degree+1 nonzero functions.
    values[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
      left[j] = x - knots[span + 1 - j];
      right[j] = knots[span + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double denom = right[r + 1] + left[j - r];
        const double temp = denom > 0.0 ? values[r] / denom : 0.0;
        values[r] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      values[j] = saved;
    }
    for (int j = 0; j <= degree; ++j) {
      b(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(span - degree + j)) = values[j];
    }
  }

  BasisSystem sys;
  sys.kind = BasisKind::bspline;
  sys.basis = std::move(b);
  sys.knots = std::move(knots);
  sys.degree = degree;
  fill_penalties(sys);
  return sys;
}

BasisSystem bspline_basis(const ProbGrid& grid, double knot_distance, int degree) {
  if (!(knot_distance > 0.0) || !std::isfinite(knot_distance)) throw InputError("knot distance must be positive");
  if (knot_distance > 1.0) throw InputError("knot distance larger than the unit interval leaves no basis function");
  const auto intervals = std::max<long>(1, std::lround(1.0 / knot_distance));
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(intervals + 1 + 2 * degree));
  for (int i = 0; i < degree; ++i) knots.push_back(0.0);
  for (long i = 0; i <= intervals; ++i) knots.push_back(static_cast<double>(i) / static_cast<double>(intervals));
  for (int i = 0; i < degree; ++i) knots.push_back(1.0);
  return bspline_basis_on_knots(grid, std::move(knots), degree);
}

BasisSystem identity_basis(const ProbGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  BasisSystem sys;
  sys.kind = BasisKind::identity;
  sys.basis = Matrix::Identity(m, m);
  sys.degree = 0;
  fill_penalties(sys);
  return sys;
}

BasisSystem constant_basis(const ProbGrid& grid) {
  BasisSystem sys;
  sys.kind = BasisKind::constant;
  sys.basis = Matrix::Ones(static_cast<Eigen::Index>(grid.size()), 1);
  sys.knots = {0.0, 1.0};
  sys.degree = 0;
  fill_penalties(sys);
  return sys;
}

Matrix difference_matrix(Eigen::Index size, int order) {
  if (order != 1 && order != 2) throw InputError("difference order must be 1 or 2");
  if (size <= order) {
    std::ostringstream msg;
    msg << "difference matrix of order " << order << " needs more than " << order << " columns, got " << size;
    throw InputError(msg.str());
  }
  Matrix d = Matrix::Zero(size - order, size);
  for (Eigen::Index i = 0; i < size - order; ++i) {
    if (order == 1) {
      d(i, i) = -1.0;
      d(i, i + 1) = 1.0;
    } else {
      d(i, i) = 1.0;
      d(i, i + 1) = -2.0;
      d(i, i + 2) = 1.0;
    }
  }
  return d;
}

Matrix smoother(const BasisSystem& sys, double lambda, double alpha) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("smoothing lambda must be finite and >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("smoothing alpha must lie in [0,1]");
  const Matrix& b = sys.basis;
  const Eigen::Index l_size = b.cols();
  Matrix penalty = Matrix::Zero(l_size, l_size);
  bool use_d1 = false, use_d2 = false;
  if (lambda > 0.0) {
    use_d1 = alpha > 0.0 && sys.d1.rows() > 0;
    use_d2 = alpha < 1.0 && sys.d2.rows() > 0;
    if (use_d1) penalty += lambda * alpha * (sys.d1.transpose() * sys.d1);
    if (use_d2) penalty += lambda * (1.0 - alpha) * (sys.d2.transpose() * sys.d2);
  }
  // Rotate so the penalty null space (constants, plus lines for a pure
  // second-difference penalty) occupies the leading coordinates and zero the
  // penalty there exactly. With lambda ~ 1e9 this keeps S 1 = 1 to rounding
  // level instead of losing the B'B information to cancellation.
  std::vector<Vector> null_vectors;
  if (use_d1 || use_d2) {
    const Vector ones = Vector::Ones(l_size);
    const Vector line = Vector::LinSpaced(l_size, 0.0, static_cast<double>(l_size - 1));
    null_vectors.push_back(ones);
    if (!use_d1) null_vectors.push_back(line);
  }
  Matrix q = Matrix::Identity(l_size, l_size);
  const auto r = static_cast<Eigen::Index>(null_vectors.size());
  if (r > 0) {
    Matrix n(l_size, r);
    for (Eigen::Index j = 0; j < r; ++j) n.col(j) = null_vectors[static_cast<std::size_t>(j)];
    q = Eigen::HouseholderQR<Matrix>(n).householderQ();
  }
  const Matrix bq = b * q;
  Matrix pq = q.transpose() * penalty * q;
  pq.topRows(r).setZero();
  pq.leftCols(r).setZero();
  Matrix system = bq.transpose() * bq + 0.5 * (pq + pq.transpose());
  Eigen::LDLT<Matrix> ldlt(system);
  const Vector diag = ldlt.vectorD().cwiseAbs();
  const double scale = std::max(1.0, diag.maxCoeff());
  if (ldlt.info() != Eigen::Success || diag.minCoeff() <= 1e-12 * scale) {
    std::ostringstream msg;
    msg << "singular smoothing system for a basis with " << b.cols() << " functions at lambda=" << lambda;
    throw NumericalError(msg.str());
  }
  Matrix s = bq * ldlt.solve(bq.transpose());
  // Symmetric in exact arithmetic; remove rounding asymmetry.
  return 0.5 * (s + s.transpose());
}

const Matrix& add_smoother(BasisSystem& sys, double lambda, double alpha) {
  const auto key = std::make_pair(lambda, alpha);
  auto it = sys.smoothers.find(key);
  if (it == sys.smoothers.end()) it = sys.smoothers.emplace(key, smoother(sys, lambda, alpha)).first;
  return it->second;
}

Matrix pinv_init(const BasisSystem& sys, const Matrix& w0) {
  if (w0.rows() != sys.basis.rows()) throw InputError("prior weight rows must match the grid size");
  if (sys.kind == BasisKind::identity) return w0;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sys.basis);
  return cod.solve(w0);
}

}  // namespace crpslearn
