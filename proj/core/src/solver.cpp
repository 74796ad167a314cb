#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "mmshape/errors.hpp"
#include "mmshape/fem.hpp"

namespace mmshape {

Vector solve_spd(const SparseMatrix& a, const Vector& b, const SolverOptions& opts, SolveStats* stats) {
  const Eigen::Index n = a.rows();
  Vector x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }
  const int max_it =
      opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))) + 10;

  Vector inv_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = a.coeff(i, i);
    if (!(d > 0.0)) throw SolverError("solve_spd: non-positive diagonal entry", 1.0);
    inv_diag[i] = 1.0 / d;
  }

  Vector r = b;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  Vector ap(n);
  double rz = r.dot(z);
  int it = 0;
  double rel = 1.0;
  while (it < max_it) {
    ap.noalias() = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) throw SolverError("solve_spd: negative curvature, matrix is not positive definite", rel);
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    ++it;
    rel = r.norm() / bnorm;
    if (rel <= opts.rel_tol) {
      // confirm with the true residual; restart from it if the recurrence drifted
      r = b - a * x;
      rel = r.norm() / bnorm;
      if (rel <= opts.rel_tol) break;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (stats) *stats = {it, rel};
  if (rel > opts.rel_tol) throw SolverError("solve_spd: no convergence within " + std::to_string(max_it) + " iterations", rel);
  return x;
}

Field solve_spd(const SparseSystem& sys, const SolverOptions& opts, SolveStats* stats) {
  return solve_spd(sys.matrix, sys.rhs, opts, stats);
}

Vector solve_general(const SparseMatrix& a, const Vector& b, double rel_tol) {
  Eigen::SparseMatrix<double> col = a;
  col.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(col);
  if (lu.info() != Eigen::Success) throw SolverError("solve_general: factorization failed", 1.0);
  Vector x = lu.solve(b);
  const double bnorm = b.norm();
  const double rel = bnorm > 0.0 ? (b - a * x).norm() / bnorm : (a * x).norm();
  if (!(rel <= rel_tol)) throw SolverError("solve_general: residual above tolerance", rel);
  return x;
}

struct SpdFactorization::Impl {
  Eigen::SparseMatrix<double> a;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  double norm_inf = 0.0;
};

SpdFactorization::SpdFactorization(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  impl_->a = a;
  impl_->a.makeCompressed();
  Vector row_sums = Vector::Zero(a.rows());
  for (int k = 0; k < impl_->a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(impl_->a, k); it; ++it) row_sums[it.row()] += std::abs(it.value());
  impl_->norm_inf = row_sums.size() ? row_sums.maxCoeff() : 0.0;
  impl_->ldlt.compute(impl_->a);
  if (impl_->ldlt.info() != Eigen::Success) throw SolverError("SpdFactorization: factorization failed", 1.0);
  const Vector d = impl_->ldlt.vectorD();
  if (!(d.minCoeff() > 0.0)) throw SolverError("SpdFactorization: matrix is not positive definite", 1.0);
}

SpdFactorization::~SpdFactorization() = default;
SpdFactorization::SpdFactorization(SpdFactorization&&) noexcept = default;
SpdFactorization& SpdFactorization::operator=(SpdFactorization&&) noexcept = default;

Vector SpdFactorization::solve(const Vector& b, double rel_tol) const {
  if (b.size() == 0 || b.lpNorm<Eigen::Infinity>() == 0.0) return Vector::Zero(b.size());
  Vector x = impl_->ldlt.solve(b);
  auto backward_error = [&](const Vector& r) {
    return r.lpNorm<Eigen::Infinity>() /
           (impl_->norm_inf * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
  };
  Vector r = b - impl_->a * x;
  double err = backward_error(r);
  for (int k = 0; k < 3 && err > rel_tol; ++k) {
    x += impl_->ldlt.solve(r);
    r = b - impl_->a * x;
    err = backward_error(r);
  }
  if (!(err <= rel_tol)) throw SolverError("SpdFactorization: backward error above tolerance", err);
  return x;
}

double smallest_ritz_value(const SparseMatrix& a, int steps) {
  const Eigen::Index n = a.rows();
  steps = static_cast<int>(std::min<Eigen::Index>(steps, n));
  std::vector<Vector> basis;
  basis.reserve(steps);
  Vector q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
  q.normalize();
  std::vector<double> alpha, beta;
  for (int k = 0; k < steps; ++k) {
    basis.push_back(q);
    Vector w = a * q;
    const double ak = q.dot(w);
    alpha.push_back(ak);
    // full reorthogonalization
    for (const auto& v : basis) w -= v.dot(w) * v;
    for (const auto& v : basis) w -= v.dot(w) * v;
    const double bk = w.norm();
    if (bk < 1e-14 || k + 1 == steps) break;
    beta.push_back(bk);
    q = w / bk;
  }
  const int m = static_cast<int>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace mmshape
