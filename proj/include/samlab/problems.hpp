#pragma once

// Analytic test objectives with gradient oracles and the metadata the
// convergence checks rely on (Lipschitz/descent constants, minimizer,
// KL exponent).

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "samlab/random.hpp"

namespace samlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a problem cannot be built from the supplied data.
class ProblemError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Objective plus gradient oracle.  Immutable once built; copies share the
/// underlying closures, which capture their data by value.
struct Problem {
  std::string name;
  int dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;

  std::optional<double> lipschitz_L;          // ||grad f(x) - grad f(y)|| <= L ||x - y||
  std::optional<double> descent_L;            // constant of the L-descent inequality
  std::optional<double> strong_convexity_mu;
  std::optional<Vector> minimizer;
  std::optional<double> optimal_value;        // f(minimizer), when the minimizer is known
  std::optional<double> kl_exponent_q;        // in [0, 1)

  double f(const Vector& x) const { return value(x); }
  Vector grad(const Vector& x) const { return gradient(x); }

  /// Descent constant, falling back to the Lipschitz constant.
  std::optional<double> smoothness() const { return descent_L ? descent_L : lipschitz_L; }
};

namespace detail {

// Eigenvalues of the symmetrized matrix, ascending.
inline Vector symmetric_eigenvalues(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ProblemError("eigenvalue computation failed");
  return es.eigenvalues();
}

}  // namespace detail

/// Largest eigenvalue of a symmetric matrix.
inline double largest_eigenvalue(const Matrix& sym) {
  if (sym.rows() == 0) return 0.0;
  const Vector ev = detail::symmetric_eigenvalues(sym);
  return ev[ev.size() - 1];
}

/// Smallest eigenvalue of a symmetric positive definite matrix.  Throws
/// ProblemError if the matrix is not positive definite.
inline double smallest_eigenvalue(const Matrix& spd) {
  Eigen::LLT<Matrix> llt(spd);
  if (spd.rows() == 0 || llt.info() != Eigen::Success) throw ProblemError("matrix is not positive definite");
  const double lo = detail::symmetric_eigenvalues(spd)[0];
  if (!(lo > 0.0)) throw ProblemError("matrix is not positive definite");
  return lo;
}

/// Spectral norm ||A||_2 (largest singular value).
inline double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()[0];
}

/// f(x) = 1/2 <Ax, x> - <b, x> with A symmetric positive definite.
class QuadraticSpec {
public:
  QuadraticSpec(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() == 0 || a_.rows() != a_.cols()) throw ProblemError("quadratic: A must be square and nonempty");
    if (b_.size() != a_.rows()) throw ProblemError("quadratic: b has wrong length");
    if (!a_.allFinite() || !b_.allFinite()) throw ProblemError("quadratic: entries must be finite");
    if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ProblemError("quadratic: A is not symmetric");
    lambda_min_ = smallest_eigenvalue(a_);
    if (!(lambda_min_ > 0.0)) throw ProblemError("quadratic: A is not positive definite");
    lambda_max_ = largest_eigenvalue(a_);
  }

  const Matrix& A() const { return a_; }
  const Vector& b() const { return b_; }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }
  Vector solution() const { return a_.llt().solve(b_); }

private:
  Matrix a_;
  Vector b_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

inline Problem make_quadratic(const QuadraticSpec& spec, std::string name = "quadratic") {
  auto a = std::make_shared<const Matrix>(spec.A());
  auto b = std::make_shared<const Vector>(spec.b());
  Problem p;
  p.name = std::move(name);
  p.dim = static_cast<int>(spec.A().rows());
  p.value = [a, b](const Vector& x) { return 0.5 * x.dot(*a * x) - b->dot(x); };
  p.gradient = [a, b](const Vector& x) -> Vector { return *a * x - *b; };
  p.lipschitz_L = spec.lambda_max();
  p.descent_L = spec.lambda_max();
  p.strong_convexity_mu = spec.lambda_min();
  p.minimizer = spec.solution();
  p.optimal_value = p.value(*p.minimizer);
  p.kl_exponent_q = 0.5;
  return p;
}

inline Problem make_quadratic(const Matrix& a, const Vector& b, std::string name = "quadratic") {
  return make_quadratic(QuadraticSpec(a, b), std::move(name));
}

/// f(x) = sum_i log(1 + r_i^2), r = Ax - b.
inline Problem make_log_quadratic(const Matrix& a, const Vector& b, std::string name = "log-quadratic") {
  if (a.rows() == 0 || a.rows() != a.cols()) throw ProblemError("log-quadratic: A must be square and nonempty");
  if (b.size() != a.rows()) throw ProblemError("log-quadratic: b has wrong length");
  if (!a.allFinite() || !b.allFinite()) throw ProblemError("log-quadratic: entries must be finite");

  auto ap = std::make_shared<const Matrix>(a);
  auto bp = std::make_shared<const Vector>(b);
  Problem p;
  p.name = std::move(name);
  p.dim = static_cast<int>(a.rows());
  p.value = [ap, bp](const Vector& x) {
    const Vector r = *ap * x - *bp;
    return r.array().square().log1p().sum();
  };
  p.gradient = [ap, bp](const Vector& x) -> Vector {
    const Vector r = *ap * x - *bp;
    const Vector d = (2.0 * r.array() / (1.0 + r.array().square())).matrix();
    return ap->transpose() * d;
  };
  // t -> log(1 + t^2) has a 2-Lipschitz derivative.
  const double norm = spectral_norm(a);
  p.lipschitz_L = 2.0 * norm * norm;
  p.descent_L = p.lipschitz_L;

  Eigen::FullPivLU<Matrix> lu(a);
  if (lu.isInvertible()) {
    Vector sol = lu.solve(b);
    if ((a * sol - b).norm() <= 1e-8 * std::max(1.0, b.norm())) {
      p.minimizer = std::move(sol);
      p.optimal_value = 0.0;
    }
  }
  return p;
}

/// f(x) = x^2 on the real line.
inline Problem make_square_1d() {
  Problem p;
  p.name = "square-1d";
  p.dim = 1;
  p.value = [](const Vector& x) { return x[0] * x[0]; };
  p.gradient = [](const Vector& x) -> Vector { return Vector::Constant(1, 2.0 * x[0]); };
  p.lipschitz_L = 2.0;
  p.descent_L = 2.0;
  p.strong_convexity_mu = 2.0;
  p.minimizer = Vector::Zero(1);
  p.optimal_value = 0.0;
  p.kl_exponent_q = 0.5;
  return p;
}

/// Symmetric positive definite matrix Q diag(eigs) Q^T with Q the orthogonal
/// factor of a Gaussian matrix and eigenvalues evenly spaced in [lo, hi].
inline Matrix random_spd_matrix(int n, double lo, double hi, Xoshiro256& rng) {
  if (n < 1) throw ProblemError("random SPD: dimension must be positive");
  if (!(lo > 0.0) || !(hi >= lo)) throw ProblemError("random SPD: need 0 < eig_min <= eig_max");
  const Matrix g = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ();
  Vector eigs(n);
  for (int i = 0; i < n; ++i) eigs[i] = n == 1 ? lo : lo + (hi - lo) * i / static_cast<double>(n - 1);
  Matrix a = q * eigs.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

/// Gaussian A and b, redrawn until A x = b is solved to residual < 1e-8.
inline std::pair<Matrix, Vector> random_invertible_system(int n, Xoshiro256& rng) {
  if (n < 1) throw ProblemError("random system: dimension must be positive");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Matrix a = rng.normal_matrix(n, n);
    Vector b = rng.normal_vector(n);
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) continue;
    const Vector x = lu.solve(b);
    if (x.allFinite() && (a * x - b).norm() < 1e-8) return {std::move(a), std::move(b)};
  }
  throw ProblemError("random system: could not draw an invertible matrix");
}

}  // namespace samlab
