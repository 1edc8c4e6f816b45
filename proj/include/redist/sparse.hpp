#pragma once

// Compressed-row sparse matrices with a fixed pattern, a Jacobi-preconditioned
// conjugate gradient solver and symmetric elimination of Dirichlet rows.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "redist/mesh.hpp"

namespace redist {

/// Thrown when a linear solve fails (iteration cap, breakdown, non-finite data).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Builds a zero matrix whose pattern is given per row (columns sorted or not).
  SparseMatrix(std::size_t n, const std::vector<std::vector<Index>>& rows) : n_(n) {
    if (rows.size() != n) throw std::invalid_argument("pattern row count mismatch");
    row_ptr_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto r = rows[i];
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
      for (Index j : r) {
        if (j < 0 || static_cast<std::size_t>(j) >= n) throw std::out_of_range("pattern column out of range");
        cols_.push_back(j);
      }
      row_ptr_[i + 1] = cols_.size();
    }
    vals_.assign(cols_.size(), 0.0);
  }

  /// Pattern coupling every pair of vertices that share a cell.
  template <int Dim>
  static SparseMatrix from_mesh(const Mesh<Dim>& mesh) {
    std::vector<std::vector<Index>> rows(mesh.num_vertices());
    for (const auto& cell : mesh.cells())
      for (Index a : cell)
        for (Index b : cell) rows[a].push_back(b);
    return SparseMatrix(mesh.num_vertices(), rows);
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<std::vector<Index>> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = {static_cast<Index>(i)};
    SparseMatrix m(n, rows);
    std::fill(m.vals_.begin(), m.vals_.end(), 1.0);
    return m;
  }

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] std::size_t nonzeros() const { return vals_.size(); }

  /// Adds v at (i, j); the entry must be in the pattern.
  void add(Index i, Index j, double v) { vals_[locate(i, j)] += v; }

  /// Value at (i, j), zero outside the pattern.
  [[nodiscard]] double at(Index i, Index j) const {
    const auto b = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto e = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(b, e, j);
    if (it == e || *it != j) return 0.0;
    return vals_[static_cast<std::size_t>(it - cols_.begin())];
  }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[cols_[k]];
      y[i] = s;
    }
  }

  [[nodiscard]] std::vector<double> operator*(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
  }

  [[nodiscard]] std::vector<double> diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) d[i] = at(static_cast<Index>(i), static_cast<Index>(i));
    return d;
  }

  /// Largest |A_ij - A_ji| over the pattern.
  [[nodiscard]] double asymmetry() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        worst = std::max(worst, std::abs(vals_[k] - at(cols_[k], static_cast<Index>(i))));
    return worst;
  }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (double v : vals_) m = std::max(m, std::abs(v));
    return m;
  }

  // Raw CSR access.
  [[nodiscard]] std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  [[nodiscard]] std::span<const Index> cols() const { return cols_; }
  [[nodiscard]] std::span<const double> values() const { return vals_; }
  [[nodiscard]] std::span<double> values() { return vals_; }

 private:
  [[nodiscard]] std::size_t locate(Index i, Index j) const {
    const auto b = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto e = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(b, e, j);
    if (it == e || *it != j)
      throw std::out_of_range("entry (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") not in sparsity pattern");
    return static_cast<std::size_t>(it - cols_.begin());
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Index> cols_;
  std::vector<double> vals_;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

struct SolverOptions {
  double tol = 1e-12;
  /// Iteration cap; zero means 10 * n.
  int max_iterations = 0;
};

/// Loose bound on the recomputed residual; far above round-off drift.
inline constexpr double kTrueResidualGuard = 1e-6;

/// Jacobi-preconditioned conjugate gradients for SPD systems.
///
/// `x` holds the initial guess on entry and the solution on exit. Throws
/// SolverError if the relative residual does not reach `tol` within the cap
/// or if a non-positive curvature direction shows the matrix is not SPD.
inline SolveStats solve_spd(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                            const SolverOptions& opts = {}) {
  const std::size_t n = a.size();
  if (b.size() != n || x.size() != n) throw std::invalid_argument("solve_spd: size mismatch");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_spd: tol must be positive");
  auto dot = [n](std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += u[i] * v[i];
    return s;
  };

  const double bnorm = std::sqrt(dot(b, b));
  if (!std::isfinite(bnorm)) throw SolverError("solve_spd: non-finite right-hand side");
  SolveStats stats;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return stats;
  }

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw SolverError("solve_spd: non-positive diagonal entry");
    d = 1.0 / d;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  a.multiply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double rnorm = std::sqrt(dot(r, r));
  if (!std::isfinite(rnorm)) {
    // A poor initial guess should not poison the solve.
    std::fill(x.begin(), x.end(), 0.0);
    std::copy(b.begin(), b.end(), r.begin());
    rnorm = bnorm;
  }
  const double target = opts.tol * bnorm;
  const int cap = opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(10 * n);

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  int it = 0;
  while (rnorm > target) {
    if (it >= cap) {
      throw SolverError("solve_spd: no convergence after " + std::to_string(it) +
                        " iterations (relative residual " + std::to_string(rnorm / bnorm) + ")");
    }
    a.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw SolverError("solve_spd: matrix is not positive definite");
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rnorm = std::sqrt(dot(r, r));
    if (!std::isfinite(rnorm)) throw SolverError("solve_spd: non-finite residual");
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++it;
  }
  // The recursive residual can collapse while x drifts along a null space.
  a.multiply(x, q);
  double true_r = 0.0;
  for (std::size_t i = 0; i < n; ++i) true_r += (b[i] - q[i]) * (b[i] - q[i]);
  true_r = std::sqrt(true_r);
  if (!(true_r <= kTrueResidualGuard * bnorm)) {
    throw SolverError("solve_spd: true relative residual " + std::to_string(true_r / bnorm) +
                      " after recursive convergence, system is singular or inconsistent");
  }
  stats.iterations = it;
  stats.relative_residual = rnorm / bnorm;
  return stats;
}

inline std::vector<double> solve_spd(const SparseMatrix& a, std::span<const double> b,
                                     double tol = 1e-12) {
  std::vector<double> x(a.size(), 0.0);
  solve_spd(a, b, x, SolverOptions{tol, 0});
  return x;
}

/// Record of a symmetric Dirichlet elimination, replayable on new right-hand sides.
struct DirichletConstraint {
  std::vector<Index> dofs;
  std::vector<double> values;
  /// Column contributions A_orig(:, dofs) * values removed from the free rows.
  std::vector<double> lifting;

  /// Applies the elimination to a right-hand side assembled for the original operator.
  void apply_to_rhs(std::span<double> b) const {
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lifting[i];
    for (std::size_t k = 0; k < dofs.size(); ++k) b[dofs[k]] = values[k];
  }
};

/// Strongly imposes x[dofs] = values: constrained rows and columns are
/// zeroed, their diagonal set to one, and b is lifted so the system stays
/// symmetric. Repeated dofs must carry identical values.
inline DirichletConstraint apply_strong_dirichlet(SparseMatrix& a, std::span<double> b,
                                                  std::span<const Index> dofs,
                                                  std::span<const double> values) {
  if (dofs.size() != values.size()) throw std::invalid_argument("dirichlet: dofs/values size mismatch");
  const std::size_t n = a.size();
  std::map<Index, double> unique;
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    if (dofs[k] < 0 || static_cast<std::size_t>(dofs[k]) >= n) throw std::out_of_range("dirichlet dof out of range");
    auto [it, inserted] = unique.emplace(dofs[k], values[k]);
    if (!inserted && it->second != values[k])
      throw std::invalid_argument("dirichlet: conflicting values for dof " + std::to_string(dofs[k]));
  }

  DirichletConstraint c;
  std::vector<char> fixed(n, 0);
  std::vector<double> value(n, 0.0);
  for (const auto& [d, v] : unique) {
    c.dofs.push_back(d);
    c.values.push_back(v);
    fixed[d] = 1;
    value[d] = v;
  }
  c.lifting.assign(n, 0.0);

  const auto rp = a.row_ptr();
  const auto cols = a.cols();
  auto vals = a.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const Index j = cols[k];
      if (fixed[i]) {
        vals[k] = (static_cast<std::size_t>(j) == i) ? 1.0 : 0.0;
      } else if (fixed[j]) {
        c.lifting[i] += vals[k] * value[j];
        vals[k] = 0.0;
      }
    }
  }
  c.apply_to_rhs(b);
  return c;
}

}  // namespace redist
