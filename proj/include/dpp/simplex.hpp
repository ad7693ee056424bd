#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace dpp::lp {

/// minimize c'x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
template <typename Scalar>
struct LinearProgram {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  VectorType cost;
  Matrix A_ub;
  VectorType b_ub;
  Matrix A_eq;
  VectorType b_eq;

  explicit LinearProgram(Eigen::Index variables)
      : cost(VectorType::Zero(variables)),
        A_ub(0, variables),
        b_ub(0),
        A_eq(0, variables),
        b_eq(0) {}

  Eigen::Index variables() const { return cost.size(); }

  template <typename Derived>
  void add_upper(const Eigen::MatrixBase<Derived>& row, Scalar rhs) {
    append(A_ub, b_ub, row, rhs);
  }
  template <typename Derived>
  void add_equality(const Eigen::MatrixBase<Derived>& row, Scalar rhs) {
    append(A_eq, b_eq, row, rhs);
  }

 private:
  template <typename Derived>
  static void append(Matrix& A, VectorType& b, const Eigen::MatrixBase<Derived>& row, Scalar rhs) {
    A.conservativeResize(A.rows() + 1, Eigen::NoChange);
    A.row(A.rows() - 1) = row.transpose();
    b.conservativeResize(b.size() + 1);
    b(b.size() - 1) = rhs;
  }
};

enum class Status { Optimal, Infeasible, Unbounded };

template <typename Scalar>
struct Solution {
  Status status = Status::Infeasible;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar objective = std::numeric_limits<Scalar>::quiet_NaN();
};

namespace detail {

/// Dense two-phase tableau simplex with Bland's anti-cycling rule.
/// Intended for problems with tens of variables.
template <typename Scalar>
class Tableau {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Tableau(const LinearProgram<Scalar>& lp, Scalar tolerance) : tol_(tolerance), n_(lp.variables()) {
    const auto mu = lp.A_ub.rows();
    const auto me = lp.A_eq.rows();
    m_ = mu + me;

    std::vector<bool> needs_artificial(static_cast<std::size_t>(m_), false);
    for (Eigen::Index i = 0; i < mu; ++i) needs_artificial[i] = lp.b_ub(i) < Scalar(0);
    for (Eigen::Index i = 0; i < me; ++i) needs_artificial[mu + i] = true;
    Eigen::Index artificials = 0;
    for (bool a : needs_artificial) artificials += a ? 1 : 0;

    slack0_ = n_;
    art0_ = n_ + mu;
    cols_ = art0_ + artificials;
    t_ = Matrix::Zero(m_ + 1, cols_ + 1);
    basis_.assign(static_cast<std::size_t>(m_), -1);

    Eigen::Index next_art = art0_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const bool ub = i < mu;
      const Scalar sign = ub ? (lp.b_ub(i) < Scalar(0) ? Scalar(-1) : Scalar(1))
                             : (lp.b_eq(i - mu) < Scalar(0) ? Scalar(-1) : Scalar(1));
      t_.row(i).head(n_) = sign * (ub ? lp.A_ub.row(i) : lp.A_eq.row(i - mu));
      t_(i, cols_) = sign * (ub ? lp.b_ub(i) : lp.b_eq(i - mu));
      if (ub) t_(i, slack0_ + i) = sign;
      if (needs_artificial[i]) {
        t_(i, next_art) = Scalar(1);
        basis_[i] = next_art++;
      } else {
        basis_[i] = slack0_ + i;
      }
    }
  }

  Solution<Scalar> solve(const LinearProgram<Scalar>& lp) {
    Solution<Scalar> out;
    if (art0_ < cols_) {
      // Phase 1: minimise the sum of artificials.
      t_.row(m_).setZero();
      t_.row(m_).segment(art0_, cols_ - art0_).setOnes();
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (basis_[i] >= art0_) t_.row(m_) -= t_.row(i);
      }
      iterate(cols_);
      if (-t_(m_, cols_) > tol_ * Scalar(100)) return out;
      evict_artificials();
    }

    // Phase 2 on the original objective; artificial columns never re-enter.
    t_.row(m_).setZero();
    t_.row(m_).head(n_) = lp.cost.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const auto b = basis_[i];
      if (b < n_ && lp.cost(b) != Scalar(0)) t_.row(m_) -= lp.cost(b) * t_.row(i);
    }
    if (!iterate(art0_)) {
      out.status = Status::Unbounded;
      return out;
    }

    out.status = Status::Optimal;
    out.x = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) out.x(basis_[i]) = std::max(Scalar(0), t_(i, cols_));
    }
    out.objective = lp.cost.dot(out.x);
    return out;
  }

 private:
  // Pivots until optimal over columns [0, limit). Returns false if unbounded.
  bool iterate(Eigen::Index limit) {
    for (;;) {
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < limit; ++j) {
        if (t_(m_, j) < -tol_) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;

      Eigen::Index leaving = -1;
      Scalar best = std::numeric_limits<Scalar>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const Scalar a = t_(i, entering);
        if (a <= tol_) continue;
        const Scalar ratio = t_(i, cols_) / a;
        if (ratio < best - tol_ || (std::abs(ratio - best) <= tol_ && basis_[i] < basis_[leaving])) {
          best = ratio;
          leaving = i;
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const Scalar f = t_(i, col);
      if (f != Scalar(0)) t_.row(i) -= f * t_.row(row);
    }
    // Exact unit column keeps round-off from accumulating in basic columns.
    t_.col(col).setZero();
    t_(row, col) = Scalar(1);
    basis_[row] = col;
  }

  void evict_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < art0_) continue;
      for (Eigen::Index j = 0; j < art0_; ++j) {
        if (std::abs(t_(i, j)) > tol_) {
          pivot(i, j);
          break;
        }
      }
      // A row with no usable entry is redundant; its artificial stays at 0.
    }
  }

  Scalar tol_;
  Eigen::Index n_;
  Eigen::Index m_ = 0;
  Eigen::Index slack0_ = 0;
  Eigen::Index art0_ = 0;
  Eigen::Index cols_ = 0;
  Matrix t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace detail

template <typename Scalar>
Solution<Scalar> solve(const LinearProgram<Scalar>& lp, Scalar tolerance = Scalar(1e-11)) {
  detail::Tableau<Scalar> tableau(lp, tolerance);
  return tableau.solve(lp);
}

}  // namespace dpp::lp
