#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace dpp {

/// Q <- max[Q - b + a, 0]. Throws std::domain_error on negative or
/// non-finite input.
template <std::floating_point Scalar>
Scalar queue_update(Scalar backlog, Scalar arrivals, Scalar service) {
  if (!std::isfinite(backlog) || !std::isfinite(arrivals) || !std::isfinite(service) ||
      backlog < 0 || arrivals < 0 || service < 0) {
    throw std::domain_error("queue_update: inputs must be finite and non-negative");
  }
  const Scalar next = backlog - service + arrivals;
  return next > Scalar(0) ? next : Scalar(0);
}

/// Z <- max[Z + y, 0].
template <std::floating_point Scalar>
Scalar virtual_queue_update(Scalar backlog, Scalar penalty) {
  if (!std::isfinite(backlog) || !std::isfinite(penalty) || backlog < 0) {
    throw std::domain_error("virtual_queue_update: backlog must be finite and non-negative");
  }
  const Scalar next = backlog + penalty;
  return next > Scalar(0) ? next : Scalar(0);
}

/// Vectorised forms without per-element validation; callers guarantee the
/// model invariants (a, b >= 0, finite).
template <typename DerivedQ, typename DerivedA, typename DerivedB>
auto queue_update(const Eigen::MatrixBase<DerivedQ>& backlog,
                  const Eigen::MatrixBase<DerivedA>& arrivals,
                  const Eigen::MatrixBase<DerivedB>& service) {
  using Scalar = typename DerivedQ::Scalar;
  return (backlog - service + arrivals).cwiseMax(Scalar(0));
}

template <typename DerivedZ, typename DerivedY>
auto virtual_queue_update(const Eigen::MatrixBase<DerivedZ>& backlog,
                          const Eigen::MatrixBase<DerivedY>& penalties) {
  using Scalar = typename DerivedZ::Scalar;
  return (backlog + penalties).cwiseMax(Scalar(0));
}

/// Combined queue state Theta(t) = [Q(t), Z(t)] at slot t.
template <typename Scalar>
struct BasicSystemState {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  VectorType queues;          ///< actual queues Q_k, k = 1..K
  VectorType virtual_queues;  ///< virtual queues Z_m, m = 1..M
  std::uint64_t slot = 0;

  static BasicSystemState zero(Eigen::Index queue_count, Eigen::Index constraint_count) {
    return {VectorType::Zero(queue_count), VectorType::Zero(constraint_count), 0};
  }

  Eigen::Index dimension() const { return queues.size() + virtual_queues.size(); }

  VectorType combined() const {
    VectorType theta(dimension());
    theta << queues, virtual_queues;
    return theta;
  }

  bool finite() const { return queues.allFinite() && virtual_queues.allFinite(); }

  bool operator==(const BasicSystemState&) const = default;
};

using SystemState = BasicSystemState<double>;

/// Positive weights w_i of the quadratic Lyapunov function, one per
/// combined queue dimension (K + M).
template <typename Scalar>
struct BasicLyapunovWeights {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  VectorType values;

  static BasicLyapunovWeights uniform(Eigen::Index dimension) {
    return {VectorType::Ones(dimension)};
  }

  explicit operator bool() const { return values.size() > 0; }

  void check(Eigen::Index dimension) const {
    if (values.size() != dimension) {
      throw std::domain_error("Lyapunov weights: expected one weight per queue dimension");
    }
    if (!((values.array() > Scalar(0)).all()) || !values.allFinite()) {
      throw std::domain_error("Lyapunov weights: every weight must be positive and finite");
    }
  }
};

using LyapunovWeights = BasicLyapunovWeights<double>;

/// L(Theta) = 1/2 sum_i w_i theta_i^2.
template <typename Scalar>
Scalar lyapunov_value(const BasicSystemState<Scalar>& state,
                      const BasicLyapunovWeights<Scalar>& weights) {
  weights.check(state.dimension());
  const auto K = state.queues.size();
  const auto M = state.virtual_queues.size();
  const Scalar q = (weights.values.head(K).array() * state.queues.array().square()).sum();
  const Scalar z = (weights.values.tail(M).array() * state.virtual_queues.array().square()).sum();
  return Scalar(0.5) * (q + z);
}

/// ||Theta|| = sqrt(L(Theta)); a norm on the combined queue vector.
template <typename Scalar>
Scalar lyapunov_norm(const BasicSystemState<Scalar>& state,
                     const BasicLyapunovWeights<Scalar>& weights) {
  return std::sqrt(lyapunov_value(state, weights));
}

/// Realised one-slot Lyapunov difference L(after) - L(before).
template <typename Scalar>
Scalar lyapunov_difference(const BasicSystemState<Scalar>& before,
                           const BasicSystemState<Scalar>& after,
                           const BasicLyapunovWeights<Scalar>& weights) {
  return lyapunov_value(after, weights) - lyapunov_value(before, weights);
}

}  // namespace dpp
