#pragma once

// Independent reference for the event-only policy optimum. Enumerates every
// deterministic policy, then walks the vertices of the mixture polytope by
// solving the small square systems that define them. Shares no code with
// the simplex solver.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dpp/model.hpp"

namespace dpp::testing {

/// Expected (y0, g) of one deterministic policy, where g stacks the drifts
/// E[a_k - b_k] and the constraint penalties E[y_m].
struct PolicyPoint {
  std::vector<std::size_t> choice;
  double objective = 0.0;
  Eigen::VectorXd g;
};

inline std::vector<PolicyPoint> deterministic_points(const NetworkModel& model) {
  const auto K = static_cast<Eigen::Index>(model.queue_count());
  const auto M = static_cast<Eigen::Index>(model.constraint_count());
  std::vector<PolicyPoint> points;
  std::vector<std::size_t> choice(model.event_count(), 0);
  while (true) {
    PolicyPoint p{choice, 0.0, Eigen::VectorXd::Zero(K + M)};
    for (std::size_t w = 0; w < model.event_count(); ++w) {
      const auto& o = model.outcome(w, choice[w]);
      const double pr = model.probability(w);
      p.objective += pr * o.penalties(0);
      p.g.head(K) += pr * (o.arrivals - o.services);
      p.g.tail(M) += pr * o.penalties.tail(M);
    }
    points.push_back(std::move(p));
    std::size_t w = 0;
    while (w < choice.size() && ++choice[w] == model.action_count(w)) choice[w++] = 0;
    if (w == choice.size()) break;
  }
  return points;
}

namespace detail {

inline void for_each_subset(std::size_t n, std::size_t k,
                            const std::function<void(const std::vector<std::size_t>&)>& f) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    f(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline std::optional<Eigen::VectorXd> solve_square(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::VectorXd x = lu.solve(b);
  if (!((A * x - b).cwiseAbs().maxCoeff() <= 1e-10)) return std::nullopt;
  return x;
}

}  // namespace detail

/// min E[y0] over mixtures of deterministic policies with every g_j <= -eps.
inline std::optional<double> brute_force_y0_opt(const NetworkModel& model, double eps,
                                                double feas_tol = 1e-10) {
  const auto pts = deterministic_points(model);
  const std::size_t N = pts.size();
  const std::size_t J = pts.front().g.size();
  std::optional<double> best;
  // A vertex mixes s points with s - 1 of the J rows tight.
  for (std::size_t s = 1; s <= std::min(N, J + 1); ++s) {
    detail::for_each_subset(N, s, [&](const std::vector<std::size_t>& S) {
      detail::for_each_subset(J, s - 1, [&](const std::vector<std::size_t>& rows) {
        Eigen::MatrixXd A(s, s);
        Eigen::VectorXd b(s);
        A.row(0).setOnes();
        b(0) = 1.0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
          for (std::size_t i = 0; i < s; ++i) A(r + 1, i) = pts[S[i]].g(rows[r]);
          b(r + 1) = -eps;
        }
        const auto lambda = detail::solve_square(A, b);
        if (!lambda || lambda->minCoeff() < -feas_tol) return;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(J);
        double y = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
          g += (*lambda)(i) * pts[S[i]].g;
          y += (*lambda)(i) * pts[S[i]].objective;
        }
        if (J > 0 && g.maxCoeff() > -eps + feas_tol) return;
        if (!best || y < *best) best = y;
      });
    });
  }
  return best;
}

/// max eps with some mixture having every g_j <= -eps; nullopt when even
/// eps = 0 is out of reach. Requires at least one constraint row.
inline std::optional<double> brute_force_epsilon_max(const NetworkModel& model, double feas_tol = 1e-10) {
  const auto pts = deterministic_points(model);
  const std::size_t N = pts.size();
  const std::size_t J = pts.front().g.size();
  std::optional<double> best;
  // Unknowns (lambda_S, eps): sum lambda = 1 and s tight rows.
  for (std::size_t s = 1; s <= std::min(N, J); ++s) {
    detail::for_each_subset(N, s, [&](const std::vector<std::size_t>& S) {
      detail::for_each_subset(J, s, [&](const std::vector<std::size_t>& rows) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(s + 1, s + 1);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(s + 1);
        A.row(0).head(s).setOnes();
        b(0) = 1.0;
        for (std::size_t r = 0; r < s; ++r) {
          for (std::size_t i = 0; i < s; ++i) A(r + 1, i) = pts[S[i]].g(rows[r]);
          A(r + 1, s) = 1.0;
        }
        const auto x = detail::solve_square(A, b);
        if (!x || x->head(s).minCoeff() < -feas_tol) return;
        const double eps = (*x)(s);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(J);
        for (std::size_t i = 0; i < s; ++i) g += (*x)(i) * pts[S[i]].g;
        if (g.maxCoeff() > -eps + feas_tol) return;
        if (!best || eps > *best) best = eps;
      });
    });
  }
  if (!best || *best < -feas_tol) return std::nullopt;
  return std::max(*best, 0.0);
}

}  // namespace dpp::testing
