#pragma once

// Box-constrained dual of the linear soft-margin SVM:
//
//   maximize   D(a) = sum_i a_i - 1/2 sum_ij y_i y_j a_i a_j K_ij
//   subject to sum_i a_i y_i = 0,  0 <= a_i <= C
//
// solve_dual() is an SMO solver working on the maximal violating pair.
// brute_force_dual() enumerates every active set and is only meant as a test
// oracle for small instances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clindiag/error.hpp"

namespace clindiag::qp {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Problem data: Gram matrix K_ij = x_i . x_j, labels y_i = +/-1, box C.
template <typename Scalar>
struct QpProblem {
  Matrix<Scalar> gram;
  Vector<Scalar> labels;
  Scalar box = Scalar(1);

  Eigen::Index size() const { return labels.size(); }

  /// Builds the problem from row vectors x_i.
  template <typename Derived>
  static QpProblem from_vectors(const Eigen::MatrixBase<Derived>& vectors, Vector<Scalar> labels, Scalar box) {
    QpProblem p;
    p.gram = vectors * vectors.transpose();
    p.labels = std::move(labels);
    p.box = box;
    return p;
  }

  /// Throws Error(InvalidProblem) on malformed input. The PSD check runs an
  /// eigendecomposition and is skipped above 64 points.
  void validate() const {
    using std::abs;
    if (gram.rows() != gram.cols()) throw Error(ErrorCode::InvalidProblem, "Gram matrix is not square");
    if (gram.rows() != labels.size()) throw Error(ErrorCode::InvalidProblem, "label count differs from Gram size");
    if (!(box > Scalar(0)) || !std::isfinite(static_cast<double>(box)))
      throw Error(ErrorCode::InvalidProblem, "box constant C must be positive and finite");
    if (!((labels.array() == Scalar(1)) || (labels.array() == Scalar(-1))).all())
      throw Error(ErrorCode::InvalidProblem, "labels must be +1 or -1");
    if (!gram.allFinite()) throw Error(ErrorCode::InvalidProblem, "Gram matrix has non-finite entries");
    const Scalar scale = std::max(Scalar(1), gram.cwiseAbs().maxCoeff());
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-9) * scale)
      throw Error(ErrorCode::InvalidProblem, "Gram matrix is not symmetric");
    if (size() <= 64 && size() > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gram, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -Scalar(1e-9) * scale * Scalar(size()))
        throw Error(ErrorCode::InvalidProblem, "Gram matrix is not positive semidefinite");
    }
  }
};

template <typename Scalar>
struct DualSolution {
  Vector<Scalar> alphas;
  Scalar offset = Scalar(0);
  Scalar objective = Scalar(0);  // D(alphas)
  std::int64_t iterations = 0;
  bool converged = true;
};

/// D(a) = sum a_i - 1/2 (a.y)^T K (a.y)
template <typename Scalar>
Scalar dual_objective(const QpProblem<Scalar>& problem, const Vector<Scalar>& alphas) {
  const Vector<Scalar> ay = alphas.cwiseProduct(problem.labels);
  return alphas.sum() - Scalar(0.5) * ay.dot(problem.gram * ay);
}

namespace detail {

enum class BoundState { Lower, Free, Upper };

template <typename Scalar>
BoundState classify(Scalar alpha, Scalar box) {
  const Scalar eps = Scalar(1e-12) * box;
  if (alpha <= eps) return BoundState::Lower;
  if (alpha >= box - eps) return BoundState::Upper;
  return BoundState::Free;
}

// Offset from v_i = y_i - sum_j a_j y_j K_ij: the mean over free multipliers,
// otherwise the midpoint of the interval allowed by the bound multipliers.
template <typename Scalar>
Scalar recover_offset(const QpProblem<Scalar>& problem, const Vector<Scalar>& alphas, const Vector<Scalar>& f0) {
  Scalar free_sum = 0;
  Eigen::Index free_count = 0;
  Scalar lower = -std::numeric_limits<Scalar>::infinity();
  Scalar upper = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < problem.size(); ++i) {
    const Scalar y = problem.labels(i);
    const Scalar v = y - f0(i);
    switch (classify(alphas(i), problem.box)) {
      case BoundState::Free:
        free_sum += v;
        ++free_count;
        break;
      case BoundState::Lower:
        if (y > 0) lower = std::max(lower, v);
        else upper = std::min(upper, v);
        break;
      case BoundState::Upper:
        if (y > 0) upper = std::min(upper, v);
        else lower = std::max(lower, v);
        break;
    }
  }
  if (free_count > 0) return free_sum / Scalar(free_count);
  const bool has_lower = std::isfinite(static_cast<double>(lower));
  const bool has_upper = std::isfinite(static_cast<double>(upper));
  if (has_lower && has_upper) return (lower + upper) / Scalar(2);
  if (has_lower) return lower;
  if (has_upper) return upper;
  return Scalar(0);
}

}  // namespace detail

/// Values f(x_i) = sum_j a_j y_j K_ij + b at the training points.
template <typename Scalar>
Vector<Scalar> decision_values(const QpProblem<Scalar>& problem, const DualSolution<Scalar>& solution) {
  return problem.gram * solution.alphas.cwiseProduct(problem.labels) +
         Vector<Scalar>::Constant(problem.size(), solution.offset);
}

/// Largest KKT residual of `solution`; 0 means every condition holds exactly.
template <typename Scalar>
Scalar kkt_violation(const QpProblem<Scalar>& problem, const DualSolution<Scalar>& solution) {
  if (solution.alphas.size() != problem.size())
    throw Error(ErrorCode::DimensionMismatch, "solution and problem sizes differ");
  const Vector<Scalar> f = decision_values(problem, solution);
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < problem.size(); ++i) {
    const Scalar margin = problem.labels(i) * f(i);
    Scalar residual = 0;
    switch (detail::classify(solution.alphas(i), problem.box)) {
      case detail::BoundState::Lower: residual = std::max(Scalar(0), Scalar(1) - margin); break;
      case detail::BoundState::Free: residual = std::abs(margin - Scalar(1)); break;
      case detail::BoundState::Upper: residual = std::max(Scalar(0), margin - Scalar(1)); break;
    }
    worst = std::max(worst, residual);
  }
  return worst;
}

/// Primal objective minus dual objective at (alphas, b), written per point so
/// no large terms cancel. Zero exactly at the optimum.
template <typename Scalar>
Scalar duality_gap(const QpProblem<Scalar>& problem, const Vector<Scalar>& alphas, Scalar offset) {
  const Vector<Scalar> f = problem.gram * alphas.cwiseProduct(problem.labels);
  Scalar gap = 0;
  for (Eigen::Index i = 0; i < problem.size(); ++i) {
    const Scalar margin = problem.labels(i) * (f(i) + offset);
    gap += alphas(i) * (margin - Scalar(1)) + problem.box * std::max(Scalar(0), Scalar(1) - margin);
  }
  return std::max(Scalar(0), gap);
}

/// SMO with maximal-violating-pair selection. Ties go to the lowest index, so
/// runs are deterministic. Stops once the pair gap is <= tol and the
/// primal-dual gap is <= tol * l, or after
/// max_passes * l pair updates; in the latter case the last iterate is
/// returned with `converged == false`.
template <typename Scalar>
DualSolution<Scalar> solve_dual(const QpProblem<Scalar>& problem, Scalar tol, std::int64_t max_passes) {
  problem.validate();
  if (!(tol > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (max_passes < 1) throw Error(ErrorCode::InvalidArgument, "max_passes must be at least 1");
  const Eigen::Index l = problem.size();
  if (l == 0) throw Error(ErrorCode::InvalidProblem, "empty problem");
  if ((problem.labels.array() > 0).all() || (problem.labels.array() < 0).all())
    throw Error(ErrorCode::DegenerateProblem, "all labels are identical");

  const Scalar C = problem.box;
  const auto& K = problem.gram;
  const auto& y = problem.labels;
  constexpr Scalar kMinCurvature = Scalar(1e-12);

  DualSolution<Scalar> sol;
  sol.alphas = Vector<Scalar>::Zero(l);
  Vector<Scalar> f0 = Vector<Scalar>::Zero(l);  // K (a.y)

  const std::int64_t max_iterations = max_passes * static_cast<std::int64_t>(l);
  Scalar pair_tol = tol;
  sol.converged = false;
  for (;;) {
    // i maximizes v over the "up" set, j minimizes v over the "low" set.
    Eigen::Index i = -1, j = -1;
    Scalar v_max = -std::numeric_limits<Scalar>::infinity();
    Scalar v_min = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index k = 0; k < l; ++k) {
      const Scalar a = sol.alphas(k);
      const Scalar v = y(k) - f0(k);
      const bool up = y(k) > 0 ? a < C : a > 0;
      const bool low = y(k) > 0 ? a > 0 : a < C;
      if (up && v > v_max) {
        v_max = v;
        i = k;
      }
      if (low && v < v_min) {
        v_min = v;
        j = k;
      }
    }
    if (i < 0 || j < 0 || v_max - v_min <= pair_tol) {
      // The pair test alone bounds the gap only by about 2 C tol l, so the
      // primal-dual gap is checked as well and the pair threshold tightened.
      f0 = K * sol.alphas.cwiseProduct(y);
      const Scalar b = detail::recover_offset(problem, sol.alphas, f0);
      const Scalar gap = duality_gap(problem, sol.alphas, b);
      const Scalar floor = std::numeric_limits<Scalar>::epsilon() * Scalar(64) * std::max(Scalar(1), K.diagonal().maxCoeff());
      if (i < 0 || j < 0 || gap <= tol * Scalar(l) || v_max - v_min <= floor) {
        sol.converged = true;
        break;
      }
      pair_tol = std::max(floor, (v_max - v_min) / Scalar(4));
      continue;
    }
    if (sol.iterations >= max_iterations) break;

    Scalar curvature = K(i, i) + K(j, j) - Scalar(2) * K(i, j);
    if (curvature < kMinCurvature) curvature = kMinCurvature;
    // a_i += y_i t, a_j -= y_j t keeps sum a.y fixed.
    const Scalar cap_i = y(i) > 0 ? C - sol.alphas(i) : sol.alphas(i);
    const Scalar cap_j = y(j) > 0 ? sol.alphas(j) : C - sol.alphas(j);
    Scalar t = (v_max - v_min) / curvature;
    const bool clip_i = t >= cap_i;
    const bool clip_j = t >= cap_j;
    t = std::min({t, cap_i, cap_j});

    if (clip_i && cap_i <= cap_j) sol.alphas(i) = y(i) > 0 ? C : Scalar(0);
    else sol.alphas(i) += y(i) * t;
    if (clip_j && cap_j <= cap_i) sol.alphas(j) = y(j) > 0 ? Scalar(0) : C;
    else sol.alphas(j) -= y(j) * t;

    f0 += t * (K.col(i) - K.col(j));
    ++sol.iterations;
  }

  // Rebuild from scratch so accumulated drift does not leak into b.
  f0 = K * sol.alphas.cwiseProduct(y);
  sol.offset = detail::recover_offset(problem, sol.alphas, f0);
  sol.objective = dual_objective(problem, sol.alphas);
  return sol;
}

template <typename Scalar>
DualSolution<Scalar> solve_dual(const QpProblem<Scalar>& problem) {
  return solve_dual(problem, Scalar(1e-3), 1000);
}

/// Exact optimum by enumerating all 3^l assignments of each multiplier to
/// {0, C, free}. For each pattern the free multipliers solve the
/// equality-constrained stationarity system; the best feasible pattern wins.
/// `iterations` reports the number of patterns examined.
template <typename Scalar>
DualSolution<Scalar> brute_force_dual(const QpProblem<Scalar>& problem) {
  constexpr Eigen::Index kMaxSize = 8;
  if (problem.size() > kMaxSize)
    throw Error(ErrorCode::InstanceTooLarge,
                "brute-force oracle accepts at most 8 points, got " + std::to_string(problem.size()));
  problem.validate();
  const Eigen::Index l = problem.size();
  const Scalar C = problem.box;
  const auto& y = problem.labels;
  // Q_ij = y_i y_j K_ij
  const Matrix<Scalar> Q = y.asDiagonal() * problem.gram * y.asDiagonal();

  std::int64_t patterns = 1;
  for (Eigen::Index k = 0; k < l; ++k) patterns *= 3;

  DualSolution<Scalar> best;
  best.alphas = Vector<Scalar>::Zero(l);
  best.objective = Scalar(0);
  const Scalar feas_eps = Scalar(1e-10) * std::max(Scalar(1), C);

  std::vector<Eigen::Index> free_idx;
  for (std::int64_t code = 0; code < patterns; ++code) {
    Vector<Scalar> alpha = Vector<Scalar>::Zero(l);
    free_idx.clear();
    std::int64_t c = code;
    for (Eigen::Index k = 0; k < l; ++k, c /= 3) {
      switch (c % 3) {
        case 0: alpha(k) = 0; break;
        case 1: alpha(k) = C; break;
        default: free_idx.push_back(k); break;
      }
    }
    const auto nf = static_cast<Eigen::Index>(free_idx.size());
    if (nf == 0) {
      if (std::abs(alpha.dot(y)) > feas_eps) continue;
    } else {
      // [Q_FF  y_F] [a_F]   [1 - Q_FB a_B]
      // [y_F^T  0 ] [nu ] = [ -y_B . a_B  ]
      Matrix<Scalar> kkt = Matrix<Scalar>::Zero(nf + 1, nf + 1);
      Vector<Scalar> rhs(nf + 1);
      const Vector<Scalar> q_alpha = Q * alpha;  // alpha holds only bound entries here
      for (Eigen::Index r = 0; r < nf; ++r) {
        const auto fr = free_idx[static_cast<std::size_t>(r)];
        for (Eigen::Index s = 0; s < nf; ++s) kkt(r, s) = Q(fr, free_idx[static_cast<std::size_t>(s)]);
        kkt(r, nf) = y(fr);
        kkt(nf, r) = y(fr);
        rhs(r) = Scalar(1) - q_alpha(fr);
      }
      rhs(nf) = -alpha.dot(y);
      Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod(kkt);
      const Vector<Scalar> z = cod.solve(rhs);
      if ((kkt * z - rhs).norm() > Scalar(1e-9) * (Scalar(1) + rhs.norm())) continue;
      bool feasible = true;
      for (Eigen::Index r = 0; r < nf && feasible; ++r) {
        Scalar a = z(r);
        if (a < -feas_eps || a > C + feas_eps) feasible = false;
        alpha(free_idx[static_cast<std::size_t>(r)]) = std::clamp(a, Scalar(0), C);
      }
      if (!feasible) continue;
    }
    const Scalar obj = dual_objective(problem, alpha);
    if (obj > best.objective + Scalar(1e-15) * std::max(Scalar(1), std::abs(obj)) || code == 0) {
      best.alphas = alpha;
      best.objective = obj;
    }
  }

  const Vector<Scalar> f0 = problem.gram * best.alphas.cwiseProduct(y);
  best.offset = detail::recover_offset(problem, best.alphas, f0);
  best.iterations = patterns;
  best.converged = true;
  return best;
}

}  // namespace clindiag::qp
