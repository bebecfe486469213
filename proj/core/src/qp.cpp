#include "safenav/qp.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace safenav {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = -1e-10;
constexpr double kParallelSinTol = 1e-10;
constexpr double kConditionLimit = 1e12;

double kkt_condition(const Matrix& h, const Matrix& a) {
  const int m = static_cast<int>(h.rows());
  const int k = static_cast<int>(a.rows());
  Matrix kkt = Matrix::Zero(m + k, m + k);
  kkt.topLeftCorner(m, m) = h;
  kkt.topRightCorner(m, k) = a.transpose();
  kkt.bottomLeftCorner(k, m) = a;
  Eigen::JacobiSVD<Matrix> svd(kkt);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

// sin of the angle between two nonzero normals.
double normals_sin(const RowVector& a1, const RowVector& a2) {
  const double c = a1.dot(a2) / (a1.norm() * a2.norm());
  const double c2 = std::min(1.0, c * c);
  return std::sqrt(1.0 - c2);
}

}  // namespace

QpSolution solve(const QpProblem& qp) {
  const int m = static_cast<int>(qp.cost.rows());
  if (m == 0 || qp.cost.cols() != m) {
    throw std::invalid_argument("qp::solve: cost matrix must be square");
  }
  if ((qp.cost - qp.cost.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * qp.cost.cwiseAbs().maxCoeff()) {
    throw std::invalid_argument("qp::solve: cost matrix must be symmetric");
  }
  Eigen::LLT<Matrix> hllt(qp.cost);
  if (hllt.info() != Eigen::Success) {
    throw std::invalid_argument("qp::solve: cost matrix must be positive definite");
  }
  if (qp.constraints.size() > 2) {
    throw std::invalid_argument("qp::solve: at most two constraints supported");
  }

  // Zero-normal rows: vacuous when satisfiable by every u, otherwise the
  // feasible set is empty no matter what u is.
  std::vector<int> live;
  for (size_t i = 0; i < qp.constraints.size(); ++i) {
    const auto& c = qp.constraints[i];
    if (c.normal.size() != m) {
      throw std::invalid_argument("qp::solve: constraint dimension mismatch");
    }
    if (c.normal.isZero(0.0)) {
      if (c.offset < 0.0) {
        throw QpInfeasible("zero-normal constraint with negative offset " +
                               std::to_string(c.offset),
                           c.offset);
      }
      continue;
    }
    live.push_back(static_cast<int>(i));
  }

  auto primal_feasible = [&](const Vector& u) {
    for (int i : live) {
      const auto& c = qp.constraints[i];
      if (c.normal.dot(u) > c.offset + kPrimalTol) return false;
    }
    return true;
  };

  // Unconstrained minimum.
  const Vector zero = Vector::Zero(m);
  if (primal_feasible(zero)) {
    return QpSolution{zero, {}, {}};
  }

  // Candidate active sets in fixed enumeration order: singles, then the pair.
  std::vector<std::vector<int>> candidates;
  for (int i : live) candidates.push_back({i});
  if (live.size() == 2) candidates.push_back(live);

  for (const auto& active : candidates) {
    const int k = static_cast<int>(active.size());
    Matrix a(k, m);
    Vector b(k);
    for (int r = 0; r < k; ++r) {
      a.row(r) = qp.constraints[active[r]].normal;
      b(r) = qp.constraints[active[r]].offset;
    }
    if (k == 2 &&
        normals_sin(qp.constraints[active[0]].normal,
                    qp.constraints[active[1]].normal) < kParallelSinTol) {
      // Singular two-constraint KKT system; the single-constraint candidates
      // already ran, so reaching here with no acceptance means infeasible.
      continue;
    }

    // Stationarity H u + A^T lambda = 0 with A u = b.
    const Matrix hinv_at = hllt.solve(a.transpose());
    const Matrix s = a * hinv_at;
    Eigen::FullPivLU<Matrix> slu(s);
    if (!slu.isInvertible()) continue;
    const Vector lambda = -slu.solve(b);
    const Vector u = -hinv_at * lambda;

    if (lambda.minCoeff() < kDualTol) continue;
    if (!primal_feasible(u)) continue;

    const double cond = kkt_condition(qp.cost, a);
    if (cond > kConditionLimit) {
      throw QpIllConditioned(
          "KKT condition number " + std::to_string(cond) + " exceeds 1e12",
          cond);
    }
    QpSolution out;
    out.u = u;
    out.active_set = active;
    out.multipliers.assign(lambda.data(), lambda.data() + lambda.size());
    return out;
  }

  // Exhausted enumeration: the region is empty (half-space pairs only fail
  // with antiparallel normals, or a diverging near-parallel vertex).
  double gap = 0.0;
  if (live.size() == 2) {
    const auto& c1 = qp.constraints[live[0]];
    const auto& c2 = qp.constraints[live[1]];
    gap = c1.offset / c1.normal.norm() + c2.offset / c2.normal.norm();
  }
  throw QpInfeasible("empty feasible region (normalized gap " +
                         std::to_string(gap) + ")",
                     gap);
}

bool halfspace_pair_feasible(const HalfSpaceConstraint& c1,
                             const HalfSpaceConstraint& c2, double* gap) {
  if (gap) *gap = std::numeric_limits<double>::infinity();
  const bool z1 = c1.normal.isZero(0.0);
  const bool z2 = c2.normal.isZero(0.0);
  if (z1 && c1.offset < 0.0) {
    if (gap) *gap = c1.offset;
    return false;
  }
  if (z2 && c2.offset < 0.0) {
    if (gap) *gap = c2.offset;
    return false;
  }
  if (z1 || z2) return true;

  const double n1 = c1.normal.norm();
  const double n2 = c2.normal.norm();
  const double cosine = c1.normal.dot(c2.normal) / (n1 * n2);
  const double sine = std::sqrt(std::max(0.0, 1.0 - std::min(1.0, cosine * cosine)));
  if (sine >= 1e-12 || cosine > 0.0) return true;  // non-parallel or same direction

  const double g = c1.offset / n1 + c2.offset / n2;
  if (gap) *gap = g;
  return g >= 0.0;
}

}  // namespace safenav
