#pragma once

#include <stdexcept>
#include <vector>

#include "safenav/cbf.hpp"

namespace safenav {

// min 1/2 u^T H u  subject to at most two half-space constraints a_i u <= b_i.
struct QpProblem {
  Matrix cost;  // H, symmetric positive definite
  std::vector<HalfSpaceConstraint> constraints;
};

// Minimizer with its KKT certificate. Constraint indices are 0-based
// positions in QpProblem::constraints.
struct QpSolution {
  Vector u;
  std::vector<int> active_set;
  std::vector<double> multipliers;
};

// Empty feasible region at the queried state. For half-space pairs this can
// only happen with (anti)parallel normals or a zero-normal row with negative
// offset; `margin` is the normalized feasibility gap (negative) or the
// offending offset.
class QpInfeasible : public std::runtime_error {
 public:
  QpInfeasible(const std::string& what, double margin_in)
      : std::runtime_error(what), margin(margin_in) {}
  double margin;
};

// KKT system condition number above 1e12 for the optimal active set.
class QpIllConditioned : public std::runtime_error {
 public:
  QpIllConditioned(const std::string& what, double condition_in)
      : std::runtime_error(what), condition(condition_in) {}
  double condition;
};

// Exact active-set enumeration: vacuous zero-normal rows are dropped
// (negative-offset zero rows fail QpInfeasible), then the candidate sets
// {}, {0}, {1}, {0,1} are solved through their equality KKT systems and the
// first primal-feasible candidate with nonnegative multipliers is returned.
// A near-parallel pair (|sin| < 1e-10) skips the two-constraint candidate
// and falls back to the single-constraint ones.
QpSolution solve(const QpProblem& qp);

// True when the two half-spaces intersect. Analytic: non-parallel normals
// always intersect; antiparallel normals need b1/|a1| + b2/|a2| >= 0;
// zero normals need a nonnegative offset. `gap` receives the normalized
// slack for the (anti)parallel case.
bool halfspace_pair_feasible(const HalfSpaceConstraint& c1,
                             const HalfSpaceConstraint& c2,
                             double* gap = nullptr);

}  // namespace safenav
