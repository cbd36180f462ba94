#pragma once

#include <Eigen/Dense>

#include "semlearn/errors.hpp"

namespace semlearn {

// Data for  min ||x||_1  subject to  ||A x - b||_inf <= radius.
struct LpProblem {
  Eigen::MatrixXd constraint_matrix;  // k x q
  Eigen::VectorXd target;             // length k
  double radius = 0.0;
};

// Raised when the pivot budget is exhausted; carries the incumbent point.
class IterationLimitError : public Error {
 public:
  IterationLimitError(const std::string& message, Eigen::VectorXd best,
                      bool best_is_feasible)
      : Error(ErrorCode::iteration_limit, message),
        best_point(std::move(best)),
        feasible(best_is_feasible) {}

  Eigen::VectorXd best_point;
  bool feasible = false;
};

// Solves the l1-minimization program above with a two-phase dense primal
// simplex on the split-variable standard form
//   min 1'u + 1'v  s.t.  A(u - v) <= b + radius, -A(u - v) <= radius - b,
//   u, v >= 0,
// returning x = u - v. The objective is optimal within `tol` and the returned
// point satisfies the band constraints within `tol`. Raises `infeasible` when
// phase one fails, `iteration_limit` past the pivot budget.
Eigen::VectorXd solve_l1_linf(const LpProblem& problem, double tol = 1e-8);

}  // namespace semlearn
