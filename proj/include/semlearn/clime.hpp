#pragma once

#include <Eigen/Dense>

#include "semlearn/precision_estimate.hpp"

namespace semlearn {

// Constraint rows used by the post-removal refit of a parent's precision row.
//   full_residual_rows: residual constraints range over every remaining
//     vertex (the correctness-first form).
//   restricted_rows: residual constraints range only over the refit support
//     set itself (the cheaper shortcut form).
enum class UpdateMode { full_residual_rows, restricted_rows };

// Column program  min ||w||_1  s.t.  ||Sigma_n w - e_i||_inf <= lambda.
Eigen::VectorXd clime_column(const Eigen::MatrixXd& sigma_n, int i, double lambda,
                             double tol = 1e-8);

// All p columns solved independently, then min-magnitude symmetrization.
PrecisionEstimate clime_full(const Eigen::MatrixXd& sigma_n, double lambda,
                             double tol = 1e-8,
                             double cutoff = kDefaultSupportCutoff);

// Removes terminal-estimate vertex i: every estimated parent j of i gets its
// precision row refit by an l1 program restricted to the columns
//   S_j = (support of row j minus i) union (parents of i),
// then row/column i are zeroed and i is deactivated. Parents are processed in
// increasing vertex order; later refits overwrite shared entries.
PrecisionEstimate update_after_removal(const PrecisionEstimate& omega_hat, int i,
                                       const Eigen::MatrixXd& sigma_n, double lambda,
                                       double tol = 1e-8,
                                       double cutoff = kDefaultSupportCutoff,
                                       UpdateMode mode = UpdateMode::full_residual_rows);

}  // namespace semlearn
