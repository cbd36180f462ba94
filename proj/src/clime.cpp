#include "semlearn/clime.hpp"

#include <algorithm>
#include <string>

#include "semlearn/lp.hpp"

namespace semlearn {

namespace {

void check_sigma(const Eigen::MatrixXd& sigma_n) {
  if (sigma_n.rows() != sigma_n.cols())
    throw Error(ErrorCode::invalid_params, "covariance must be square");
  if (!sigma_n.allFinite())
    throw Error(ErrorCode::invalid_params, "covariance must be finite");
}

}  // namespace

Eigen::VectorXd clime_column(const Eigen::MatrixXd& sigma_n, int i, double lambda,
                             double tol) {
  check_sigma(sigma_n);
  const int p = static_cast<int>(sigma_n.rows());
  if (i < 0 || i >= p) throw Error(ErrorCode::invalid_vertex, "column out of range");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
  e[i] = 1.0;
  return solve_l1_linf(LpProblem{sigma_n, std::move(e), lambda}, tol);
}

PrecisionEstimate clime_full(const Eigen::MatrixXd& sigma_n, double lambda,
                             double tol, double cutoff) {
  check_sigma(sigma_n);
  const int p = static_cast<int>(sigma_n.rows());
  Eigen::MatrixXd omega_bar(p, p);
  for (int i = 0; i < p; ++i) {
    try {
      omega_bar.col(i) = clime_column(sigma_n, i, lambda, tol);
    } catch (const Error& e) {
      throw Error(e.code(),
                  "column " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return symmetrize_min(omega_bar, cutoff, lambda);
}

PrecisionEstimate update_after_removal(const PrecisionEstimate& omega_hat, int i,
                                       const Eigen::MatrixXd& sigma_n, double lambda,
                                       double tol, double cutoff, UpdateMode mode) {
  check_sigma(sigma_n);
  const int p = omega_hat.p;
  if (sigma_n.rows() != p)
    throw Error(ErrorCode::invalid_params, "covariance size mismatch");
  if (i < 0 || i >= p) throw Error(ErrorCode::invalid_vertex, "vertex out of range");
  if (!omega_hat.active[i])
    throw Error(ErrorCode::not_terminal_estimate,
                "vertex " + std::to_string(i + 1) + " is not active");

  // Estimated parents: support of row i.
  std::vector<int> parents;
  for (int j : omega_hat.row_support(i))
    if (j != i) parents.push_back(j);

  Eigen::MatrixXd values = omega_hat.values;
  for (int j : parents) {
    // Refit support: row j's support without i, joined with the parent set.
    std::vector<char> in_s(p, 0);
    for (int v : omega_hat.row_support(j))
      if (v != i) in_s[v] = 1;
    for (int v : parents) in_s[v] = 1;
    std::vector<int> S;
    for (int v = 0; v < p; ++v)
      if (in_s[v]) S.push_back(v);

    // Constraint rows: remaining vertices minus i (full mode) or S itself.
    std::vector<int> rows;
    if (mode == UpdateMode::full_residual_rows) {
      for (int v = 0; v < p; ++v)
        if (v != i && omega_hat.active[v]) rows.push_back(v);
    } else {
      rows = S;
    }

    const int q = static_cast<int>(S.size());
    const int k = static_cast<int>(rows.size());
    Eigen::MatrixXd A(k, q);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
    for (int r = 0; r < k; ++r) {
      if (rows[r] == j) b[r] = 1.0;
      for (int cidx = 0; cidx < q; ++cidx) A(r, cidx) = sigma_n(rows[r], S[cidx]);
    }
    Eigen::VectorXd w;
    try {
      w = solve_l1_linf(LpProblem{std::move(A), std::move(b), lambda}, tol);
    } catch (const Error& e) {
      throw Error(e.code(),
                  "refit of row " + std::to_string(j + 1) + " after removing " +
                      std::to_string(i + 1) + ": " + e.what());
    }
    for (int cidx = 0; cidx < q; ++cidx) {
      values(j, S[cidx]) = w[cidx];
      values(S[cidx], j) = w[cidx];
    }
  }

  values.row(i).setZero();
  values.col(i).setZero();
  std::vector<char> active = omega_hat.active;
  active[i] = 0;
  return make_precision_estimate(std::move(values), std::move(active), cutoff,
                                 lambda);
}

}  // namespace semlearn
