#include "semlearn/population.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "semlearn/errors.hpp"

namespace semlearn {

namespace {

constexpr double kTieRelTol = 1e-9;
// Read-off entries with |Omega(i,j)| / Omega(i,i) below this are structural
// zeros.
constexpr double kReadoffRelCutoff = 1e-12;

double snap_margin(double m) { return std::abs(m) < kZeroCutoff ? 0.0 : m; }

}  // namespace

int find_terminal(const Eigen::VectorXd& diag_scores, const std::vector<char>& active,
                  const TieBreak& tie_break, Rng* rng) {
  const int p = static_cast<int>(diag_scores.size());
  if (static_cast<int>(active.size()) != p)
    throw Error(ErrorCode::invalid_params, "active flags must match score length");

  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int v = 0; v < p; ++v) {
    if (!active[v]) continue;
    if (!std::isfinite(diag_scores[v]))
      throw Error(ErrorCode::invalid_params, "scores must be finite on the active set");
    any = true;
    best = std::min(best, diag_scores[v]);
  }
  if (!any) throw Error(ErrorCode::empty_active_set, "no active vertex");

  const double band = best + kTieRelTol * std::max(std::abs(best), 1.0);
  std::vector<int> tied;
  for (int v = 0; v < p; ++v)
    if (active[v] && diag_scores[v] <= band) tied.push_back(v);

  switch (tie_break.kind) {
    case TieBreakKind::lowest_index:
      return tied.front();
    case TieBreakKind::highest_index:
      return tied.back();
    case TieBreakKind::random_seeded: {
      if (rng) return tied[rng->uniform_int(tied.size())];
      Rng local(tie_break.seed);
      return tied[local.uniform_int(tied.size())];
    }
  }
  throw Error(ErrorCode::invalid_params, "unknown tie-break rule");
}

PrecisionEstimate schur_remove(const PrecisionEstimate& omega, int i) {
  const int p = omega.p;
  if (i < 0 || i >= p) throw Error(ErrorCode::invalid_vertex, "vertex out of range");
  if (!omega.active[i])
    throw Error(ErrorCode::not_terminal_estimate,
                "vertex " + std::to_string(i + 1) + " is not active");
  const double pivot = omega.values(i, i);
  if (!(pivot > 0.0))
    throw Error(ErrorCode::non_positive_diagonal,
                "Omega(" + std::to_string(i + 1) + ", " + std::to_string(i + 1) +
                    ") = " + std::to_string(pivot));

  // The rank-one term vanishes off the support of row i.
  std::vector<int> touched;
  for (int j : omega.row_support(i))
    if (j != i) touched.push_back(j);

  Eigen::MatrixXd values = omega.values;
  for (int a : touched)
    for (int b : touched)
      values(a, b) -= values(a, i) * values(i, b) / pivot;
  values.row(i).setZero();
  values.col(i).setZero();
  std::vector<char> active = omega.active;
  active[i] = 0;
  return make_precision_estimate(std::move(values), std::move(active), omega.cutoff,
                                 omega.lambda_used);
}

LearnResult learn_population(const Eigen::MatrixXd& omega,
                             const std::optional<KnownVarianceSpec>& known,
                             const TieBreak& tie_break, double support_cutoff) {
  const int p = static_cast<int>(omega.rows());
  if (omega.cols() != p)
    throw Error(ErrorCode::invalid_params, "precision matrix must be square");
  if (!omega.allFinite())
    throw Error(ErrorCode::invalid_params, "precision matrix must be finite");

  const double scale = omega.cwiseAbs().maxCoeff();
  if ((omega - omega.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(scale, 1.0))
    throw Error(ErrorCode::not_symmetric, "precision matrix is not symmetric");
  for (int v = 0; v < p; ++v)
    if (!(omega(v, v) > 0.0))
      throw Error(ErrorCode::non_positive_diagonal,
                  "diagonal entry " + std::to_string(v + 1) + " is not positive");
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        (omega + omega.transpose()) * 0.5, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < -1e-8 * omega.diagonal().maxCoeff())
      throw Error(ErrorCode::not_positive_definite,
                  "minimum eigenvalue " + std::to_string(min_eig));
  }

  Eigen::VectorXd d = Eigen::VectorXd::Ones(p);
  if (known) {
    validate_known_variances(*known, p);
    d = known->d_diag;
  }

  PrecisionEstimate est = make_precision_estimate(
      ((omega + omega.transpose()) * 0.5).eval(), std::vector<char>(p, 1),
      support_cutoff, 0.0);

  Rng tie_rng(tie_break.seed);
  Rng* rng = tie_break.kind == TieBreakKind::random_seeded ? &tie_rng : nullptr;

  LearnResult result;
  result.B_hat = Eigen::MatrixXd::Zero(p, p);
  EdgeSet edges;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int round = 0; round < p; ++round) {
    Eigen::VectorXd scores = est.values.diagonal().cwiseProduct(d);
    const int i = find_terminal(scores, est.active, tie_break, rng);
    const double pivot = est.values(i, i);
    if (!(pivot > 0.0))
      throw Error(ErrorCode::non_positive_diagonal,
                  "round " + std::to_string(round + 1) + ": Omega(" +
                      std::to_string(i + 1) + ", " + std::to_string(i + 1) +
                      ") = " + std::to_string(pivot));

    IterationDiagnostics diag;
    diag.vertex = i;
    diag.min_score = scores[i];
    diag.runner_up = nan;
    diag.gap = nan;
    for (int v = 0; v < p; ++v) {
      if (!est.active[v] || v == i) continue;
      if (std::isnan(diag.runner_up) || scores[v] < diag.runner_up)
        diag.runner_up = scores[v];
    }
    if (!std::isnan(diag.runner_up)) diag.gap = diag.runner_up - diag.min_score;
    result.diagnostics.push_back(diag);
    result.elimination_order.push_back(i);

    for (int j : est.row_support(i)) {
      if (j == i) continue;
      if (std::abs(est.values(i, j)) / pivot < kReadoffRelCutoff) continue;
      result.B_hat(i, j) = -est.values(i, j) / pivot;
      edges.insert({i, j});
    }
    est = schur_remove(est, i);
  }
  result.G_hat = Dag{p, std::move(edges), std::nullopt};
  return result;
}

MisspecificationResult misspecification_margin(const Sem& sem,
                                               const KnownVarianceSpec& d_prime,
                                               int enumeration_limit) {
  const int p = sem.p();
  validate_known_variances(d_prime, p);
  double ratio_max = 0.0, ratio_min = std::numeric_limits<double>::infinity();
  for (int v = 0; v < p; ++v) {
    const double r = d_prime.d_diag[v] / sem.sigma2[v];
    ratio_max = std::max(ratio_max, r);
    ratio_min = std::min(ratio_min, r);
  }
  const double rhs = ratio_max / ratio_min - 1.0;

  const auto children = sem.dag.children();
  double margin = std::numeric_limits<double>::infinity();
  for_each_ancestral_set(sem.dag, enumeration_limit, [&](const std::vector<int>& members) {
    std::vector<char> in_set(p, 0);
    for (int v : members) in_set[v] = 1;
    for (int j : members) {
      double lhs = 0.0;
      bool non_terminal = false;
      for (int c : children[j])
        if (in_set[c]) {
          non_terminal = true;
          lhs += sem.B(c, j) * sem.B(c, j);
        }
      if (non_terminal) margin = std::min(margin, snap_margin(lhs - rhs));
    }
  });
  if (!std::isfinite(margin)) margin = std::numeric_limits<double>::infinity();
  return MisspecificationResult{margin > 0.0, margin};
}

}  // namespace semlearn
