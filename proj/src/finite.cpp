#include "semlearn/finite.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "semlearn/errors.hpp"

namespace semlearn {

namespace {

void validate_config(const LearnerConfig& config) {
  if (!(config.lambda_n >= 0.0) || !std::isfinite(config.lambda_n))
    throw Error(ErrorCode::invalid_params, "lambda_n must be nonnegative and finite");
  if (!(config.threshold_eps >= 0.0))
    throw Error(ErrorCode::invalid_params, "threshold_eps must be nonnegative");
  if (!(config.lp_tol > 0.0))
    throw Error(ErrorCode::invalid_params, "lp_tol must be positive");
  if (!(config.support_cutoff >= 0.0))
    throw Error(ErrorCode::invalid_params, "support_cutoff must be nonnegative");
}

double snap_margin(double m) { return std::abs(m) < kZeroCutoff ? 0.0 : m; }

}  // namespace

LearnResult learn_finite(const Eigen::MatrixXd& sigma_n, const LearnerConfig& config) {
  validate_config(config);
  const int p = static_cast<int>(sigma_n.rows());
  if (sigma_n.cols() != p)
    throw Error(ErrorCode::invalid_params, "covariance must be square");
  if (!sigma_n.allFinite())
    throw Error(ErrorCode::invalid_params, "covariance must be finite");
  const double scale = std::max(sigma_n.cwiseAbs().maxCoeff(), 1.0);
  if ((sigma_n - sigma_n.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw Error(ErrorCode::not_symmetric, "covariance is not symmetric");

  Eigen::VectorXd d = Eigen::VectorXd::Ones(p);
  if (config.known_variances) {
    validate_known_variances(*config.known_variances, p);
    d = config.known_variances->d_diag;
  }

  PrecisionEstimate est = clime_full(sigma_n, config.lambda_n, config.lp_tol,
                                     config.support_cutoff);

  Rng tie_rng(config.tie_break.seed);
  Rng* rng =
      config.tie_break.kind == TieBreakKind::random_seeded ? &tie_rng : nullptr;

  LearnResult result;
  result.B_hat = Eigen::MatrixXd::Zero(p, p);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int round = 0; round < p; ++round) {
    Eigen::VectorXd scores = est.values.diagonal().cwiseProduct(d);
    const int i = find_terminal(scores, est.active, config.tie_break, rng);
    const double pivot = est.values(i, i);
    if (!(pivot > 0.0))
      throw Error(ErrorCode::non_positive_diagonal,
                  "round " + std::to_string(round + 1) + ": estimated Omega(" +
                      std::to_string(i + 1) + ", " + std::to_string(i + 1) +
                      ") = " + std::to_string(pivot) +
                      "; the regularization is too aggressive for this input");

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

    for (int j : est.row_support(i))
      if (j != i) result.B_hat(i, j) = -est.values(i, j) / pivot;

    est = update_after_removal(est, i, sigma_n, config.lambda_n, config.lp_tol,
                               config.support_cutoff, config.update_mode);
  }

  auto thresholded = threshold(result.B_hat, config.threshold_eps);
  result.B_hat = std::move(thresholded.values);
  result.G_hat = Dag{p, std::move(thresholded.support), std::nullopt};
  return result;
}

LearnResult learn_finite(const DataMatrix& data, const LearnerConfig& config) {
  return learn_finite(empirical_covariance(data), config);
}

namespace {

void validate_bound_inputs(const BoundInputs& in) {
  const bool ok = in.M > 0.0 && in.B_max >= 0.0 && in.sigma2_max > 0.0 &&
                  in.sigma2_min > 0.0 && in.sigma2_min <= in.sigma2_max &&
                  in.nu > 0.0 && in.m >= 1 && in.K_m > 0.0 && in.C1 > 0.0 &&
                  in.C2 > 0.0 && in.C_m > 0.0 && in.n >= 1.0 && in.p >= 1 &&
                  in.delta > 0.0 && in.delta <= 1.0 && in.epsilon > 0.0;
  if (!ok) throw Error(ErrorCode::invalid_inputs, "bound inputs out of range");
}

}  // namespace

double error_bound(const BoundInputs& inputs, double lambda) {
  validate_bound_inputs(inputs);
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::invalid_params, "lambda must be nonnegative and finite");
  const double denom = 1.0 - 4.0 * inputs.M * lambda * inputs.sigma2_min;
  if (!(denom > 0.0))
    throw Error(ErrorCode::bound_diverges,
                "4 M lambda sigma2_min = " +
                    std::to_string(4.0 * inputs.M * lambda * inputs.sigma2_min) +
                    " >= 1");
  const double c = inputs.sigma2_min / denom;
  return c * 4.0 * inputs.M * (1.0 + inputs.B_max) * inputs.sigma2_max * lambda;
}

LambdaGuidance lambda_guidance(NoiseRegime regime, const BoundInputs& in) {
  validate_bound_inputs(in);
  const double log_term = std::log(2.0 * in.p / std::sqrt(in.delta));
  if (!(log_term > 0.0))
    throw Error(ErrorCode::invalid_inputs, "log(2p / sqrt(delta)) must be positive");

  LambdaGuidance out;
  if (regime == NoiseRegime::subgaussian) {
    out.lambda_min = in.M * in.C1 * std::sqrt(2.0 / in.n * log_term);
  } else {
    out.lambda_min =
        in.M * in.C2 *
        std::pow(in.p * in.p / (std::pow(in.n, in.m) * in.delta), 1.0 / (2.0 * in.m));
  }

  // Prefactor of the error bound at the recommended regularization for the
  // supplied n.
  const double denom = 1.0 - 4.0 * in.M * out.lambda_min * in.sigma2_min;
  if (!(denom > 0.0))
    throw Error(ErrorCode::bound_diverges,
                "error-bound prefactor diverges at lambda_min; increase n");
  const double c = in.sigma2_min / denom;
  if (regime == NoiseRegime::subgaussian) {
    const double base =
        c * in.C1 * 4.0 * in.M * in.M * (1.0 + in.B_max) * in.sigma2_max;
    out.n_min = 2.0 * base * base / (in.epsilon * in.epsilon) * log_term;
  } else {
    const double base =
        c * in.C2 * 4.0 * in.M * in.M * (1.0 + in.B_max) * in.sigma2_max;
    out.n_min = base * base / (in.epsilon * in.epsilon) *
                std::pow(in.p * in.p / in.delta, 1.0 / in.m);
  }
  return out;
}

IdentifiabilityReport check_finite_sample_identifiability(
    const Sem& sem, double lambda, const std::optional<KnownVarianceSpec>& known,
    int enumeration_limit) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::invalid_params, "lambda must be nonnegative and finite");
  const int p = sem.p();
  const double M = precision_norm_bound(sem, enumeration_limit);

  double alpha = 1.0;
  if (known) {
    validate_known_variances(*known, p);
    if (known->alpha) {
      alpha = *known->alpha;
    } else {
      alpha = 0.0;
      for (int v = 0; v < p; ++v)
        alpha = std::max(alpha, sem.sigma2[v] / known->d_diag[v]);
    }
  }

  IdentifiabilityReport report;
  const auto children = sem.dag.children();

  // Part (i): gapped identifiability.
  if (known) {
    report.worst_margin = std::numeric_limits<double>::infinity();
    const double gap = 8.0 * alpha * M * lambda;
    for_each_ancestral_set(sem.dag, enumeration_limit, [&](const std::vector<int>& members) {
      ++report.subsets_checked;
      std::vector<char> in_set(p, 0);
      for (int v : members) in_set[v] = 1;
      for (int j : members) {
        double sum = 0.0;
        bool non_terminal = false;
        for (int c : children[j])
          if (in_set[c]) {
            non_terminal = true;
            sum += (sem.sigma2[j] / sem.sigma2[c]) * sem.B(c, j) * sem.B(c, j);
          }
        if (!non_terminal) continue;
        const double margin = snap_margin(sum - gap);
        if (margin < report.worst_margin) {
          report.worst_margin = margin;
          report.witness = IdentifiabilityWitness{members, -1, j};
        }
      }
    });
    if (!std::isfinite(report.worst_margin)) report.witness.reset();
  } else {
    report = check_identifiability(sem, 8.0 * M * lambda, enumeration_limit);
  }

  // Part (ii): minimum nonzero precision entry across reachable sub-models.
  double min_nonzero = std::numeric_limits<double>::infinity();
  for_each_ancestral_set(sem.dag, enumeration_limit, [&](const std::vector<int>& members) {
    const int m = static_cast<int>(members.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd dinv(m);
    for (int a = 0; a < m; ++a) {
      dinv[a] = 1.0 / sem.sigma2[members[a]];
      for (int b = 0; b < m; ++b)
        if (a != b) A(a, b) = -sem.B(members[a], members[b]);
    }
    Eigen::MatrixXd omega = A.transpose() * dinv.asDiagonal() * A;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const double v = std::abs(omega(a, b));
        if (v > kZeroCutoff) min_nonzero = std::min(min_nonzero, v);
      }
  });
  const double margin_entry = snap_margin(min_nonzero - 4.0 * M * lambda);

  // Part (iii): finite-sample scale condition per vertex.
  double margin_scale = std::numeric_limits<double>::infinity();
  for (int v = 0; v < p; ++v)
    margin_scale = std::min(
        margin_scale, snap_margin(1.0 - 4.0 * alpha * M * lambda * sem.sigma2[v]));

  report.worst_margin = std::min({report.worst_margin, margin_entry, margin_scale});
  report.satisfied = report.worst_margin > 0.0;
  return report;
}

}  // namespace semlearn
