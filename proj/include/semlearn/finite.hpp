#pragma once

#include <Eigen/Dense>
#include <optional>

#include "semlearn/clime.hpp"
#include "semlearn/population.hpp"
#include "semlearn/sem.hpp"
#include "semlearn/synth.hpp"

namespace semlearn {

struct LearnerConfig {
  double lambda_n = 0.0;
  // Final entrywise threshold on the recovered weights (0 keeps everything).
  double threshold_eps = 0.0;
  std::optional<KnownVarianceSpec> known_variances;
  TieBreak tie_break;
  double lp_tol = 1e-8;
  double support_cutoff = kDefaultSupportCutoff;
  UpdateMode update_mode = UpdateMode::full_residual_rows;
};

// Finite-sample pipeline: l1-regularized column estimation of the precision
// matrix, then repeated terminal elimination with per-parent row refits.
LearnResult learn_finite(const Eigen::MatrixXd& sigma_n, const LearnerConfig& config);
LearnResult learn_finite(const DataMatrix& data, const LearnerConfig& config);

// Ingredients of the deviation-bound calculators. M is the output of
// precision_norm_bound; epsilon is the target elementwise weight error used
// by the sample-size bound.
struct BoundInputs {
  double M = 1.0;
  double B_max = 1.0;
  double sigma2_max = 1.0;
  double sigma2_min = 1.0;
  double nu = 1.0;
  int m = 1;
  double K_m = 1.0;
  double C1 = 1.0;
  double C2 = 1.0;
  double C_m = 1.0;
  double n = 1.0;
  int p = 1;
  double delta = 0.5;
  double epsilon = 0.1;
};

enum class NoiseRegime { subgaussian, bounded_moment };

struct LambdaGuidance {
  double lambda_min = 0.0;
  double n_min = 0.0;
};

// Smallest regularization the deviation bounds support at the given n, and
// the sample count needed to reach the target epsilon:
//   subgaussian:     lambda >= M C1 sqrt((2/n) log(2p / sqrt(delta)))
//                    n >= 2 (c C1 4 M^2 (1 + B_max) sigma2_max)^2 / eps^2
//                         * log(2p / sqrt(delta))
//   bounded_moment:  lambda >= M C2 (p^2 / (n^m delta))^(1/(2m))
//                    n >= (c C2 4 M^2 (1 + B_max) sigma2_max)^2 / eps^2
//                         * (p^2 / delta)^(1/m)
// where c is the error_bound prefactor evaluated at lambda_min(n).
LambdaGuidance lambda_guidance(NoiseRegime regime, const BoundInputs& inputs);

// Elementwise weight-error bound
//   sigma2_min / (1 - 4 M lambda sigma2_min) * 4 M (1 + B_max) sigma2_max * lambda;
// raises bound_diverges when the denominator is nonpositive.
double error_bound(const BoundInputs& inputs, double lambda);

// Finite-sample identifiability at regularization lambda with
// M = precision_norm_bound(sem): (i) the identifiability margin must exceed
// 8 M lambda (known-variance form: child-weight sums against 8 alpha M
// lambda), (ii) every nonzero precision entry of every reachable sub-model
// must exceed 4 M lambda in magnitude, (iii) 4 (alpha) M lambda sigma_i^2 < 1
// for every vertex. worst_margin aggregates the three parts; the witness is
// filled when part (i) binds.
IdentifiabilityReport check_finite_sample_identifiability(
    const Sem& sem, double lambda,
    const std::optional<KnownVarianceSpec>& known = {},
    int enumeration_limit = kDefaultEnumerationLimit);

}  // namespace semlearn
