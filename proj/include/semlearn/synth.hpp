#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "semlearn/sem.hpp"

namespace semlearn {

// Self-contained xoshiro256++ generator with explicit double conversions so
// that every sampled artifact is reproducible bit-for-bit from its seed on
// any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);
  // Uniform integer in [0, bound), bound >= 1.
  std::uint64_t uniform_int(std::uint64_t bound);
  bool bernoulli(double prob);
  // Standard normal (Box-Muller, pair-cached).
  double normal();

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Stable stream splitting: mixes a stream index into a seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum class NoiseKind { gaussian, scaled_rademacher_mix, bounded_moment_t };

// Zero-mean noise family with variance sigma^2 exactly in expectation.
//   gaussian             N(0, sigma^2); nu records the sub-Gaussian parameter.
//   scaled_rademacher_mix  equal mixture of +-sigma and uniform on
//                          [-sigma*sqrt(3), sigma*sqrt(3)].
//   bounded_moment_t     Student-t with 4m+1 degrees of freedom, rescaled;
//                        K_m bounds the standardized (4m)-th moment.
struct NoiseModel {
  NoiseKind kind = NoiseKind::gaussian;
  double nu = 1.0;
  int m = 1;
  double K_m = 9.0;

  double sample(Rng& rng, double sigma) const;
};

struct DataMatrix {
  int n = 0;
  int p = 0;
  Eigen::MatrixXd values;  // n x p, one sample per row
};

// Uniform random topological order, then each (later <- earlier) edge is
// proposed independently with probability edge_prob and kept only while both
// endpoints stay within `degree_bound` total neighbors.
Dag random_dag(int p, int degree_bound, double edge_prob, std::uint64_t seed);

struct VarianceMode {
  enum class Kind { homoscedastic, range, explicit_values };
  Kind kind = Kind::homoscedastic;
  double value = 1.0;
  double lo = 0.0, hi = 0.0;
  Eigen::VectorXd values;

  static VarianceMode homoscedastic(double v);
  static VarianceMode range(double lo, double hi);
  static VarianceMode explicit_values(Eigen::VectorXd v);
};

// Weights drawn uniformly from [weight_low, weight_high] with a fair random
// sign; variances per mode.
Sem random_sem(const Dag& dag, double weight_low, double weight_high,
               const VarianceMode& variances, std::uint64_t seed);

// n rows of X = (I - B)^-1 N sampled in topological order. Rows use seeds
// derived from (seed, row), so any row-parallel evaluation would produce the
// same matrix.
DataMatrix sample_data(const Sem& sem, int n, const NoiseModel& noise,
                       std::uint64_t seed);

// (1/n) X^T X, no centering (models are zero-mean by construction).
Eigen::MatrixXd empirical_covariance(const DataMatrix& data);

}  // namespace semlearn
