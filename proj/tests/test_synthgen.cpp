#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "semlearn/errors.hpp"
#include "semlearn/synth.hpp"
#include "support/test_util.hpp"

using namespace semlearn;
using namespace semlearn::test;

#define CHECK_ERROR_CODE(expr, expected)                        \
  do {                                                          \
    try {                                                       \
      (void)(expr);                                             \
      FAIL_CHECK("expected an error from " #expr);              \
    } catch (const Error& e) {                                  \
      CHECK(e.code() == ErrorCode::expected);                   \
    }                                                           \
  } while (0)

TEST_CASE("generator streams are reproducible and seed-sensitive") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t va = a.next_u64();
    all_equal = all_equal && (va == b.next_u64());
    any_diff = any_diff || (va != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);

  CHECK(derive_seed(7, 0) == derive_seed(7, 0));
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  CHECK(derive_seed(7, 0) != derive_seed(8, 0));
}

TEST_CASE("primitive draws respect their ranges") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v <= 3.0);
    CHECK(rng.uniform_int(7) < 7);
  }
  CHECK(!rng.bernoulli(0.0));
  CHECK(rng.bernoulli(1.0));
}

TEST_CASE("random_dag draws stay acyclic within the degree bound") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Dag dag = random_dag(30, 3, 0.3, seed);
    CHECK(dag.p == 30);
    REQUIRE(dag.degree_bound.has_value());
    CHECK(*dag.degree_bound == 3);
    CHECK_NOTHROW(validate_dag(dag.p, dag.edges));
    for (int v = 0; v < dag.p; ++v) CHECK(dag.neighbor_count(v) <= 3);
  }
}

TEST_CASE("random_dag determinism and edge cases") {
  Dag a = random_dag(12, 4, 0.5, 99);
  Dag b = random_dag(12, 4, 0.5, 99);
  CHECK(a.edges == b.edges);
  CHECK(random_dag(1, 4, 0.5, 1).edges.empty());
  CHECK(random_dag(6, 4, 0.0, 1).edges.empty());
  CHECK(!random_dag(6, 5, 1.0, 1).edges.empty());

  CHECK_ERROR_CODE(random_dag(0, 3, 0.5, 1), invalid_params);
  CHECK_ERROR_CODE(random_dag(5, -1, 0.5, 1), invalid_params);
  CHECK_ERROR_CODE(random_dag(5, 3, 1.5, 1), invalid_params);
}

TEST_CASE("random_sem weights land in the band with both signs") {
  Dag dag = random_dag(20, 5, 0.5, 3);
  Sem sem = random_sem(dag, 0.3, 0.9, VarianceMode::homoscedastic(1.0), 17);
  bool positive = false, negative = false;
  for (const auto& [i, j] : dag.edges) {
    const double w = std::abs(sem.B(i, j));
    CHECK(w >= 0.3);
    CHECK(w <= 0.9);
    positive = positive || sem.B(i, j) > 0;
    negative = negative || sem.B(i, j) < 0;
  }
  CHECK(positive);
  CHECK(negative);

  Sem again = random_sem(dag, 0.3, 0.9, VarianceMode::homoscedastic(1.0), 17);
  CHECK(max_abs_diff(sem.B, again.B) == 0.0);
}

TEST_CASE("variance modes") {
  Dag dag = random_dag(10, 3, 0.4, 21);
  Sem homo = random_sem(dag, 0.5, 1.0, VarianceMode::homoscedastic(2.5), 1);
  CHECK((homo.sigma2.array() == 2.5).all());

  Sem ranged = random_sem(dag, 0.5, 1.0, VarianceMode::range(0.5, 2.0), 1);
  CHECK((ranged.sigma2.array() >= 0.5).all());
  CHECK((ranged.sigma2.array() <= 2.0).all());

  Eigen::VectorXd explicit_v = Eigen::VectorXd::LinSpaced(10, 0.5, 2.0);
  Sem fixed = random_sem(dag, 0.5, 1.0, VarianceMode::explicit_values(explicit_v), 1);
  CHECK(max_abs_diff(fixed.sigma2, explicit_v) == 0.0);

  CHECK_ERROR_CODE(random_sem(dag, 0.0, 1.0, VarianceMode::homoscedastic(1.0), 1),
                   degenerate_range);
  CHECK_ERROR_CODE(random_sem(dag, 0.8, 0.5, VarianceMode::homoscedastic(1.0), 1),
                   degenerate_range);
  CHECK_ERROR_CODE(random_sem(dag, 0.5, 1.0, VarianceMode::homoscedastic(-1.0), 1),
                   degenerate_range);
  CHECK_ERROR_CODE(random_sem(dag, 0.5, 1.0, VarianceMode::range(2.0, 1.0), 1),
                   degenerate_range);
  CHECK_ERROR_CODE(
      random_sem(dag, 0.5, 1.0, VarianceMode::explicit_values(Eigen::VectorXd::Ones(3)), 1),
      degenerate_range);
}

TEST_CASE("noise kinds are zero-mean with the requested variance") {
  const double sigma = 1.7;
  const int n = 1000000;
  for (NoiseKind kind : {NoiseKind::gaussian, NoiseKind::scaled_rademacher_mix,
                         NoiseKind::bounded_moment_t}) {
    NoiseModel model;
    model.kind = kind;
    Rng rng(2024);
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = model.sample(rng, sigma);
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) <= 0.01);
    CHECK(std::abs(var - sigma * sigma) <= 0.01 * sigma * sigma);
  }
}

TEST_CASE("mixture noise is bounded by sigma sqrt(3)") {
  NoiseModel model;
  model.kind = NoiseKind::scaled_rademacher_mix;
  Rng rng(7);
  for (int i = 0; i < 20000; ++i)
    CHECK(std::abs(model.sample(rng, 2.0)) <= 2.0 * std::sqrt(3.0) + 1e-12);
}

TEST_CASE("heavy-tailed noise keeps its standardized fourth moment in band") {
  NoiseModel model;
  model.kind = NoiseKind::bounded_moment_t;
  model.m = 1;
  Rng rng(11);
  const int n = 1000000;
  double sum2 = 0.0, sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = model.sample(rng, 1.0);
    sum2 += x * x;
    sum4 += x * x * x * x;
  }
  const double var = sum2 / n;
  const double kurt = (sum4 / n) / (var * var);
  CHECK(kurt <= model.K_m * 1.1);
  CHECK(kurt > 3.0);  // visibly heavier than Gaussian
}

TEST_CASE("sample_data is reproducible and prefix-stable") {
  Sem sem = random_identifiable_sem(6, 3, 0.3, 1.0, 4);
  NoiseModel noise;
  DataMatrix a = sample_data(sem, 50, noise, 12345);
  DataMatrix b = sample_data(sem, 50, noise, 12345);
  CHECK((a.values.array() == b.values.array()).all());

  DataMatrix head = sample_data(sem, 20, noise, 12345);
  CHECK((head.values.array() == a.values.topRows(20).array()).all());

  DataMatrix other = sample_data(sem, 50, noise, 54321);
  CHECK(max_abs_diff(a.values, other.values) > 0.0);

  CHECK_ERROR_CODE(sample_data(sem, 0, noise, 1), invalid_params);
}

TEST_CASE("independent coordinates have near-identity covariance") {
  Sem sem = make_sem(validate_dag(4, {}), Eigen::MatrixXd::Zero(4, 4),
                     Eigen::VectorXd::Ones(4));
  DataMatrix data = sample_data(sem, 200000, NoiseModel{}, 8);
  CHECK(max_abs_diff(empirical_covariance(data), Eigen::MatrixXd::Identity(4, 4)) <=
        0.02);
}

TEST_CASE("empirical covariance approaches the model covariance") {
  Sem sem = chain_sem(2, 0.6);
  DataMatrix data = sample_data(sem, 1000000, NoiseModel{}, 99);
  CHECK(max_abs_diff(empirical_covariance(data), covariance_of(sem)) <= 0.01);
}

TEST_CASE("empirical covariance closed form and oracle agreement") {
  DataMatrix one{1, 2, Eigen::MatrixXd(1, 2)};
  one.values << 1.0, 2.0;
  Eigen::MatrixXd expected(2, 2);
  expected << 1.0, 2.0, 2.0, 4.0;
  CHECK(max_abs_diff(empirical_covariance(one), expected) == 0.0);

  Sem sem = random_identifiable_sem(5, 3, 0.3, 1.0, 6);
  DataMatrix data = sample_data(sem, 300, NoiseModel{}, 13);
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(5, 5);
  for (int r = 0; r < data.n; ++r)
    for (int i = 0; i < data.p; ++i)
      for (int j = 0; j < data.p; ++j)
        oracle(i, j) += data.values(r, i) * data.values(r, j) / data.n;
  CHECK(max_abs_diff(empirical_covariance(data), oracle) <= 1e-12);

  DataMatrix bad{3, 2, Eigen::MatrixXd(2, 2)};
  CHECK_ERROR_CODE(empirical_covariance(bad), invalid_params);
}

TEST_CASE("covariance deviation shrinks like one over sqrt n") {
  Sem sem = random_identifiable_sem(4, 2, 0.4, 0.9, 31);
  Eigen::MatrixXd sigma = covariance_of(sem);
  std::vector<double> small, large;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    DataMatrix d1 = sample_data(sem, 2000, NoiseModel{}, derive_seed(seed, 100));
    DataMatrix d2 = sample_data(sem, 8000, NoiseModel{}, derive_seed(seed, 200));
    small.push_back(max_abs_diff(empirical_covariance(d1), sigma));
    large.push_back(max_abs_diff(empirical_covariance(d2), sigma));
  }
  CHECK(median(large) <= 0.75 * median(small));
}

TEST_CASE("chunked covariance accumulation stays close to the model") {
  Sem sem = chain_sem(3, 0.8);
  Eigen::MatrixXd acc = chunked_covariance(sem, 200000, 30000, NoiseModel{}, 77);
  CHECK(max_abs_diff(acc, covariance_of(sem)) <= 0.02);
}
