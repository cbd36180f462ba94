#include "semlearn/synth.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "semlearn/errors.hpp"

namespace semlearn {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  // Rejection sampling on the top range to stay exactly uniform.
  const std::uint64_t limit = bound * ((~0ull) / bound);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

bool Rng::bernoulli(double prob) { return uniform01() < prob; }

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller on (0,1] x [0,1).
  double u1;
  do {
    u1 = 1.0 - uniform01();
  } while (u1 <= 0.0);
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_normal_ = true;
  return r * std::cos(a);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed ^ (0x632be59bd9b4e019ull + stream * 0x9e3779b97f4a7c15ull);
  splitmix64(x);
  return splitmix64(x);
}

double NoiseModel::sample(Rng& rng, double sigma) const {
  switch (kind) {
    case NoiseKind::gaussian:
      return sigma * rng.normal();
    case NoiseKind::scaled_rademacher_mix:
      if (rng.bernoulli(0.5)) return rng.bernoulli(0.5) ? sigma : -sigma;
      return rng.uniform(-sigma * std::sqrt(3.0), sigma * std::sqrt(3.0));
    case NoiseKind::bounded_moment_t: {
      // Student-t via N / sqrt(chi2_df / df), df = 4m + 1, rescaled so the
      // variance is exactly sigma^2.
      const int df = 4 * m + 1;
      const double z = rng.normal();
      double chi2 = 0.0;
      for (int k = 0; k < df; ++k) {
        const double g = rng.normal();
        chi2 += g * g;
      }
      const double t = z / std::sqrt(chi2 / df);
      return sigma * std::sqrt((df - 2.0) / df) * t;
    }
  }
  throw Error(ErrorCode::invalid_params, "unknown noise kind");
}

Dag random_dag(int p, int degree_bound, double edge_prob, std::uint64_t seed) {
  if (p < 1) throw Error(ErrorCode::invalid_params, "p must be >= 1");
  if (degree_bound < 0) throw Error(ErrorCode::invalid_params, "degree bound must be >= 0");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
    throw Error(ErrorCode::invalid_params, "edge_prob must lie in [0, 1]");
  Rng rng(seed);
  // Uniform random topological order (Fisher-Yates).
  std::vector<int> order(p);
  for (int v = 0; v < p; ++v) order[v] = v;
  for (int a = p - 1; a > 0; --a)
    std::swap(order[a], order[rng.uniform_int(static_cast<std::uint64_t>(a) + 1)]);

  EdgeSet edges;
  std::vector<int> degree(p, 0);
  for (int b = 1; b < p; ++b)
    for (int a = 0; a < b; ++a) {
      const bool propose = rng.bernoulli(edge_prob);
      if (!propose) continue;
      const int child = order[b], parent = order[a];
      if (degree[child] >= degree_bound || degree[parent] >= degree_bound) continue;
      edges.insert({child, parent});
      ++degree[child];
      ++degree[parent];
    }
  Dag dag = validate_dag(p, edges);
  dag.degree_bound = degree_bound;
  return dag;
}

VarianceMode VarianceMode::homoscedastic(double v) {
  VarianceMode m;
  m.kind = Kind::homoscedastic;
  m.value = v;
  return m;
}

VarianceMode VarianceMode::range(double lo, double hi) {
  VarianceMode m;
  m.kind = Kind::range;
  m.lo = lo;
  m.hi = hi;
  return m;
}

VarianceMode VarianceMode::explicit_values(Eigen::VectorXd v) {
  VarianceMode m;
  m.kind = Kind::explicit_values;
  m.values = std::move(v);
  return m;
}

Sem random_sem(const Dag& dag, double weight_low, double weight_high,
               const VarianceMode& variances, std::uint64_t seed) {
  if (!(weight_low > 0.0) || !(weight_high >= weight_low))
    throw Error(ErrorCode::degenerate_range,
                "weight magnitudes need 0 < low <= high");
  const int p = dag.p;
  Rng rng(seed);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);
  for (const auto& [i, j] : dag.edges) {
    const double w = rng.uniform(weight_low, weight_high);
    B(i, j) = rng.bernoulli(0.5) ? w : -w;
  }
  Eigen::VectorXd sigma2(p);
  switch (variances.kind) {
    case VarianceMode::Kind::homoscedastic:
      if (!(variances.value > 0.0))
        throw Error(ErrorCode::degenerate_range, "variance must be positive");
      sigma2.setConstant(variances.value);
      break;
    case VarianceMode::Kind::range:
      if (!(variances.lo > 0.0) || !(variances.hi >= variances.lo))
        throw Error(ErrorCode::degenerate_range,
                    "variance range needs 0 < lo <= hi");
      for (int v = 0; v < p; ++v) sigma2[v] = rng.uniform(variances.lo, variances.hi);
      break;
    case VarianceMode::Kind::explicit_values:
      if (variances.values.size() != p)
        throw Error(ErrorCode::degenerate_range,
                    "explicit variance vector must have length p");
      sigma2 = variances.values;
      break;
  }
  return make_sem(dag, std::move(B), std::move(sigma2));
}

DataMatrix sample_data(const Sem& sem, int n, const NoiseModel& noise,
                       std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::invalid_params, "n must be >= 1");
  const int p = sem.p();
  const auto order_opt = topological_order(p, sem.dag.edges);
  const auto& order = *order_opt;  // acyclicity already guaranteed by Sem
  const auto parents = sem.dag.parents();

  DataMatrix data{n, p, Eigen::MatrixXd(n, p)};
  for (int r = 0; r < n; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    // Noise first (vertex order), then propagation in topological order.
    Eigen::VectorXd x(p);
    for (int v = 0; v < p; ++v) x[v] = noise.sample(rng, std::sqrt(sem.sigma2[v]));
    for (int v : order)
      for (int par : parents[v]) x[v] += sem.B(v, par) * x[par];
    data.values.row(r) = x.transpose();
  }
  return data;
}

Eigen::MatrixXd empirical_covariance(const DataMatrix& data) {
  if (data.n < 1 || data.values.rows() != data.n || data.values.cols() != data.p)
    throw Error(ErrorCode::invalid_params, "inconsistent data matrix");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(data.p, data.p);
  S.selfadjointView<Eigen::Lower>().rankUpdate(data.values.transpose(),
                                               1.0 / static_cast<double>(data.n));
  for (int i = 0; i < data.p; ++i)
    for (int j = i + 1; j < data.p; ++j) S(i, j) = S(j, i);
  return S;
}

}  // namespace semlearn
