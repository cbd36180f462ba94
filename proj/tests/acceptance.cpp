// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each check pins its tolerances in code next to the measurement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semlearn/clime.hpp"
#include "semlearn/errors.hpp"
#include "semlearn/finite.hpp"
#include "semlearn/lp.hpp"
#include "semlearn/population.hpp"
#include "semlearn/precision_estimate.hpp"
#include "semlearn/sem.hpp"
#include "semlearn/synth.hpp"
#include "support/lp_reference.hpp"
#include "support/test_util.hpp"

using namespace semlearn;
using namespace semlearn::test;

namespace {

struct Outcome {
  bool ok = true;
  std::string note;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. Exact recovery from the true precision matrix, homoscedastic models.

Outcome criterion1() {
  double worst_err = 0.0, worst_ms = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Sem sem = random_identifiable_sem(30, 4, 0.3, 1.0, 100 + seed);
    Stopwatch sw;
    const LearnResult result = learn_population(precision_of(sem));
    const double ms = sw.ms();
    const double err = (result.B_hat - sem.B).cwiseAbs().maxCoeff();
    worst_err = std::max(worst_err, err);
    worst_ms = std::max(worst_ms, ms);
    if (result.G_hat.edges != sem.dag.edges)
      return {false, "seed " + std::to_string(seed) + ": wrong edge set"};
    if (err > 1e-8)
      return {false, "seed " + std::to_string(seed) + ": weight error " + fmt(err)};
    if (ms >= 1000.0)
      return {false, "seed " + std::to_string(seed) + ": took " + fmt(ms) + " ms"};
  }
  return {true, "100/100 exact, worst err " + fmt(worst_err) + ", worst " +
                    fmt(worst_ms) + " ms"};
}

// ---------------------------------------------------------------------------
// 2. Known variances up to a scale: recovery and elimination order must not
//    depend on the scale.

Outcome criterion2() {
  const double alphas[] = {0.1, 1.0, 7.0};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dag dag = random_dag(30, 4, 0.3, derive_seed(5000 + seed, 0));
    const Sem sem = random_sem(dag, 0.3, 1.0, VarianceMode::range(0.5, 2.0),
                               derive_seed(5000 + seed, 1));
    const Eigen::MatrixXd omega = precision_of(sem);
    std::vector<std::vector<int>> orders;
    for (double alpha : alphas) {
      KnownVarianceSpec known;
      known.d_diag = alpha * sem.sigma2;
      const LearnResult result = learn_population(omega, known);
      if (result.G_hat.edges != sem.dag.edges)
        return {false, "seed " + std::to_string(seed) + ", alpha " + fmt(alpha) +
                           ": wrong edge set"};
      const double err = (result.B_hat - sem.B).cwiseAbs().maxCoeff();
      if (err > 1e-8)
        return {false, "seed " + std::to_string(seed) + ", alpha " + fmt(alpha) +
                           ": weight error " + fmt(err)};
      orders.push_back(result.elimination_order);
    }
    if (orders[1] != orders[0] || orders[2] != orders[0])
      return {false, "seed " + std::to_string(seed) +
                         ": elimination order depends on the scale"};
  }
  return {true, "100 heteroscedastic seeds, three scales each"};
}

// ---------------------------------------------------------------------------
// 3. Removing a terminal from the precision matrix matches the precision
//    matrix of the marginal model.

Outcome criterion3() {
  int pairs = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 300; pairs < 200 && seed < 1000; ++seed) {
    const Sem sem = random_identifiable_sem(8, 3, 0.4, 0.9, seed);
    const PrecisionEstimate est = make_precision_estimate(
        precision_of(sem), std::vector<char>(8, 1), kZeroCutoff, 0.0);
    for (int t : sem.dag.terminals()) {
      if (pairs >= 200) break;
      const PrecisionEstimate reduced = schur_remove(est, t);
      const Sem marg = marginal_sem(sem, t);
      const Eigen::MatrixXd marg_omega = precision_of(marg);
      for (int r = 0; r < marg.p(); ++r)
        for (int c = 0; c < marg.p(); ++c)
          worst = std::max(worst,
                           std::abs(reduced.values(marg.source_index[r],
                                                   marg.source_index[c]) -
                                    marg_omega(r, c)));
      if (worst > 1e-9)
        return {false, "seed " + std::to_string(seed) + ", vertex " +
                           std::to_string(t) + ": max diff " + fmt(worst)};
      ++pairs;
    }
  }
  if (pairs < 200) return {false, "only " + std::to_string(pairs) + " pairs visited"};
  return {true, "200 pairs, worst entry diff " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 4. Families of distinct graphs sharing one precision matrix: every member
//    must fail the identifiability check with a witness.

Outcome criterion4() {
  const int ks[] = {1, 3};
  const double betas[] = {0.5, -1.2};
  const std::pair<double, double> variances[] = {{1.0, 4.0}, {2.0, 3.0}};
  for (int k : ks)
    for (double beta : betas)
      for (auto [v1, v2] : variances) {
        std::vector<Sem> members;
        std::set<EdgeSet> edge_sets;
        for (int mask = 0; mask < (1 << k); ++mask) {
          std::vector<bool> bits(k);
          for (int t = 0; t < k; ++t) bits[t] = (mask >> t) & 1;
          members.push_back(unidentifiable_family(k, beta, v1, v2, bits, false));
          edge_sets.insert(members.back().dag.edges);
        }
        if (edge_sets.size() != (1u << k))
          return {false, "k=" + std::to_string(k) + ": edge sets not distinct"};
        const Eigen::MatrixXd omega0 = precision_of(members.front());
        for (std::size_t m = 0; m < members.size(); ++m) {
          const double diff = max_abs_diff(precision_of(members[m]), omega0);
          if (diff > 1e-12)
            return {false, "k=" + std::to_string(k) + " beta=" + fmt(beta) +
                               ": precision matrices differ by " + fmt(diff)};
          const IdentifiabilityReport rep = check_identifiability(members[m], 0.0);
          if (rep.satisfied || !rep.witness.has_value())
            return {false, "k=" + std::to_string(k) + " beta=" + fmt(beta) +
                               " member " + std::to_string(m) +
                               ": check passed or witness missing"};
        }
      }
  return {true, "8 parameter cells, every member refuted with a witness"};
}

// ---------------------------------------------------------------------------
// 5. Precision row supports stay within d^2 off-diagonal entries, and the
//    saturated star meets the bound with equality.

Outcome criterion5() {
  int max_seen = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const int d = 2 + static_cast<int>(seed % 3);
    const Sem sem = random_identifiable_sem(25, d, 0.3, 1.0, 900 + seed);
    const Eigen::MatrixXd omega = precision_of(sem);
    for (int i = 0; i < 25; ++i) {
      int nz = 0;
      for (int j = 0; j < 25; ++j)
        if (j != i && std::abs(omega(i, j)) > 1e-12) ++nz;
      max_seen = std::max(max_seen, nz);
      if (nz > d * d)
        return {false, "seed " + std::to_string(seed) + " row " + std::to_string(i) +
                           ": " + std::to_string(nz) + " > d^2=" +
                           std::to_string(d * d)};
    }
  }
  for (int d : {3, 4}) {
    const Sem sem = saturated_star_sem(d);
    const Eigen::MatrixXd omega = precision_of(sem);
    int nz = 0;
    for (int j = 1; j < sem.p(); ++j)
      if (std::abs(omega(0, j)) > 1e-12) ++nz;
    if (nz != d * d)
      return {false, "saturated star d=" + std::to_string(d) + ": row support " +
                         std::to_string(nz) + " != " + std::to_string(d * d)};
  }
  return {true, "200 models within d^2 (max seen " + std::to_string(max_seen) +
                    "), saturated stars exactly d^2"};
}

// ---------------------------------------------------------------------------
// 6. Regularized inversion at the oracle radius obeys the 4*M*lambda
//    deviation contract, with support containment whenever the smallest
//    nonzero entry clears the bound.

Outcome criterion6() {
  double worst_ratio = 0.0;
  int premise_held = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const bool dense = seed < 25;
    const Sem sem = dense ? random_identifiable_sem(8, 3, 0.4, 0.9, 1200 + seed)
                          : random_identifiable_sem(8, 1, 0.5, 0.8, 1200 + seed, 0.5);
    const Eigen::MatrixXd sigma = covariance_of(sem);
    const Eigen::MatrixXd omega = precision_of(sem);
    const DataMatrix data =
        sample_data(sem, 50000, NoiseModel{}, derive_seed(1200 + seed, 77));
    const Eigen::MatrixXd sigma_n = empirical_covariance(data);
    const double dev = max_abs_diff(sigma_n, sigma);
    const double norm1 = l1_operator_norm(omega);
    const double lambda = norm1 * dev;
    const PrecisionEstimate est = clime_full(sigma_n, lambda);
    const double err = max_abs_diff(est.values, omega);
    const double bound = 4.0 * norm1 * lambda;
    worst_ratio = std::max(worst_ratio, err / bound);
    if (err > bound)
      return {false, "seed " + std::to_string(seed) + ": err " + fmt(err) +
                         " > bound " + fmt(bound)};

    double min_nz = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        if (std::abs(omega(i, j)) > kZeroCutoff)
          min_nz = std::min(min_nz, std::abs(omega(i, j)));
    if (min_nz > bound) {
      ++premise_held;
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          if (std::abs(omega(i, j)) > kZeroCutoff && !est.support.count({i, j}))
            return {false, "seed " + std::to_string(seed) + ": entry (" +
                               std::to_string(i) + "," + std::to_string(j) +
                               ") lost from the support"};
    }
  }
  if (premise_held < 10)
    return {false, "support premise held on only " + std::to_string(premise_held) +
                       " instances"};
  return {true, "50/50 within bound (worst ratio " + fmt(worst_ratio) +
                    "), support kept on " + std::to_string(premise_held) +
                    " qualifying instances"};
}

// ---------------------------------------------------------------------------
// 7. The l1 band solver agrees with a brute-force vertex-enumeration oracle.

Outcome criterion7() {
  struct Forced {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    double radius;
  };
  std::vector<Forced> cases;
  Eigen::MatrixXd eye2 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd e0(2);
  e0 << 1.0, 0.0;
  cases.push_back({eye2, e0, 0.1});
  cases.push_back({eye2, e0, 1.0});
  Eigen::MatrixXd diag24 = Eigen::Vector2d(2.0, 4.0).asDiagonal();
  cases.push_back({diag24, e0, 0.0});

  const double palette[] = {0.0, 0.05, 0.3, 1.0};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed(777, seed));
    const int q = 1 + static_cast<int>(rng.uniform_int(6));
    const int k = 1 + static_cast<int>(rng.uniform_int(8));
    Eigen::MatrixXd A(k, q);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < q; ++c) A(r, c) = rng.normal();
    Eigen::VectorXd b(k);
    for (int r = 0; r < k; ++r) b[r] = rng.normal();
    cases.push_back({A, b, palette[seed % 4]});
  }

  int feasible_seen = 0, infeasible_seen = 0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& inst = cases[c];
    const ReferenceLpResult ref = reference_l1_linf(inst.A, inst.b, inst.radius);
    try {
      const Eigen::VectorXd x =
          solve_l1_linf(LpProblem{inst.A, inst.b, inst.radius});
      if (!ref.feasible)
        return {false, "case " + std::to_string(c) + ": solver found a point, "
                       "oracle says infeasible"};
      const double viol =
          inst.A.rows() == 0
              ? 0.0
              : (inst.A * x - inst.b).cwiseAbs().maxCoeff() - inst.radius;
      if (viol > 1e-8)
        return {false, "case " + std::to_string(c) + ": violation " + fmt(viol)};
      if (std::abs(x.cwiseAbs().sum() - ref.objective) > 1e-6)
        return {false, "case " + std::to_string(c) + ": objective " +
                           fmt(x.cwiseAbs().sum()) + " vs oracle " +
                           fmt(ref.objective)};
      ++feasible_seen;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::infeasible || ref.feasible)
        return {false, "case " + std::to_string(c) + ": " + e.what()};
      ++infeasible_seen;
    }
  }
  return {true, std::to_string(feasible_seen) + " feasible + " +
                    std::to_string(infeasible_seen) +
                    " infeasible cases all match the oracle"};
}

// ---------------------------------------------------------------------------
// 8. End-to-end finite-sample contract on a fixed sparse model sampled at
//    4M rows: the checkable condition holds at the oracle radius, the weight
//    error obeys the computed bound, no true edge is lost before
//    thresholding, and the elimination order reverses a topological order.

Outcome criterion8() {
  EdgeSet edges;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(10, 10);
  for (int k = 0; k < 3; ++k) {
    edges.insert({3 * k + 1, 3 * k});
    edges.insert({3 * k + 2, 3 * k + 1});
    B(3 * k + 1, 3 * k) = 1.0;
    B(3 * k + 2, 3 * k + 1) = 1.0;
  }
  const Sem sem = make_sem(validate_dag(10, edges), B, Eigen::VectorXd::Ones(10));
  const double M = precision_norm_bound(sem);
  if (std::abs(M - 4.0) > 1e-12) return {false, "fixture norm bound " + fmt(M)};
  const Eigen::MatrixXd sigma = covariance_of(sem);

  BoundInputs inputs;
  inputs.M = M;
  inputs.B_max = 1.0;  // sigma2_max = sigma2_min = 1 already

  double worst_dev = 0.0, worst_slack = 1.0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Eigen::MatrixXd sigma_n =
        chunked_covariance(sem, 4'000'000, 200'000, NoiseModel{},
                           derive_seed(4242, seed));
    const double dev = max_abs_diff(sigma_n, sigma);
    worst_dev = std::max(worst_dev, dev);
    const double lambda = M * dev;

    const IdentifiabilityReport rep = check_finite_sample_identifiability(sem, lambda);
    if (!rep.satisfied)
      return {false, "seed " + std::to_string(seed) + ": condition fails at dev " +
                         fmt(dev)};

    LearnerConfig config;
    config.lambda_n = lambda;
    config.threshold_eps = 0.0;
    config.update_mode = UpdateMode::full_residual_rows;
    const LearnResult result = learn_finite(sigma_n, config);

    const double bound = error_bound(inputs, lambda);
    const double err = (result.B_hat - sem.B).cwiseAbs().maxCoeff();
    worst_slack = std::min(worst_slack, (bound - err) / bound);
    if (err > bound)
      return {false, "seed " + std::to_string(seed) + ": err " + fmt(err) +
                         " > bound " + fmt(bound)};
    for (const auto& [i, k] : sem.dag.edges)
      if (result.B_hat(i, k) == 0.0)
        return {false, "seed " + std::to_string(seed) + ": true edge (" +
                           std::to_string(i) + "," + std::to_string(k) +
                           ") estimated as zero"};
    std::vector<int> order = result.elimination_order;
    std::reverse(order.begin(), order.end());
    if (!is_topological_order(sem.dag, order))
      return {false, "seed " + std::to_string(seed) +
                         ": reversed elimination order is not topological"};
  }
  return {true, "25 seeds, worst dev " + fmt(worst_dev) +
                    ", smallest bound slack " + fmt(worst_slack)};
}

// ---------------------------------------------------------------------------
// 9 & 12. Median weight error roughly halves when the sample count
//         quadruples, at the scaled radius 0.5*sqrt(log p / n).

Outcome rate_criterion(NoiseKind kind, std::uint64_t base, double lo, double hi) {
  Stopwatch sw;
  const int ns[3] = {2000, 8000, 32000};
  double med[3];
  for (int a = 0; a < 3; ++a) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Sem sem = random_identifiable_sem(15, 2, 0.7, 0.9, base + seed);
      NoiseModel noise;
      noise.kind = kind;
      const DataMatrix data =
          sample_data(sem, ns[a], noise, derive_seed(base + seed, 3));
      LearnerConfig config;
      config.lambda_n = 0.5 * std::sqrt(std::log(15.0) / ns[a]);
      config.update_mode = UpdateMode::restricted_rows;
      const LearnResult result = learn_finite(data, config);
      errs.push_back((result.B_hat - sem.B).cwiseAbs().maxCoeff());
    }
    med[a] = median(errs);
  }
  const double r1 = med[1] / med[0];
  const double r2 = med[2] / med[1];
  const double ms = sw.ms();
  const std::string detail = "medians " + fmt(med[0]) + "/" + fmt(med[1]) + "/" +
                             fmt(med[2]) + ", ratios " + fmt(r1) + ", " + fmt(r2) +
                             ", " + fmt(ms / 1000.0) + " s";
  if (ms >= 300000.0) return {false, "took too long: " + detail};
  if (r1 < lo || r1 > hi || r2 < lo || r2 > hi)
    return {false, "ratio outside [" + fmt(lo) + ", " + fmt(hi) + "]: " + detail};
  return {true, detail};
}

// ---------------------------------------------------------------------------
// 10. Exact support recovery at n=32000 with the scaled radius and the
//     2*lambda threshold, in at least 90% of seeds.
//
// This target is not reachable at these constants, and the failure is
// reported rather than hidden. The 2*lambda threshold admits a spurious
// weight once the sampling noise at one of the ~100 candidate positions
// exceeds roughly lambda + eps = 1.5*sqrt(log p / n); the noise itself has
// standard deviation at least 1/sqrt(n) per position (the pipeline is scale
// invariant, so sigma^2 = 1 covariances are representative, and their
// entrywise noise floor is 1/n in variance). Both sides scale as 1/sqrt(n),
// leaving a fixed margin of 1.5*sqrt(log 15) ~= 2.5 standard deviations at
// every n — about one surviving spurious weight per run in expectation.
// Measured across chains, matchings, and random forests at weight ranges
// from [0.3,0.4] to [0.7,0.9], exact recovery plateaus at 8-10/25 with
// false positives of magnitude 0.010-0.019 against the 0.0092 threshold
// and no misses; a 4.5*lambda threshold recovers 25/25 on the same seeds.

Outcome criterion10() {
  const int n = 32000;
  int hits = 0, spurious = 0, missing = 0;
  double worst_spurious = 0.0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Sem sem = random_identifiable_sem(15, 2, 0.7, 0.9, 7000 + seed);
    const DataMatrix data =
        sample_data(sem, n, NoiseModel{}, derive_seed(7000 + seed, 3));
    LearnerConfig config;
    config.lambda_n = 0.5 * std::sqrt(std::log(15.0) / n);
    config.threshold_eps = 2.0 * config.lambda_n;
    config.update_mode = UpdateMode::restricted_rows;
    const LearnResult result = learn_finite(data, config);
    if (result.G_hat.edges == sem.dag.edges) {
      ++hits;
      continue;
    }
    for (auto e : result.G_hat.edges)
      if (!sem.dag.edges.count(e)) {
        ++spurious;
        worst_spurious =
            std::max(worst_spurious, std::abs(result.B_hat(e.first, e.second)));
      }
    for (auto e : sem.dag.edges)
      if (!result.G_hat.edges.count(e)) ++missing;
  }
  const std::string detail = std::to_string(hits) + "/25 exact recoveries; " +
                             std::to_string(spurious) + " spurious (worst " +
                             fmt(worst_spurious) + "), " +
                             std::to_string(missing) + " missing";
  if (hits < 23) return {false, detail + " (< 23)"};
  return {true, detail};
}

// ---------------------------------------------------------------------------
// 11. With zero regularization and an exact covariance, the finite-sample
//     learner reproduces the population learner.

Outcome criterion11() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Sem sem = random_identifiable_sem(8, 3, 0.4, 0.9, 2200 + seed);
    LearnerConfig config;  // lambda_n = 0, threshold_eps = 0
    const LearnResult fin = learn_finite(covariance_of(sem), config);
    const LearnResult pop = learn_population(precision_of(sem));
    if (fin.G_hat.edges != pop.G_hat.edges)
      return {false, "seed " + std::to_string(seed) + ": edge sets differ"};
    const double diff = (fin.B_hat - pop.B_hat).cwiseAbs().maxCoeff();
    worst = std::max(worst, diff);
    if (diff > 1e-9)
      return {false, "seed " + std::to_string(seed) + ": weights differ by " +
                         fmt(diff)};
  }
  return {true, "50 seeds, worst weight diff " + fmt(worst)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* label;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "population learner recovers G and B exactly", criterion1},
      {2, "known variances work up to an unknown scale", criterion2},
      {3, "terminal removal matches the marginal model", criterion3},
      {4, "precision-equal families are refuted with witnesses", criterion4},
      {5, "precision row supports stay within d^2", criterion5},
      {6, "regularized inversion meets the deviation contract", criterion6},
      {7, "l1 band solver matches the enumeration oracle", criterion7},
      {8, "sampled fixture satisfies the end-to-end error bound", criterion8},
      {9, "weight error halves per 4x samples (gaussian)",
       [] { return rate_criterion(NoiseKind::gaussian, 6000, 0.35, 0.75); }},
      {10, "exact support recovery in >= 90% of seeds", criterion10},
      {11, "zero-regularization learner equals the population learner",
       criterion11},
      {12, "weight error rate holds under heavy-tailed noise",
       [] { return rate_criterion(NoiseKind::bounded_moment_t, 8000, 0.30, 0.85); }},
  };

  bool all_ok = true;
  for (const auto& c : criteria) {
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("unexpected exception: ") + e.what()};
    }
    std::printf("%s criterion %2d: %s (%s)\n", outcome.ok ? "PASS" : "FAIL", c.id,
                c.label, outcome.note.c_str());
    std::fflush(stdout);
    all_ok = all_ok && outcome.ok;
  }
  return all_ok ? 0 : 1;
}
