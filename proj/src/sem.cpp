#include "semlearn/sem.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>
#include <vector>

#include "semlearn/errors.hpp"

namespace semlearn {

Sem make_sem(Dag dag, Eigen::MatrixXd B, Eigen::VectorXd sigma2) {
  const int p = dag.p;
  if (B.rows() != p || B.cols() != p)
    throw Error(ErrorCode::invalid_params, "weight matrix must be p x p");
  if (sigma2.size() != p)
    throw Error(ErrorCode::invalid_params, "sigma2 must have length p");
  for (int i = 0; i < p; ++i) {
    if (!(sigma2[i] > 0.0) || !std::isfinite(sigma2[i]))
      throw Error(ErrorCode::invalid_params,
                  "sigma2[" + std::to_string(i + 1) + "] must be positive and finite");
    for (int j = 0; j < p; ++j) {
      if (!std::isfinite(B(i, j)))
        throw Error(ErrorCode::invalid_params, "non-finite weight");
      const bool on_edge = dag.edges.count({i, j}) > 0;
      if (on_edge && B(i, j) == 0.0)
        throw Error(ErrorCode::invalid_params,
                    "edge (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                        ") carries weight zero");
      if (!on_edge && B(i, j) != 0.0)
        throw Error(ErrorCode::invalid_params,
                    "nonzero weight off the edge set at (" + std::to_string(i + 1) +
                        ", " + std::to_string(j + 1) + ")");
    }
  }
  Sem sem{std::move(dag), std::move(B), std::move(sigma2), {}};
  sem.source_index.resize(p);
  for (int v = 0; v < p; ++v) sem.source_index[v] = v;
  return sem;
}

Eigen::MatrixXd covariance_of(const Sem& sem) {
  const int p = sem.p();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(p, p) - sem.B;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible())
    throw Error(ErrorCode::singular_system, "I - B is singular (corrupted model)");
  Eigen::MatrixXd Ainv = lu.inverse();
  Eigen::MatrixXd S = Ainv * sem.sigma2.asDiagonal() * Ainv.transpose();
  // Exact symmetry despite the general matrix products.
  return ((S + S.transpose()) * 0.5).eval();
}

Eigen::MatrixXd precision_of(const Sem& sem) {
  const int p = sem.p();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(p, p) - sem.B;
  Eigen::MatrixXd O = A.transpose() * sem.sigma2.cwiseInverse().asDiagonal() * A;
  return ((O + O.transpose()) * 0.5).eval();
}

Sem marginal_sem(const Sem& sem, int i) {
  const int p = sem.p();
  if (i < 0 || i >= p) throw Error(ErrorCode::invalid_vertex, "vertex out of range");
  for (const auto& [c, par] : sem.dag.edges)
    if (par == i)
      throw Error(ErrorCode::not_terminal,
                  "vertex " + std::to_string(i + 1) + " has children");
  std::vector<int> keep;
  keep.reserve(p - 1);
  for (int v = 0; v < p; ++v)
    if (v != i) keep.push_back(v);
  std::vector<int> new_index(p, -1);
  for (int k = 0; k < static_cast<int>(keep.size()); ++k) new_index[keep[k]] = k;

  EdgeSet edges;
  for (const auto& [c, par] : sem.dag.edges)
    if (c != i) edges.insert({new_index[c], new_index[par]});
  Dag dag{p - 1, std::move(edges), sem.dag.degree_bound};

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p - 1, p - 1);
  Eigen::VectorXd sigma2(p - 1);
  for (int a = 0; a < p - 1; ++a) {
    sigma2[a] = sem.sigma2[keep[a]];
    for (int b = 0; b < p - 1; ++b) B(a, b) = sem.B(keep[a], keep[b]);
  }
  Sem out{std::move(dag), std::move(B), std::move(sigma2), {}};
  out.source_index.resize(p - 1);
  for (int a = 0; a < p - 1; ++a) out.source_index[a] = sem.source_index[keep[a]];
  return out;
}

void validate_known_variances(const KnownVarianceSpec& spec, int p) {
  if (spec.d_diag.size() != p)
    throw Error(ErrorCode::invalid_params, "known-variance vector must have length p");
  for (int i = 0; i < p; ++i)
    if (!(spec.d_diag[i] > 0.0) || !std::isfinite(spec.d_diag[i]))
      throw Error(ErrorCode::invalid_params, "known variances must be positive and finite");
  if (spec.alpha && (!(*spec.alpha > 0.0) || !std::isfinite(*spec.alpha)))
    throw Error(ErrorCode::invalid_params, "alpha must be positive and finite");
}

void for_each_ancestral_set(const Dag& dag, int enumeration_limit,
                            const std::function<void(const std::vector<int>&)>& visit) {
  const int p = dag.p;
  if (p > enumeration_limit)
    throw Error(ErrorCode::too_large,
                "p = " + std::to_string(p) + " exceeds the enumeration limit " +
                    std::to_string(enumeration_limit));
  if (p > 30)
    throw Error(ErrorCode::too_large, "subset enumeration supports at most 30 vertices");

  const auto children = dag.children();
  std::unordered_set<std::uint32_t> seen;
  std::vector<std::uint32_t> stack;
  const std::uint32_t full = (p == 30) ? 0x3fffffffu : ((1u << p) - 1u);
  stack.push_back(full);
  seen.insert(full);
  std::vector<int> members;
  while (!stack.empty()) {
    const std::uint32_t mask = stack.back();
    stack.pop_back();
    members.clear();
    for (int v = 0; v < p; ++v)
      if (mask & (1u << v)) members.push_back(v);
    visit(members);
    for (int v : members) {
      bool terminal = true;
      for (int c : children[v])
        if (mask & (1u << c)) {
          terminal = false;
          break;
        }
      if (!terminal) continue;
      const std::uint32_t next = mask & ~(1u << v);
      if (next != 0 && seen.insert(next).second) stack.push_back(next);
    }
  }
}

namespace {

double snap_margin(double m) { return std::abs(m) < kZeroCutoff ? 0.0 : m; }

}  // namespace

IdentifiabilityReport check_identifiability(const Sem& sem, double gap,
                                            int enumeration_limit) {
  if (!(gap >= 0.0) || !std::isfinite(gap))
    throw Error(ErrorCode::invalid_params, "gap must be nonnegative and finite");
  const int p = sem.p();
  const auto children = sem.dag.children();

  IdentifiabilityReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for_each_ancestral_set(sem.dag, enumeration_limit, [&](const std::vector<int>& members) {
    ++report.subsets_checked;
    std::vector<char> in_set(p, 0);
    for (int v : members) in_set[v] = 1;

    // Inverse-variance score of each member within the induced subgraph:
    // 1/sigma_v^2 plus the child weight terms that survive the restriction.
    std::vector<int> terminals, internals;
    std::vector<double> score(members.size(), 0.0);
    for (size_t k = 0; k < members.size(); ++k) {
      const int v = members[k];
      double s = 1.0 / sem.sigma2[v];
      bool has_child = false;
      for (int c : children[v])
        if (in_set[c]) {
          has_child = true;
          s += sem.B(c, v) * sem.B(c, v) / sem.sigma2[c];
        }
      score[k] = s;
      (has_child ? internals : terminals).push_back(static_cast<int>(k));
    }
    for (int ti : terminals) {
      const double lhs = 1.0 / sem.sigma2[members[ti]];
      for (int nj : internals) {
        const double margin = snap_margin(score[nj] - gap - lhs);
        if (margin < report.worst_margin) {
          report.worst_margin = margin;
          report.witness =
              IdentifiabilityWitness{members, members[ti], members[nj]};
        }
      }
    }
  });
  if (!std::isfinite(report.worst_margin)) {
    // No (terminal, non-terminal) pair exists anywhere: empty graphs satisfy
    // the condition vacuously.
    report.worst_margin = std::numeric_limits<double>::infinity();
    report.witness.reset();
    report.satisfied = true;
    return report;
  }
  report.satisfied = report.worst_margin > 0.0;
  return report;
}

double precision_norm_bound(const Sem& sem, int enumeration_limit) {
  double bound = 0.0;
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
    bound = std::max(bound, omega.cwiseAbs().colwise().sum().maxCoeff());
  });
  return bound;
}

Sem unidentifiable_family(int k, double beta, double v1, double v2,
                          const std::vector<bool>& variant_bits, bool connected) {
  if (k < 1) throw Error(ErrorCode::invalid_params, "k must be >= 1");
  if (static_cast<int>(variant_bits.size()) != k)
    throw Error(ErrorCode::invalid_params, "variant_bits must have length k");
  if (!(v1 > 0.0))
    throw Error(ErrorCode::invalid_params, "v1 must be positive");
  if (!(v2 > v1))
    throw Error(ErrorCode::invalid_params, "v2 must exceed v1");
  if (beta == 0.0)
    throw Error(ErrorCode::invalid_params, "beta must be nonzero");
  const double b2 = std::sqrt(1.0 - v1 / v2);
  const double hub_weight = 1.0;

  const int base = connected ? 1 : 0;
  const int p = 3 * k + base;
  EdgeSet edges;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd sigma2(p);
  if (connected) sigma2[0] = v1;  // hub
  for (int t = 0; t < k; ++t) {
    const int a = base + 3 * t, b = a + 1, c = a + 2;
    edges.insert({a, b});
    B(a, b) = beta;
    sigma2[a] = v1;
    if (!variant_bits[t]) {
      // chain a <- b <- c
      edges.insert({b, c});
      B(b, c) = b2;
      sigma2[b] = v1;
      sigma2[c] = v2;
    } else {
      // fork a <- b -> c
      edges.insert({c, b});
      B(c, b) = b2;
      sigma2[b] = v2;
      sigma2[c] = v1;
    }
    if (connected) {
      edges.insert({a, 0});
      B(a, 0) = hub_weight;
    }
  }
  return make_sem(validate_dag(p, edges), std::move(B), std::move(sigma2));
}

}  // namespace semlearn
