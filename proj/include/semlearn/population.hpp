#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "semlearn/precision_estimate.hpp"
#include "semlearn/sem.hpp"
#include "semlearn/synth.hpp"

namespace semlearn {

enum class TieBreakKind { lowest_index, highest_index, random_seeded };

struct TieBreak {
  TieBreakKind kind = TieBreakKind::lowest_index;
  std::uint64_t seed = 0;
};

struct IterationDiagnostics {
  int vertex = -1;      // chosen terminal
  double min_score = 0.0;
  double runner_up = 0.0;  // NaN on the final round
  double gap = 0.0;        // runner_up - min_score, NaN on the final round
};

struct LearnResult {
  Eigen::MatrixXd B_hat;
  Dag G_hat;
  std::vector<int> elimination_order;
  std::vector<IterationDiagnostics> diagnostics;
};

// Argmin of diag_scores over the active set. Scores within a relative 1e-9 of
// the minimum count as tied (exact arithmetic ties terminals exactly; the
// band keeps the argmin invariant under positive rescaling of all scores),
// and the tie-break rule picks among them. Random tie-breaks draw from `rng`
// when given, else from a generator seeded by tie_break.seed.
int find_terminal(const Eigen::VectorXd& diag_scores, const std::vector<char>& active,
                  const TieBreak& tie_break, Rng* rng = nullptr);

// Removes active vertex i by the rank-one downdate
//   Omega' = Omega - Omega[:,i] Omega[i,:] / Omega(i,i)
// over the entries touched by row i's support, then zeroes row/column i and
// deactivates i.
PrecisionEstimate schur_remove(const PrecisionEstimate& omega, int i);

// Recovers the weight matrix and DAG from an exact precision matrix by
// repeatedly eliminating the vertex minimizing Omega(i,i) * D(i,i) (D = I
// unless known variances are supplied), reading off row weights
// B(i, j) = -Omega(i, j) / Omega(i, i) before each removal.
LearnResult learn_population(const Eigen::MatrixXd& omega,
                             const std::optional<KnownVarianceSpec>& known = {},
                             const TieBreak& tie_break = {},
                             double support_cutoff = kZeroCutoff);

struct MisspecificationResult {
  bool holds = false;
  double margin = 0.0;
};

// Tolerance of the known-variance rule to misspecified variance ratios: for
// every reachable sub-model and every non-terminal j in it, requires
//   sum_{l in Ch(j)} B(l, j)^2 > max_i(d'_i / sigma_i^2) / min_i(d'_i / sigma_i^2) - 1.
MisspecificationResult misspecification_margin(
    const Sem& sem, const KnownVarianceSpec& d_prime,
    int enumeration_limit = kDefaultEnumerationLimit);

}  // namespace semlearn
