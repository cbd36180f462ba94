#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "semlearn/dag.hpp"

namespace semlearn {

// Entries with absolute value below this are treated as structural zeros
// wherever a support has to be read off floating-point data.
inline constexpr double kZeroCutoff = 1e-12;

// Default cap on the vertex count for the subset-enumeration routines.
inline constexpr int kDefaultEnumerationLimit = 20;

// Linear structural equation model X = B X + N with independent zero-mean
// noise of variance sigma2. Support(B) equals dag.edges exactly (causal
// minimality).
struct Sem {
  Dag dag;
  Eigen::MatrixXd B;
  Eigen::VectorXd sigma2;
  // Original label of each vertex; identity unless the model was produced by
  // marginalization.
  std::vector<int> source_index;

  int p() const { return dag.p; }
};

Sem make_sem(Dag dag, Eigen::MatrixXd B, Eigen::VectorXd sigma2);

// Sigma = (I - B)^-1 D (I - B)^-T with D = diag(sigma2).
Eigen::MatrixXd covariance_of(const Sem& sem);

// Omega = (I - B)^T D^-1 (I - B).
Eigen::MatrixXd precision_of(const Sem& sem);

// Model over the remaining vertices after dropping terminal vertex i; the
// returned Sem records the old labels in source_index.
Sem marginal_sem(const Sem& sem, int i);

struct IdentifiabilityWitness {
  std::vector<int> vertices;  // induced subgraph on which the check failed
  int terminal = -1;
  int non_terminal = -1;
};

struct IdentifiabilityReport {
  bool satisfied = false;
  double worst_margin = 0.0;
  std::optional<IdentifiabilityWitness> witness;
  long subsets_checked = 0;
};

// For every induced sub-model reachable by repeatedly deleting terminal
// vertices, and every (terminal i, non-terminal j) pair in it, requires
//   1/sigma_i^2 < 1/sigma_j^2 + sum_{l in Ch(j)} B(l,j)^2 / sigma_l^2 - gap.
// worst_margin is the smallest RHS - LHS over all checked triples (margins
// within kZeroCutoff of zero are snapped to zero so that `satisfied` is
// exactly `worst_margin > 0` despite rounding).
IdentifiabilityReport check_identifiability(
    const Sem& sem, double gap, int enumeration_limit = kDefaultEnumerationLimit);

// Largest l1 operator norm (max absolute column sum) among the precision
// matrices of all sub-models reachable by terminal deletion.
double precision_norm_bound(const Sem& sem,
                            int enumeration_limit = kDefaultEnumerationLimit);

// Known (or assumed) noise variances up to a global scale; alpha is the
// optional scale used by generators and checks.
struct KnownVarianceSpec {
  Eigen::VectorXd d_diag;
  std::optional<double> alpha;
};

void validate_known_variances(const KnownVarianceSpec& spec, int p);

// Family of SEMs with pairwise distinct edge sets sharing a single precision
// matrix: k triplets, each either a chain a <- b <- c (bit false) or a fork
// a <- b -> c (bit true), with weights beta and sqrt(1 - v1/v2). With
// `connected` a hub vertex is prepended with an edge of weight 1 into each
// triplet's first vertex. Every member fails check_identifiability.
Sem unidentifiable_family(int k, double beta, double v1, double v2,
                          const std::vector<bool>& variant_bits, bool connected);

// Visits every nonempty vertex subset closed under terminal deletion (the
// ancestral sets of the DAG, i.e. all prefixes of topological orders),
// starting from the full set. Throws too_large past enumeration_limit.
void for_each_ancestral_set(const Dag& dag, int enumeration_limit,
                            const std::function<void(const std::vector<int>&)>& visit);

}  // namespace semlearn
