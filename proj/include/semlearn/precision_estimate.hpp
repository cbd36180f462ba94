#pragma once

#include <Eigen/Dense>
#include <set>
#include <utility>
#include <vector>

namespace semlearn {

inline constexpr double kDefaultSupportCutoff = 1e-9;

// Symmetric precision-matrix estimate with an explicit active-vertex set.
// Entries with magnitude at or below `cutoff` are stored as exact zeros, so
// `support` is always the exact nonzero pattern; rows and columns of inactive
// vertices are exactly zero.
struct PrecisionEstimate {
  int p = 0;
  Eigen::MatrixXd values;
  std::set<std::pair<int, int>> support;
  std::vector<char> active;
  double lambda_used = 0.0;
  double cutoff = kDefaultSupportCutoff;

  std::vector<int> row_support(int i) const;
  std::vector<int> active_vertices() const;
  int active_count() const;
};

// Zeroes sub-cutoff entries and inactive rows/columns, then records the
// support. `values` must be symmetric to working precision already; the
// (i, j)/(j, i) average is stored to make symmetry exact.
PrecisionEstimate make_precision_estimate(Eigen::MatrixXd values,
                                          std::vector<char> active, double cutoff,
                                          double lambda_used);

// Entrywise minimum-magnitude symmetrization: each unordered pair keeps the
// entry of smaller magnitude, ties keeping the (j, i) entry for i < j.
PrecisionEstimate symmetrize_min(const Eigen::MatrixXd& omega_bar, double cutoff,
                                 double lambda_used = 0.0);

struct ThresholdResult {
  Eigen::MatrixXd values;
  std::set<std::pair<int, int>> support;
};

// Zeroes entries with |value| <= eps and reports the surviving support.
ThresholdResult threshold(const Eigen::MatrixXd& matrix, double eps);

}  // namespace semlearn
