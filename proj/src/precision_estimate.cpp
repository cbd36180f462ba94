#include "semlearn/precision_estimate.hpp"

#include <cmath>

#include "semlearn/errors.hpp"

namespace semlearn {

std::vector<int> PrecisionEstimate::row_support(int i) const {
  std::vector<int> out;
  for (int j = 0; j < p; ++j)
    if (values(i, j) != 0.0) out.push_back(j);
  return out;
}

std::vector<int> PrecisionEstimate::active_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < p; ++v)
    if (active[v]) out.push_back(v);
  return out;
}

int PrecisionEstimate::active_count() const {
  int c = 0;
  for (char a : active) c += (a != 0);
  return c;
}

PrecisionEstimate make_precision_estimate(Eigen::MatrixXd values,
                                          std::vector<char> active, double cutoff,
                                          double lambda_used) {
  const int p = static_cast<int>(values.rows());
  if (values.cols() != p)
    throw Error(ErrorCode::invalid_params, "precision estimate must be square");
  if (static_cast<int>(active.size()) != p)
    throw Error(ErrorCode::invalid_params, "active flags must have length p");
  if (!(cutoff >= 0.0))
    throw Error(ErrorCode::invalid_params, "cutoff must be nonnegative");

  PrecisionEstimate est;
  est.p = p;
  est.active = std::move(active);
  est.lambda_used = lambda_used;
  est.cutoff = cutoff;
  est.values = std::move(values);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      double v = 0.5 * (est.values(i, j) + est.values(j, i));
      if (!est.active[i] || !est.active[j] || std::abs(v) <= cutoff) v = 0.0;
      est.values(i, j) = v;
      est.values(j, i) = v;
      if (v != 0.0) {
        est.support.insert({i, j});
        if (i != j) est.support.insert({j, i});
      }
    }
  return est;
}

PrecisionEstimate symmetrize_min(const Eigen::MatrixXd& omega_bar, double cutoff,
                                 double lambda_used) {
  const int p = static_cast<int>(omega_bar.rows());
  if (omega_bar.cols() != p)
    throw Error(ErrorCode::invalid_params, "matrix must be square");
  Eigen::MatrixXd sym(p, p);
  for (int i = 0; i < p; ++i) {
    sym(i, i) = omega_bar(i, i);
    for (int j = i + 1; j < p; ++j) {
      const double a = omega_bar(i, j), b = omega_bar(j, i);
      const double v = std::abs(a) < std::abs(b) ? a : b;
      sym(i, j) = v;
      sym(j, i) = v;
    }
  }
  return make_precision_estimate(std::move(sym), std::vector<char>(p, 1), cutoff,
                                 lambda_used);
}

ThresholdResult threshold(const Eigen::MatrixXd& matrix, double eps) {
  if (!(eps >= 0.0))
    throw Error(ErrorCode::invalid_params, "threshold must be nonnegative");
  ThresholdResult out{matrix, {}};
  for (int i = 0; i < matrix.rows(); ++i)
    for (int j = 0; j < matrix.cols(); ++j) {
      if (std::abs(out.values(i, j)) <= eps)
        out.values(i, j) = 0.0;
      else
        out.support.insert({i, j});
    }
  return out;
}

}  // namespace semlearn
