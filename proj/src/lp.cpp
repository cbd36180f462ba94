#include "semlearn/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace semlearn {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kReducedCostEps = 1e-9;
// Pivots without objective progress tolerated before switching to Bland's
// rule, which cannot cycle.
constexpr int kStallLimit = 1000;

// Dense full-tableau primal simplex for  min c'z  s.t.  G z <= h, z >= 0.
// Rows are scaled to unit max coefficient; rows with negative right-hand side
// receive an artificial variable and phase one minimizes their sum.
class Simplex {
 public:
  Simplex(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, const Eigen::VectorXd& c)
      : m_(static_cast<int>(G.rows())), n_struct_(static_cast<int>(G.cols())) {
    std::vector<int> art_rows;
    Eigen::MatrixXd Gs = G;
    Eigen::VectorXd hs = h;
    for (int r = 0; r < m_; ++r) {
      double scale = Gs.row(r).cwiseAbs().maxCoeff();
      if (scale > 0.0) {
        Gs.row(r) /= scale;
        hs[r] /= scale;
      }
      if (hs[r] < 0.0) {
        Gs.row(r) = -Gs.row(r);
        hs[r] = -hs[r];
        art_rows.push_back(r);
      }
    }
    n_art_ = static_cast<int>(art_rows.size());
    cols_ = n_struct_ + m_ + n_art_;
    T_.setZero(m_, cols_);
    T_.leftCols(n_struct_) = Gs;
    rhs_ = hs;
    basis_.resize(m_);
    std::vector<char> row_negated(m_, 0);
    for (int r : art_rows) row_negated[r] = 1;
    int art = 0;
    for (int r = 0; r < m_; ++r) {
      // Slack coefficient flips sign on negated rows.
      T_(r, n_struct_ + r) = row_negated[r] ? -1.0 : 1.0;
      if (row_negated[r]) {
        T_(r, n_struct_ + m_ + art) = 1.0;
        basis_[r] = n_struct_ + m_ + art;
        ++art;
      } else {
        basis_[r] = n_struct_ + r;
      }
    }
    // Reduced costs against the initial basis. Phase-two basis costs are all
    // zero (slacks/artificials), phase-one costs are one on artificial rows.
    cost2_.setZero(cols_);
    cost2_.head(n_struct_) = c;
    cost1_.setZero(cols_);
    for (int j = 0; j < n_struct_ + m_; ++j) {
      double s = 0.0;
      for (int r : art_rows) s += T_(r, j);
      cost1_[j] = -s;
    }
    obj1_ = 0.0;
    for (int r : art_rows) obj1_ += rhs_[r];
    obj2_ = 0.0;
  }

  // Runs both phases; returns false when phase one ends with positive
  // infeasibility.
  bool run(double feas_tol) {
    run_phase(/*phase_one=*/true);
    if (basic_artificial_mass() > feas_tol) return false;
    pivot_out_artificials();
    run_phase(/*phase_one=*/false);
    return true;
  }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n_struct_);
    for (int r = 0; r < m_; ++r)
      if (basis_[r] < n_struct_) z[basis_[r]] = rhs_[r];
    return z;
  }

 private:
  bool column_allowed(int j, bool phase_one) const {
    if (phase_one) return true;
    return j < n_struct_ + m_;  // artificials never re-enter in phase two
  }

  void run_phase(bool phase_one) {
    Eigen::VectorXd& cost = phase_one ? cost1_ : cost2_;
    double& obj = phase_one ? obj1_ : obj2_;
    int stall = 0;
    bool bland = false;
    const long budget = 2000 + 200L * (m_ + cols_);
    for (long iter = 0; iter < budget; ++iter) {
      int enter = -1;
      if (bland) {
        for (int j = 0; j < cols_; ++j)
          if (column_allowed(j, phase_one) && cost[j] < -kReducedCostEps) {
            enter = j;
            break;
          }
      } else {
        double best = -kReducedCostEps;
        for (int j = 0; j < cols_; ++j)
          if (column_allowed(j, phase_one) && cost[j] < best) {
            best = cost[j];
            enter = j;
          }
      }
      if (enter < 0) return;  // optimal for this phase

      int leave = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m_; ++r) {
        if (T_(r, enter) <= kPivotEps) continue;
        const double ratio = rhs_[r] / T_(r, enter);
        if (leave < 0 || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && basis_[r] < basis_[leave])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave < 0) {
        // Unbounded direction. The l1 objective is bounded below by zero, so
        // this can only be numerical breakdown.
        throw Error(ErrorCode::unbounded, "simplex found an unbounded direction");
      }
      const double before = obj;
      pivot(leave, enter);
      if (obj >= before - 1e-13) {
        if (++stall > kStallLimit) bland = true;
      } else {
        stall = 0;
      }
    }
    throw IterationLimitError("simplex pivot budget exhausted",
                              extract_x_placeholder(), !phase_one);
  }

  Eigen::VectorXd extract_x_placeholder() const { return solution(); }

  // Exact phase-one objective: artificials still basic hold their row's rhs.
  double basic_artificial_mass() const {
    double mass = 0.0;
    for (int r = 0; r < m_; ++r)
      if (basis_[r] >= n_struct_ + m_) mass += rhs_[r];
    return mass;
  }

  void pivot(int r, int jcol) {
    const double piv = T_(r, jcol);
    T_.row(r) /= piv;
    rhs_[r] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = T_(i, jcol);
      if (f == 0.0) continue;
      T_.row(i) -= f * T_.row(r);
      T_(i, jcol) = 0.0;
      rhs_[i] -= f * rhs_[r];
      if (rhs_[i] < 0.0 && rhs_[i] > -1e-12) rhs_[i] = 0.0;
    }
    const double f1 = cost1_[jcol];
    if (f1 != 0.0) {
      cost1_ -= f1 * T_.row(r).transpose();
      cost1_[jcol] = 0.0;
      obj1_ += f1 * rhs_[r];
    }
    const double f2 = cost2_[jcol];
    if (f2 != 0.0) {
      cost2_ -= f2 * T_.row(r).transpose();
      cost2_[jcol] = 0.0;
      obj2_ += f2 * rhs_[r];
    }
    basis_[r] = jcol;
  }

  // After phase one, swap any artificial still in the basis for a structural
  // or slack column; rows admitting no such pivot are redundant and stay
  // pinned at level zero.
  void pivot_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_struct_ + m_) continue;
      for (int j = 0; j < n_struct_ + m_; ++j)
        if (std::abs(T_(r, j)) > 1e-7) {
          pivot(r, j);
          break;
        }
    }
  }

  int m_, n_struct_, n_art_ = 0, cols_ = 0;
  Eigen::MatrixXd T_;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd cost1_, cost2_;
  double obj1_ = 0.0, obj2_ = 0.0;
  std::vector<int> basis_;
};

}  // namespace

Eigen::VectorXd solve_l1_linf(const LpProblem& problem, double tol) {
  const auto& A = problem.constraint_matrix;
  const auto& b = problem.target;
  const double lambda = problem.radius;
  const int k = static_cast<int>(A.rows());
  const int q = static_cast<int>(A.cols());
  if (b.size() != k)
    throw Error(ErrorCode::invalid_params, "target length must match constraint rows");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::invalid_params, "radius must be nonnegative and finite");
  if (!A.allFinite() || !b.allFinite())
    throw Error(ErrorCode::invalid_params, "constraint data must be finite");
  if (!(tol > 0.0))
    throw Error(ErrorCode::invalid_params, "tolerance must be positive");
  if (q == 0) {
    // No variables: A x = 0, so the band must already contain the target.
    if (k > 0 && b.cwiseAbs().maxCoeff() > lambda + tol)
      throw Error(ErrorCode::infeasible, "constraint band admits no point");
    return Eigen::VectorXd();
  }
  if (k == 0) return Eigen::VectorXd::Zero(q);

  // A row whose coefficients are all negligible against the matrix scale
  // cannot move any bounded point; insisting on it exactly would let rounding
  // residue masquerade as a hard x = 0 constraint once rows are rescaled.
  // Such a row is vacuous when its target already lies within the band, and
  // proves infeasibility otherwise.
  const double row_floor = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff());
  std::vector<int> kept;
  for (int r = 0; r < k; ++r) {
    if (A.row(r).cwiseAbs().maxCoeff() > row_floor)
      kept.push_back(r);
    else if (std::abs(b[r]) > lambda + tol)
      throw Error(ErrorCode::infeasible, "constraint band admits no point");
  }
  const int kk = static_cast<int>(kept.size());
  if (kk == 0) return Eigen::VectorXd::Zero(q);
  Eigen::MatrixXd Ak(kk, q);
  Eigen::VectorXd bk(kk);
  for (int r = 0; r < kk; ++r) {
    Ak.row(r) = A.row(kept[r]);
    bk[r] = b[kept[r]];
  }

  //   z = (u, v), x = u - v
  Eigen::MatrixXd G(2 * kk, 2 * q);
  G.topLeftCorner(kk, q) = Ak;
  G.topRightCorner(kk, q) = -Ak;
  G.bottomLeftCorner(kk, q) = -Ak;
  G.bottomRightCorner(kk, q) = Ak;
  Eigen::VectorXd h(2 * kk);
  h.head(kk) = bk.array() + lambda;
  h.tail(kk) = lambda - bk.array();
  Eigen::VectorXd c = Eigen::VectorXd::Ones(2 * q);

  Simplex simplex(G, h, c);
  bool feasible = false;
  try {
    feasible = simplex.run(tol);
  } catch (const IterationLimitError& e) {
    Eigen::VectorXd best = e.best_point.head(q) - e.best_point.tail(q);
    const bool ok =
        e.feasible && (A * best - b).cwiseAbs().maxCoeff() <= lambda + 10.0 * tol;
    throw IterationLimitError("simplex pivot budget exhausted", std::move(best), ok);
  }
  if (!feasible)
    throw Error(ErrorCode::infeasible, "constraint band admits no point");
  Eigen::VectorXd z = simplex.solution();
  Eigen::VectorXd x = z.head(q) - z.tail(q);

  const double violation = (A * x - b).cwiseAbs().maxCoeff() - lambda;
  if (violation > 10.0 * tol)
    throw Error(ErrorCode::iteration_limit,
                "solution drifted infeasible by " + std::to_string(violation));
  return x;
}

}  // namespace semlearn
