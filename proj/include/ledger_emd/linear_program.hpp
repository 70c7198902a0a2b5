#pragma once

// Dense two-phase primal simplex for small problems in equality form:
//
//   minimize c.x  subject to  A x = b,  x >= 0.
//
// Bland's rule is used for both the entering and leaving choice, so the method
// terminates on degenerate problems (tree transport problems are highly
// degenerate). Intended for verification-sized inputs, not for speed.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace ledger_emd {

struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<std::vector<double>> rows;  // each of length num_vars
  std::vector<double> rhs;
  std::vector<double> cost;  // length num_vars
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
};

struct LpOptions {
  double pivot_tolerance = 1e-12;
  double feasibility_tolerance = 1e-9;
  std::size_t max_iterations = 200000;
};

namespace detail {

class SimplexTableau {
 public:
  SimplexTableau(const LinearProgram& lp, const LpOptions& options)
      : opt_(options), rows_(lp.rows.size()), vars_(lp.num_vars), cols_(vars_ + rows_ + 1) {
    table_.assign(rows_ * cols_, 0.0);
    basis_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      const double sign = lp.rhs[i] < 0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < vars_; ++j) at(i, j) = sign * lp.rows[i][j];
      at(i, vars_ + i) = 1.0;
      at(i, cols_ - 1) = sign * lp.rhs[i];
      basis_[i] = vars_ + i;
    }
    active_.assign(rows_, true);
  }

  LpSolution solve(const std::vector<double>& cost) {
    LpSolution out;

    std::vector<double> phase1(vars_ + rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) phase1[vars_ + i] = 1.0;
    auto status = iterate(phase1, /*allow_artificial=*/true, out.iterations);
    if (status == LpStatus::IterationLimit) {
      out.status = status;
      return out;
    }
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (active_[i] && basis_[i] >= vars_) infeasibility += rhs(i);
    }
    if (infeasibility > opt_.feasibility_tolerance) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    drive_out_artificials();

    std::vector<double> phase2(vars_ + rows_, 0.0);
    for (std::size_t j = 0; j < vars_; ++j) phase2[j] = cost[j];
    status = iterate(phase2, /*allow_artificial=*/false, out.iterations);
    out.status = status;
    if (status != LpStatus::Optimal) return out;

    out.x.assign(vars_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (active_[i] && basis_[i] < vars_) out.x[basis_[i]] = rhs(i);
    }
    for (std::size_t j = 0; j < vars_; ++j) out.objective += cost[j] * out.x[j];
    return out;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return table_[i * cols_ + j]; }
  double rhs(std::size_t i) const { return table_[i * cols_ + cols_ - 1]; }

  void pivot(std::size_t row, std::size_t col) {
    const double inv = 1.0 / at(row, col);
    for (std::size_t j = 0; j < cols_; ++j) at(row, j) *= inv;
    at(row, col) = 1.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == row || !active_[i]) continue;
      const double factor = at(i, col);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) at(i, j) -= factor * at(row, j);
      at(i, col) = 0.0;
    }
    basis_[row] = col;
  }

  LpStatus iterate(const std::vector<double>& cost, bool allow_artificial, std::size_t& iterations) {
    const std::size_t candidates = allow_artificial ? vars_ + rows_ : vars_;
    for (;;) {
      if (iterations >= opt_.max_iterations) return LpStatus::IterationLimit;

      // Bland: first column with negative reduced cost.
      std::size_t entering = candidates;
      for (std::size_t j = 0; j < candidates; ++j) {
        double reduced = cost[j];
        for (std::size_t i = 0; i < rows_; ++i) {
          if (active_[i]) reduced -= cost[basis_[i]] * at(i, j);
        }
        if (reduced < -opt_.pivot_tolerance) {
          entering = j;
          break;
        }
      }
      if (entering == candidates) return LpStatus::Optimal;

      std::size_t leaving = rows_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_; ++i) {
        if (!active_[i]) continue;
        const double a = at(i, entering);
        if (a <= opt_.pivot_tolerance) continue;
        const double ratio = rhs(i) / a;
        if (ratio < best_ratio - 1e-15 ||
            (ratio <= best_ratio + 1e-15 && leaving < rows_ && basis_[i] < basis_[leaving])) {
          if (ratio < best_ratio) best_ratio = ratio;
          leaving = i;
        }
      }
      if (leaving == rows_) return LpStatus::Unbounded;
      pivot(leaving, entering);
      ++iterations;
    }
  }

  // After phase 1 every artificial still in the basis sits at zero. Swap it
  // for a structural column if its row has one; otherwise the row is a linear
  // combination of the others and is dropped.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < rows_; ++i) {
      if (!active_[i] || basis_[i] < vars_) continue;
      std::size_t col = vars_;
      for (std::size_t j = 0; j < vars_; ++j) {
        if (std::abs(at(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col == vars_) {
        active_[i] = false;
      } else {
        pivot(i, col);
      }
    }
  }

  LpOptions opt_;
  std::size_t rows_;
  std::size_t vars_;
  std::size_t cols_;
  std::vector<double> table_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_;
};

}  // namespace detail

inline LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {}) {
  detail::SimplexTableau tableau(lp, options);
  return tableau.solve(lp.cost);
}

}  // namespace ledger_emd
