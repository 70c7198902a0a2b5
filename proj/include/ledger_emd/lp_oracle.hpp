#pragma once

// Tree transport solved as a general linear program, used to cross-check the
// closed form in emd.hpp.
//
// For every edge e = (child -> parent) the program has a free flow f_e and a
// bound g_e with g_e >= f_e and g_e >= -f_e, and minimizes sum g_e subject to
// per-node conservation: the flow leaving node i equals p_i - c_i. In
// equality form f_e = fp_e - fm_e and the two bounds get surplus variables.

#include <span>
#include <string>
#include <vector>

#include "ledger_emd/chart.hpp"
#include "ledger_emd/emd.hpp"
#include "ledger_emd/error.hpp"
#include "ledger_emd/linear_program.hpp"

namespace ledger_emd {

struct LpOracleResult {
  double cost = 0.0;
  FlowReport report;
  std::size_t simplex_iterations = 0;
};

inline LinearProgram tree_transport_program(std::span<const double> production,
                                            std::span<const double> consumption,
                                            const ChartOfAccounts& chart, std::vector<NodeId>& edge_children) {
  edge_children.clear();
  for (const auto& node : chart.nodes()) {
    if (node.parent) edge_children.push_back(node.id);
  }
  const std::size_t n = chart.size();
  const std::size_t m = edge_children.size();
  // Column layout per edge k: fp = 5k, fm = 5k+1, g = 5k+2, surplus1 = 5k+3, surplus2 = 5k+4.
  LinearProgram lp;
  lp.num_vars = 5 * m;
  lp.cost.assign(lp.num_vars, 0.0);
  lp.rows.assign(n + 2 * m, std::vector<double>(lp.num_vars, 0.0));
  lp.rhs.assign(n + 2 * m, 0.0);

  for (std::size_t i = 0; i < n; ++i) lp.rhs[i] = production[i] - consumption[i];
  for (std::size_t k = 0; k < m; ++k) {
    const NodeId child = edge_children[k];
    const NodeId parent = *chart.node(child).parent;
    const std::size_t fp = 5 * k, fm = fp + 1, g = fp + 2, s1 = fp + 3, s2 = fp + 4;
    lp.cost[g] = 1.0;
    // Out of the child, into the parent.
    lp.rows[child][fp] += 1.0;
    lp.rows[child][fm] -= 1.0;
    lp.rows[parent][fp] -= 1.0;
    lp.rows[parent][fm] += 1.0;
    // g - f - s1 = 0
    auto& upper = lp.rows[n + 2 * k];
    upper[g] = 1.0;
    upper[fp] = -1.0;
    upper[fm] = 1.0;
    upper[s1] = -1.0;
    // g + f - s2 = 0
    auto& lower = lp.rows[n + 2 * k + 1];
    lower[g] = 1.0;
    lower[fp] = 1.0;
    lower[fm] = -1.0;
    lower[s2] = -1.0;
  }
  return lp;
}

/// Solves the transport LP by simplex and returns the optimum and its flows.
/// Throws Errc::infeasible when the masses cannot be balanced and
/// Errc::no_convergence when the simplex hits its iteration cap.
inline LpOracleResult emd_lp_oracle(std::span<const double> w1, std::span<const double> w2,
                                    const ChartOfAccounts& chart, const LpOptions& options = {}) {
  if (w1.size() != chart.size() || w2.size() != chart.size()) {
    throw Error(Errc::length_mismatch, "weight vectors do not match the chart size");
  }
  std::vector<NodeId> edge_children;
  const auto lp = tree_transport_program(w1, w2, chart, edge_children);
  const auto solution = solve_lp(lp, options);
  switch (solution.status) {
    case LpStatus::Optimal: break;
    case LpStatus::Infeasible:
      throw Error(Errc::infeasible, "transport LP is infeasible: the two weight functions carry different mass");
    case LpStatus::Unbounded:
      throw Error(Errc::no_convergence, "transport LP reported unbounded (cannot happen for a valid tree)");
    case LpStatus::IterationLimit:
      throw Error(Errc::no_convergence,
                  "simplex stopped after " + std::to_string(solution.iterations) + " iterations");
  }

  LpOracleResult result;
  result.cost = solution.objective;
  result.simplex_iterations = solution.iterations;
  for (std::size_t k = 0; k < edge_children.size(); ++k) {
    const NodeId child = edge_children[k];
    const double flow = solution.x[5 * k] - solution.x[5 * k + 1];
    result.report.edges.push_back({child, *chart.node(child).parent, flow});
    result.report.total_cost += std::abs(flow);
  }
  return result;
}

}  // namespace ledger_emd
