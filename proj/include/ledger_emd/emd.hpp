#pragma once

// Earth mover's distance between two vertex-weight functions on the chart tree.
//
// On a tree every edge separates the nodes into two parts, so any feasible
// flow must carry exactly the imbalance of the child-side part across that
// edge:
//
//   f(v -> parent(v)) = s(v) = sum over u in subtree(v) of (w1(u) - w2(u))
//
// The transport problem therefore has a single feasible flow and its cost is
// the sum of |s(v)| over non-root nodes, computed in one post-order pass.

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ledger_emd/chart.hpp"
#include "ledger_emd/error.hpp"
#include "ledger_emd/weights.hpp"

namespace ledger_emd {

/// Tolerance on the equal-mass precondition, absorbing normalization rounding.
inline constexpr double kMassTolerance = 1e-9;

/// Flow across the edge between `child` and `parent`; positive means mass
/// moves from child to parent.
struct EdgeFlow {
  NodeId child = 0;
  NodeId parent = 0;
  double flow = 0.0;
};

struct FlowReport {
  std::vector<EdgeFlow> edges;
  double total_cost = 0.0;
};

/// Optional per-edge costs indexed by the child node id. Empty means every
/// edge costs 1.
using EdgeCosts = std::span<const double>;

namespace detail {

inline void check_lengths(std::span<const double> w1, std::span<const double> w2,
                          const ChartOfAccounts& chart, EdgeCosts costs) {
  if (w1.size() != chart.size() || w2.size() != chart.size()) {
    throw Error(Errc::length_mismatch, "weight vectors have length " + std::to_string(w1.size()) + " and " +
                                           std::to_string(w2.size()) + ", chart has " +
                                           std::to_string(chart.size()) + " nodes");
  }
  if (!costs.empty() && costs.size() != chart.size()) {
    throw Error(Errc::length_mismatch, "edge cost vector must have one entry per chart node");
  }
  for (auto w : {w1, w2, costs}) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!(w[i] >= 0.0) || !std::isfinite(w[i])) {
        throw Error(Errc::bad_value, "weights and edge costs must be finite and nonnegative; got " +
                                         std::to_string(w[i]) + " at node '" +
                                         chart.node(static_cast<NodeId>(i)).code + "'");
      }
    }
  }
}

inline double edge_cost(EdgeCosts costs, NodeId child) noexcept {
  return costs.empty() ? 1.0 : costs[child];
}

}  // namespace detail

/// s(v) for every node. At a root this is the side's total mass difference.
inline std::vector<double> subtree_imbalance(std::span<const double> w1, std::span<const double> w2,
                                             const ChartOfAccounts& chart) {
  detail::check_lengths(w1, w2, chart, {});
  std::vector<double> s(chart.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = w1[i] - w2[i];
  for (NodeId id : chart.post_order()) {
    if (const auto& parent = chart.node(id).parent) s[*parent] += s[id];
  }
  return s;
}

namespace detail {

inline void check_mass(const std::vector<double>& s, const ChartOfAccounts& chart) {
  for (Side side : {Side::Active, Side::Passive}) {
    const double diff = s[chart.root(side)];
    if (!(std::abs(diff) <= kMassTolerance)) {
      throw Error(Errc::mass_mismatch, std::string("total mass differs by ") + std::to_string(diff) +
                                           " on the " + std::string(side_name(side)) + " side");
    }
  }
}

inline double imbalance_cost(const std::vector<double>& s, const ChartOfAccounts& chart, EdgeCosts costs) {
  double total = 0.0;
  for (const auto& node : chart.nodes()) {
    if (node.parent) total += detail::edge_cost(costs, node.id) * std::abs(s[node.id]);
  }
  return total;
}

}  // namespace detail

/// Minimum total weight that has to be shifted over the tree edges to turn
/// w1 into w2. Requires equal mass on each side of the chart.
inline double emd_tree_distance(std::span<const double> w1, std::span<const double> w2,
                                const ChartOfAccounts& chart, EdgeCosts costs = {}) {
  detail::check_lengths(w1, w2, chart, costs);
  const auto s = subtree_imbalance(w1, w2, chart);
  detail::check_mass(s, chart);
  return detail::imbalance_cost(s, chart, costs);
}

/// The unique optimal edge flows behind emd_tree_distance, one entry per
/// non-root node in id order.
inline FlowReport tree_flows(std::span<const double> w1, std::span<const double> w2,
                             const ChartOfAccounts& chart, EdgeCosts costs = {}) {
  detail::check_lengths(w1, w2, chart, costs);
  const auto s = subtree_imbalance(w1, w2, chart);
  detail::check_mass(s, chart);
  FlowReport report;
  for (const auto& node : chart.nodes()) {
    if (!node.parent) continue;
    report.edges.push_back({node.id, *node.parent, s[node.id]});
    report.total_cost += detail::edge_cost(costs, node.id) * std::abs(s[node.id]);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Company level
// ---------------------------------------------------------------------------

/// Per-kind weights of the company distance. The default is the plain sum of
/// the four sub-tree distances.
struct AggregationPolicy {
  std::array<double, 4> kind_weights{1.0, 1.0, 1.0, 1.0};
};

/// The two weight vectors actually compared for one kind. When exactly one
/// company has an empty sub-tree, that side is replaced by a unit mass at the
/// sub-tree root ("RootSink"), so the distance becomes the cost of moving the
/// other company's mass to the root. Two empty sub-trees compare equal.
inline std::pair<WeightVector, WeightVector> effective_weights(const WeightedSubtrees& a,
                                                               const WeightedSubtrees& b, SubtreeKind kind,
                                                               const ChartOfAccounts& chart) {
  WeightVector wa = a[kind];
  WeightVector wb = b[kind];
  const bool empty_a = a.empty(kind);
  const bool empty_b = b.empty(kind);
  if (empty_a != empty_b) {
    auto& sink = empty_a ? wa : wb;
    sink[chart.root(kind_side(kind))] = 1.0;
  }
  return {std::move(wa), std::move(wb)};
}

namespace detail {

inline void check_same_chart(const WeightedSubtrees& a, const WeightedSubtrees& b,
                             const ChartOfAccounts& chart) {
  for (const auto* ws : {&a, &b}) {
    for (const auto& v : ws->subtree_weights) {
      if (v.size() != chart.size()) {
        throw Error(Errc::chart_mismatch, "company '" + ws->company_id + "' was built for a chart with " +
                                              std::to_string(v.size()) + " nodes, expected " +
                                              std::to_string(chart.size()));
      }
    }
  }
}

}  // namespace detail

/// Distance between one kind of sub-tree of two companies, with the RootSink
/// rule for a one-sided empty sub-tree.
inline double subtree_distance(const WeightedSubtrees& a, const WeightedSubtrees& b, SubtreeKind kind,
                               const ChartOfAccounts& chart) {
  detail::check_same_chart(a, b, chart);
  const bool empty_a = a.empty(kind);
  const bool empty_b = b.empty(kind);
  if (empty_a && empty_b) return 0.0;
  // A unit mass placed at the root changes s(root) only, which has no edge,
  // so the RootSink cost is the imbalance cost against an all-zero vector.
  const auto s = subtree_imbalance(a[kind], b[kind], chart);
  if (!empty_a && !empty_b) detail::check_mass(s, chart);
  return detail::imbalance_cost(s, chart, {});
}

inline double company_distance(const WeightedSubtrees& a, const WeightedSubtrees& b,
                               const ChartOfAccounts& chart, const AggregationPolicy& policy = {}) {
  double total = 0.0;
  for (SubtreeKind kind : kAllSubtreeKinds) {
    const double weight = policy.kind_weights[kind_index(kind)];
    if (weight == 0.0) continue;
    total += weight * subtree_distance(a, b, kind, chart);
  }
  return total;
}

/// Per-kind optimal flows between two companies. Only the edges of the
/// kind's side are listed.
inline std::array<FlowReport, 4> explain_distance(const WeightedSubtrees& a, const WeightedSubtrees& b,
                                                  const ChartOfAccounts& chart) {
  detail::check_same_chart(a, b, chart);
  std::array<FlowReport, 4> reports;
  for (SubtreeKind kind : kAllSubtreeKinds) {
    const auto [wa, wb] = effective_weights(a, b, kind, chart);
    auto full = tree_flows(wa, wb, chart);
    auto& report = reports[kind_index(kind)];
    report.total_cost = full.total_cost;
    for (const auto& edge : full.edges) {
      if (chart.node(edge.child).side == kind_side(kind)) report.edges.push_back(edge);
    }
  }
  return reports;
}

/// `{ "kind", "total_cost", "flows": [ {"from", "to", "flow"} ] }`; edges
/// carrying no flow are omitted.
inline nlohmann::json flow_report_to_json(const FlowReport& report, SubtreeKind kind,
                                          const ChartOfAccounts& chart) {
  nlohmann::json flows = nlohmann::json::array();
  for (const auto& edge : report.edges) {
    if (edge.flow == 0.0) continue;
    flows.push_back({{"from", chart.node(edge.child).code},
                     {"to", chart.node(edge.parent).code},
                     {"flow", edge.flow}});
  }
  return {{"kind", std::string(kind_name(kind))}, {"total_cost", report.total_cost}, {"flows", std::move(flows)}};
}

}  // namespace ledger_emd
