#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ledger_emd/error.hpp"

namespace ledger_emd {

using NodeId = std::uint32_t;

enum class Side { Active, Passive };

constexpr std::string_view side_name(Side side) noexcept {
  return side == Side::Active ? "active" : "passive";
}

struct AccountNode {
  NodeId id = 0;
  std::string code;
  std::string name;
  std::optional<NodeId> parent;
  Side side = Side::Active;
};

/// Unvalidated description of one account, as read from a chart document.
struct AccountSpec {
  std::string code;
  std::string name;
  std::optional<std::string> parent_code;
  Side side = Side::Active;
};

/// The generic statement tree shared by every company: one rooted tree per
/// balance-sheet side. Immutable once built.
class ChartOfAccounts {
 public:
  /// Validates the specs and assigns node ids in input order.
  static ChartOfAccounts build(const std::vector<AccountSpec>& specs);

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<AccountNode>& nodes() const noexcept { return nodes_; }
  const AccountNode& node(NodeId id) const { return nodes_.at(id); }

  NodeId root(Side side) const noexcept {
    return side == Side::Active ? root_active_ : root_passive_;
  }
  NodeId root_active() const noexcept { return root_active_; }
  NodeId root_passive() const noexcept { return root_passive_; }
  bool is_root(NodeId id) const noexcept { return !nodes_[id].parent.has_value(); }

  /// Children in ascending account-code order.
  const std::vector<NodeId>& children(NodeId id) const { return children_.at(id); }

  /// Every node, each appearing after all of its descendants.
  const std::vector<NodeId>& post_order() const noexcept { return post_order_; }

  /// Number of edges between the node and its root.
  std::size_t depth(NodeId id) const { return depth_.at(id); }

  /// Largest depth of any node on the side.
  std::size_t height(Side side) const noexcept {
    return side == Side::Active ? height_active_ : height_passive_;
  }

  std::optional<NodeId> find(std::string_view code) const {
    const auto it = by_code_.find(std::string(code));
    if (it == by_code_.end()) return std::nullopt;
    return it->second;
  }

  NodeId at(std::string_view code) const {
    if (auto id = find(code)) return *id;
    throw Error(Errc::unknown_code, "unknown account code '" + std::string(code) + "'");
  }

  /// Edge count on the unique path between two nodes of the same side.
  std::size_t path_length(NodeId a, NodeId b) const;

  friend bool operator==(const ChartOfAccounts& a, const ChartOfAccounts& b) {
    if (a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
      const auto& x = a.nodes_[i];
      const auto& y = b.nodes_[i];
      if (x.code != y.code || x.name != y.name || x.parent != y.parent || x.side != y.side) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<AccountNode> nodes_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<NodeId> post_order_;
  std::vector<std::size_t> depth_;
  std::unordered_map<std::string, NodeId> by_code_;
  NodeId root_active_ = 0;
  NodeId root_passive_ = 0;
  std::size_t height_active_ = 0;
  std::size_t height_passive_ = 0;
};

inline ChartOfAccounts ChartOfAccounts::build(const std::vector<AccountSpec>& specs) {
  ChartOfAccounts chart;
  const std::size_t n = specs.size();
  chart.nodes_.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& spec = specs[i];
    if (spec.code.empty()) {
      throw Error(Errc::malformed_input, "node #" + std::to_string(i) + " has an empty code");
    }
    if (!chart.by_code_.emplace(spec.code, static_cast<NodeId>(i)).second) {
      throw Error(Errc::duplicate_code, "duplicate account code '" + spec.code + "'");
    }
    auto& node = chart.nodes_[i];
    node.id = static_cast<NodeId>(i);
    node.code = spec.code;
    node.name = spec.name;
    node.side = spec.side;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& parent_code = specs[i].parent_code;
    if (!parent_code) continue;
    const auto it = chart.by_code_.find(*parent_code);
    if (it == chart.by_code_.end()) {
      throw Error(Errc::missing_parent, "account '" + specs[i].code + "' references missing parent '" +
                                            *parent_code + "'");
    }
    chart.nodes_[i].parent = it->second;
  }

  // Walk parent links; a walk that revisits a node of the current path is a cycle.
  {
    enum : std::uint8_t { unvisited, on_path, done };
    std::vector<std::uint8_t> state(n, unvisited);
    std::vector<NodeId> path;
    for (std::size_t start = 0; start < n; ++start) {
      path.clear();
      std::optional<NodeId> cur = static_cast<NodeId>(start);
      while (cur && state[*cur] == unvisited) {
        state[*cur] = on_path;
        path.push_back(*cur);
        cur = chart.nodes_[*cur].parent;
      }
      if (cur && state[*cur] == on_path) {
        throw Error(Errc::cycle, "cycle detected at account '" + chart.nodes_[*cur].code + "'");
      }
      for (NodeId id : path) state[id] = done;
    }
  }

  std::optional<NodeId> root_active;
  std::optional<NodeId> root_passive;
  for (const auto& node : chart.nodes_) {
    if (node.parent) {
      const auto& parent = chart.nodes_[*node.parent];
      if (parent.side != node.side) {
        throw Error(Errc::side_mismatch, "account '" + node.code + "' is " +
                                             std::string(side_name(node.side)) + " but its parent '" +
                                             parent.code + "' is " + std::string(side_name(parent.side)));
      }
      continue;
    }
    auto& slot = node.side == Side::Active ? root_active : root_passive;
    if (slot) {
      throw Error(Errc::root_count, "second " + std::string(side_name(node.side)) + " root '" + node.code +
                                        "' (first is '" + chart.nodes_[*slot].code + "')");
    }
    slot = node.id;
  }
  if (!root_active || !root_passive) {
    throw Error(Errc::root_count, std::string("chart needs exactly one ") +
                                      (root_active ? "passive" : "active") + " root");
  }
  chart.root_active_ = *root_active;
  chart.root_passive_ = *root_passive;

  chart.children_.assign(n, {});
  for (const auto& node : chart.nodes_) {
    if (node.parent) chart.children_[*node.parent].push_back(node.id);
  }
  for (auto& kids : chart.children_) {
    std::sort(kids.begin(), kids.end(),
              [&](NodeId a, NodeId b) { return chart.nodes_[a].code < chart.nodes_[b].code; });
  }

  // Iterative DFS from both roots: pre-order for depths, reversed into post-order.
  chart.depth_.assign(n, 0);
  std::vector<NodeId> pre_order;
  pre_order.reserve(n);
  for (NodeId root : {chart.root_active_, chart.root_passive_}) {
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
      const NodeId id = stack.back();
      stack.pop_back();
      pre_order.push_back(id);
      for (NodeId child : chart.children_[id]) {
        chart.depth_[child] = chart.depth_[id] + 1;
        stack.push_back(child);
      }
    }
  }
  chart.post_order_.assign(pre_order.rbegin(), pre_order.rend());

  for (const auto& node : chart.nodes_) {
    auto& height = node.side == Side::Active ? chart.height_active_ : chart.height_passive_;
    height = std::max(height, chart.depth_[node.id]);
  }
  return chart;
}

inline std::size_t ChartOfAccounts::path_length(NodeId a, NodeId b) const {
  std::size_t steps = 0;
  while (a != b) {
    if (depth_[a] >= depth_[b]) {
      if (!nodes_[a].parent) break;
      a = *nodes_[a].parent;
    } else {
      if (!nodes_[b].parent) break;
      b = *nodes_[b].parent;
    }
    ++steps;
  }
  if (a != b) throw Error(Errc::invalid_argument, "path_length: nodes lie on different sides");
  return steps;
}

/// Parses the chart JSON document:
/// `{ "nodes": [ { "code", "name", "parent": code|null, "side": "active"|"passive" } ] }`.
inline ChartOfAccounts parse_chart_of_accounts(std::istream& in) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_input, std::string("chart is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw Error(Errc::malformed_input, "chart must be an object with a \"nodes\" array");
  }

  std::vector<AccountSpec> specs;
  specs.reserve(doc["nodes"].size());
  std::size_t index = 0;
  for (const auto& entry : doc["nodes"]) {
    const std::string where = "chart node #" + std::to_string(index++);
    if (!entry.is_object() || !entry.contains("code") || !entry["code"].is_string()) {
      throw Error(Errc::malformed_input, where + " needs a string \"code\"");
    }
    AccountSpec spec;
    spec.code = entry["code"].get<std::string>();
    const std::string label = where + " ('" + spec.code + "')";
    if (entry.contains("name")) {
      if (!entry["name"].is_string()) throw Error(Errc::malformed_input, label + ": \"name\" must be a string");
      spec.name = entry["name"].get<std::string>();
    }
    if (entry.contains("parent") && !entry["parent"].is_null()) {
      if (!entry["parent"].is_string()) {
        throw Error(Errc::malformed_input, label + ": \"parent\" must be a code or null");
      }
      spec.parent_code = entry["parent"].get<std::string>();
    }
    if (!entry.contains("side") || !entry["side"].is_string()) {
      throw Error(Errc::malformed_input, label + " needs a \"side\"");
    }
    const auto side = entry["side"].get<std::string>();
    if (side == "active") {
      spec.side = Side::Active;
    } else if (side == "passive") {
      spec.side = Side::Passive;
    } else {
      throw Error(Errc::malformed_input, label + ": side must be \"active\" or \"passive\", got \"" + side + "\"");
    }
    specs.push_back(std::move(spec));
  }
  return ChartOfAccounts::build(specs);
}

inline nlohmann::json chart_to_json(const ChartOfAccounts& chart) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : chart.nodes()) {
    nlohmann::json entry;
    entry["code"] = node.code;
    entry["name"] = node.name;
    entry["parent"] = node.parent ? nlohmann::json(chart.node(*node.parent).code) : nlohmann::json(nullptr);
    entry["side"] = std::string(side_name(node.side));
    nodes.push_back(std::move(entry));
  }
  return nlohmann::json{{"nodes", std::move(nodes)}};
}

}  // namespace ledger_emd
