#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ledger_emd/chart.hpp"
#include "ledger_emd/trial_balance.hpp"

namespace ledger_emd {

/// The four disjoint sub-trees a balance sheet is split into. Mass never moves
/// between them.
enum class SubtreeKind { DebitActive = 0, CreditActive = 1, CreditPassive = 2, DebitPassive = 3 };

inline constexpr std::array<SubtreeKind, 4> kAllSubtreeKinds{
    SubtreeKind::DebitActive, SubtreeKind::CreditActive, SubtreeKind::CreditPassive,
    SubtreeKind::DebitPassive};

constexpr std::size_t kind_index(SubtreeKind kind) noexcept { return static_cast<std::size_t>(kind); }

constexpr Side kind_side(SubtreeKind kind) noexcept {
  return kind == SubtreeKind::DebitActive || kind == SubtreeKind::CreditActive ? Side::Active
                                                                              : Side::Passive;
}

constexpr std::string_view kind_name(SubtreeKind kind) noexcept {
  switch (kind) {
    case SubtreeKind::DebitActive: return "debit_active";
    case SubtreeKind::CreditActive: return "credit_active";
    case SubtreeKind::CreditPassive: return "credit_passive";
    case SubtreeKind::DebitPassive: return "debit_passive";
  }
  return "?";
}

/// How the stored sign of a booked value maps to debit/credit.
///
/// StandardBelgian: active >0 debit, active <0 credit, passive <0 credit,
/// passive >0 debit. Flipped inverts the passive side only, for exports that
/// store liabilities as positive numbers.
enum class SignConvention { StandardBelgian, Flipped };

/// Kind that a nonzero booked value on `side` is routed to.
constexpr SubtreeKind route_booking(Side side, double value, SignConvention convention) noexcept {
  if (side == Side::Active) return value > 0 ? SubtreeKind::DebitActive : SubtreeKind::CreditActive;
  const bool credit = convention == SignConvention::StandardBelgian ? value < 0 : value > 0;
  return credit ? SubtreeKind::CreditPassive : SubtreeKind::DebitPassive;
}

using WeightVector = std::vector<double>;

/// A company's four normalized vertex-weight functions over the shared chart.
/// Each vector has one entry per chart node and is either all zero or sums to 1.
struct WeightedSubtrees {
  std::string company_id;
  std::array<WeightVector, 4> subtree_weights;

  const WeightVector& operator[](SubtreeKind kind) const { return subtree_weights[kind_index(kind)]; }
  WeightVector& operator[](SubtreeKind kind) { return subtree_weights[kind_index(kind)]; }

  bool empty(SubtreeKind kind) const {
    for (double w : (*this)[kind]) {
      if (w != 0.0) return false;
    }
    return true;
  }

  std::size_t chart_size() const noexcept { return subtree_weights[0].size(); }
};

/// Raw absolute booked mass per kind and node, before normalization.
inline std::array<WeightVector, 4> route_masses(const TrialBalance& tb, const ChartOfAccounts& chart,
                                                SignConvention convention = SignConvention::StandardBelgian) {
  std::array<WeightVector, 4> mass;
  for (auto& v : mass) v.assign(chart.size(), 0.0);
  for (const auto& [code, value] : tb.values) {
    if (value == 0.0) continue;
    const NodeId id = chart.at(code);
    const auto kind = route_booking(chart.node(id).side, value, convention);
    mass[kind_index(kind)][id] += std::abs(value);
  }
  return mass;
}

/// w(v) = |b_v| / sum of |b| over the kind, per kind; empty kinds stay zero.
inline WeightedSubtrees build_weighted_subtrees(const TrialBalance& tb, const ChartOfAccounts& chart,
                                                SignConvention convention = SignConvention::StandardBelgian) {
  WeightedSubtrees result{tb.company_id, route_masses(tb, chart, convention)};
  for (auto& weights : result.subtree_weights) {
    double total = 0.0;
    for (double m : weights) total += m;
    if (total == 0.0) continue;
    for (double& m : weights) m /= total;
  }
  return result;
}

inline std::vector<WeightedSubtrees> build_all_weighted_subtrees(
    const std::vector<TrialBalance>& balances, const ChartOfAccounts& chart,
    SignConvention convention = SignConvention::StandardBelgian) {
  std::vector<WeightedSubtrees> out;
  out.reserve(balances.size());
  for (const auto& tb : balances) out.push_back(build_weighted_subtrees(tb, chart, convention));
  return out;
}

}  // namespace ledger_emd
