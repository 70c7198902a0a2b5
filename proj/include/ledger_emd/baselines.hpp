#pragma once

// Comparison methods that see only half of the statement:
//  - Y-GDM: structure only. Present accounts are serialized into a property
//    string and compared by token-level Levenshtein distance.
//  - SBSD: values only. L1 distance between the weight vectors.
//  - Random: a seeded uniform ranking of the other companies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ledger_emd/chart.hpp"
#include "ledger_emd/error.hpp"
#include "ledger_emd/weights.hpp"

namespace ledger_emd {

/// Nested-parenthesis pre-order serialization of a set of present accounts.
/// `tokens` holds one entry per parenthesis or account: kOpen, kClose, or a
/// node id. `text` is the human-readable form, e.g. "(r(A)(B))".
struct PropertyString {
  static constexpr std::int32_t kOpen = -1;
  static constexpr std::int32_t kClose = -2;

  std::string text;
  std::vector<std::int32_t> tokens;

  bool empty() const noexcept { return tokens.empty(); }
};

/// Serializes the nodes with weight > 0 in `kind`, plus their ancestors up to
/// the kind's root. Children are visited in ascending code order; weights
/// themselves are discarded.
inline PropertyString property_string(const WeightedSubtrees& ws, SubtreeKind kind,
                                      const ChartOfAccounts& chart) {
  const auto& weights = ws[kind];
  if (weights.size() != chart.size()) {
    throw Error(Errc::chart_mismatch, "company '" + ws.company_id + "' does not match the chart");
  }
  std::vector<char> present(chart.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) continue;
    any = true;
    for (std::optional<NodeId> cur = static_cast<NodeId>(i); cur && !present[*cur];
         cur = chart.node(*cur).parent) {
      present[*cur] = 1;
    }
  }
  PropertyString out;
  if (!any) return out;

  // Iterative pre-order; a negative stack entry closes the node (~id).
  std::vector<std::int64_t> stack{static_cast<std::int64_t>(chart.root(kind_side(kind)))};
  while (!stack.empty()) {
    const std::int64_t top = stack.back();
    stack.pop_back();
    if (top < 0) {
      out.text.push_back(')');
      out.tokens.push_back(PropertyString::kClose);
      continue;
    }
    const auto id = static_cast<NodeId>(top);
    out.text.push_back('(');
    out.text += chart.node(id).code;
    out.tokens.push_back(PropertyString::kOpen);
    out.tokens.push_back(static_cast<std::int32_t>(id));
    stack.push_back(~top);
    const auto& kids = chart.children(id);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      if (present[*it]) stack.push_back(static_cast<std::int64_t>(*it));
    }
  }
  return out;
}

/// Minimum number of single-element insertions, deletions and substitutions
/// turning `a` into `b`. Works on any random-access ranges with comparable
/// elements (characters, property-string tokens, ...).
template <typename RangeA, typename RangeB>
std::size_t levenshtein(const RangeA& a, const RangeB& b) {
  const std::size_t n = std::size(a);
  const std::size_t m = std::size(b);
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  auto ai = std::begin(a);
  for (std::size_t i = 1; i <= n; ++i, ++ai) {
    cur[0] = i;
    auto bj = std::begin(b);
    for (std::size_t j = 1; j <= m; ++j, ++bj) {
      const std::size_t substitute = prev[j - 1] + (*ai == *bj ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

inline std::size_t levenshtein(const PropertyString& a, const PropertyString& b) {
  return levenshtein(a.tokens, b.tokens);
}

/// Sum over the four kinds of the token Levenshtein distance between the
/// companies' property strings.
inline double ygdm_distance(const WeightedSubtrees& a, const WeightedSubtrees& b, const ChartOfAccounts& chart) {
  std::size_t total = 0;
  for (SubtreeKind kind : kAllSubtreeKinds) {
    total += levenshtein(property_string(a, kind, chart), property_string(b, kind, chart));
  }
  return static_cast<double>(total);
}

/// Sum over the four kinds of sum_i |w_a(i) - w_b(i)|.
inline double sbsd_distance(const WeightedSubtrees& a, const WeightedSubtrees& b) {
  double total = 0.0;
  for (SubtreeKind kind : kAllSubtreeKinds) {
    const auto& wa = a[kind];
    const auto& wb = b[kind];
    if (wa.size() != wb.size()) {
      throw Error(Errc::length_mismatch, "companies '" + a.company_id + "' and '" + b.company_id +
                                             "' have weight vectors of different length");
    }
    for (std::size_t i = 0; i < wa.size(); ++i) total += std::abs(wa[i] - wb[i]);
  }
  return total;
}

/// A uniformly random ordering of every company except `query`, fixed by the seed.
inline std::vector<std::string> random_ranking(const std::vector<std::string>& companies,
                                               const std::string& query, std::uint64_t seed) {
  std::vector<std::string> others;
  others.reserve(companies.size());
  bool found = false;
  for (const auto& id : companies) {
    if (id == query) {
      found = true;
    } else {
      others.push_back(id);
    }
  }
  if (!found) throw Error(Errc::unknown_company, "query company '" + query + "' is not in the population");
  std::mt19937_64 rng(seed);
  std::shuffle(others.begin(), others.end(), rng);
  return others;
}

}  // namespace ledger_emd
