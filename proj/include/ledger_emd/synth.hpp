#pragma once

// Seeded synthetic charts and company populations.
//
// Every industry books on a few common accounts plus accounts specific to its
// family. Industries come in pairs ("families") that book on the same
// accounts with different value distributions, so structure alone cannot
// tell the two apart. Each company perturbs its industry archetype in three ways, all
// controlled by the noise concentration:
//   - masses are drawn from a Dirichlet centred on the archetype weights;
//   - each archetype account is, with probability kRelocationScale /
//     (kRelocationScale + noise), booked on a nearby account of the same
//     nature instead (a sibling, parent or child in the chart);
//   - a few stray bookings land on arbitrary accounts of the right nature.
// As noise grows all three vanish and companies of one industry
// converge to the archetype.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ledger_emd/chart.hpp"
#include "ledger_emd/error.hpp"
#include "ledger_emd/trial_balance.hpp"
#include "ledger_emd/weights.hpp"

namespace ledger_emd {

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_companies = 1000;
  std::size_t n_industries = 12;
  double noise = 50.0;
  std::size_t min_codes = 1;
  std::size_t max_codes = 4;
};

struct Population {
  std::vector<TrialBalance> balances;
  std::vector<CompanyMeta> meta;
  std::vector<std::size_t> industry;  ///< industry index per company
  std::vector<std::string> industry_codes;  ///< primary NACE code per industry
};

/// NACE code held by companies of every industry (business management consultancy).
inline constexpr std::string_view kSharedNaceCode = "70.220";

/// Balanced chart: each side is a complete `branching`-ary tree with `depth`
/// levels below its root, 2 * (1 + b + ... + b^depth) nodes in total. Sibling
/// codes are assigned in a seeded order so that document order and code order
/// differ.
inline ChartOfAccounts generate_chart(std::uint64_t seed, std::size_t depth, std::size_t branching) {
  if (depth < 1 || branching < 1) {
    throw Error(Errc::invalid_argument, "chart depth and branching must be at least 1");
  }
  if (branching > 99) throw Error(Errc::invalid_argument, "branching above 99 is not supported");
  std::mt19937_64 rng(seed);
  const int width = branching > 9 ? 2 : 1;

  std::vector<AccountSpec> specs;
  for (auto [side, root_code] : {std::pair{Side::Active, "1"}, std::pair{Side::Passive, "2"}}) {
    specs.push_back({root_code, side == Side::Active ? "Assets" : "Equity and liabilities", std::nullopt, side});
    std::vector<std::string> level{root_code};
    for (std::size_t d = 0; d < depth; ++d) {
      std::vector<std::string> next;
      for (const auto& parent : level) {
        std::vector<std::size_t> digits(branching);
        for (std::size_t i = 0; i < branching; ++i) digits[i] = i + 1;
        std::shuffle(digits.begin(), digits.end(), rng);
        for (std::size_t digit : digits) {
          std::string suffix = std::to_string(digit);
          if (static_cast<int>(suffix.size()) < width) suffix.insert(0, "0");
          std::string code = parent + suffix;
          specs.push_back({code, "Account " + code, parent, side});
          next.push_back(std::move(code));
        }
      }
      level = std::move(next);
    }
  }
  return ChartOfAccounts::build(specs);
}

namespace detail {

inline constexpr double kRelocationScale = 50.0;
inline constexpr std::size_t kCommonAccounts = 3;
inline constexpr double kIndustryConcentration = 30.0;
inline constexpr double kSpecificShare = 0.4;  ///< relative archetype weight of family-specific accounts
inline constexpr double kStrayAccounts = 3.0;  ///< mean stray count per kind, scaled by the relocation rate
inline constexpr double kStrayWeight = 0.08;   ///< Dirichlet share of one stray booking

inline const std::array<std::string_view, 12> kIndustryNace{
    "68.203", "41.201", "47.111", "56.101", "62.010", "69.201",
    "86.210", "10.711", "45.113", "49.410", "43.221", "71.121"};

/// Primary code of industry i; beyond the fixed list, synthetic codes with
/// distinct four-digit prefixes.
inline std::string industry_code(std::size_t i) {
  if (i < kIndustryNace.size()) return std::string(kIndustryNace[i]);
  const std::size_t k = i - kIndustryNace.size();
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%02zu.%02zu0", 90 + k / 100 % 10, k % 100);
  return buffer;
}

/// Related codes: same four-digit class, different final digit.
inline std::vector<std::string> secondary_codes(const std::string& primary) {
  std::vector<std::string> out;
  const char last = primary.back();
  for (int step = 1; step <= 5; ++step) {
    std::string code = primary;
    code.back() = static_cast<char>('0' + (last - '0' + step) % 10);
    out.push_back(std::move(code));
  }
  return out;
}

template <typename Rng>
std::vector<NodeId> sample_without_replacement(const std::vector<NodeId>& pool, std::size_t count, Rng& rng) {
  std::vector<NodeId> copy = pool;
  std::shuffle(copy.begin(), copy.end(), rng);
  copy.resize(std::min(count, copy.size()));
  std::sort(copy.begin(), copy.end());
  return copy;
}

struct KindArchetype {
  std::vector<NodeId> nodes;
  std::vector<double> weights;
};

}  // namespace detail

/// Draws trial balances and NACE metadata for cfg.n_companies companies over
/// the chart. Company i belongs to industry i % n_industries.
inline Population generate_population(const ChartOfAccounts& chart, const SynthConfig& cfg) {
  if (cfg.n_companies == 0 || cfg.n_industries == 0 || !(cfg.noise > 0.0) || cfg.min_codes == 0 ||
      cfg.max_codes < cfg.min_codes) {
    throw Error(Errc::invalid_argument, "synthetic config needs positive counts, noise > 0 and 1 <= min_codes <= max_codes");
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Each account is either of normal nature (debit on the active side, credit
  // on the passive side) or a contra account; a node never mixes the two, so
  // one booked value always lands in a single sub-tree.
  std::array<std::vector<NodeId>, 4> pool;
  for (Side side : {Side::Active, Side::Passive}) {
    std::vector<NodeId> non_root;
    for (const auto& node : chart.nodes()) {
      if (node.side == side && node.parent) non_root.push_back(node.id);
    }
    const auto normal = side == Side::Active ? SubtreeKind::DebitActive : SubtreeKind::CreditPassive;
    const auto contra = side == Side::Active ? SubtreeKind::CreditActive : SubtreeKind::DebitPassive;
    if (non_root.size() < 2) {
      pool[kind_index(normal)] = non_root.empty() ? std::vector<NodeId>{chart.root(side)} : non_root;
      continue;
    }
    for (NodeId id : non_root) pool[kind_index(unit(rng) < 0.3 ? contra : normal)].push_back(id);
    if (pool[kind_index(contra)].empty()) {
      pool[kind_index(contra)].push_back(pool[kind_index(normal)].back());
      pool[kind_index(normal)].pop_back();
    }
    if (pool[kind_index(normal)].empty()) {
      pool[kind_index(normal)].push_back(pool[kind_index(contra)].back());
      pool[kind_index(contra)].pop_back();
    }
  }

  // Relocation targets: same-nature accounts within two edges.
  std::vector<std::vector<NodeId>> nearby(chart.size());
  for (const auto& kind_pool : pool) {
    for (NodeId a : kind_pool) {
      for (NodeId b : kind_pool) {
        if (a != b && chart.node(a).side == chart.node(b).side && chart.path_length(a, b) <= 2) {
          nearby[a].push_back(b);
        }
      }
    }
  }

  // Accounts every company books on (cash, equity, payables, ...) plus a few
  // family-specific ones per normal kind; contra kinds are family-specific.
  std::array<std::vector<NodeId>, 4> common;
  std::array<std::vector<NodeId>, 4> specific_pool = pool;
  for (SubtreeKind kind : {SubtreeKind::DebitActive, SubtreeKind::CreditPassive}) {
    auto& kind_pool = specific_pool[kind_index(kind)];
    if (kind_pool.size() < 4) continue;
    common[kind_index(kind)] = detail::sample_without_replacement(kind_pool, detail::kCommonAccounts, rng);
    std::erase_if(kind_pool, [&](NodeId id) {
      return std::binary_search(common[kind_index(kind)].begin(), common[kind_index(kind)].end(), id);
    });
  }

  const std::size_t n_families = (cfg.n_industries + 1) / 2;
  std::vector<std::array<std::vector<NodeId>, 4>> family_support(n_families);
  for (auto& support : family_support) {
    for (SubtreeKind kind : kAllSubtreeKinds) {
      const auto& kind_pool = specific_pool[kind_index(kind)];
      if (kind_pool.empty()) continue;
      const bool contra = kind == SubtreeKind::CreditActive || kind == SubtreeKind::DebitPassive;
      if (contra && unit(rng) < 0.25) continue;  // this family books nothing here
      const std::size_t lo = contra ? 1 : 2;
      const std::size_t hi = std::max(lo, std::min<std::size_t>(contra ? 3 : 4, kind_pool.size()));
      const std::size_t count = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
      auto nodes = detail::sample_without_replacement(kind_pool, count, rng);
      nodes.insert(nodes.end(), common[kind_index(kind)].begin(), common[kind_index(kind)].end());
      std::sort(nodes.begin(), nodes.end());
      support[kind_index(kind)] = std::move(nodes);
    }
  }

  // Family base weights, then one concentrated draw around them per industry:
  // the two industries of a family differ only in how mass is spread.
  std::gamma_distribution<double> flat(1.0, 1.0);
  std::vector<std::array<std::vector<double>, 4>> family_base(n_families);
  for (std::size_t f = 0; f < n_families; ++f) {
    for (SubtreeKind kind : kAllSubtreeKinds) {
      const auto& shared = common[kind_index(kind)];
      for (NodeId node : family_support[f][kind_index(kind)]) {
        const bool is_common = std::binary_search(shared.begin(), shared.end(), node);
        family_base[f][kind_index(kind)].push_back((flat(rng) + 0.05) * (is_common ? 1.0 : detail::kSpecificShare));
      }
    }
  }
  std::vector<std::array<detail::KindArchetype, 4>> archetypes(cfg.n_industries);
  for (std::size_t i = 0; i < cfg.n_industries; ++i) {
    for (SubtreeKind kind : kAllSubtreeKinds) {
      auto& arch = archetypes[i][kind_index(kind)];
      arch.nodes = family_support[i / 2][kind_index(kind)];
      const auto& base = family_base[i / 2][kind_index(kind)];
      double base_total = 0.0;
      for (double b : base) base_total += b;
      double total = 0.0;
      for (double b : base) {
        arch.weights.push_back(
            std::gamma_distribution<double>(detail::kIndustryConcentration * b / base_total, 1.0)(rng) + 1e-3);
        total += arch.weights.back();
      }
      for (double& w : arch.weights) w /= total;
    }
  }

  Population population;
  for (std::size_t i = 0; i < cfg.n_industries; ++i) population.industry_codes.push_back(detail::industry_code(i));

  const double relocation = detail::kRelocationScale / (detail::kRelocationScale + cfg.noise);
  const int id_width = std::max<int>(4, static_cast<int>(std::to_string(cfg.n_companies).size()));
  std::lognormal_distribution<double> scale(std::log(1e6), 1.0);

  for (std::size_t c = 0; c < cfg.n_companies; ++c) {
    const std::size_t industry = c % cfg.n_industries;
    std::string id = std::to_string(c + 1);
    id.insert(0, static_cast<std::size_t>(std::max(0, id_width - static_cast<int>(id.size()))), '0');
    id.insert(0, "C");

    const double side_total = scale(rng);
    const std::array<double, 4> kind_total{side_total, side_total * std::uniform_real_distribution<double>(0.1, 0.4)(rng),
                                           side_total, side_total * std::uniform_real_distribution<double>(0.02, 0.15)(rng)};
    const std::array<double, 4> kind_sign{1.0, -1.0, -1.0, 1.0};

    TrialBalance tb{id, {}};
    for (SubtreeKind kind : kAllSubtreeKinds) {
      const auto& arch = archetypes[industry][kind_index(kind)];
      if (arch.nodes.empty()) continue;
      std::vector<double> mass(chart.size(), 0.0);
      double total = 0.0;
      for (std::size_t j = 0; j < arch.nodes.size(); ++j) {
        NodeId target = arch.nodes[j];
        if (unit(rng) < relocation && !nearby[target].empty()) {
          target = nearby[target][std::uniform_int_distribution<std::size_t>(0, nearby[target].size() - 1)(rng)];
        }
        const double m = std::gamma_distribution<double>(cfg.noise * arch.weights[j], 1.0)(rng);
        mass[target] += m;
        total += m;
      }
      // Idiosyncratic bookings on arbitrary accounts of the same nature.
      const auto& kind_pool = pool[kind_index(kind)];
      const int strays = std::poisson_distribution<int>(detail::kStrayAccounts * relocation)(rng);
      for (int e = 0; e < strays; ++e) {
        const NodeId target = kind_pool[std::uniform_int_distribution<std::size_t>(0, kind_pool.size() - 1)(rng)];
        const double m = std::gamma_distribution<double>(cfg.noise * detail::kStrayWeight, 1.0)(rng);
        mass[target] += m;
        total += m;
      }
      if (!(total > 0.0)) continue;
      for (std::size_t v = 0; v < mass.size(); ++v) {
        if (mass[v] == 0.0) continue;
        const double value = std::round(mass[v] / total * kind_total[kind_index(kind)] * 100.0) / 100.0;
        if (value != 0.0) tb.values[chart.node(static_cast<NodeId>(v)).code] = kind_sign[kind_index(kind)] * value;
      }
    }

    CompanyMeta meta{id, {population.industry_codes[industry]}};
    const auto secondary = detail::secondary_codes(population.industry_codes[industry]);
    const std::size_t extras =
        std::uniform_int_distribution<std::size_t>(cfg.min_codes - 1, cfg.max_codes - 1)(rng);
    for (std::size_t e = 0; e < extras; ++e) {
      if (unit(rng) < 0.2) {
        meta.nace_codes.emplace(kSharedNaceCode);
      } else {
        meta.nace_codes.insert(secondary[std::uniform_int_distribution<std::size_t>(0, secondary.size() - 1)(rng)]);
      }
    }

    population.balances.push_back(std::move(tb));
    population.meta.push_back(std::move(meta));
    population.industry.push_back(industry);
  }
  return population;
}

}  // namespace ledger_emd
