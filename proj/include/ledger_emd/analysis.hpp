#pragma once

// Nearest-neighbour industry evaluation: for each eligible company, how well
// do the NACE codes of its k nearest neighbours under a metric overlap with
// its own?

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ledger_emd/baselines.hpp"
#include "ledger_emd/distance_matrix.hpp"
#include "ledger_emd/error.hpp"
#include "ledger_emd/lof.hpp"
#include "ledger_emd/parallel.hpp"
#include "ledger_emd/text_io.hpp"
#include "ledger_emd/trial_balance.hpp"
#include "ledger_emd/weights.hpp"

namespace ledger_emd {

using NaceSet = std::set<std::string>;

/// |a ∩ b| / |a ∪ b|, and 0 when both are empty.
inline double jaccard(const NaceSet& a, const NaceSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

/// Indices of the k rows closest to `query`, nearest first. Equal distances
/// are ordered by ascending company id.
inline std::vector<std::size_t> nearest_indices(const DistanceMatrix& d, std::size_t query, std::size_t k) {
  const std::size_t n = d.size();
  if (k == 0 || k >= n) {
    throw Error(Errc::invalid_argument, "k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n - 1) +
                                            "] for a population of " + std::to_string(n));
  }
  const auto& ids = d.company_ids();
  std::vector<std::size_t> order;
  order.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i != query) order.push_back(i);
  }
  const auto closer = [&](std::size_t a, std::size_t b) {
    const double da = d(query, a);
    const double db = d(query, b);
    if (da != db) return da < db;
    return ids[a] < ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
  order.resize(k);
  return order;
}

inline std::vector<std::string> knn_query(const DistanceMatrix& d, std::string_view query, std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i : nearest_indices(d, d.index_of(query), k)) out.push_back(d.company_ids()[i]);
  return out;
}

struct EligibilityParams {
  std::size_t q = 20;  ///< minimum number of companies sharing a code
  double r = 0.2;      ///< minimum Jaccard similarity of every sharing company
};

/// Companies with at least q other companies sharing one or more NACE codes,
/// where every such sharing company has Jaccard similarity >= r.
inline std::set<std::string> eligible_companies(const std::vector<CompanyMeta>& meta,
                                                const EligibilityParams& params = {}) {
  std::set<std::string> eligible;
  for (std::size_t s = 0; s < meta.size(); ++s) {
    const auto& own = meta[s].nace_codes;
    if (own.empty()) continue;
    std::size_t sharers = 0;
    bool all_similar = true;
    for (std::size_t o = 0; o < meta.size() && all_similar; ++o) {
      if (o == s) continue;
      const double similarity = jaccard(own, meta[o].nace_codes);
      if (similarity == 0.0) continue;  // no code in common
      ++sharers;
      all_similar = similarity >= params.r;
    }
    if (all_similar && sharers >= params.q) eligible.insert(meta[s].company_id);
  }
  return eligible;
}

namespace detail {

inline std::unordered_map<std::string, const NaceSet*> nace_lookup(const std::vector<CompanyMeta>& meta) {
  std::unordered_map<std::string, const NaceSet*> lookup;
  for (const auto& m : meta) lookup.emplace(m.company_id, &m.nace_codes);
  return lookup;
}

inline const NaceSet& nace_of(const std::unordered_map<std::string, const NaceSet*>& lookup,
                              const std::string& id) {
  static const NaceSet none;
  const auto it = lookup.find(id);
  return it == lookup.end() ? none : *it->second;
}

}  // namespace detail

/// Mean over s in `subset` of the mean Jaccard similarity between s and its
/// k nearest neighbours in `d`. Neighbours are searched in the full matrix.
inline double jaccard_score(const std::vector<CompanyMeta>& meta, const DistanceMatrix& d,
                            const std::set<std::string>& subset, std::size_t k) {
  if (subset.empty()) throw Error(Errc::too_small, "jaccard_score needs a non-empty company set");
  const auto lookup = detail::nace_lookup(meta);
  double score = 0.0;
  for (const auto& s : subset) {
    if (!lookup.count(s)) throw Error(Errc::unknown_company, "no NACE metadata for '" + s + "'");
    const auto& own = detail::nace_of(lookup, s);
    double z = 0.0;
    for (const auto& p : knn_query(d, s, k)) z += jaccard(own, detail::nace_of(lookup, p));
    score += z / static_cast<double>(k);
  }
  return score / static_cast<double>(subset.size());
}

/// Expected mean Jaccard similarity when each company in `subset` picks a
/// neighbour uniformly at random from the rest of `population`.
inline double expected_random_jaccard(const std::vector<CompanyMeta>& meta,
                                      const std::vector<std::string>& population,
                                      const std::set<std::string>& subset) {
  if (subset.empty() || population.size() < 2) return 0.0;
  const auto lookup = detail::nace_lookup(meta);
  double total = 0.0;
  for (const auto& s : subset) {
    const auto& own = detail::nace_of(lookup, s);
    double sum = 0.0;
    for (const auto& p : population) {
      if (p != s) sum += jaccard(own, detail::nace_of(lookup, p));
    }
    total += sum / static_cast<double>(population.size() - 1);
  }
  return total / static_cast<double>(subset.size());
}

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

enum class EvalMethod { EmdGdm, Ygdm, Sbsd, Random };

inline constexpr std::array<EvalMethod, 4> kAllEvalMethods{EvalMethod::EmdGdm, EvalMethod::Ygdm, EvalMethod::Sbsd,
                                                           EvalMethod::Random};

constexpr std::string_view method_name(EvalMethod method) noexcept {
  switch (method) {
    case EvalMethod::EmdGdm: return "emd";
    case EvalMethod::Ygdm: return "ygdm";
    case EvalMethod::Sbsd: return "sbsd";
    case EvalMethod::Random: return "random";
  }
  return "?";
}

struct Experiment1Params {
  EligibilityParams eligibility;
  std::size_t k_max = 20;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::vector<EvalMethod> methods{kAllEvalMethods.begin(), kAllEvalMethods.end()};
};

struct Experiment1Row {
  EvalMethod method;
  std::size_t k;
  double mean_jaccard;
};

struct Experiment1Result {
  std::vector<std::string> population;
  std::set<std::string> eligible;
  std::vector<Experiment1Row> rows;

  double value(EvalMethod method, std::size_t k) const {
    for (const auto& row : rows) {
      if (row.method == method && row.k == k) return row.mean_jaccard;
    }
    throw Error(Errc::invalid_argument, "no result for " + std::string(method_name(method)) + " at k=" +
                                            std::to_string(k));
  }
};

namespace detail {

/// Per-query seed for the random method: splitmix64 of (seed, query index).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Means for k = 1..k_max, given each subset member's neighbour list of
/// length k_max. knn lists for smaller k are prefixes of the k_max list, so
/// one pass over prefix sums reproduces the per-k computation.
inline std::vector<double> prefix_means(const std::vector<std::vector<double>>& similarities, std::size_t k_max) {
  std::vector<double> means(k_max, 0.0);
  for (const auto& row : similarities) {
    double z = 0.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
      z += row[k - 1];
      means[k - 1] += z / static_cast<double>(k);
    }
  }
  for (double& m : means) m /= static_cast<double>(similarities.size());
  return means;
}

}  // namespace detail

/// Mean neighbour Jaccard for k = 1..k_max under one distance matrix.
inline std::vector<double> neighbour_jaccard_curve(const std::vector<CompanyMeta>& meta, const DistanceMatrix& d,
                                                   const std::set<std::string>& subset, std::size_t k_max,
                                                   unsigned threads = 0) {
  if (subset.empty()) throw Error(Errc::too_small, "no eligible companies to score");
  const auto lookup = detail::nace_lookup(meta);
  const std::vector<std::string> members(subset.begin(), subset.end());
  std::vector<std::vector<double>> similarities(members.size());
  parallel_for(members.size(), threads, [&](std::size_t m) {
    const auto& own = detail::nace_of(lookup, members[m]);
    for (std::size_t i : nearest_indices(d, d.index_of(members[m]), k_max)) {
      similarities[m].push_back(jaccard(own, detail::nace_of(lookup, d.company_ids()[i])));
    }
  });
  return detail::prefix_means(similarities, k_max);
}

/// Same curve for the random method, one seeded ranking per query.
inline std::vector<double> random_jaccard_curve(const std::vector<CompanyMeta>& meta,
                                                const std::vector<std::string>& population,
                                                const std::set<std::string>& subset, std::size_t k_max,
                                                std::uint64_t seed) {
  if (subset.empty()) throw Error(Errc::too_small, "no eligible companies to score");
  if (k_max == 0 || k_max >= population.size()) {
    throw Error(Errc::invalid_argument, "k_max must lie in [1, population - 1]");
  }
  const auto lookup = detail::nace_lookup(meta);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < population.size(); ++i) position.emplace(population[i], i);
  std::vector<std::vector<double>> similarities;
  for (const auto& s : subset) {
    const auto it = position.find(s);
    if (it == position.end()) throw Error(Errc::unknown_company, "company '" + s + "' is not in the population");
    const auto ranking = random_ranking(population, s, detail::mix_seed(seed, it->second));
    const auto& own = detail::nace_of(lookup, s);
    auto& row = similarities.emplace_back();
    for (std::size_t k = 0; k < k_max; ++k) row.push_back(jaccard(own, detail::nace_of(lookup, ranking[k])));
  }
  return detail::prefix_means(similarities, k_max);
}

/// Runs the nearest-neighbour evaluation for every requested method and
/// k = 1..k_max. Companies without metadata take part as neighbours with an
/// empty code set but are never eligible.
inline Experiment1Result experiment1(const std::vector<WeightedSubtrees>& companies,
                                     const std::vector<CompanyMeta>& meta, const ChartOfAccounts& chart,
                                     const Experiment1Params& params) {
  Experiment1Result result;
  result.population = detail::unique_ids(companies);

  std::vector<CompanyMeta> population_meta;
  {
    const auto lookup = detail::nace_lookup(meta);
    for (const auto& id : result.population) {
      if (auto it = lookup.find(id); it != lookup.end()) population_meta.push_back({id, *it->second});
    }
  }
  result.eligible = eligible_companies(population_meta, params.eligibility);
  if (result.eligible.empty()) {
    throw Error(Errc::too_small, "no eligible companies: 0 of " + std::to_string(population_meta.size()) +
                                     " with metadata pass q=" + std::to_string(params.eligibility.q) +
                                     ", r=" + text::format_double(params.eligibility.r));
  }

  for (EvalMethod method : params.methods) {
    std::vector<double> curve;
    if (method == EvalMethod::Random) {
      curve = random_jaccard_curve(population_meta, result.population, result.eligible, params.k_max, params.seed);
    } else {
      const MetricChoice metric = method == EvalMethod::EmdGdm ? MetricChoice::EmdGdm
                                  : method == EvalMethod::Ygdm ? MetricChoice::Ygdm
                                                               : MetricChoice::Sbsd;
      const auto d = distance_matrix(companies, chart, metric, params.threads);
      curve = neighbour_jaccard_curve(population_meta, d, result.eligible, params.k_max, params.threads);
    }
    for (std::size_t k = 1; k <= params.k_max; ++k) result.rows.push_back({method, k, curve[k - 1]});
  }
  return result;
}

/// `metric,k,mean_jaccard`
inline void write_experiment1(std::ostream& out, const Experiment1Result& result) {
  out << "metric,k,mean_jaccard\n";
  for (const auto& row : result.rows) {
    out << method_name(row.method) << ',' << row.k << ',' << text::format_double(row.mean_jaccard, 12) << '\n';
  }
}

}  // namespace ledger_emd
