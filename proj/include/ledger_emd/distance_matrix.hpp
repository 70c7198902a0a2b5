#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ledger_emd/baselines.hpp"
#include "ledger_emd/chart.hpp"
#include "ledger_emd/emd.hpp"
#include "ledger_emd/error.hpp"
#include "ledger_emd/parallel.hpp"
#include "ledger_emd/text_io.hpp"
#include "ledger_emd/weights.hpp"

namespace ledger_emd {

/// Row-major n x n matrix of doubles.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * n_, n_}; }
  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Symmetric pairwise company distances with a zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::vector<std::string> company_ids, SquareMatrix values)
      : ids_(std::move(company_ids)), values_(std::move(values)) {
    if (ids_.size() != values_.size()) {
      throw Error(Errc::length_mismatch, "distance matrix size does not match the id list");
    }
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (!index_.emplace(ids_[i], i).second) {
        throw Error(Errc::duplicate_company, "duplicate company id '" + ids_[i] + "'");
      }
    }
  }

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& company_ids() const noexcept { return ids_; }
  const SquareMatrix& values() const noexcept { return values_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }

  std::optional<std::size_t> find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(std::string_view id) const {
    if (auto i = find(id)) return *i;
    throw Error(Errc::unknown_company, "company '" + std::string(id) + "' is not in the distance matrix");
  }

  /// Restriction to the given ids, in the given order.
  DistanceMatrix subset(const std::vector<std::string>& ids) const {
    SquareMatrix sub(ids.size());
    std::vector<std::size_t> idx;
    idx.reserve(ids.size());
    for (const auto& id : ids) idx.push_back(index_of(id));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = 0; j < ids.size(); ++j) sub(i, j) = values_(idx[i], idx[j]);
    }
    return DistanceMatrix(ids, std::move(sub));
  }

  friend bool operator==(const DistanceMatrix& a, const DistanceMatrix& b) {
    return a.ids_ == b.ids_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> ids_;
  SquareMatrix values_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class MetricChoice { EmdGdm, Ygdm, Sbsd };

constexpr std::string_view metric_name(MetricChoice metric) noexcept {
  switch (metric) {
    case MetricChoice::EmdGdm: return "emd";
    case MetricChoice::Ygdm: return "ygdm";
    case MetricChoice::Sbsd: return "sbsd";
  }
  return "?";
}

inline std::optional<MetricChoice> parse_metric(std::string_view name) {
  if (name == "emd") return MetricChoice::EmdGdm;
  if (name == "ygdm") return MetricChoice::Ygdm;
  if (name == "sbsd") return MetricChoice::Sbsd;
  return std::nullopt;
}

namespace detail {

/// Fills the upper triangle with pair_distance(i, j) and mirrors it.
template <typename PairDistance>
SquareMatrix pairwise(std::size_t n, unsigned threads, PairDistance&& pair_distance) {
  SquareMatrix values(n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) values(i, j) = pair_distance(i, j);
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) values(j, i) = values(i, j);
  }
  return values;
}

inline std::vector<std::string> unique_ids(const std::vector<WeightedSubtrees>& companies) {
  std::vector<std::string> ids;
  ids.reserve(companies.size());
  for (const auto& c : companies) ids.push_back(c.company_id);
  return ids;
}

}  // namespace detail

/// All pairwise distances under the chosen metric. Rows of the upper triangle
/// are computed concurrently; each entry is a pure function of its pair, so
/// the result does not depend on the thread count.
inline DistanceMatrix distance_matrix(const std::vector<WeightedSubtrees>& companies,
                                      const ChartOfAccounts& chart, MetricChoice metric,
                                      unsigned threads = 0, const AggregationPolicy& policy = {}) {
  if (companies.empty()) throw Error(Errc::too_small, "distance matrix needs at least one company");
  auto ids = detail::unique_ids(companies);
  {
    std::unordered_map<std::string, int> seen;
    for (const auto& id : ids) {
      if (seen[id]++) throw Error(Errc::duplicate_company, "duplicate company id '" + id + "'");
    }
  }
  for (const auto& c : companies) detail::check_same_chart(c, c, chart);
  const std::size_t n = companies.size();

  SquareMatrix values;
  switch (metric) {
    case MetricChoice::EmdGdm:
      values = detail::pairwise(n, threads, [&](std::size_t i, std::size_t j) {
        return company_distance(companies[i], companies[j], chart, policy);
      });
      break;
    case MetricChoice::Sbsd:
      values = detail::pairwise(n, threads, [&](std::size_t i, std::size_t j) {
        return sbsd_distance(companies[i], companies[j]);
      });
      break;
    case MetricChoice::Ygdm: {
      // Property strings are computed once per company and kind.
      std::vector<std::array<PropertyString, 4>> strings(n);
      parallel_for(n, threads, [&](std::size_t i) {
        for (SubtreeKind kind : kAllSubtreeKinds) {
          strings[i][kind_index(kind)] = property_string(companies[i], kind, chart);
        }
      });
      values = detail::pairwise(n, threads, [&](std::size_t i, std::size_t j) {
        std::size_t total = 0;
        for (std::size_t k = 0; k < 4; ++k) total += levenshtein(strings[i][k], strings[j][k]);
        return static_cast<double>(total);
      });
      break;
    }
  }
  return DistanceMatrix(std::move(ids), std::move(values));
}

/// Symmetric matrix of i.i.d. uniform(0, 1) entries. Ranking any row of it is
/// a uniformly random ordering of the other companies, so it stands in for the
/// random method wherever a matrix is expected.
inline DistanceMatrix random_distance_matrix(std::vector<std::string> ids, std::uint64_t seed) {
  const std::size_t n = ids.size();
  SquareMatrix values(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) values(i, j) = values(j, i) = unit(rng);
  }
  return DistanceMatrix(std::move(ids), std::move(values));
}

/// CSV with ids in the first row and column, 12 significant digits per cell.
inline void write_distance_matrix(std::ostream& out, const DistanceMatrix& d) {
  out << "company_id";
  for (const auto& id : d.company_ids()) out << ',' << text::csv_field(id);
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << text::csv_field(d.company_ids()[i]);
    for (std::size_t j = 0; j < d.size(); ++j) out << ',' << text::format_double(d(i, j), 12);
    out << '\n';
  }
}

inline DistanceMatrix read_distance_matrix(std::istream& in, std::string_view source_name = "distance matrix") {
  std::string line;
  if (!text::read_line(in, line)) throw Error(Errc::malformed_input, std::string(source_name) + ": empty file");
  auto header = text::split_csv(line);
  if (!header || header->empty() || (*header)[0] != "company_id") {
    throw Error(Errc::malformed_input, std::string(source_name) + " line 1: expected 'company_id,<ids...>'");
  }
  std::vector<std::string> ids(header->begin() + 1, header->end());
  const std::size_t n = ids.size();
  SquareMatrix values(n);
  std::size_t row = 0;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = std::string(source_name) + " line " + std::to_string(line_no) + ": ";
    auto fields = text::split_csv(line);
    if (!fields || fields->size() != n + 1) {
      throw Error(Errc::malformed_input, where + "expected " + std::to_string(n + 1) + " fields");
    }
    if (row >= n) throw Error(Errc::malformed_input, where + "more rows than columns");
    if ((*fields)[0] != ids[row]) {
      throw Error(Errc::malformed_input, where + "row id '" + (*fields)[0] + "' does not match column id '" +
                                             ids[row] + "'");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const auto v = text::parse_double((*fields)[j + 1]);
      if (!v || *v < 0) throw Error(Errc::bad_value, where + "invalid distance '" + (*fields)[j + 1] + "'");
      values(row, j) = *v;
    }
    ++row;
  }
  if (row != n) throw Error(Errc::malformed_input, std::string(source_name) + ": matrix is not square");
  for (std::size_t i = 0; i < n; ++i) {
    if (values(i, i) != 0.0) throw Error(Errc::bad_value, std::string(source_name) + ": nonzero diagonal at '" + ids[i] + "'");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (values(i, j) != values(j, i)) {
        throw Error(Errc::bad_value, std::string(source_name) + ": not symmetric at ('" + ids[i] + "', '" + ids[j] + "')");
      }
    }
  }
  return DistanceMatrix(std::move(ids), std::move(values));
}

}  // namespace ledger_emd
