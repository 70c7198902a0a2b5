#pragma once

// Local outlier factor over a precomputed distance matrix.
//
//   k-distance(p)    distance to the k-th nearest other point
//   N_k(p)           every other point within k-distance(p); ties are all kept
//   reach(p, o)      max(k-distance(o), d(p, o))
//   lrd(p)           |N_k(p)| / sum over o in N_k(p) of reach(p, o)
//   LOF(p)           mean over o in N_k(p) of lrd(o) / lrd(p)
//
// Inliers score close to 1; points in sparser regions than their neighbours
// score well above 1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "ledger_emd/distance_matrix.hpp"
#include "ledger_emd/error.hpp"
#include "ledger_emd/text_io.hpp"

namespace ledger_emd {

struct LofParams {
  std::size_t k_neighbors = 5;
  double threshold = 1.5;
};

struct LofScores {
  std::vector<std::string> company_ids;
  std::vector<double> scores;
  std::vector<bool> is_outlier;

  double score_of(std::string_view id) const {
    for (std::size_t i = 0; i < company_ids.size(); ++i) {
      if (company_ids[i] == id) return scores[i];
    }
    throw Error(Errc::unknown_company, "no LOF score for '" + std::string(id) + "'");
  }
};

inline LofScores lof_scores(const DistanceMatrix& d, const LofParams& params = {}) {
  const std::size_t n = d.size();
  const std::size_t k = params.k_neighbors;
  if (k == 0) throw Error(Errc::invalid_argument, "LOF needs k_neighbors >= 1");
  if (n <= k) {
    throw Error(Errc::too_small, "LOF with k=" + std::to_string(k) + " needs more than " + std::to_string(k) +
                                     " companies, got " + std::to_string(n));
  }

  std::vector<double> k_distance(n);
  std::vector<std::vector<std::size_t>> neighborhood(n);
  std::vector<double> others;
  others.reserve(n - 1);
  for (std::size_t p = 0; p < n; ++p) {
    others.clear();
    for (std::size_t o = 0; o < n; ++o) {
      if (o != p) others.push_back(d(p, o));
    }
    std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k - 1), others.end());
    k_distance[p] = others[k - 1];
    for (std::size_t o = 0; o < n; ++o) {
      if (o != p && d(p, o) <= k_distance[p]) neighborhood[p].push_back(o);
    }
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lrd(n);
  for (std::size_t p = 0; p < n; ++p) {
    double reach_sum = 0.0;
    for (std::size_t o : neighborhood[p]) reach_sum += std::max(k_distance[o], d(p, o));
    lrd[p] = reach_sum > 0.0 ? static_cast<double>(neighborhood[p].size()) / reach_sum : inf;
  }

  LofScores out;
  out.company_ids = d.company_ids();
  out.scores.resize(n);
  out.is_outlier.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    double ratio_sum = 0.0;
    for (std::size_t o : neighborhood[p]) {
      // Duplicate points give an infinite density; equal infinities count as a ratio of 1.
      if (std::isinf(lrd[p])) {
        ratio_sum += std::isinf(lrd[o]) ? 1.0 : 0.0;
      } else {
        ratio_sum += lrd[o] / lrd[p];
      }
    }
    out.scores[p] = ratio_sum / static_cast<double>(neighborhood[p].size());
    out.is_outlier[p] = out.scores[p] > params.threshold;
  }
  return out;
}

/// `company_id,lof_score,is_outlier`
inline void write_lof_scores(std::ostream& out, const LofScores& lof) {
  out << "company_id,lof_score,is_outlier\n";
  for (std::size_t i = 0; i < lof.company_ids.size(); ++i) {
    out << text::csv_field(lof.company_ids[i]) << ',' << text::format_double(lof.scores[i], 12) << ','
        << (lof.is_outlier[i] ? "true" : "false") << '\n';
  }
}

/// Ids flagged as outliers in a LOF CSV.
inline std::vector<std::string> read_lof_outliers(std::istream& in, std::string_view source_name = "LOF scores") {
  std::string line;
  if (!text::read_line(in, line) || text::trim(line) != "company_id,lof_score,is_outlier") {
    throw Error(Errc::malformed_input, std::string(source_name) + " line 1: expected 'company_id,lof_score,is_outlier'");
  }
  std::vector<std::string> ids;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto fields = text::split_csv(line);
    if (!fields || fields->size() != 3) {
      throw Error(Errc::malformed_input, std::string(source_name) + " line " + std::to_string(line_no) +
                                             ": expected 3 fields");
    }
    if ((*fields)[2] == "true") ids.push_back((*fields)[0]);
  }
  return ids;
}

}  // namespace ledger_emd
