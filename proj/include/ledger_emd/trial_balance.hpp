#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ledger_emd/chart.hpp"
#include "ledger_emd/error.hpp"
#include "ledger_emd/text_io.hpp"

namespace ledger_emd {

/// One company's booked values, keyed by account code.
struct TrialBalance {
  std::string company_id;
  std::map<std::string, double> values;
};

/// A company and the set of NACE industry codes it is registered under.
struct CompanyMeta {
  std::string company_id;
  std::set<std::string> nace_codes;
};

namespace detail {

inline void expect_header(std::istream& in, std::string_view expected, std::string_view what) {
  std::string line;
  if (!text::read_line(in, line)) {
    throw Error(Errc::malformed_input, std::string(what) + ": missing header line");
  }
  // Tolerate a UTF-8 byte-order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (text::trim(line) != expected) {
    throw Error(Errc::malformed_input, std::string(what) + " line 1: expected header '" +
                                           std::string(expected) + "', got '" + line + "'");
  }
}

inline std::string at_line(std::string_view what, std::size_t line_no) {
  return std::string(what) + " line " + std::to_string(line_no) + ": ";
}

}  // namespace detail

/// Reads `company_id,account_code,value` rows. Companies are returned in order
/// of first appearance; every code must exist in the chart.
inline std::vector<TrialBalance> parse_trial_balance(std::istream& in, const ChartOfAccounts& chart,
                                                     std::string_view source_name = "trial balance") {
  detail::expect_header(in, "company_id,account_code,value", source_name);

  std::vector<TrialBalance> balances;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto where = detail::at_line(source_name, line_no);
    auto fields = text::split_csv(line);
    if (!fields || fields->size() != 3) {
      throw Error(Errc::malformed_input, where + "expected 3 fields");
    }
    auto& company = (*fields)[0];
    auto& code = (*fields)[1];
    if (company.empty()) throw Error(Errc::malformed_input, where + "empty company_id");
    if (!chart.find(code)) {
      throw Error(Errc::unknown_code, where + "unknown account code '" + code + "'");
    }
    const auto value = text::parse_double((*fields)[2]);
    if (!value) {
      throw Error(Errc::bad_value, where + "value '" + (*fields)[2] + "' is not a finite number");
    }
    auto [it, inserted] = index.try_emplace(company, balances.size());
    if (inserted) balances.push_back(TrialBalance{company, {}});
    auto& tb = balances[it->second];
    if (!tb.values.emplace(code, *value).second) {
      throw Error(Errc::duplicate_row, where + "duplicate row for company '" + company + "', account '" +
                                           code + "'");
    }
  }
  return balances;
}

inline void write_trial_balances(std::ostream& out, const std::vector<TrialBalance>& balances) {
  out << "company_id,account_code,value\n";
  for (const auto& tb : balances) {
    for (const auto& [code, value] : tb.values) {
      out << text::csv_field(tb.company_id) << ',' << text::csv_field(code) << ','
          << text::format_round_trip(value) << '\n';
    }
  }
}

/// Reads `company_id,nace_codes` rows where nace_codes is ';'-separated.
inline std::vector<CompanyMeta> parse_nace_metadata(std::istream& in,
                                                    std::string_view source_name = "NACE metadata") {
  detail::expect_header(in, "company_id,nace_codes", source_name);

  std::vector<CompanyMeta> meta;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto where = detail::at_line(source_name, line_no);
    auto fields = text::split_csv(line);
    if (!fields || fields->size() != 2) throw Error(Errc::malformed_input, where + "expected 2 fields");
    CompanyMeta entry{(*fields)[0], {}};
    if (entry.company_id.empty()) throw Error(Errc::malformed_input, where + "empty company_id");
    if (!seen.insert(entry.company_id).second) {
      throw Error(Errc::duplicate_row, where + "duplicate company '" + entry.company_id + "'");
    }
    std::string_view codes = (*fields)[1];
    while (!codes.empty()) {
      const auto cut = codes.find(';');
      const auto token = text::trim(codes.substr(0, cut));
      if (!token.empty()) entry.nace_codes.emplace(token);
      if (cut == std::string_view::npos) break;
      codes.remove_prefix(cut + 1);
    }
    meta.push_back(std::move(entry));
  }
  return meta;
}

inline void write_nace_metadata(std::ostream& out, const std::vector<CompanyMeta>& meta) {
  out << "company_id,nace_codes\n";
  for (const auto& entry : meta) {
    std::string joined;
    for (const auto& code : entry.nace_codes) {
      if (!joined.empty()) joined.push_back(';');
      joined += code;
    }
    out << text::csv_field(entry.company_id) << ',' << text::csv_field(joined) << '\n';
  }
}

}  // namespace ledger_emd
