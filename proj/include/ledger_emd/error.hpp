#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ledger_emd {

/// Error categories. Each maps to a stable, greppable tag (see errc_tag).
enum class Errc {
  malformed_input,
  duplicate_code,
  missing_parent,
  cycle,
  side_mismatch,
  root_count,
  unknown_code,
  bad_value,
  duplicate_row,
  mass_mismatch,
  length_mismatch,
  chart_mismatch,
  duplicate_company,
  unknown_company,
  invalid_argument,
  too_small,
  degenerate,
  io,
  infeasible,
  no_convergence,
  diverged,
};

constexpr std::string_view errc_tag(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_input: return "E_MALFORMED";
    case Errc::duplicate_code: return "E_DUPLICATE_CODE";
    case Errc::missing_parent: return "E_MISSING_PARENT";
    case Errc::cycle: return "E_CYCLE";
    case Errc::side_mismatch: return "E_SIDE_MISMATCH";
    case Errc::root_count: return "E_ROOT_COUNT";
    case Errc::unknown_code: return "E_UNKNOWN_CODE";
    case Errc::bad_value: return "E_BAD_VALUE";
    case Errc::duplicate_row: return "E_DUPLICATE_ROW";
    case Errc::mass_mismatch: return "E_MASS_MISMATCH";
    case Errc::length_mismatch: return "E_LENGTH_MISMATCH";
    case Errc::chart_mismatch: return "E_CHART_MISMATCH";
    case Errc::duplicate_company: return "E_DUPLICATE_COMPANY";
    case Errc::unknown_company: return "E_UNKNOWN_COMPANY";
    case Errc::invalid_argument: return "E_INVALID_ARGUMENT";
    case Errc::too_small: return "E_TOO_SMALL";
    case Errc::degenerate: return "E_DEGENERATE";
    case Errc::io: return "E_IO";
    case Errc::infeasible: return "E_INFEASIBLE";
    case Errc::no_convergence: return "E_NO_CONVERGENCE";
    case Errc::diverged: return "E_DIVERGED";
  }
  return "E_UNKNOWN";
}

/// True for failures caused by the numerical machinery rather than by the
/// caller's input. The CLI maps these to exit code 2.
constexpr bool is_internal(Errc code) noexcept {
  return code == Errc::no_convergence || code == Errc::diverged;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }
  std::string_view tag() const noexcept { return errc_tag(code_); }

 private:
  Errc code_;
};

}  // namespace ledger_emd
