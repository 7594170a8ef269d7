#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uchain {

enum class errc {
  invalid_parameter,
  incompatible_space,
  out_of_range,
  invalid_cover,
  malformed_spec,
  validation,
  discretization_too_coarse,
  no_cycle,
  undefined_diameter,
  no_coprime_cycles,
  not_coprime,
  resource_limit,
  no_nonwandering_points,
};

constexpr std::string_view errc_name(errc code) noexcept {
  switch (code) {
    case errc::invalid_parameter: return "invalid-parameter";
    case errc::incompatible_space: return "incompatible-space";
    case errc::out_of_range: return "out-of-range";
    case errc::invalid_cover: return "invalid-cover";
    case errc::malformed_spec: return "malformed-spec";
    case errc::validation: return "validation-error";
    case errc::discretization_too_coarse: return "discretization-too-coarse";
    case errc::no_cycle: return "no-cycle";
    case errc::undefined_diameter: return "undefined-diameter";
    case errc::no_coprime_cycles: return "no-coprime-cycles";
    case errc::not_coprime: return "not-coprime";
    case errc::resource_limit: return "resource-limit";
    case errc::no_nonwandering_points: return "no-nonwandering-points";
  }
  return "unknown";
}

/// Every failure raised by the library. `code()` identifies the failure
/// class; the CLI prints `errc_name(code())` on the diagnostic stream.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), detail_(what) {}

  errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return errc_name(code_); }
  /// The message without the error-name prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  errc code_;
  std::string detail_;
};

}  // namespace uchain
