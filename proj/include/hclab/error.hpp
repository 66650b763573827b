#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hclab {

enum class errc {
  parameter,
  insufficient_growth,
  tail_too_thin,
  domain,
  precondition,
  internal_inconsistency,
  construction_violation,
  insufficient_data,
  io,
};

inline std::string_view to_string(errc code) {
  switch (code) {
    case errc::parameter: return "parameter";
    case errc::insufficient_growth: return "insufficient-growth";
    case errc::tail_too_thin: return "tail-too-thin";
    case errc::domain: return "domain";
    case errc::precondition: return "precondition";
    case errc::internal_inconsistency: return "internal-inconsistency";
    case errc::construction_violation: return "construction-violation";
    case errc::insufficient_data: return "insufficient-data";
    case errc::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library. `stage` is filled in by the pipeline
/// driver when an error crosses a stage boundary.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what, std::string stage = {})
      : std::runtime_error(format(code, what, stage)),
        code_(code),
        detail_(what),
        stage_(std::move(stage)) {}

  errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& stage() const noexcept { return stage_; }

  error with_stage(std::string stage) const { return error(code_, detail_, std::move(stage)); }

 private:
  static std::string format(errc code, const std::string& what, const std::string& stage) {
    std::string out;
    if (!stage.empty()) out += "[" + stage + "] ";
    out += std::string(to_string(code)) + ": " + what;
    return out;
  }

  errc code_;
  std::string detail_;
  std::string stage_;
};

}  // namespace hclab
