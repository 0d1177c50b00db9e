#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace phaseless {

/// One row of a validation report: `value relation threshold` must hold.
struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string relation;  // "<=" or ">="
  double threshold = 0.0;
  double seconds = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool passed() const;
  /// Tab-separated, one header line then one line per check.
  std::string table() const;
  nlohmann::json to_json() const;
  std::string summary() const;
};

/// Frozen thresholds shared with the acceptance tests.
namespace thresholds {
inline constexpr double kKiteCircleGap = 1e-2;
inline constexpr double kKiteBumpGap = 1e-5;
inline constexpr double kMediumPairGap = 1e-1;
inline constexpr double kRoughPairGap = 1e-1;
inline constexpr double kTranslationSuperGap = 1e-2;
inline constexpr double kTranslationSingleGap = 1e-13;
inline constexpr double kNontrivial = 1e-6;
inline constexpr double kReciprocityObstacle = 1e-7;
inline constexpr double kReciprocityRough = 1e-6;
}  // namespace thresholds

/// "fast" or "full"; anything else is a Config error. Checks never throw:
/// an exception inside a check becomes a failed row carrying the message.
SuiteReport run_validation(const std::string& suite);

}  // namespace phaseless
