#pragma once

// Published-value and property checks run by the `report` command.

#include <string>
#include <vector>

#include "mmlink/config.hpp"

namespace mmlink {

struct ReportRow {
  std::string quantity;
  double published = 0.0;
  double published_sigma = 0.0;
  double computed = 0.0;
  double computed_sigma = 0.0;
  double tolerance = 0.0;  // allowed |computed - published|

  bool pass() const;
  /// |computed - published| / sqrt(published_sigma^2 + computed_sigma^2); NaN when
  /// both sigmas vanish.
  double sigma_distance() const;
};

std::vector<ReportRow> reference_report(const RunConfig& config);

inline constexpr const char* kReportHeader = "quantity,published,computed,sigma_distance,tolerance,status";
std::string report_csv(const std::vector<ReportRow>& rows);
/// Aligned plain-text table.
std::string report_text(const std::vector<ReportRow>& rows);

}  // namespace mmlink
