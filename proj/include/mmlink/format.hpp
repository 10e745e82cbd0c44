#pragma once

// Number formatting for summaries and tables.

#include <string>

namespace mmlink {

/// "value(sigma)" with sigma rounded to one significant digit (two when its
/// leading digit is 1) and the value rounded to match, e.g. 0.53(3),
/// 2.16(5)e-3. A non-positive sigma prints the value alone with %.6g.
std::string format_uncertain(double value, double sigma);

/// printf-style "%.<digits>g".
std::string format_general(double value, int digits = 6);

/// printf-style "%.<decimals>f".
std::string format_fixed(double value, int decimals);

}  // namespace mmlink
