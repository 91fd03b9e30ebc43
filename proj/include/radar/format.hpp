#pragma once

#include <string>

namespace radar {

/// Decimal text that parses back to the same double ("%.17g").
std::string format_double(double value);

/// Fixed short form for human-facing output ("%.6g").
std::string format_short(double value);

}  // namespace radar
