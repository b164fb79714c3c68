#pragma once

#include <string>
#include <string_view>

namespace bhtbp::csv {

/// Shortest round-trip-safe rendering used by every CSV writer: 17
/// significant digits, `nan` / `inf` / `-inf` for non-finite values.
std::string number(double v);

/// Drops the last comma-separated field of every non-comment line. Used to
/// compare tables whose trailing column holds wall-clock time.
std::string strip_last_column(std::string_view table);

}  // namespace bhtbp::csv
