#include "bhtbp/csv.hpp"

#include <cmath>

#include <fmt/format.h>

namespace bhtbp::csv {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

std::string strip_last_column(std::string_view table) {
  std::string out;
  out.reserve(table.size());
  std::size_t pos = 0;
  while (pos < table.size()) {
    std::size_t end = table.find('\n', pos);
    if (end == std::string_view::npos) end = table.size();
    std::string_view line = table.substr(pos, end - pos);
    if (!line.empty() && line.front() != '#') {
      const auto comma = line.rfind(',');
      if (comma != std::string_view::npos) line = line.substr(0, comma);
    }
    out.append(line);
    out.push_back('\n');
    pos = end + 1;
  }
  return out;
}

}  // namespace bhtbp::csv
