#pragma once

#include <string>
#include <vector>

namespace smartpark::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ParseError when absent.
  [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Plain comma-separated file with a header row. No quoting; blank lines and
/// lines starting with '#' are skipped.
Table read(const std::string& path);

double to_double(const std::string& field, const std::string& context);
long long to_int(const std::string& field, const std::string& context);

}  // namespace smartpark::csv
