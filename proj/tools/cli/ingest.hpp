#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "cmnb/frequency_table.hpp"

namespace cmnb::cli {

// Bad input file; what() reads "source:line:column: message".
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& source, int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Accepts "value,count" rows (an optional non-numeric header line first) or
// one raw observation per line. Blank lines and lines starting with '#' are
// skipped. Duplicate values are summed.
FrequencyTable parse_frequency_text(std::string_view text, const std::string& source = "<input>");
FrequencyTable ingest_file(const std::string& path);

// "value,count" header plus one row per stored value.
std::string to_csv(const FrequencyTable& table);

}  // namespace cmnb::cli
