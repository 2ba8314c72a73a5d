#include "cli/ingest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "cmnb/errors.hpp"

namespace cmnb::cli {
namespace {

struct Field {
  std::string_view text;
  int column = 1;
};

std::string_view trim(std::string_view s, int& column) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
    ++column;
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<Field> split_fields(std::string_view line) {
  std::vector<Field> out;
  int column = 1;
  for (;;) {
    const auto comma = line.find(',');
    Field f;
    f.column = column;
    f.text = trim(line.substr(0, comma), f.column);
    out.push_back(f);
    if (comma == std::string_view::npos) break;
    column += static_cast<int>(comma) + 1;
    line.remove_prefix(comma + 1);
  }
  return out;
}

bool parses_as_integer(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::int64_t to_count(const Field& f, const std::string& source, int line, const char* what) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(f.text.data(), f.text.data() + f.text.size(), v);
  if (f.text.empty()) throw InputError(source, line, f.column, std::string("missing ") + what);
  if (ec == std::errc::result_out_of_range) {
    throw InputError(source, line, f.column, std::string(what) + " out of range");
  }
  if (ec != std::errc() || ptr != f.text.data() + f.text.size()) {
    throw InputError(source, line, f.column,
                     std::string(what) + " must be a nonnegative integer, got '" +
                         std::string(f.text) + "'");
  }
  if (v < 0) {
    throw InputError(source, line, f.column,
                     std::string(what) + " must be nonnegative, got " + std::to_string(v));
  }
  return v;
}

}  // namespace

InputError::InputError(const std::string& source, int line, int column, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " +
                         message),
      line_(line),
      column_(column) {}

FrequencyTable parse_frequency_text(std::string_view text, const std::string& source) {
  struct Row {
    int line;
    std::vector<Field> fields;
  };
  std::vector<Row> rows;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    int col = 1;
    const auto body = trim(line, col);
    if (body.empty() || body.front() == '#') continue;
    rows.push_back({line_no, split_fields(line)});
  }
  if (rows.empty()) throw InputError(source, 1, 1, "no data rows");

  bool csv = false;
  for (const auto& r : rows) csv = csv || r.fields.size() > 1;

  // A first row that is not numeric is a header.
  std::size_t first = 0;
  if (csv && !parses_as_integer(rows[0].fields[0].text)) first = 1;
  if (first == rows.size()) throw InputError(source, rows[0].line, 1, "header without data rows");

  FrequencyTable table;
  for (std::size_t i = first; i < rows.size(); ++i) {
    const Row& r = rows[i];
    if (csv) {
      if (r.fields.size() != 2) {
        const int col = r.fields.size() > 2 ? r.fields[2].column : r.fields[0].column;
        throw InputError(source, r.line, col,
                         "expected 'value,count', found " + std::to_string(r.fields.size()) +
                             " field(s)");
      }
      const auto value = to_count(r.fields[0], source, r.line, "value");
      const auto count = to_count(r.fields[1], source, r.line, "count");
      table.add(value, count);
    } else {
      table.add(to_count(r.fields[0], source, r.line, "observation"));
    }
  }
  if (table.empty()) throw InputError(source, rows[first].line, 1, "all counts are zero");
  return table;
}

FrequencyTable ingest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path, 0, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_frequency_text(buf.str(), path);
}

std::string to_csv(const FrequencyTable& table) {
  std::string out = "value,count\n";
  for (const auto& e : table.entries()) {
    out += std::to_string(e.value);
    out += ',';
    out += std::to_string(e.count);
    out += '\n';
  }
  return out;
}

}  // namespace cmnb::cli
