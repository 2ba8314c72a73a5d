#include "cmnb/frequency_table.hpp"

#include <algorithm>
#include <sstream>

#include "cmnb/errors.hpp"

namespace cmnb {

FrequencyTable FrequencyTable::from_entries(std::vector<Entry> entries) {
  FrequencyTable table;
  for (const Entry& e : entries) table.add(e.value, e.count);
  return table;
}

FrequencyTable FrequencyTable::from_counts(std::span<const std::int64_t> counts) {
  FrequencyTable table;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    table.add(static_cast<std::int64_t>(k), counts[k]);
  }
  return table;
}

FrequencyTable FrequencyTable::from_observations(std::span<const std::int64_t> values) {
  std::vector<std::int64_t> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  FrequencyTable table;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    table.add(sorted[i], static_cast<std::int64_t>(j - i));
    i = j;
  }
  return table;
}

void FrequencyTable::add(std::int64_t value, std::int64_t count) {
  if (value < 0) {
    std::ostringstream msg;
    msg << "FrequencyTable: negative value " << value;
    throw InvalidParameter(msg.str());
  }
  if (count < 0) {
    std::ostringstream msg;
    msg << "FrequencyTable: negative count " << count << " for value " << value;
    throw InvalidParameter(msg.str());
  }
  auto it = std::lower_bound(entries_.begin(), entries_.end(), value,
                             [](const Entry& e, std::int64_t v) { return e.value < v; });
  if (it != entries_.end() && it->value == value) {
    it->count += count;
  } else {
    entries_.insert(it, Entry{value, count});
  }
  total_ += count;
}

std::int64_t FrequencyTable::k_max() const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->count > 0) return it->value;
  }
  return -1;
}

double FrequencyTable::mean() const {
  if (total_ == 0) return 0.0;
  double s = 0.0;
  for (const Entry& e : entries_) s += static_cast<double>(e.value) * static_cast<double>(e.count);
  return s / static_cast<double>(total_);
}

std::int64_t FrequencyTable::count_at(std::int64_t value) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), value,
                             [](const Entry& e, std::int64_t v) { return e.value < v; });
  return (it != entries_.end() && it->value == value) ? it->count : 0;
}

std::vector<std::int64_t> FrequencyTable::dense_counts() const {
  std::vector<std::int64_t> out(static_cast<std::size_t>(k_max() + 1), 0);
  for (const Entry& e : entries_) {
    if (e.value < static_cast<std::int64_t>(out.size())) out[static_cast<std::size_t>(e.value)] += e.count;
  }
  return out;
}

}  // namespace cmnb
