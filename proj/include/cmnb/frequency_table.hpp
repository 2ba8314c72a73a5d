#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cmnb {

// Observed counts as (value, count) pairs with strictly increasing values.
// An empty table is allowed; estimators reject it.
class FrequencyTable {
 public:
  struct Entry {
    std::int64_t value = 0;
    std::int64_t count = 0;
    bool operator==(const Entry&) const = default;
  };

  FrequencyTable() = default;

  // Sorts, merges duplicate values and validates.
  static FrequencyTable from_entries(std::vector<Entry> entries);
  // counts[k] is the frequency of value k.
  static FrequencyTable from_counts(std::span<const std::int64_t> counts);
  static FrequencyTable from_observations(std::span<const std::int64_t> values);

  void add(std::int64_t value, std::int64_t count = 1);

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return total_ == 0; }
  std::int64_t total() const { return total_; }
  // Largest value with a positive count; -1 when empty.
  std::int64_t k_max() const;
  double mean() const;
  std::int64_t count_at(std::int64_t value) const;
  // Frequencies of 0..k_max.
  std::vector<std::int64_t> dense_counts() const;

  bool operator==(const FrequencyTable&) const = default;

 private:
  std::vector<Entry> entries_;
  std::int64_t total_ = 0;
};

}  // namespace cmnb
