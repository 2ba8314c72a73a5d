#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmnb/frequency_table.hpp"

namespace cmnb::cli {

struct EmbeddedDataset {
  std::string name;
  // counts[k] is the frequency of value k.
  std::vector<std::int64_t> counts;
  std::string note;

  FrequencyTable table() const { return FrequencyTable::from_counts(counts); }
};

const std::vector<EmbeddedDataset>& embedded_datasets();
// nullptr when no dataset has that name.
const EmbeddedDataset* find_dataset(const std::string& name);

}  // namespace cmnb::cli
