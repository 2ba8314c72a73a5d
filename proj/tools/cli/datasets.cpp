#include "cli/datasets.hpp"

namespace cmnb::cli {

const std::vector<EmbeddedDataset>& embedded_datasets() {
  static const std::vector<EmbeddedDataset> sets = {
      {"willmot", {3719, 232, 38, 7, 3, 1}, "automobile insurance claim counts (Willmot), n = 4000"},
      {"car_cn",
       {27141, 5789, 1443, 457, 155, 56, 27, 2, 1, 1},
       "car insurance claim counts, n = 35072"},
      {"sim_nb",
       {5060, 2480, 1199, 638, 318, 165, 74, 33, 20, 8, 4, 1},
       "10^4 draws from NB(1, 0.5)"},
      {"sim_cmnb",
       {6442, 1866, 874, 435, 188, 101, 55, 19, 7, 8, 2, 2, 1},
       "10^4 draws from CMNB(0.005, 0.1, 0.5)"},
  };
  return sets;
}

const EmbeddedDataset* find_dataset(const std::string& name) {
  for (const auto& d : embedded_datasets()) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

}  // namespace cmnb::cli
