#pragma once

#include <cstdint>

#include "cmnb/distribution.hpp"
#include "cmnb/frequency_table.hpp"
#include "cmnb/rng.hpp"

namespace cmnb {

// min{k : F(k) >= theta}.
std::int64_t sample_at(const NormalizedPmf& dist, double theta);

// Step-by-step scan F(0), F(1), ... until F(j) >= theta. Same output as
// sample_at; kept as a reference for tests.
std::int64_t sample_linear_scan(const NormalizedPmf& dist, double theta);

// One inverse-transform draw.
std::int64_t sample(const NormalizedPmf& dist, RngState& rng);

// n draws aggregated into a table. n = 0 gives an empty table.
FrequencyTable sample_batch(const NormalizedPmf& dist, RngState& rng, std::int64_t n);

// Splits n draws over `tasks` chunks; chunk i uses stream i of `seed`. The
// result depends only on (seed, n, tasks), not on scheduling.
FrequencyTable sample_batch_parallel(const NormalizedPmf& dist, std::uint64_t seed,
                                     std::int64_t n, std::size_t tasks);

}  // namespace cmnb
