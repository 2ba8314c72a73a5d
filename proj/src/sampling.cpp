#include "cmnb/sampling.hpp"

#include <algorithm>
#include <future>
#include <vector>

#include "cmnb/errors.hpp"

namespace cmnb {

std::int64_t sample_at(const NormalizedPmf& dist, double theta) { return dist.quantile(theta); }

std::int64_t sample_linear_scan(const NormalizedPmf& dist, double theta) {
  if (theta <= 0.0) return 0;
  std::int64_t j = 0;
  while (dist.cdf(j) < theta) {
    if (dist.support_max() && j >= *dist.support_max()) return j;
    if (j > dist.truncation_point() && dist.cdf(j) == dist.cdf(j + 64)) return dist.quantile(theta);
    ++j;
  }
  return j;
}

std::int64_t sample(const NormalizedPmf& dist, RngState& rng) {
  return sample_at(dist, rng.uniform());
}

FrequencyTable sample_batch(const NormalizedPmf& dist, RngState& rng, std::int64_t n) {
  if (n < 0) throw DomainError("sample_batch: n >= 0 required");
  std::vector<std::int64_t> counts;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t k = sample(dist, rng);
    if (k >= static_cast<std::int64_t>(counts.size())) counts.resize(static_cast<std::size_t>(k) + 1, 0);
    ++counts[static_cast<std::size_t>(k)];
  }
  FrequencyTable table;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] > 0) table.add(static_cast<std::int64_t>(k), counts[k]);
  }
  return table;
}

FrequencyTable sample_batch_parallel(const NormalizedPmf& dist, std::uint64_t seed,
                                     std::int64_t n, std::size_t tasks) {
  if (n < 0) throw DomainError("sample_batch_parallel: n >= 0 required");
  tasks = std::max<std::size_t>(tasks, 1);
  auto rngs = RngState::streams(seed, tasks);
  std::vector<std::future<FrequencyTable>> futures;
  const auto per = n / static_cast<std::int64_t>(tasks);
  const auto extra = n % static_cast<std::int64_t>(tasks);
  for (std::size_t i = 0; i < tasks; ++i) {
    const std::int64_t chunk = per + (static_cast<std::int64_t>(i) < extra ? 1 : 0);
    futures.push_back(std::async(std::launch::async, [&dist, rng = rngs[i], chunk]() mutable {
      return sample_batch(dist, rng, chunk);
    }));
  }
  FrequencyTable merged;
  for (auto& f : futures) {
    const FrequencyTable part = f.get();
    for (const auto& e : part.entries()) merged.add(e.value, e.count);
  }
  return merged;
}

}  // namespace cmnb
