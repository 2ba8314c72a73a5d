#include <cmath>
#include <random>
#include <vector>

#include "cmnb/distribution.hpp"
#include "cmnb/errors.hpp"
#include "cmnb/frequency_table.hpp"
#include "cmnb/rng.hpp"
#include "cmnb/sampling.hpp"
#include "cmnb/special_fn.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace cmnb;

namespace {

// Pearson statistic over classes 0..K with expected count >= 5 plus one
// tail class, and its chi-squared p-value.
double chi2_pvalue(const FrequencyTable& table, const NormalizedPmf& dist) {
  const auto n = static_cast<double>(table.total());
  std::vector<double> expected;
  std::vector<double> observed;
  double head = 0.0;
  std::int64_t k = 0;
  while (n * dist.pmf(k) >= 5.0 || k <= dist.quantile(0.5)) {
    expected.push_back(n * dist.pmf(k));
    observed.push_back(static_cast<double>(table.count_at(k)));
    head += dist.pmf(k);
    ++k;
    if (dist.support_max() && k > *dist.support_max()) break;
  }
  double tail_obs = 0.0;
  for (const auto& e : table.entries()) {
    if (e.value >= k) tail_obs += static_cast<double>(e.count);
  }
  const double tail_exp = n * std::max(0.0, 1.0 - head);
  if (tail_exp > 0.0) {
    expected.push_back(tail_exp);
    observed.push_back(tail_obs);
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  return chi_squared_survival(stat, static_cast<double>(expected.size() - 1));
}

}  // namespace

TEST_CASE("rng reference outputs") {
  RngState rng(42);
  CHECK(rng.next() == 0x15780b2e0c2ec716ULL);
  CHECK(rng.next() == 0x6104d9866d113a7eULL);
  CHECK(rng.next() == 0xae17533239e499a1ULL);
  CHECK(rng.draws() == 3);
  CHECK(RngState(0).next() == 0x99ec5f36cb75f2b4ULL);

  auto stream1 = RngState::for_stream(42, 1);
  CHECK(stream1.next() == 0x50086ef83cbf4f4aULL);
  CHECK(stream1.next() == 0xba285ec21347d703ULL);

  auto streams = RngState::streams(42, 3);
  auto s2 = RngState::for_stream(42, 2);
  CHECK(streams[2].next() == s2.next());
}

TEST_CASE("uniform range") {
  RngState rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("sampler boundaries") {
  const NormalizedPmf dist(CmnbParams{0.5, 2.0, 0.3});
  const double f0 = dist.cdf(0);
  CHECK(sample_at(dist, 0.0) == 0);
  CHECK(sample_at(dist, std::nextafter(f0, 0.0)) == 0);
  CHECK(sample_at(dist, f0) == 0);
  CHECK(sample_at(dist, std::nextafter(f0, 1.0)) == 1);
  CHECK(sample_at(dist, dist.cdf(3)) == 3);
  CHECK(sample_at(dist, std::nextafter(dist.cdf(3), 1.0)) == 4);
}

TEST_CASE("sampler equals the quantile and the linear scan") {
  std::mt19937_64 gen(21);
  const std::vector<Family> families{CmnbParams{0.5, 2.0, 0.3}, NbParams{3.0, 0.6},
                                     CmpParams{4.0, 0.7}, CmbParams{12, 0.4, 1.3},
                                     CmnhgParams{15, 0.8, 2.0, 3.5}};
  for (const auto& family : families) {
    const NormalizedPmf dist(family);
    for (int i = 0; i < 1000; ++i) {
      const double theta = test::uniform(gen, 0.0, 1.0);
      const auto k = sample_at(dist, theta);
      REQUIRE(k == dist.quantile(theta));
      REQUIRE(k == sample_linear_scan(dist, theta));
    }
  }
}

TEST_CASE("batch sampling") {
  const NormalizedPmf nb(NbParams{1.0, 0.5});
  RngState one(5);
  const auto single = sample_batch(nb, one, 1);
  CHECK(single.total() == 1);
  CHECK(single.entries().size() == 1);
  CHECK(sample_batch(nb, one, 0).empty());
  CHECK_THROWS_AS(sample_batch(nb, one, -1), DomainError);

  RngState rng(2024);
  const auto table = sample_batch(nb, rng, 10000);
  CHECK(table.total() == 10000);
  const double zeros = static_cast<double>(table.count_at(0)) / 10000.0;
  CHECK(std::fabs(zeros - 0.5) < 4.0 * 0.005);
}

TEST_CASE("fixed seed determinism") {
  const NormalizedPmf dist(CmnbParams{0.5, 2.0, 0.3});
  RngState a(99), b(99);
  CHECK(sample_batch(dist, a, 5000) == sample_batch(dist, b, 5000));
  CHECK(a.draws() == b.draws());

  const auto p1 = sample_batch_parallel(dist, 99, 20000, 4);
  const auto p2 = sample_batch_parallel(dist, 99, 20000, 4);
  CHECK(p1 == p2);
  CHECK(p1.total() == 20000);
}

TEST_CASE("self-consistency chi-squared") {
  const NormalizedPmf dist(CmnbParams{0.5, 2.0, 0.3});
  RngState rng(42);
  const auto table = sample_batch(dist, rng, 100000);
  CHECK(chi2_pvalue(table, dist) > 0.01);
}

TEST_CASE("self-consistency across families") {
  std::mt19937_64 gen(22);
  int rejections = 0;
  int runs = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<Family> families{
        test::random_cmnb(gen),
        NbParams{test::log_uniform(gen, 0.1, 10.0), test::uniform(gen, 0.05, 0.9)},
        CmpParams{test::log_uniform(gen, 0.2, 20.0), test::uniform(gen, 0.3, 2.5)},
        CmbParams{static_cast<std::int64_t>(test::uniform(gen, 1.0, 40.0)),
                  test::uniform(gen, 0.05, 0.95), test::uniform(gen, 0.3, 2.5)},
        CmnhgParams{static_cast<std::int64_t>(test::uniform(gen, 1.0, 40.0)),
                    test::uniform(gen, 0.3, 2.5), test::log_uniform(gen, 0.2, 5.0),
                    test::log_uniform(gen, 0.2, 5.0)}};
    for (const auto& family : families) {
      const NormalizedPmf dist(family);
      RngState rng(1000 + runs);
      const auto table = sample_batch(dist, rng, 20000);
      ++runs;
      if (chi2_pvalue(table, dist) < 0.001) ++rejections;
    }
  }
  // 25 runs at the 0.1% level: more than one rejection is a defect.
  CHECK(rejections <= 1);
}
