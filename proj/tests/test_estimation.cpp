#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cmnb/analysis.hpp"
#include "cmnb/distribution.hpp"
#include "cmnb/errors.hpp"
#include "cmnb/estimation.hpp"
#include "cmnb/rng.hpp"
#include "cmnb/sampling.hpp"
#include "cmnb/special_fn.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace cmnb;
using cmnb::test::rel_err;

namespace {

const std::vector<std::int64_t> kWillmot{3719, 232, 38, 7, 3, 1};
const std::vector<std::int64_t> kCar{27141, 5789, 1443, 457, 155, 56, 27, 2, 1, 1};

FrequencyTable random_table(std::mt19937_64& gen, const CmnbParams& params, std::int64_t n) {
  RngState rng(gen());
  return sample_batch(NormalizedPmf(params), rng, n);
}

// Moderate records whose samples have a few distinct values.
CmnbParams random_fit_target(std::mt19937_64& gen) {
  return {test::log_uniform(gen, 0.3, 5.0), test::log_uniform(gen, 0.4, 2.5),
          test::uniform(gen, 0.2, 0.7)};
}

double nb_loglik(const FrequencyTable& table, double r, double p) {
  double ll = 0.0;
  for (const auto& e : table.entries()) {
    const double k = static_cast<double>(e.value);
    ll += static_cast<double>(e.count) *
          (log_gamma(r + k) - log_gamma(k + 1.0) - log_gamma(r) + k * std::log(p) +
           r * std::log1p(-p));
  }
  return ll;
}

}  // namespace

TEST_CASE("loglik reference values") {
  const auto willmot = FrequencyTable::from_counts(kWillmot);
  CHECK(rel_err(loglik(willmot, CmnbParams{0.57, 3.06, 0.35}), -1183.4121065604795309) < 1e-12);
  const auto car = FrequencyTable::from_counts(kCar);
  CHECK(rel_err(loglik(car, CmnbParams{0.95, 10.40, 0.36}), -25422.032645003418572) < 1e-12);

  FrequencyTable zero;
  zero.add(0);
  const CmnbParams q{0.5, 2.0, 0.3};
  CHECK(rel_err(loglik(zero, q), q.r * std::log1p(-q.p) - log_normalizer_cmnb(q)) < 1e-14);

  CHECK(rel_err(loglik(willmot, CmnbParams{0.8, 1.0, 0.2}), nb_loglik(willmot, 0.8, 0.2)) < 1e-13);
  CHECK(rel_err(loglik(willmot, Family{NbParams{0.8, 0.2}}), nb_loglik(willmot, 0.8, 0.2)) < 1e-13);
  CHECK(rel_err(loglik(willmot, Family{CmnbParams{0.57, 3.06, 0.35}}), -1183.4121065604795309) <
        1e-12);
}

TEST_CASE("score against finite differences") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto table = random_table(gen, random_fit_target(gen), 500);
    const CmnbParams q = test::random_cmnb(gen);
    const auto s = score(table, q);
    const std::array<double, 3> theta{q.r, q.nu, q.p};
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6 * std::max(1.0, std::fabs(theta[j]));
      auto plus = theta, minus = theta;
      plus[j] += h;
      minus[j] -= h;
      const double fd = (loglik(table, CmnbParams{plus[0], plus[1], plus[2]}) -
                         loglik(table, CmnbParams{minus[0], minus[1], minus[2]})) /
                        (2.0 * h);
      CAPTURE(j);
      CAPTURE(q.r);
      CAPTURE(q.nu);
      CAPTURE(q.p);
      CHECK(std::fabs(s[j] - fd) <= 1e-4 * std::max({std::fabs(s[j]), std::fabs(fd), 1.0}));
    }
  }
}

TEST_CASE("score reductions") {
  const auto table = FrequencyTable::from_counts(kWillmot);
  const auto n = static_cast<double>(table.total());

  // nu = 1: the classical NB score in r and p.
  const double r = 0.8, p = 0.2;
  const auto s = score(table, CmnbParams{r, 1.0, p});
  double f1 = n * std::log1p(-p), f3 = -n * r / (1.0 - p);
  for (const auto& e : table.entries()) {
    const double k = static_cast<double>(e.value);
    f1 += static_cast<double>(e.count) * (digamma(r + k) - digamma(r));
    f3 += static_cast<double>(e.count) * k / p;
  }
  CHECK(rel_err(s[0], f1) < 1e-10);
  CHECK(rel_err(s[2], f3) < 1e-10);

  // F3 = (sum n_k k - n E[X]) / p.
  const CmnbParams q{0.57, 3.06, 0.35};
  const double mean = moments(NormalizedPmf(q)).mean;
  const double sum_k = table.mean() * n;
  // Both sums are ~300 and nearly cancel, so compare on their scale.
  CHECK(std::fabs(score(table, q)[2] - (sum_k - n * mean) / q.p) < 1e-12 * sum_k / q.p);
}

TEST_CASE("ratio regression") {
  const NormalizedPmf cmnb(CmnbParams{0.5, 2.0, 0.3});
  const auto probs = cmnb.pmf_values(3);
  const auto back = ratio_regression_init(probs);
  CHECK(std::fabs(back.r - 0.5) < 1e-6);
  CHECK(std::fabs(back.nu - 2.0) < 1e-6);
  CHECK(std::fabs(back.p - 0.3) < 1e-6);

  const auto nb_probs = NormalizedPmf(NbParams{2.0, 0.4}).pmf_values(3);
  const auto nb = ratio_regression_init(nb_probs);
  CHECK(std::fabs(nb.r - 2.0) < 1e-6);
  CHECK(std::fabs(nb.nu - 1.0) < 1e-6);
  CHECK(std::fabs(nb.p - 0.4) < 1e-6);

  const auto willmot = ratio_regression_init(FrequencyTable::from_counts(kWillmot));
  CHECK(std::isfinite(willmot.r));
  CHECK(std::isfinite(willmot.nu));
  CHECK(willmot.p > 0.0);
  CHECK(willmot.p < 1.0);

  const std::vector<std::int64_t> gap{100, 10, 0, 1};
  CHECK_THROWS_AS(ratio_regression_init(FrequencyTable::from_counts(gap)), InsufficientSupport);
  const std::vector<double> short_probs{0.5, 0.3};
  CHECK_THROWS_AS(ratio_regression_init(short_probs), InsufficientSupport);
}

TEST_CASE("ratio regression self-inversion on random records") {
  std::mt19937_64 gen(32);
  for (int trial = 0; trial < 30; ++trial) {
    const CmnbParams q{test::log_uniform(gen, 0.05, 20.0), test::log_uniform(gen, 0.3, 4.0),
                       test::uniform(gen, 0.1, 0.8)};
    const auto back = ratio_regression_init(NormalizedPmf(q).pmf_values(3));
    CAPTURE(q.r);
    CAPTURE(q.nu);
    CAPTURE(q.p);
    CHECK(rel_err(back.r, q.r) < 1e-6);
    CHECK(rel_err(back.nu, q.nu) < 1e-6);
    CHECK(rel_err(back.p, q.p) < 1e-6);
  }
}

TEST_CASE("fit recovers parameters from exact expected frequencies") {
  const CmnbParams truth{0.5, 2.0, 0.3};
  const NormalizedPmf dist(truth);
  // Counts are integers, so the expected frequencies are rounded. At n = 1e6
  // the rounding of the sparse tail cells alone moves nu by ~4e-3 (its
  // standard error there is 0.6); n = 1e8 makes the rounding negligible.
  std::vector<std::int64_t> counts;
  for (std::int64_t k = 0;; ++k) {
    const auto c = std::llround(1e8 * dist.pmf(k));
    if (c == 0) break;
    counts.push_back(c);
  }
  const auto table = FrequencyTable::from_counts(counts);
  const auto fit = mle_fit(table);
  REQUIRE(fit.converged);
  CHECK(fit.log_likelihood >= loglik(table, truth));
  CHECK(std::fabs(fit.values[0] - 0.5) < 1e-3);
  CHECK(std::fabs(fit.values[1] - 2.0) < 1e-3);
  CHECK(std::fabs(fit.values[2] - 0.3) < 1e-3);
  REQUIRE(fit.standard_errors);
  CHECK(fit.standard_errors->size() == 3);
}

TEST_CASE("properties of converged fits") {
  std::mt19937_64 gen(33);
  int converged = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto table = random_table(gen, random_fit_target(gen), 2000);
    const auto fit = mle_fit(table);
    const auto nb = mle_fit_nb(table);

    // Monotone ascent.
    for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i) {
      CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1]);
    }
    // NB is the nu = 1 slice.
    CHECK(fit.log_likelihood >= nb.log_likelihood - 1e-8);
    CAPTURE(fit.values[0]);
    CAPTURE(fit.values[1]);
    CAPTURE(fit.values[2]);
    CHECK(std::fabs(fit.log_likelihood - loglik(table, fit.params)) < 1e-12 * std::fabs(fit.log_likelihood));

    if (!fit.converged) {
      CHECK(fit.message != "converged");
      continue;
    }
    ++converged;
    CHECK(fit.gradient_norm <= 1e-8);
    const auto q = std::get<CmnbParams>(fit.params);
    const double mean = moments(NormalizedPmf(q)).mean;
    CHECK(std::fabs(mean - table.mean()) <= 1e-6 * table.mean());

    // Scaled score components: F1 = 0 and F2 = 0 are the psi and ln Gamma
    // statistic matches.
    const auto s = score(table, q);
    const auto n = static_cast<double>(table.total());
    CHECK(std::fabs(q.r * s[0]) / n < 1e-6);
    CHECK(std::fabs(q.nu * s[1]) / n < 1e-6);
  }
  CHECK(converged >= 15);
}

TEST_CASE("fit invariance under row order and splitting") {
  const std::vector<FrequencyTable::Entry> rows{{0, 3719}, {1, 232}, {2, 38}, {3, 7}, {4, 3}, {5, 1}};
  auto shuffled = rows;
  std::reverse(shuffled.begin(), shuffled.end());
  shuffled.push_back({1, 0});
  std::vector<FrequencyTable::Entry> split{{2, 20}, {0, 3000}, {1, 232}, {2, 18}, {0, 719},
                                           {5, 1},  {3, 7},    {4, 2},   {4, 1}};
  const auto base = FrequencyTable::from_entries(rows);
  CHECK(FrequencyTable::from_entries(shuffled) == base);
  CHECK(FrequencyTable::from_entries(split) == base);

  const auto a = mle_fit_nb(base);
  const auto b = mle_fit_nb(FrequencyTable::from_entries(split));
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(std::fabs(a.values[i] - b.values[i]) < 1e-10);
  const auto c = mle_fit(base);
  const auto d = mle_fit(FrequencyTable::from_entries(shuffled));
  for (std::size_t i = 0; i < c.values.size(); ++i) CHECK(std::fabs(c.values[i] - d.values[i]) < 1e-10);
}

TEST_CASE("two-parameter fits on the Willmot data") {
  const auto table = FrequencyTable::from_counts(kWillmot);
  const auto nb = mle_fit_nb(table);
  REQUIRE(nb.converged);
  const auto q = std::get<NbParams>(nb.params);
  CHECK(std::fabs(q.r - 0.22) < 0.03);
  // Tables of this kind print the NB probability as 1 - p.
  CHECK(std::fabs((1.0 - q.p) - 0.71) < 0.03);
  CHECK(std::fabs(nb.values[0] * q.p / (1.0 - q.p) - table.mean()) < 1e-9);

  const auto cmp = mle_fit_cmp(table);
  REQUIRE(cmp.converged);
  const auto c = std::get<CmpParams>(cmp.params);
  CHECK(c.nu == 0.0);
  CHECK(std::fabs(c.lambda - 0.08) < 0.005);
  // With nu = 0 the law is geometric with mean lambda / (1 - lambda).
  CHECK(rel_err(c.lambda / (1.0 - c.lambda), table.mean()) < 1e-8);

  const auto car = mle_fit_nb(FrequencyTable::from_counts(kCar));
  const auto cq = std::get<NbParams>(car.params);
  CHECK(std::fabs(cq.r - 0.61) < 0.03);
  CHECK(std::fabs((1.0 - cq.p) - 0.66) < 0.03);
}

TEST_CASE("non-convergence is reported") {
  FitConfig config;
  config.max_iter = 3;
  const auto fit = mle_fit(FrequencyTable::from_counts(kWillmot), config);
  CHECK_FALSE(fit.converged);
  CHECK(fit.message.find("iteration limit") != std::string::npos);
  CHECK(fit.gradient_norm > config.grad_tol);
}

TEST_CASE("estimator input errors") {
  CHECK_THROWS_AS(mle_fit(FrequencyTable{}), InsufficientSupport);
  CHECK_THROWS_AS(parse_model_kind("zip"), InvalidParameter);
  CHECK(parse_model_kind("cmnb") == ModelKind::Cmnb);
  CHECK(parameter_count(ModelKind::Nb) == 2);

  FitConfig bad;
  bad.init = CmnbParams{-1.0, 1.0, 0.5};
  CHECK_THROWS_AS(mle_fit(FrequencyTable::from_counts(kWillmot), bad), InvalidParameter);
}

TEST_CASE("expected frequencies") {
  const auto zeros = expected_frequencies(NbParams{1.0, 0.5}, 0, 4);
  CHECK(zeros.size() == 5);
  for (const double v : zeros) CHECK(v == 0.0);
  const auto geo = expected_frequencies(CmnbParams{1.0, 2.0, 0.5}, 1000, 2);
  CHECK(rel_err(geo[0], 500.0) < 1e-13);
  CHECK(rel_err(geo[2], 125.0) < 1e-13);
}
