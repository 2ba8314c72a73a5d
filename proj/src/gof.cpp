#include "cmnb/gof.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "cmnb/errors.hpp"
#include "cmnb/rng.hpp"
#include "cmnb/sampling.hpp"
#include "cmnb/special_fn.hpp"
#include "internal/compensated_sum.hpp"

namespace cmnb {

using internal::CompensatedSum;

Chi2Result chi2_test(const FrequencyTable& table, const Family& family, int n_params,
                     const Chi2Options& options) {
  if (table.empty()) throw InsufficientSupport("chi2_test: empty frequency table");
  const NormalizedPmf dist(family, options.policy);
  const double n = static_cast<double>(table.total());
  const auto counts = table.dense_counts();

  std::vector<double> expected;
  std::vector<std::int64_t> observed;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    expected.push_back(n * dist.pmf(static_cast<std::int64_t>(k)));
    observed.push_back(counts[k]);
  }

  if (options.pool_min_expected) {
    const double floor = *options.pool_min_expected;
    std::vector<double> e2;
    std::vector<std::int64_t> o2;
    double e_acc = 0.0;
    std::int64_t o_acc = 0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      e_acc += expected[i];
      o_acc += observed[i];
      if (e_acc >= floor) {
        e2.push_back(e_acc);
        o2.push_back(o_acc);
        e_acc = 0.0;
        o_acc = 0;
      }
    }
    if (e_acc > 0.0 || o_acc > 0) {
      if (e2.empty()) {
        e2.push_back(e_acc);
        o2.push_back(o_acc);
      } else {
        e2.back() += e_acc;
        o2.back() += o_acc;
      }
    }
    expected = std::move(e2);
    observed = std::move(o2);
  }

  Chi2Result out;
  CompensatedSum pearson;
  CompensatedSum squares;
  CompensatedSum e_total;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double e = expected[i];
    if (!(e > 0.0)) {
      std::ostringstream msg;
      msg << "chi2_test: expected count of class " << i << " is zero";
      throw NumericalError(msg.str());
    }
    const double o = static_cast<double>(observed[i]);
    pearson.add((o - e) * (o - e) / e);
    squares.add(o * o / e);
    e_total.add(e);
  }
  out.statistic = pearson.value();
  out.statistic_alt = squares.value() - 2.0 * n + e_total.value();
  if (std::fabs(out.statistic - out.statistic_alt) > 1e-9 * n) {
    throw InvariantBreach("chi2_test: the two statistic forms disagree");
  }
  out.classes = static_cast<int>(expected.size());
  out.df = out.classes - 1 - n_params;
  if (out.df > 0) out.pvalue = chi_squared_survival(out.statistic, out.df);
  out.expected = std::move(expected);
  out.observed = std::move(observed);
  return out;
}

double ks_statistic_discrete(const FrequencyTable& table, const NormalizedPmf& dist) {
  if (table.empty()) throw InsufficientSupport("ks_statistic_discrete: empty frequency table");
  const double n = static_cast<double>(table.total());
  double d = 0.0;
  std::int64_t running = 0;
  for (const auto& e : table.entries()) {
    if (e.count == 0) continue;
    const double left = static_cast<double>(running) / n;
    running += e.count;
    const double right = static_cast<double>(running) / n;
    d = std::max(d, std::fabs(right - dist.cdf(e.value)));
    d = std::max(d, std::fabs(left - dist.cdf(e.value - 1)));
  }
  return d;
}

double ks_statistic_discrete(const FrequencyTable& table, const Family& family) {
  return ks_statistic_discrete(table, NormalizedPmf(family));
}

double bootstrap_pvalue(double observed, const std::vector<double>& replicates) {
  const auto hits = std::count_if(replicates.begin(), replicates.end(),
                                  [observed](double d) { return d >= observed; });
  return (1.0 + static_cast<double>(hits)) / (static_cast<double>(replicates.size()) + 1.0);
}

std::vector<double> ks_bootstrap_replicates(const FrequencyTable& table, ModelKind kind,
                                            const Family& fitted,
                                            const BootstrapOptions& options) {
  if (options.replicates < 1) throw DomainError("bootstrap: replicates >= 1 required");
  const NormalizedPmf dist(fitted, options.fit.policy);
  const std::int64_t n = table.total();
  const auto b_count = static_cast<std::size_t>(options.replicates);
  auto rngs = RngState::streams(options.seed, b_count);
  std::vector<double> out(b_count, 0.0);

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const FrequencyTable sample = sample_batch(dist, rngs[b], n);
      if (options.mode == BootstrapMode::RefitFree) {
        out[b] = ks_statistic_discrete(sample, dist);
        continue;
      }
      try {
        const FitResult refit = fit_model(sample, kind, options.fit);
        out[b] = ks_statistic_discrete(sample, NormalizedPmf(refit.params, options.fit.policy));
      } catch (const std::exception&) {
        // A replicate the model cannot be fitted to counts as at least as extreme.
        out[b] = std::numeric_limits<double>::infinity();
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, b_count);
  if (threads == 1) {
    run(0, b_count);
  } else {
    std::vector<std::future<void>> jobs;
    const std::size_t per = (b_count + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * per;
      const std::size_t end = std::min(b_count, begin + per);
      if (begin >= end) break;
      jobs.push_back(std::async(std::launch::async, run, begin, end));
    }
    for (auto& j : jobs) j.get();
  }
  return out;
}

double ks_pvalue_bootstrap(const FrequencyTable& table, ModelKind kind, const Family& fitted,
                           const BootstrapOptions& options) {
  const double observed = ks_statistic_discrete(table, NormalizedPmf(fitted, options.fit.policy));
  return bootstrap_pvalue(observed, ks_bootstrap_replicates(table, kind, fitted, options));
}

GofReport gof_report(const FrequencyTable& table, ModelKind kind, const Family& fitted,
                     const Chi2Options& chi2_options,
                     const std::optional<BootstrapOptions>& bootstrap) {
  const Chi2Result chi2 = chi2_test(table, fitted, parameter_count(kind), chi2_options);
  GofReport report;
  report.chi2 = chi2.statistic;
  report.df = chi2.df;
  report.chi2_pvalue = chi2.pvalue;
  report.class_count = chi2.classes;
  report.expected = chi2.expected;
  report.ks_stat = ks_statistic_discrete(table, NormalizedPmf(fitted, chi2_options.policy));
  if (bootstrap) report.ks_pvalue = ks_pvalue_bootstrap(table, kind, fitted, *bootstrap);
  return report;
}

}  // namespace cmnb
