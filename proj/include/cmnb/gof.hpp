#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cmnb/distribution.hpp"
#include "cmnb/estimation.hpp"
#include "cmnb/frequency_table.hpp"
#include "cmnb/params.hpp"

namespace cmnb {

struct Chi2Options {
  // Merge adjacent classes until each expected count reaches this value.
  // Off by default; the reproduction tables use one class per value 0..k_max.
  std::optional<double> pool_min_expected;
  TruncationPolicy policy;
};

struct Chi2Result {
  double statistic = 0.0;  // sum (n_i - e_i)^2 / e_i
  // sum n_i^2 / e_i - 2n + sum e_i; equal to the above up to rounding.
  double statistic_alt = 0.0;
  int df = 0;
  // Absent when df <= 0.
  std::optional<double> pvalue;
  int classes = 0;
  std::vector<double> expected;
  std::vector<std::int64_t> observed;
};

Chi2Result chi2_test(const FrequencyTable& table, const Family& family, int n_params,
                     const Chi2Options& options = {});

// max over jump points x_i of |Fn(x_i) - F0(x_i)| and |Fn(x_{i-1}) - F0(x_i - 1)|.
double ks_statistic_discrete(const FrequencyTable& table, const NormalizedPmf& dist);
double ks_statistic_discrete(const FrequencyTable& table, const Family& family);

enum class BootstrapMode { RefitFree, Refit };

struct BootstrapOptions {
  int replicates = 1000;
  std::uint64_t seed = 0;
  BootstrapMode mode = BootstrapMode::RefitFree;
  // Worker threads; results do not depend on this.
  std::size_t threads = 1;
  FitConfig fit;
};

// (1 + #{D_b >= D_obs}) / (B + 1).
double bootstrap_pvalue(double observed, const std::vector<double>& replicates);

// D_b for b = 0..B-1; replicate b draws from stream b of the seed.
std::vector<double> ks_bootstrap_replicates(const FrequencyTable& table, ModelKind kind,
                                            const Family& fitted,
                                            const BootstrapOptions& options);

double ks_pvalue_bootstrap(const FrequencyTable& table, ModelKind kind, const Family& fitted,
                           const BootstrapOptions& options);

struct GofReport {
  double chi2 = 0.0;
  int df = 0;
  std::optional<double> chi2_pvalue;
  double ks_stat = 0.0;
  std::optional<double> ks_pvalue;
  int class_count = 0;
  std::vector<double> expected;
};

GofReport gof_report(const FrequencyTable& table, ModelKind kind, const Family& fitted,
                     const Chi2Options& chi2_options = {},
                     const std::optional<BootstrapOptions>& bootstrap = std::nullopt);

}  // namespace cmnb
