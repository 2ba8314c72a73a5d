#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "cmnb/params.hpp"

namespace cmnb {

// Controls where infinite series are cut. A series stops at term k once the
// ratio of every later consecutive pair is bounded by some rho < 1, the term
// itself is below rel_tol times the partial sum, and so is the geometric tail
// bound term * rho / (1 - rho). Running past max_terms throws TruncationError.
struct TruncationPolicy {
  double rel_tol = 1e-12;
  std::int64_t max_terms = 1'000'000;
};

// ln C(r, nu, p) with C = sum_i (Gamma(r+i) / (i! Gamma(r)))^nu p^i (1-p)^r.
double log_normalizer_cmnb(const CmnbParams& params, const TruncationPolicy& policy = {});

// ln Z(lambda, nu) with Z = sum_i lambda^i / (i!)^nu.
double log_normalizer_cmp(const CmpParams& params, const TruncationPolicy& policy = {});

// Normalized pmf over {0, 1, ...} for any supported family.
//
// The log-pmf and cdf are tabulated up to the truncation point at
// construction and extended in blocks of 64 when a caller asks past the end.
// Copies share the table. Reads may run concurrently; extension takes an
// exclusive lock, so concurrent callers always see a consistent prefix.
class NormalizedPmf {
 public:
  explicit NormalizedPmf(Family family, TruncationPolicy policy = {});

  const Family& family() const;
  const TruncationPolicy& policy() const;

  double log_normalizer() const;

  // Last support point of the initial table. For finite families this is the
  // top of the support.
  std::int64_t truncation_point() const;

  // Upper bound on the probability mass beyond truncation_point().
  double tail_bound() const;

  // Top of the support for finite families.
  std::optional<std::int64_t> support_max() const;

  std::int64_t cached_size() const;

  // -inf outside the support.
  double log_pmf(std::int64_t k) const;
  double pmf(std::int64_t k) const;

  // P(X <= k). 0 for k < 0.
  double cdf(std::int64_t k) const;

  // min{k : cdf(k) >= q}. quantile(0) = 0; quantile(1) is the top of the
  // support, or the truncation point for unbounded families.
  std::int64_t quantile(double q) const;

  // pmf(0..k_max), extending the table as needed.
  std::vector<double> pmf_values(std::int64_t k_max) const;
  std::vector<double> cdf_values(std::int64_t k_max) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

double log_pmf(const NormalizedPmf& dist, std::int64_t k);
double cdf(const NormalizedPmf& dist, std::int64_t k);
std::int64_t quantile(const NormalizedPmf& dist, double q);

}  // namespace cmnb
