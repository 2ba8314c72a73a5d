#include "cmnb/families.hpp"

#include <cmath>
#include <limits>

#include "cmnb/errors.hpp"
#include "cmnb/special_fn.hpp"

namespace cmnb {

double pmf_ratio(const CmnbParams& params, std::int64_t k) {
  if (k < 1) throw DomainError("pmf_ratio: k >= 1 required");
  const double kd = static_cast<double>(k);
  if (k == 1) return params.p * std::pow(params.r, params.nu);
  return params.p * std::exp(params.nu * std::log1p((params.r - 1.0) / kd));
}

double zero_inflation_ratio(const CmnbParams& params) {
  validate(params);
  return 1.0 / (params.p * std::pow(params.r, params.nu));
}

double zero_inflation_ratio(const NbParams& params) {
  validate(params);
  return 1.0 / (params.p * params.r);
}

double log_pmf_cmnb(const CmnbParams& params, std::int64_t k, double log_c) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  const double r = params.r;
  return params.nu * (log_gamma(r + kd) - log_gamma(kd + 1.0) - log_gamma(r)) +
         kd * std::log(params.p) + r * std::log1p(-params.p) - log_c;
}

CmnbTildeParams reparam_ptilde(const CmnbParams& params) { return to_tilde(params); }

CmnbParams reparam_ptilde_inverse(const CmnbTildeParams& params) { return from_tilde(params); }

double log_normalizer_tilde(const CmnbTildeParams& params, const TruncationPolicy& policy) {
  const CmnbParams base = from_tilde(params);
  // [NB(k; r, pt)]^nu = C(r, nu, pt^nu) pmf_CMNB(k) (1-pt)^{r nu} / (1-pt^nu)^r.
  const double log_c = log_normalizer_cmnb(base, policy);
  return log_c + params.r * params.nu * std::log1p(-params.p_tilde) -
         params.r * std::log1p(-base.p);
}

double log_pmf_tilde(const CmnbTildeParams& params, std::int64_t k,
                     const TruncationPolicy& policy) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  validate(params);
  const double kd = static_cast<double>(k);
  const double r = params.r;
  const double log_nb = log_gamma(r + kd) - log_gamma(kd + 1.0) - log_gamma(r) +
                        kd * std::log(params.p_tilde) + r * std::log1p(-params.p_tilde);
  return params.nu * log_nb - log_normalizer_tilde(params, policy);
}

double Ab0Coefficients::ratio(std::int64_t k) const {
  return std::pow(a + b / static_cast<double>(k), nu);
}

Ab0Coefficients ab0_coefficients(const CmnbParams& params) {
  validate(params);
  const double pt = std::pow(params.p, 1.0 / params.nu);
  return {pt, (params.r - 1.0) * pt, params.nu};
}

Ab0Coefficients ab0_coefficients(const CmpParams& params) {
  validate(params);
  if (params.nu == 0.0) throw DomainError("ab0_coefficients: CMP with nu = 0 has no (a,b) form");
  return {0.0, std::pow(params.lambda, 1.0 / params.nu), params.nu};
}

Ab0Coefficients ab0_coefficients(const CmbParams& params) {
  validate(params);
  const double pt = std::pow(params.p / (1.0 - params.p), 1.0 / params.nu);
  return {-pt, (static_cast<double>(params.m) + 1.0) * pt, params.nu};
}

double weight_function(std::int64_t k, double r, double nu) {
  if (k < 0) throw DomainError("weight_function: k >= 0 required");
  const double kd = static_cast<double>(k);
  return (1.0 - nu) * log_gamma(1.0 + kd) + nu * log_gamma(r + kd);
}

CmnhgParams conditional_given_sum(double rx, double ry, double nu, std::int64_t s) {
  if (s < 0) throw DomainError("conditional_given_sum: s >= 0 required");
  CmnhgParams out{s, nu, rx, ry};
  validate(out);
  return out;
}

double log_pmf_cmnhg(const CmnhgParams& params, std::int64_t k) {
  validate(params);
  if (k < 0 || k > params.z) return -std::numeric_limits<double>::infinity();
  return NormalizedPmf(params).log_pmf(k);
}

std::vector<double> pmf_cmnhg(const CmnhgParams& params) {
  return NormalizedPmf(params).pmf_values(params.z);
}

}  // namespace cmnb
