#pragma once

#include <cstdint>
#include <vector>

#include "cmnb/distribution.hpp"
#include "cmnb/params.hpp"

namespace cmnb {

// P(k) / P(k-1) = p ((k - 1 + r) / k)^nu, k >= 1.
double pmf_ratio(const CmnbParams& params, std::int64_t k);

// P(0) / P(1) = (1/p) (1/r)^nu.
double zero_inflation_ratio(const CmnbParams& params);
// NB analogue 1 / (p r).
double zero_inflation_ratio(const NbParams& params);

// Closed-form log pmf of CMNB given ln C.
double log_pmf_cmnb(const CmnbParams& params, std::int64_t k, double log_c);

// p_tilde = p^(1/nu) and its inverse.
CmnbTildeParams reparam_ptilde(const CmnbParams& params);
CmnbParams reparam_ptilde_inverse(const CmnbTildeParams& params);

// ln of sum_i [NB(i; r, p_tilde)]^nu, the normaliser of the p_tilde form.
double log_normalizer_tilde(const CmnbTildeParams& params, const TruncationPolicy& policy = {});

// log pmf of [NB(k; r, p_tilde)]^nu / sum_i [NB(i; r, p_tilde)]^nu.
double log_pmf_tilde(const CmnbTildeParams& params, std::int64_t k,
                     const TruncationPolicy& policy = {});

// Ratio of consecutive probabilities written as (a + b/k)^nu.
struct Ab0Coefficients {
  double a = 0.0;
  double b = 0.0;
  double nu = 1.0;

  double ratio(std::int64_t k) const;
};

Ab0Coefficients ab0_coefficients(const CmnbParams& params);
Ab0Coefficients ab0_coefficients(const CmpParams& params);
// CMB has a = -p_tilde, b = (m + 1) p_tilde with p_tilde = (p / (1 - p))^(1/nu).
Ab0Coefficients ab0_coefficients(const CmbParams& params);

// ln w(k) with w(k) = Gamma(1 + k)^(1 - nu) Gamma(r + k)^nu, the weight in the
// weighted-Poisson form pmf(k) proportional to w(k) p^k / k!.
double weight_function(std::int64_t k, double r, double nu);

// X ~ CMNB(rx, nu, p), Y ~ CMNB(ry, nu, p) independent: X | X + Y = s is
// CMNHG(z = s, nu, m = rx, n = ry). p drops out.
CmnhgParams conditional_given_sum(double rx, double ry, double nu, std::int64_t s);

// nu (ln binom(z, k) + ln B(m + k, n + z - k) - ln B(m, n)) - ln N(m, n, z, nu).
double log_pmf_cmnhg(const CmnhgParams& params, std::int64_t k);
std::vector<double> pmf_cmnhg(const CmnhgParams& params);

}  // namespace cmnb
