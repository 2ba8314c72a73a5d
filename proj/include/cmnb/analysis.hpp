#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cmnb/distribution.hpp"
#include "cmnb/params.hpp"

namespace cmnb {

enum class ShapeClass { LogConcave, LogConvex, Boundary };

std::string to_string(ShapeClass shape);

struct ShapeReport {
  ShapeClass shape = ShapeClass::Boundary;
  // Whether M_k = (P(k+1)/P(k)) / (P(k)/P(k-1)) agreed with the class for k = 1..checked_to.
  bool numerically_consistent = true;
  std::int64_t checked_to = 0;
  double min_second_ratio = 1.0;
  double max_second_ratio = 1.0;
  // Log-convex pmfs are infinitely divisible.
  bool infinitely_divisible = false;
};

// Log-concave iff r > 1, log-convex iff r < 1, both (Boundary) iff r = 1.
ShapeClass classify_shape(const CmnbParams& params);
ShapeReport shape_report(const CmnbParams& params, std::int64_t k_max = 100);

// M_k computed from the pmf table.
double second_ratio(const NormalizedPmf& dist, std::int64_t k);

struct DpcpMembership {
  // True when the sufficient condition holds. False means undetermined,
  // not that the distribution is outside the class.
  bool member = false;
  std::string reason;
};

// Sufficient condition: r <= 1, or r > 1 with p r^nu < 1.
DpcpMembership is_dpcp(const CmnbParams& params);

struct DpcpParams {
  double lambda = 0.0;
  std::vector<double> alpha;  // alpha[i-1] = alpha_i
  std::int64_t n_max = 0;
  double alpha_abs_sum = 0.0;
  // Copy of is_dpcp().member at the time of the solve.
  bool sufficient_condition = false;
};

// Solves P_{n+1} = lambda / (n+1) sum_{i=0}^{n} (i+1) alpha_{i+1} P_{n-i}
// for alpha_1..alpha_{n_max}, with lambda = -ln P_0.
DpcpParams dpcp_parametrization(const CmnbParams& params, std::int64_t n_max);

// Runs the compound-Poisson recursion forward: returns P_0..P_{n_max}.
std::vector<double> dpcp_reconstruct(const DpcpParams& dpcp);

enum class Dispersion { Overdispersed, Underdispersed, Indeterminate };

std::string to_string(Dispersion dispersion);

struct DispersionReport {
  Dispersion classification = Dispersion::Indeterminate;
  std::vector<double> delta_values;
  double mean = 0.0;
  double variance = 0.0;
};

// Delta_k = (1 - nu) psi'(k + 1) + nu psi'(k + r).
double dispersion_delta(const CmnbParams& params, std::int64_t k);

// Scans Delta_0..Delta_k_max. Delta_k behaves like 1/k for large k, so the
// tail is always positive; a determinate verdict needs every scanned value
// to share that sign.
DispersionReport classify_dispersion(const CmnbParams& params, std::int64_t k_max = 1000,
                                     const TruncationPolicy& policy = {});

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(const NormalizedPmf& dist);

// (1 / (1 - alpha)) ln sum pmf^alpha.
double renyi_entropy(const NormalizedPmf& dist, double alpha);
// (1 / (1 - alpha)) (sum pmf^alpha - 1).
double tsallis_entropy(const NormalizedPmf& dist, double alpha);

struct LrOrderReport {
  // pmf_Y(n) / pmf_X(n) nondecreasing on 0..N.
  bool nondecreasing = true;
  // Whether the corresponding ordering theorem's hypotheses hold.
  bool hypotheses_hold = false;
  // True when the second argument plays the role of Y (the larger one).
  bool second_is_larger = true;
  double min_log_increment = 0.0;
};

// The records must share r and differ in at most one of nu, p. X is the one
// with the smaller nu (or smaller p).
LrOrderReport lr_order_report(const CmnbParams& params1, const CmnbParams& params2,
                              std::int64_t n_max = 500);
bool lr_order_check(const CmnbParams& params1, const CmnbParams& params2,
                    std::int64_t n_max = 500);

// sum_{w=0}^{K} pmf(w) [w^nu g(w) - p (w + r)^nu g(w + 1)].
double stein_residual(const CmnbParams& params, const std::function<double(std::int64_t)>& g,
                      std::int64_t k_max);
// Same operator with parameters `op` applied to the pmf of `dist`; a nonzero
// result for g = 1 shows `dist` is not CMNB(op).
double stein_residual(const NormalizedPmf& dist, const CmnbParams& op,
                      const std::function<double(std::int64_t)>& g, std::int64_t k_max);
// Picks K so that p (K + r)^nu pmf(K) < 1e-12.
double stein_residual(const CmnbParams& params, const std::function<double(std::int64_t)>& g);

struct TvDistance {
  double value = 0.0;       // (1/2) sum_{k <= K} |a_k - b_k|
  double tail_bound = 0.0;  // (1/2) (P_A(X > K) + P_B(X > K))
  std::int64_t k_max = 0;
};

TvDistance tv_distance(const NormalizedPmf& a, const NormalizedPmf& b, std::int64_t k_max);
// K is the first point where both cdfs reach 1 - 1e-10.
TvDistance tv_distance(const NormalizedPmf& a, const NormalizedPmf& b);
TvDistance tv_distance(std::span<const double> a, std::span<const double> b);

// CMNB(r, nu, lambda / (r^nu + lambda)) against CMP(lambda, nu).
double limit_cmnb_to_cmp(double r, double nu, double lambda);
// CMNHG(z, nu, m, n) against CMNB(m, nu, p), z = round(n p~ / (1 - p~)), p~ = p^(1/nu).
double limit_cmnhg_to_cmnb(double m, double nu, double p, double n);
// CMB(m, lambda / m^nu, nu) against CMP(lambda, nu).
double limit_cmb_to_cmp(std::int64_t m, double nu, double lambda);

struct LimitRow {
  double grid_value = 0.0;
  double distance = 0.0;
};

struct LimitTable {
  std::string name;
  std::vector<LimitRow> rows;
  bool strictly_decreasing = false;
};

LimitTable limit_table_cmnb_to_cmp(double nu, double lambda, const std::vector<double>& r_grid);
LimitTable limit_table_cmnhg_to_cmnb(double m, double nu, double p,
                                     const std::vector<double>& n_grid);
LimitTable limit_table_cmb_to_cmp(double nu, double lambda,
                                  const std::vector<std::int64_t>& m_grid);

}  // namespace cmnb
