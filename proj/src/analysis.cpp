#include "cmnb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cmnb/errors.hpp"
#include "cmnb/special_fn.hpp"
#include "internal/compensated_sum.hpp"

namespace cmnb {
namespace {

constexpr double kNegligible = 1e-17;

using Neumaier = internal::CompensatedSum;

// Visits k = 0, 1, ... with log pmf(k). Past the truncation point of an
// unbounded family the scan ends as soon as `negligible(k, lp)` holds.
template <class Visit, class Negligible>
void scan_support(const NormalizedPmf& dist, Visit visit, Negligible negligible) {
  const auto top = dist.support_max();
  const std::int64_t limit = top ? *top : dist.truncation_point() + dist.policy().max_terms;
  for (std::int64_t k = 0; k <= limit; ++k) {
    const double lp = dist.log_pmf(k);
    visit(k, lp);
    if (!top && k >= dist.truncation_point() && negligible(k, lp)) return;
  }
  if (!top) throw TruncationError("support scan did not reach a negligible tail");
}

bool strictly_decreasing(const std::vector<LimitRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].distance < rows[i - 1].distance)) return false;
  }
  return true;
}

}  // namespace

std::string to_string(ShapeClass shape) {
  switch (shape) {
    case ShapeClass::LogConcave: return "log-concave";
    case ShapeClass::LogConvex: return "log-convex";
    case ShapeClass::Boundary: return "boundary";
  }
  return "unknown";
}

std::string to_string(Dispersion dispersion) {
  switch (dispersion) {
    case Dispersion::Overdispersed: return "overdispersed";
    case Dispersion::Underdispersed: return "underdispersed";
    case Dispersion::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

ShapeClass classify_shape(const CmnbParams& params) {
  validate(params);
  if (params.r > 1.0) return ShapeClass::LogConcave;
  if (params.r < 1.0) return ShapeClass::LogConvex;
  return ShapeClass::Boundary;
}

double second_ratio(const NormalizedPmf& dist, std::int64_t k) {
  if (k < 1) throw DomainError("second_ratio: k >= 1 required");
  return std::exp(dist.log_pmf(k + 1) - 2.0 * dist.log_pmf(k) + dist.log_pmf(k - 1));
}

ShapeReport shape_report(const CmnbParams& params, std::int64_t k_max) {
  ShapeReport report;
  report.shape = classify_shape(params);
  report.infinitely_divisible = report.shape != ShapeClass::LogConcave;
  report.checked_to = k_max;
  const NormalizedPmf dist(params);
  constexpr double kSlack = 1e-12;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const double m = second_ratio(dist, k);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  if (k_max < 1) lo = hi = 1.0;
  report.min_second_ratio = lo;
  report.max_second_ratio = hi;
  switch (report.shape) {
    case ShapeClass::LogConcave: report.numerically_consistent = hi <= 1.0 + kSlack; break;
    case ShapeClass::LogConvex: report.numerically_consistent = lo >= 1.0 - kSlack; break;
    case ShapeClass::Boundary:
      report.numerically_consistent = hi <= 1.0 + kSlack && lo >= 1.0 - kSlack;
      break;
  }
  return report;
}

DpcpMembership is_dpcp(const CmnbParams& params) {
  validate(params);
  DpcpMembership out;
  if (params.r <= 1.0) {
    out.member = true;
    out.reason = "r <= 1";
    return out;
  }
  const double lead = params.p * std::pow(params.r, params.nu);
  std::ostringstream msg;
  if (lead < 1.0) {
    out.member = true;
    msg << "r > 1 and p*r^nu = " << lead << " < 1";
  } else {
    out.member = false;
    msg << "r > 1 and p*r^nu = " << lead << " >= 1: sufficient condition fails, membership undetermined";
  }
  out.reason = msg.str();
  return out;
}

DpcpParams dpcp_parametrization(const CmnbParams& params, std::int64_t n_max) {
  if (n_max < 1) throw DomainError("dpcp_parametrization: n_max >= 1 required");
  DpcpParams out;
  out.sufficient_condition = is_dpcp(params).member;
  out.n_max = n_max;

  const NormalizedPmf dist(params);
  const double lp0 = dist.log_pmf(0);
  out.lambda = -lp0;
  if (!(out.lambda > 0.0) || !std::isfinite(out.lambda)) {
    throw NumericalError("dpcp_parametrization: P_0 is not in (0, 1)");
  }
  std::vector<double> q(static_cast<std::size_t>(n_max) + 1);
  for (std::int64_t k = 0; k <= n_max; ++k) {
    q[static_cast<std::size_t>(k)] = std::exp(dist.log_pmf(k) - lp0);
    if (!std::isfinite(q[static_cast<std::size_t>(k)])) {
      throw NumericalError("dpcp_parametrization: P_k / P_0 overflows");
    }
  }

  std::vector<double>& alpha = out.alpha;
  alpha.assign(static_cast<std::size_t>(n_max), 0.0);
  for (std::int64_t n = 0; n < n_max; ++n) {
    Neumaier acc;
    acc.add(static_cast<double>(n + 1) * q[static_cast<std::size_t>(n + 1)] / out.lambda);
    for (std::int64_t i = 0; i < n; ++i) {
      acc.add(-static_cast<double>(i + 1) * alpha[static_cast<std::size_t>(i)] *
              q[static_cast<std::size_t>(n - i)]);
    }
    alpha[static_cast<std::size_t>(n)] = acc.value() / static_cast<double>(n + 1);
  }
  for (double a : alpha) out.alpha_abs_sum += std::fabs(a);
  return out;
}

std::vector<double> dpcp_reconstruct(const DpcpParams& dpcp) {
  const auto n_max = static_cast<std::size_t>(dpcp.n_max);
  std::vector<double> pmf(n_max + 1, 0.0);
  pmf[0] = std::exp(-dpcp.lambda);
  for (std::size_t n = 0; n < n_max; ++n) {
    Neumaier acc;
    for (std::size_t i = 0; i <= n; ++i) {
      acc.add(static_cast<double>(i + 1) * dpcp.alpha[i] * pmf[n - i]);
    }
    pmf[n + 1] = dpcp.lambda / static_cast<double>(n + 1) * acc.value();
  }
  return pmf;
}

double dispersion_delta(const CmnbParams& params, std::int64_t k) {
  validate(params);
  if (k < 0) throw DomainError("dispersion_delta: k >= 0 required");
  const double kd = static_cast<double>(k);
  return (1.0 - params.nu) * trigamma(kd + 1.0) + params.nu * trigamma(kd + params.r);
}

DispersionReport classify_dispersion(const CmnbParams& params, std::int64_t k_max,
                                     const TruncationPolicy& policy) {
  DispersionReport report;
  bool all_positive = true;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    const double d = dispersion_delta(params, k);
    report.delta_values.push_back(d);
    if (!(d > 0.0)) all_positive = false;
  }
  report.classification = all_positive ? Dispersion::Overdispersed : Dispersion::Indeterminate;
  const Moments m = moments(NormalizedPmf(params, policy));
  report.mean = m.mean;
  report.variance = m.variance;
  return report;
}

Moments moments(const NormalizedPmf& dist) {
  Neumaier first;
  scan_support(
      dist, [&](std::int64_t k, double lp) { first.add(static_cast<double>(k) * std::exp(lp)); },
      [&](std::int64_t k, double lp) {
        return static_cast<double>(k + 1) * std::exp(lp) < kNegligible * first.value();
      });
  const double mean = first.value();
  Neumaier second;
  scan_support(
      dist,
      [&](std::int64_t k, double lp) {
        const double d = static_cast<double>(k) - mean;
        second.add(d * d * std::exp(lp));
      },
      [&](std::int64_t k, double lp) {
        const double d = static_cast<double>(k + 1) - mean;
        return d * d * std::exp(lp) < kNegligible * std::max(second.value(), 1e-300);
      });
  return {mean, second.value()};
}

namespace {

double log_power_sum(const NormalizedPmf& dist, double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
    throw DomainError("entropy: alpha must be > 0 and != 1");
  }
  LogSumAccumulator acc;
  const double log_small = std::log(kNegligible);
  scan_support(
      dist, [&](std::int64_t, double lp) { acc.add(alpha * lp); },
      [&](std::int64_t, double lp) { return alpha * lp < log_small + acc.value(); });
  return acc.value();
}

}  // namespace

double renyi_entropy(const NormalizedPmf& dist, double alpha) {
  return log_power_sum(dist, alpha) / (1.0 - alpha);
}

double tsallis_entropy(const NormalizedPmf& dist, double alpha) {
  return std::expm1(log_power_sum(dist, alpha)) / (1.0 - alpha);
}

LrOrderReport lr_order_report(const CmnbParams& params1, const CmnbParams& params2,
                              std::int64_t n_max) {
  validate(params1);
  validate(params2);
  if (params1.r != params2.r) {
    throw IncomparableParameters("lr_order_check: the two records must share r");
  }
  const bool nu_differs = params1.nu != params2.nu;
  const bool p_differs = params1.p != params2.p;
  if (nu_differs && p_differs) {
    throw IncomparableParameters("lr_order_check: nu and p both differ");
  }

  LrOrderReport report;
  report.second_is_larger = nu_differs ? params1.nu < params2.nu : params1.p <= params2.p;
  const CmnbParams& x = report.second_is_larger ? params1 : params2;
  const CmnbParams& y = report.second_is_larger ? params2 : params1;
  const double r = x.r;
  if (nu_differs) {
    report.hypotheses_hold = r >= 1.0;
  } else {
    report.hypotheses_hold = std::max(x.nu, y.nu) <= 1.0 || r >= 1.0;
  }

  const NormalizedPmf dx(x);
  const NormalizedPmf dy(y);
  constexpr double kSlack = 1e-10;
  double min_inc = std::numeric_limits<double>::infinity();
  double prev = dy.log_pmf(0) - dx.log_pmf(0);
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double cur = dy.log_pmf(n) - dx.log_pmf(n);
    min_inc = std::min(min_inc, cur - prev);
    prev = cur;
  }
  report.min_log_increment = n_max >= 1 ? min_inc : 0.0;
  report.nondecreasing = report.min_log_increment >= -kSlack;
  return report;
}

bool lr_order_check(const CmnbParams& params1, const CmnbParams& params2, std::int64_t n_max) {
  return lr_order_report(params1, params2, n_max).nondecreasing;
}

double stein_residual(const NormalizedPmf& dist, const CmnbParams& op,
                      const std::function<double(std::int64_t)>& g, std::int64_t k_max) {
  validate(op);
  const double log_p = std::log(op.p);
  Neumaier acc;
  for (std::int64_t w = 0; w <= k_max; ++w) {
    const double lp = dist.log_pmf(w);
    const double wd = static_cast<double>(w);
    const double left = w == 0 ? 0.0 : std::exp(lp + op.nu * std::log(wd)) * g(w);
    const double right = std::exp(lp + log_p + op.nu * std::log(wd + op.r)) * g(w + 1);
    acc.add(left);
    acc.add(-right);
  }
  return acc.value();
}

double stein_residual(const CmnbParams& params, const std::function<double(std::int64_t)>& g,
                      std::int64_t k_max) {
  validate(params);
  return stein_residual(NormalizedPmf(params), params, g, k_max);
}

double stein_residual(const CmnbParams& params, const std::function<double(std::int64_t)>& g) {
  validate(params);
  const NormalizedPmf dist(params);
  const double log_p = std::log(params.p);
  const double log_cut = std::log(1e-12);
  const std::int64_t limit = dist.truncation_point() + dist.policy().max_terms;
  std::int64_t k = dist.truncation_point();
  while (log_p + params.nu * std::log(static_cast<double>(k) + params.r) + dist.log_pmf(k) >=
         log_cut) {
    if (++k > limit) throw TruncationError("stein_residual: no cut-off found");
  }
  return stein_residual(params, g, k);
}

TvDistance tv_distance(const NormalizedPmf& a, const NormalizedPmf& b, std::int64_t k_max) {
  TvDistance out;
  out.k_max = k_max;
  Neumaier acc;
  for (std::int64_t k = 0; k <= k_max; ++k) acc.add(std::fabs(a.pmf(k) - b.pmf(k)));
  out.value = 0.5 * acc.value();
  out.tail_bound =
      0.5 * (std::max(0.0, 1.0 - a.cdf(k_max)) + std::max(0.0, 1.0 - b.cdf(k_max)));
  return out;
}

TvDistance tv_distance(const NormalizedPmf& a, const NormalizedPmf& b) {
  constexpr double kLevel = 1.0 - 1e-10;
  const std::int64_t limit = std::max(a.truncation_point(), b.truncation_point()) +
                             std::max(a.policy().max_terms, b.policy().max_terms);
  std::int64_t k = 0;
  while (a.cdf(k) < kLevel || b.cdf(k) < kLevel) {
    if (++k > limit) throw TruncationError("tv_distance: cdf never reached 1 - 1e-10");
  }
  return tv_distance(a, b, k);
}

TvDistance tv_distance(std::span<const double> a, std::span<const double> b) {
  TvDistance out;
  const std::size_t n = std::max(a.size(), b.size());
  Neumaier acc;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    acc.add(std::fabs(x - y));
  }
  out.value = 0.5 * acc.value();
  out.k_max = n == 0 ? 0 : static_cast<std::int64_t>(n) - 1;
  return out;
}

double limit_cmnb_to_cmp(double r, double nu, double lambda) {
  if (!(r > 0.0) || !(nu > 0.0) || !(lambda > 0.0)) {
    throw DomainError("limit_cmnb_to_cmp: r, nu, lambda must be > 0");
  }
  const double p = lambda / (std::pow(r, nu) + lambda);
  const NormalizedPmf cmnb_dist(CmnbParams{r, nu, p});
  const NormalizedPmf cmp_dist(CmpParams{lambda, nu});
  return tv_distance(cmnb_dist, cmp_dist).value;
}

double limit_cmnhg_to_cmnb(double m, double nu, double p, double n) {
  if (!(m > 0.0) || !(nu > 0.0) || !(p > 0.0 && p < 1.0) || !(n > 0.0)) {
    throw DomainError("limit_cmnhg_to_cmnb: m, nu, n > 0 and 0 < p < 1 required");
  }
  const double pt = std::pow(p, 1.0 / nu);
  const auto z = static_cast<std::int64_t>(std::llround(n * pt / (1.0 - pt)));
  const NormalizedPmf hg(CmnhgParams{z, nu, m, n});
  const NormalizedPmf target(CmnbParams{m, nu, p});
  return tv_distance(hg, target).value;
}

double limit_cmb_to_cmp(std::int64_t m, double nu, double lambda) {
  if (m < 1 || !(nu > 0.0) || !(lambda > 0.0)) {
    throw DomainError("limit_cmb_to_cmp: m >= 1, nu > 0, lambda > 0 required");
  }
  const double p = lambda / std::pow(static_cast<double>(m), nu);
  if (!(p < 1.0)) throw DomainError("limit_cmb_to_cmp: lambda / m^nu must be < 1");
  const NormalizedPmf cmb_dist(CmbParams{m, p, nu});
  const NormalizedPmf cmp_dist(CmpParams{lambda, nu});
  return tv_distance(cmb_dist, cmp_dist).value;
}

LimitTable limit_table_cmnb_to_cmp(double nu, double lambda, const std::vector<double>& r_grid) {
  LimitTable table;
  table.name = "cmnb->cmp";
  for (double r : r_grid) table.rows.push_back({r, limit_cmnb_to_cmp(r, nu, lambda)});
  table.strictly_decreasing = strictly_decreasing(table.rows);
  return table;
}

LimitTable limit_table_cmnhg_to_cmnb(double m, double nu, double p,
                                     const std::vector<double>& n_grid) {
  LimitTable table;
  table.name = "cmnhg->cmnb";
  for (double n : n_grid) table.rows.push_back({n, limit_cmnhg_to_cmnb(m, nu, p, n)});
  table.strictly_decreasing = strictly_decreasing(table.rows);
  return table;
}

LimitTable limit_table_cmb_to_cmp(double nu, double lambda,
                                  const std::vector<std::int64_t>& m_grid) {
  LimitTable table;
  table.name = "cmb->cmp";
  for (std::int64_t m : m_grid) {
    table.rows.push_back({static_cast<double>(m), limit_cmb_to_cmp(m, nu, lambda)});
  }
  table.strictly_decreasing = strictly_decreasing(table.rows);
  return table;
}

}  // namespace cmnb
