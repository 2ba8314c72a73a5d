#pragma once

#include <cstddef>
#include <limits>

namespace cmnb {

// ln Gamma(x) for x > 0.
double log_gamma(double x);

// psi(x) = Gamma'(x) / Gamma(x) for x > 0.
double digamma(double x);

// psi'(x) = sum_{i >= 0} 1 / (x + i)^2 for x > 0.
double trigamma(double x);

// ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b).
double log_beta(double a, double b);

// Upper regularized incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s).
double regularized_gamma_q(double s, double x);

// Upper-tail probability of a chi-squared variate with `df` degrees of freedom.
double chi_squared_survival(double statistic, double df);

/// Streaming log-sum-exp.
///
/// Terms are absorbed as logarithms. The accumulator keeps the running
/// maximum and a compensated sum of exp(t - max), rescaling whenever a new
/// maximum arrives, so the value stays accurate across hundreds of orders of
/// magnitude. Absorbing -inf is a no-op.
class LogSumAccumulator {
 public:
  void add(double log_term);

  // log of the accumulated sum; -inf when nothing finite has been added.
  double value() const;

  double running_max() const { return max_; }
  double running_scaled_sum() const { return sum_ + comp_; }
  std::size_t count() const { return count_; }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  double comp_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace cmnb
