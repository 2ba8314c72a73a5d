#include "cmnb/special_fn.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "cmnb/errors.hpp"

namespace cmnb {
namespace {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kHalfLogTwoPi = 0.91893853320467274178;

// Arguments are shifted upward by recurrence until they reach this value,
// after which the asymptotic expansions are accurate to double precision.
constexpr double kAsymptoticThreshold = 10.0;

// zeta(k) - 1 for k = 2..31.
constexpr std::array<double, 30> kZetaMinusOne = {
    0.64493406684822643647,   0.2020569031595942854,    0.082323233711138191516,
    0.036927755143369926331,  0.017343061984449139715,  0.0083492773819228268398,
    0.0040773561979443393787, 0.0020083928260822144179, 0.00099457512781808533715,
    0.0004941886041194645587, 0.00024608655330804829864, 0.00012271334757848914675,
    6.1248135058704829259e-5, 3.0588236307020493552e-5, 1.5282259408651871733e-5,
    7.6371976378997622736e-6, 3.8172932649998398565e-6, 1.9082127165539389257e-6,
    9.5396203387279611315e-7, 4.7693298678780646312e-7, 2.3845050272773299e-7,
    1.1921992596531107307e-7, 5.9608189051259479612e-8, 2.9803503514652280186e-8,
    1.4901554828365041235e-8, 7.450711789835429492e-9,  3.7253340247884570548e-9,
    1.8626597235130490064e-9, 9.3132743241966818287e-10, 4.656629065033784073e-10,
};

// The positive zero of psi, split into a double and its residual.
constexpr double kDigammaRootHi = 1.4616321449683622;
constexpr double kDigammaRootLo = 9.549995429965697e-17;

// psi^(k)(root) / k!, k = 1..22.
constexpr std::array<double, 22> kDigammaRootTaylor = {
    0.96767224544762117043,    -0.44276316898359210609,  0.25849976095565101062,
    -0.1639427054424065275,    0.10782405069126236576,   -0.072199561256454710926,
    0.048804288164143107225,   -0.033161126474847359292, 0.02259764823221810466,
    -0.015424765904948959139,  0.010538791616612175388,  -0.007204534386356868241,
    0.0049267813957298534464,  -0.0033698016554393280828, 0.0023051263267349278369,
    -0.0015769367714301972593, 0.0010788252019162965807, -0.00073807093899600512957,
    0.00050495326583460203518, -0.00034546802510630769956, 0.00023635601564027052792,
    -0.00016170622091974803449,
};

void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream msg;
    msg << fn << ": argument must be finite and > 0, got " << x;
    throw DomainError(msg.str());
  }
}

// sum_{k>=2} (-1)^k (zeta(k) - 1) z^k / k for |z| <= 0.5.
double zeta_tail_series(double z) {
  double sum = 0.0;
  double power = z * z;
  for (std::size_t i = 0; i < kZetaMinusOne.size(); ++i) {
    const int k = static_cast<int>(i) + 2;
    const double term = kZetaMinusOne[i] * power / k;
    sum += (k % 2 == 0) ? term : -term;
    power *= z;
  }
  return sum;
}

// ln Gamma(1 + z) for |z| <= 0.5, free of cancellation at z = 0.
double log_gamma_one_plus(double z) {
  return -std::log1p(z) + z * (1.0 - kEulerGamma) + zeta_tail_series(z);
}

// ln Gamma(2 + z) for |z| <= 0.5.
double log_gamma_two_plus(double z) {
  return z * (1.0 - kEulerGamma) + zeta_tail_series(z);
}

double stirling_log_gamma(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12.0 +
             inv2 * (-1.0 / 360.0 +
                     inv2 * (1.0 / 1260.0 +
                             inv2 * (-1.0 / 1680.0 +
                                     inv2 * (1.0 / 1188.0 +
                                             inv2 * (-691.0 / 360360.0 + inv2 / 156.0))))));
  return (x - 0.5) * std::log(x) - x + kHalfLogTwoPi + series;
}

double asymptotic_digamma(double x) {
  const double inv2 = 1.0 / (x * x);
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
  return std::log(x) - 0.5 / x - series;
}

double asymptotic_trigamma(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      1.0 / 6.0 +
      inv2 * (-1.0 / 30.0 +
              inv2 * (1.0 / 42.0 +
                      inv2 * (-1.0 / 30.0 +
                              inv2 * (5.0 / 66.0 +
                                      inv2 * (-691.0 / 2730.0 + inv2 * 7.0 / 6.0)))));
  return inv + 0.5 * inv2 + inv * inv2 * series;
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  if (x < 0.5) return log_gamma_one_plus(x) - std::log(x);
  if (x < 1.5) return log_gamma_one_plus(x - 1.0);
  if (x < 2.5) return log_gamma_two_plus(x - 2.0);
  if (x >= kAsymptoticThreshold) return stirling_log_gamma(x);

  double product = 1.0;
  double shifted = x;
  while (shifted < kAsymptoticThreshold) {
    product *= shifted;
    shifted += 1.0;
  }
  return stirling_log_gamma(shifted) - std::log(product);
}

double digamma(double x) {
  require_positive(x, "digamma");
  const double offset = (x - kDigammaRootHi) - kDigammaRootLo;
  if (std::fabs(offset) < 0.2) {
    double sum = 0.0;
    for (auto it = kDigammaRootTaylor.rbegin(); it != kDigammaRootTaylor.rend(); ++it) {
      sum = sum * offset + *it;
    }
    return sum * offset;
  }

  double shift = 0.0;
  double shifted = x;
  while (shifted < kAsymptoticThreshold) {
    shift += 1.0 / shifted;
    shifted += 1.0;
  }
  return asymptotic_digamma(shifted) - shift;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double shift = 0.0;
  double shifted = x;
  while (shifted < kAsymptoticThreshold) {
    shift += 1.0 / (shifted * shifted);
    shifted += 1.0;
  }
  return asymptotic_trigamma(shifted) + shift;
}

double log_beta(double a, double b) {
  require_positive(a, "log_beta");
  require_positive(b, "log_beta");
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double regularized_gamma_q(double s, double x) {
  require_positive(s, "regularized_gamma_q");
  if (!(x >= 0.0) || std::isnan(x)) {
    throw DomainError("regularized_gamma_q: x must be >= 0");
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;

  const double log_prefactor = s * std::log(x) - x - log_gamma(s);
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;

  if (x < s + 1.0) {
    // Lower series for P(s, x).
    double term = 1.0 / s;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
      term *= x / (s + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return 1.0 - std::exp(log_prefactor) * sum;
  }

  // Continued fraction for Q(s, x), modified Lentz.
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefactor) * h;
}

double chi_squared_survival(double statistic, double df) {
  if (!(statistic >= 0.0)) {
    throw DomainError("chi_squared_survival: statistic must be >= 0");
  }
  return regularized_gamma_q(0.5 * df, 0.5 * statistic);
}

void LogSumAccumulator::add(double log_term) {
  if (std::isnan(log_term)) {
    throw DomainError("LogSumAccumulator: NaN term");
  }
  if (log_term == -std::numeric_limits<double>::infinity()) return;
  ++count_;
  if (log_term > max_) {
    const double scale = std::exp(max_ - log_term);  // 0 on the first term
    sum_ *= scale;
    comp_ *= scale;
    max_ = log_term;
  }
  // Neumaier summation of exp(t - max).
  const double value = std::exp(log_term - max_);
  const double t = sum_ + value;
  if (std::fabs(sum_) >= value) {
    comp_ += (sum_ - t) + value;
  } else {
    comp_ += (value - t) + sum_;
  }
  sum_ = t;
}

double LogSumAccumulator::value() const {
  if (count_ == 0) return -std::numeric_limits<double>::infinity();
  return max_ + std::log(sum_ + comp_);
}

}  // namespace cmnb
