#include "cmnb/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include "cmnb/errors.hpp"
#include "cmnb/special_fn.hpp"
#include "internal/compensated_sum.hpp"

namespace cmnb {
namespace {

using internal::CompensatedSum;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::int64_t kBlock = 64;

// Unnormalized log-terms u_k of a family, described by u_0 and the log of the
// consecutive ratio u_k - u_{k-1}.
struct Kernel {
  double log_u0 = 0.0;
  std::function<double(std::int64_t)> log_ratio;
  // Supremum of the ratios of all pairs past k. Only used for unbounded families.
  std::function<double(std::int64_t)> tail_rho;
  // Closed form for u_k, used far past the table.
  std::function<double(std::int64_t)> log_u_direct;
  std::optional<std::int64_t> support_max;
};

double cmnb_log_ratio(double r, double nu, double log_p, std::int64_t k) {
  if (k == 1) return log_p + nu * std::log(r);
  return log_p + nu * std::log1p((r - 1.0) / static_cast<double>(k));
}

Kernel make_cmnb_kernel(double r, double nu, double p) {
  const double log_p = std::log(p);
  Kernel kernel;
  kernel.log_u0 = r * std::log1p(-p);
  kernel.log_ratio = [=](std::int64_t k) { return cmnb_log_ratio(r, nu, log_p, k); };
  kernel.tail_rho = [=](std::int64_t k) {
    // Ratios fall towards p when r > 1 and rise towards p when r < 1.
    return r >= 1.0 ? std::exp(cmnb_log_ratio(r, nu, log_p, k + 1)) : p;
  };
  const double lg_r = log_gamma(r);
  kernel.log_u_direct = [=](std::int64_t k) {
    const double kd = static_cast<double>(k);
    return nu * (log_gamma(r + kd) - log_gamma(kd + 1.0) - lg_r) + kd * log_p +
           r * std::log1p(-p);
  };
  return kernel;
}

struct KernelBuilder {
  Kernel operator()(const CmnbParams& q) const { return make_cmnb_kernel(q.r, q.nu, q.p); }
  Kernel operator()(const NbParams& q) const { return make_cmnb_kernel(q.r, 1.0, q.p); }

  Kernel operator()(const CmpParams& q) const {
    const double log_lambda = std::log(q.lambda);
    const double nu = q.nu;
    const double lambda = q.lambda;
    Kernel kernel;
    kernel.log_u0 = 0.0;
    kernel.log_ratio = [=](std::int64_t k) {
      return log_lambda - nu * std::log(static_cast<double>(k));
    };
    kernel.tail_rho = [=](std::int64_t k) {
      return nu > 0.0 ? std::exp(log_lambda - nu * std::log(static_cast<double>(k + 1))) : lambda;
    };
    kernel.log_u_direct = [=](std::int64_t k) {
      const double kd = static_cast<double>(k);
      return kd * log_lambda - nu * log_gamma(kd + 1.0);
    };
    return kernel;
  }

  Kernel operator()(const CmbParams& q) const {
    const double log_odds = std::log(q.p) - std::log1p(-q.p);
    const double nu = q.nu;
    const double m = static_cast<double>(q.m);
    Kernel kernel;
    kernel.log_u0 = m * std::log1p(-q.p);
    kernel.log_ratio = [=](std::int64_t k) {
      const double kd = static_cast<double>(k);
      return log_odds + nu * std::log((m + 1.0 - kd) / kd);
    };
    kernel.support_max = q.m;
    return kernel;
  }

  Kernel operator()(const CmnhgParams& q) const {
    const double nu = q.nu;
    const double m = q.m;
    const double n = q.n;
    const double z = static_cast<double>(q.z);
    Kernel kernel;
    kernel.log_u0 = nu * (log_beta(m, n + z) - log_beta(m, n));
    kernel.log_ratio = [=](std::int64_t k) {
      const double kd = static_cast<double>(k);
      return nu * (std::log((z - kd + 1.0) / kd) + std::log((m + kd - 1.0) / (n + z - kd)));
    };
    kernel.support_max = q.z;
    return kernel;
  }
};

}  // namespace

struct NormalizedPmf::Impl {
  Family family;
  TruncationPolicy policy;
  Kernel kernel;
  double log_normalizer = 0.0;
  // ln(C / u_0); tabulated terms are kept relative to u_0 so that huge
  // log_u0 values do not cost precision in log_pmf.
  double log_sum_rel = 0.0;
  std::int64_t truncation_point = 0;
  double tail_bound = 0.0;

  mutable std::shared_mutex mutex;
  mutable std::vector<double> log_pmf;
  mutable std::vector<double> cdf;
  mutable CompensatedSum log_u;
  mutable CompensatedSum mass;
  mutable bool saturated = false;
  mutable std::int64_t last_increase = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(log_pmf.size()); }

  // The whole support is tabulated.
  bool complete() const { return kernel.support_max && size() > *kernel.support_max; }

  // Nothing further can move the cdf.
  bool cdf_final() const { return complete() || saturated; }

  // Takes ln(u_k / u_0).
  void push(double log_rel_k) const {
    const double lp = log_rel_k - log_sum_rel;
    const double before = mass.value();
    mass.add(std::exp(lp));
    const double c = std::min(1.0, mass.value());
    if (mass.value() > before) last_increase = size();
    log_pmf.push_back(lp);
    cdf.push_back(c);
  }

  // Caller holds the exclusive lock.
  void extend_block() const {
    if (complete()) return;
    const double cdf_before = cdf.empty() ? 0.0 : cdf.back();
    std::int64_t stop = size() + kBlock;
    if (kernel.support_max) stop = std::min(stop, *kernel.support_max + 1);
    for (std::int64_t k = size(); k < stop; ++k) {
      log_u.add(kernel.log_ratio(k));
      push(log_u.value());
    }
    if (!kernel.support_max) {
      const std::int64_t last = size() - 1;
      if (cdf.back() == cdf_before && kernel.tail_rho(last) < 1.0) saturated = true;
    }
  }

  // Extends until k is cached or the table cannot grow. Caller holds the
  // exclusive lock.
  void extend_to(std::int64_t k) const {
    while (size() <= k && !complete()) {
      if (size() > policy.max_terms + truncation_point) {
        std::ostringstream msg;
        msg << "pmf table extension exceeded " << policy.max_terms << " terms";
        throw TruncationError(msg.str());
      }
      extend_block();
    }
  }
};

NormalizedPmf::NormalizedPmf(Family family, TruncationPolicy policy)
    : impl_(std::make_shared<Impl>()) {
  validate(family);
  if (!(policy.rel_tol > 0.0) || policy.max_terms < 1) {
    throw InvalidParameter("TruncationPolicy: rel_tol > 0 and max_terms >= 1 required");
  }
  Impl& impl = *impl_;
  impl.family = std::move(family);
  impl.policy = policy;
  impl.kernel = std::visit(KernelBuilder{}, impl.family);
  const Kernel& kernel = impl.kernel;

  std::vector<double> log_u;
  LogSumAccumulator acc;
  CompensatedSum running;
  log_u.push_back(0.0);
  acc.add(log_u.back());

  if (kernel.support_max) {
    for (std::int64_t k = 1; k <= *kernel.support_max; ++k) {
      running.add(kernel.log_ratio(k));
      log_u.push_back(running.value());
      acc.add(log_u.back());
    }
    impl.truncation_point = *kernel.support_max;
  } else {
    // The table and the normaliser run five orders of magnitude past the
    // truncation point, so the normaliser is exact to double precision while
    // truncation_point() still follows the policy.
    const double log_tol = std::log(policy.rel_tol);
    const double log_tol_sum = log_tol + std::log(1e-5);
    std::optional<std::int64_t> cut;
    std::int64_t k = 0;
    for (;;) {
      const double rho = kernel.tail_rho(k);
      if (rho < 1.0) {
        const double log_sum = acc.value();
        const double log_term = log_u.back();
        const double log_tail = log_term + std::log(rho) - std::log1p(-rho);
        const double worst = std::max(log_term, log_tail) - log_sum;
        if (!cut && worst < log_tol) {
          cut = k;
          impl.tail_bound = std::exp(log_tail - log_sum);
        }
        if (worst < log_tol_sum) break;
      }
      ++k;
      if (k > policy.max_terms) {
        std::ostringstream msg;
        msg << family_name(impl.family) << " normalizer: series not converged within "
            << policy.max_terms << " terms";
        throw TruncationError(msg.str());
      }
      running.add(kernel.log_ratio(k));
      log_u.push_back(running.value());
      acc.add(log_u.back());
    }
    impl.truncation_point = *cut;
  }

  impl.log_sum_rel = acc.value();
  impl.log_normalizer = kernel.log_u0 + impl.log_sum_rel;
  impl.log_u = running;
  impl.log_pmf.reserve(log_u.size());
  impl.cdf.reserve(log_u.size());
  for (double u : log_u) impl.push(u);
}

const Family& NormalizedPmf::family() const { return impl_->family; }
const TruncationPolicy& NormalizedPmf::policy() const { return impl_->policy; }
double NormalizedPmf::log_normalizer() const { return impl_->log_normalizer; }
std::int64_t NormalizedPmf::truncation_point() const { return impl_->truncation_point; }
double NormalizedPmf::tail_bound() const { return impl_->tail_bound; }
std::optional<std::int64_t> NormalizedPmf::support_max() const {
  return impl_->kernel.support_max;
}

std::int64_t NormalizedPmf::cached_size() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->size();
}

double NormalizedPmf::log_pmf(std::int64_t k) const {
  const Impl& impl = *impl_;
  if (k < 0) return kNegInf;
  if (impl.kernel.support_max && k > *impl.kernel.support_max) return kNegInf;
  {
    std::shared_lock lock(impl.mutex);
    if (k < impl.size()) return impl.log_pmf[static_cast<std::size_t>(k)];
  }
  if (k > impl.truncation_point + impl.policy.max_terms) {
    return impl.kernel.log_u_direct(k) - impl.log_normalizer;
  }
  std::unique_lock lock(impl.mutex);
  impl.extend_to(k);
  if (k < impl.size()) return impl.log_pmf[static_cast<std::size_t>(k)];
  return impl.kernel.log_u_direct(k) - impl.log_normalizer;
}

double NormalizedPmf::pmf(std::int64_t k) const { return std::exp(log_pmf(k)); }

double NormalizedPmf::cdf(std::int64_t k) const {
  const Impl& impl = *impl_;
  if (k < 0) return 0.0;
  {
    std::shared_lock lock(impl.mutex);
    if (k < impl.size()) return impl.cdf[static_cast<std::size_t>(k)];
    if (impl.cdf_final()) return impl.cdf.back();
  }
  std::unique_lock lock(impl.mutex);
  while (impl.size() <= k && !impl.cdf_final()) impl.extend_to(impl.size());
  if (k < impl.size()) return impl.cdf[static_cast<std::size_t>(k)];
  return impl.cdf.back();
}

std::int64_t NormalizedPmf::quantile(double q) const {
  const Impl& impl = *impl_;
  if (std::isnan(q) || q < 0.0 || q > 1.0) {
    throw DomainError("quantile: q must lie in [0, 1]");
  }
  if (q <= 0.0) return 0;
  if (q >= 1.0) return impl.kernel.support_max.value_or(impl.truncation_point);

  auto search = [&impl, q]() -> std::optional<std::int64_t> {
    auto it = std::lower_bound(impl.cdf.begin(), impl.cdf.end(), q);
    if (it == impl.cdf.end()) return std::nullopt;
    return static_cast<std::int64_t>(it - impl.cdf.begin());
  };
  {
    std::shared_lock lock(impl.mutex);
    if (auto k = search()) return *k;
    if (impl.cdf_final()) {
      return impl.kernel.support_max ? *impl.kernel.support_max : impl.last_increase;
    }
  }
  std::unique_lock lock(impl.mutex);
  for (;;) {
    if (auto k = search()) return *k;
    if (impl.cdf_final()) {
      return impl.kernel.support_max ? *impl.kernel.support_max : impl.last_increase;
    }
    impl.extend_to(impl.size());
  }
}

std::vector<double> NormalizedPmf::pmf_values(std::int64_t k_max) const {
  std::vector<double> out;
  if (k_max < 0) return out;
  out.reserve(static_cast<std::size_t>(k_max) + 1);
  for (std::int64_t k = 0; k <= k_max; ++k) out.push_back(pmf(k));
  return out;
}

std::vector<double> NormalizedPmf::cdf_values(std::int64_t k_max) const {
  std::vector<double> out;
  if (k_max < 0) return out;
  out.reserve(static_cast<std::size_t>(k_max) + 1);
  for (std::int64_t k = 0; k <= k_max; ++k) out.push_back(cdf(k));
  return out;
}

double log_normalizer_cmnb(const CmnbParams& params, const TruncationPolicy& policy) {
  return NormalizedPmf(params, policy).log_normalizer();
}

double log_normalizer_cmp(const CmpParams& params, const TruncationPolicy& policy) {
  return NormalizedPmf(params, policy).log_normalizer();
}

double log_pmf(const NormalizedPmf& dist, std::int64_t k) { return dist.log_pmf(k); }
double cdf(const NormalizedPmf& dist, std::int64_t k) { return dist.cdf(k); }
std::int64_t quantile(const NormalizedPmf& dist, double q) { return dist.quantile(q); }

}  // namespace cmnb
