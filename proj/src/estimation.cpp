#include "cmnb/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "cmnb/errors.hpp"
#include "cmnb/special_fn.hpp"
#include "internal/compensated_sum.hpp"

namespace cmnb {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using internal::CompensatedSum;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p) - std::log1p(-p); }

// l(k) = ln(Gamma(r + k) / (k! Gamma(r))) and d(k) = psi(r + k) - psi(r),
// both by forward recursion.
struct GammaRatioTable {
  std::vector<double> ell;
  std::vector<double> dig;

  GammaRatioTable(double r, std::int64_t k_max) {
    const auto n = static_cast<std::size_t>(std::max<std::int64_t>(k_max, 0)) + 1;
    ell.resize(n);
    dig.resize(n);
    CompensatedSum e;
    CompensatedSum d;
    ell[0] = 0.0;
    dig[0] = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double kd = static_cast<double>(k);
      e.add(k == 1 ? std::log(r) : std::log1p((r - 1.0) / kd));
      d.add(1.0 / (r + kd - 1.0));
      ell[k] = e.value();
      dig[k] = d.value();
    }
  }
};

struct TableSums {
  double n = 0.0;
  double sum_k = 0.0;
};

TableSums table_sums(const FrequencyTable& table) {
  TableSums s;
  for (const auto& e : table.entries()) {
    s.n += static_cast<double>(e.count);
    s.sum_k += static_cast<double>(e.count) * static_cast<double>(e.value);
  }
  return s;
}

void require_data(const FrequencyTable& table, const char* who) {
  if (table.empty()) {
    std::ostringstream msg;
    msg << who << ": empty frequency table";
    throw InsufficientSupport(msg.str());
  }
}

// Newton ascent in unconstrained fitting coordinates, with optional lower
// bounds handled by projection and an active set.
struct Objective {
  std::function<double(const VectorXd&)> loglik;
  std::function<VectorXd(const VectorXd&)> score;
  std::vector<std::optional<double>> lower;
  double n = 1.0;
};

struct Ascent {
  VectorXd eta;
  double ll = kNegInf;
  bool converged = false;
  int iterations = 0;
  double grad_norm = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  std::string message;
};

double safe_loglik(const Objective& obj, const VectorXd& eta) {
  try {
    const double v = obj.loglik(eta);
    return std::isfinite(v) ? v : kNegInf;
  } catch (const std::exception&) {
    return kNegInf;
  }
}

VectorXd project(const Objective& obj, VectorXd eta) {
  for (std::size_t i = 0; i < obj.lower.size(); ++i) {
    if (obj.lower[i]) eta[static_cast<Eigen::Index>(i)] = std::max(eta[static_cast<Eigen::Index>(i)], *obj.lower[i]);
  }
  return eta;
}

// Coordinates sitting on their bound with the score pushing outward.
std::vector<bool> pinned_coordinates(const Objective& obj, const VectorXd& eta, const VectorXd& s) {
  std::vector<bool> pinned(static_cast<std::size_t>(eta.size()), false);
  for (std::size_t i = 0; i < obj.lower.size(); ++i) {
    const auto ei = static_cast<Eigen::Index>(i);
    if (obj.lower[i] && eta[ei] <= *obj.lower[i] && s[ei] <= 0.0) pinned[i] = true;
  }
  return pinned;
}

double free_norm(const VectorXd& s, const std::vector<bool>& pinned, double n) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!pinned[static_cast<std::size_t>(i)]) m = std::max(m, std::fabs(s[i]));
  }
  return m / n;
}

// Central-difference Jacobian of the score, one-sided next to a bound.
MatrixXd score_jacobian(const Objective& obj, const VectorXd& eta) {
  const Eigen::Index d = eta.size();
  MatrixXd jac(d, d);
  const VectorXd s0 = obj.score(eta);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double h = 1e-5 * std::max(1.0, std::fabs(eta[j]));
    VectorXd plus = eta;
    VectorXd minus = eta;
    plus[j] += h;
    minus[j] -= h;
    const auto& bound = obj.lower[static_cast<std::size_t>(j)];
    if (bound && minus[j] < *bound) {
      jac.col(j) = (obj.score(plus) - s0) / h;
    } else {
      jac.col(j) = (obj.score(plus) - obj.score(minus)) / (2.0 * h);
    }
  }
  return jac;
}

MatrixXd information(const Objective& obj, const VectorXd& eta) {
  const MatrixXd jac = score_jacobian(obj, eta);
  return -0.5 * (jac + jac.transpose());
}

Ascent ascend(const Objective& obj, const VectorXd& start, const FitConfig& config) {
  Ascent out;
  out.eta = project(obj, start);
  out.ll = safe_loglik(obj, out.eta);
  if (out.ll == kNegInf) {
    out.message = "log-likelihood not finite at the starting point";
    return out;
  }
  out.trace.push_back(out.ll);

  for (int iter = 0;; ++iter) {
    VectorXd s;
    try {
      s = obj.score(out.eta);
    } catch (const std::exception& e) {
      out.iterations = iter;
      out.message = std::string("score evaluation failed: ") + e.what();
      return out;
    }
    const auto pinned = pinned_coordinates(obj, out.eta, s);
    out.grad_norm = free_norm(s, pinned, obj.n);
    out.iterations = iter;
    if (out.grad_norm <= config.grad_tol) {
      out.converged = true;
      out.message = "converged";
      return out;
    }
    if (iter >= config.max_iter) {
      out.message = "iteration limit reached";
      return out;
    }

    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (!pinned[static_cast<std::size_t>(i)]) free_idx.push_back(i);
    }
    MatrixXd info_full;
    try {
      info_full = information(obj, out.eta);
    } catch (const std::exception& e) {
      out.message = std::string("information evaluation failed: ") + e.what();
      return out;
    }
    const auto m = static_cast<Eigen::Index>(free_idx.size());
    MatrixXd info(m, m);
    VectorXd sf(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      sf[a] = s[free_idx[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < m; ++b) {
        info(a, b) = info_full(free_idx[static_cast<std::size_t>(a)], free_idx[static_cast<std::size_t>(b)]);
      }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(info);
    VectorXd values = eig.eigenvalues().cwiseMax(1e-8);
    const VectorXd step_free =
        eig.eigenvectors() * (values.cwiseInverse().asDiagonal() * (eig.eigenvectors().transpose() * sf));
    VectorXd step = VectorXd::Zero(s.size());
    for (Eigen::Index a = 0; a < m; ++a) step[free_idx[static_cast<std::size_t>(a)]] = step_free[a];
    const double len = step.cwiseAbs().maxCoeff();
    if (len > config.max_step) step *= config.max_step / len;

    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= config.max_halvings; ++h, t *= 0.5) {
      const VectorXd cand = project(obj, out.eta + t * step);
      const double ll = safe_loglik(obj, cand);
      if (ll != kNegInf && ll >= out.ll) {
        out.eta = cand;
        out.ll = ll;
        out.trace.push_back(ll);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.iterations = iter + 1;
      out.message = "step halving exhausted without ascent";
      return out;
    }
  }
}

std::optional<std::vector<double>> standard_errors(const Objective& obj, const VectorXd& eta,
                                                   const std::vector<double>& dtheta_deta) {
  try {
    const MatrixXd info = information(obj, eta);
    Eigen::LLT<MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const MatrixXd cov = llt.solve(MatrixXd::Identity(info.rows(), info.cols()));
    std::vector<double> se;
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      if (!(cov(i, i) > 0.0)) return std::nullopt;
      se.push_back(std::sqrt(cov(i, i)) * std::fabs(dtheta_deta[static_cast<std::size_t>(i)]));
    }
    return se;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

CmnbParams cmnb_from_eta(const VectorXd& eta) {
  return {std::exp(eta[0]), std::exp(eta[1]), logistic(eta[2])};
}

VectorXd cmnb_to_eta(const CmnbParams& q) {
  VectorXd eta(3);
  eta << std::log(q.r), std::log(q.nu), logit(q.p);
  return eta;
}

Objective cmnb_objective(const FrequencyTable& table, const TruncationPolicy& policy) {
  Objective obj;
  obj.n = static_cast<double>(table.total());
  obj.lower.assign(3, std::nullopt);
  obj.loglik = [&table, policy](const VectorXd& eta) {
    return loglik(table, cmnb_from_eta(eta), policy);
  };
  obj.score = [&table, policy](const VectorXd& eta) {
    const CmnbParams q = cmnb_from_eta(eta);
    const auto f = score(table, q, policy);
    VectorXd s(3);
    s << q.r * f[0], q.nu * f[1], q.p * (1.0 - q.p) * f[2];
    return s;
  };
  return obj;
}

double nb_loglik(const FrequencyTable& table, double r, double p) {
  validate(NbParams{r, p});
  const GammaRatioTable g(r, table.k_max());
  const TableSums sums = table_sums(table);
  CompensatedSum acc;
  for (const auto& e : table.entries()) {
    acc.add(static_cast<double>(e.count) * g.ell[static_cast<std::size_t>(e.value)]);
  }
  return acc.value() + std::log(p) * sums.sum_k + sums.n * r * std::log1p(-p);
}

Objective nb_objective(const FrequencyTable& table) {
  Objective obj;
  obj.n = static_cast<double>(table.total());
  obj.lower.assign(2, std::nullopt);
  obj.loglik = [&table](const VectorXd& eta) {
    return nb_loglik(table, std::exp(eta[0]), logistic(eta[1]));
  };
  obj.score = [&table](const VectorXd& eta) {
    const double r = std::exp(eta[0]);
    const double p = logistic(eta[1]);
    validate(NbParams{r, p});
    const GammaRatioTable g(r, table.k_max());
    const TableSums sums = table_sums(table);
    CompensatedSum sd;
    for (const auto& e : table.entries()) {
      sd.add(static_cast<double>(e.count) * g.dig[static_cast<std::size_t>(e.value)]);
    }
    VectorXd s(2);
    s << r * (sd.value() + sums.n * std::log1p(-p)), (1.0 - p) * sums.sum_k - sums.n * r * p;
    return s;
  };
  return obj;
}

Objective cmp_objective(const FrequencyTable& table, const TruncationPolicy& policy) {
  Objective obj;
  obj.n = static_cast<double>(table.total());
  obj.lower = {std::nullopt, 0.0};
  obj.loglik = [&table, policy](const VectorXd& eta) {
    return loglik(table, Family{CmpParams{std::exp(eta[0]), eta[1]}}, policy);
  };
  obj.score = [&table, policy](const VectorXd& eta) {
    const CmpParams q{std::exp(eta[0]), eta[1]};
    const NormalizedPmf dist(q, policy);
    const TableSums sums = table_sums(table);
    CompensatedSum ex;
    CompensatedSum elf;
    CompensatedSum lf;
    for (std::int64_t k = 0; k < dist.cached_size(); ++k) {
      const double w = dist.pmf(k);
      const double kd = static_cast<double>(k);
      ex.add(w * kd);
      if (k > 0) lf.add(std::log(kd));
      elf.add(w * lf.value());
    }
    CompensatedSum data_lf;
    for (const auto& e : table.entries()) {
      data_lf.add(static_cast<double>(e.count) * log_gamma(static_cast<double>(e.value) + 1.0));
    }
    VectorXd s(2);
    s << sums.sum_k - sums.n * ex.value(), -data_lf.value() + sums.n * elf.value();
    return s;
  };
  return obj;
}

FitResult finish(ModelKind kind, const Objective& obj, const Ascent& a, Family params,
                 std::vector<double> values, const std::vector<double>& dtheta_deta) {
  FitResult out;
  out.kind = kind;
  out.params = std::move(params);
  out.values = std::move(values);
  out.log_likelihood = a.ll;
  out.converged = a.converged;
  out.iterations = a.iterations;
  out.gradient_norm = a.grad_norm;
  out.loglik_trace = a.trace;
  out.message = a.message;
  out.standard_errors = standard_errors(obj, a.eta, dtheta_deta);
  return out;
}

FitResult finish_cmnb(const Objective& obj, const Ascent& a) {
  const CmnbParams q = cmnb_from_eta(a.eta);
  FitResult out =
      finish(ModelKind::Cmnb, obj, a, q, {q.r, q.nu, q.p}, {q.r, q.nu, q.p * (1.0 - q.p)});
  // Flat ridges (nu -> inf along r -> 1, or r, nu -> 0) have no interior
  // maximum; say so instead of just reporting the iteration count.
  if (!out.converged && (q.nu > 50.0 || q.nu < 1e-3 || q.r < 1e-5 || q.r > 1e4)) {
    std::ostringstream msg;
    msg << out.message << "; iterates drift to the parameter boundary (r=" << q.r
        << ", nu=" << q.nu << "), the likelihood has no interior maximum there";
    out.message = msg.str();
  }
  return out;
}

CmnbParams clamp_start(CmnbParams q) {
  q.r = std::clamp(q.r, 1e-6, 1e6);
  q.nu = std::clamp(q.nu, 1e-6, 1e6);
  q.p = std::clamp(q.p, 1e-8, 1.0 - 1e-8);
  return q;
}

// g(r, k) = ln[(k + r + 1)(k + 1) / ((k + 2)(k + r))].
double rr_g(double r, int k) {
  return std::log1p((r - 1.0) / (k + 2.0)) - std::log1p((r - 1.0) / (k + 1.0));
}

double rr_ratio(double r) {
  if (r == 1.0) return 3.0;
  return rr_g(r, 0) / rr_g(r, 1);
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Cmnb: return "cmnb";
    case ModelKind::Nb: return "nb";
    case ModelKind::Cmp: return "cmp";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "cmnb") return ModelKind::Cmnb;
  if (name == "nb") return ModelKind::Nb;
  if (name == "cmp") return ModelKind::Cmp;
  throw InvalidParameter("unknown model '" + name + "' (expected cmnb, nb or cmp)");
}

int parameter_count(ModelKind kind) { return kind == ModelKind::Cmnb ? 3 : 2; }

double loglik(const FrequencyTable& table, const CmnbParams& params,
              const TruncationPolicy& policy) {
  validate(params);
  const NormalizedPmf dist(params, policy);
  const GammaRatioTable g(params.r, table.k_max());
  const TableSums sums = table_sums(table);
  CompensatedSum ell;
  for (const auto& e : table.entries()) {
    ell.add(static_cast<double>(e.count) * g.ell[static_cast<std::size_t>(e.value)]);
  }
  // log_pmf(0) = r ln(1 - p) - ln C without the cancellation between the two.
  return params.nu * ell.value() + std::log(params.p) * sums.sum_k + sums.n * dist.log_pmf(0);
}

double loglik(const FrequencyTable& table, const Family& family, const TruncationPolicy& policy) {
  const NormalizedPmf dist(family, policy);
  CompensatedSum acc;
  for (const auto& e : table.entries()) {
    if (e.count == 0) continue;
    acc.add(static_cast<double>(e.count) * dist.log_pmf(e.value));
  }
  return acc.value();
}

std::array<double, 3> score(const FrequencyTable& table, const CmnbParams& params,
                            const TruncationPolicy& policy) {
  validate(params);
  const NormalizedPmf dist(params, policy);
  // Expectations run over the whole cached table, which reaches well past
  // the truncation point; k-weighted tails need the extra depth.
  const std::int64_t last = dist.cached_size() - 1;
  const GammaRatioTable g(params.r, std::max(last, table.k_max()));
  const TableSums sums = table_sums(table);

  CompensatedSum e_dig;
  CompensatedSum e_ell;
  CompensatedSum e_x;
  for (std::int64_t k = 0; k <= last; ++k) {
    const double w = dist.pmf(k);
    e_dig.add(w * g.dig[static_cast<std::size_t>(k)]);
    e_ell.add(w * g.ell[static_cast<std::size_t>(k)]);
    e_x.add(w * static_cast<double>(k));
  }
  CompensatedSum d_dig;
  CompensatedSum d_ell;
  for (const auto& e : table.entries()) {
    const double c = static_cast<double>(e.count);
    d_dig.add(c * g.dig[static_cast<std::size_t>(e.value)]);
    d_ell.add(c * g.ell[static_cast<std::size_t>(e.value)]);
  }
  return {params.nu * (d_dig.value() - sums.n * e_dig.value()),
          d_ell.value() - sums.n * e_ell.value(),
          (sums.sum_k - sums.n * e_x.value()) / params.p};
}

CmnbParams ratio_regression_init(std::span<const double> probs) {
  if (probs.size() < 4) throw InsufficientSupport("ratio regression: needs P_0..P_3");
  for (int k = 0; k < 4; ++k) {
    if (!(probs[static_cast<std::size_t>(k)] > 0.0)) {
      std::ostringstream msg;
      msg << "ratio regression: empirical P_" << k << " is zero";
      throw InsufficientSupport(msg.str());
    }
  }
  const double l0 = std::log(probs[0]) + std::log(probs[2]) - 2.0 * std::log(probs[1]);
  const double l1 = std::log(probs[1]) + std::log(probs[3]) - 2.0 * std::log(probs[2]);
  if (l1 == 0.0 || !std::isfinite(l0 / l1)) {
    throw NumericalError("ratio regression: second log-ratio vanishes");
  }
  const double target = l0 / l1;
  auto h = [target](double r) { return rr_ratio(r) - target; };

  constexpr int kGrid = 360;
  const double lo_exp = -6.0;
  const double hi_exp = 3.0;
  std::optional<std::pair<double, double>> bracket;
  double prev_r = std::pow(10.0, lo_exp);
  double prev_h = h(prev_r);
  for (int i = 1; i <= kGrid; ++i) {
    const double r = std::pow(10.0, lo_exp + (hi_exp - lo_exp) * i / kGrid);
    const double hr = h(r);
    if (prev_h == 0.0) {
      bracket = {prev_r, prev_r};
      break;
    }
    if ((prev_h < 0.0) != (hr < 0.0) || hr == 0.0) {
      bracket = {prev_r, r};
      break;
    }
    prev_r = r;
    prev_h = hr;
  }
  if (!bracket) throw NumericalError("ratio regression: no root for r in (1e-6, 1e3]");

  double a = bracket->first;
  double b = bracket->second;
  double ha = h(a);
  for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
    const double mid = 0.5 * (a + b);
    const double hm = h(mid);
    if ((hm < 0.0) == (ha < 0.0)) {
      a = mid;
      ha = hm;
    } else {
      b = mid;
    }
  }
  const double r = 0.5 * (a + b);
  const double g0 = rr_g(r, 0);
  const double nu = g0 != 0.0 ? l0 / g0 : 1.0;
  const double log_p = std::log(probs[1]) - std::log(probs[0]) - nu * std::log(r);
  if (!std::isfinite(nu) || !(nu > 0.0) || !std::isfinite(log_p) || !(log_p < 0.0)) {
    throw NumericalError("ratio regression: solution outside the parameter space");
  }
  return clamp_start({r, nu, std::exp(log_p)});
}

CmnbParams ratio_regression_init(const FrequencyTable& table) {
  require_data(table, "ratio regression");
  std::vector<double> probs(4, 0.0);
  const double n = static_cast<double>(table.total());
  for (int k = 0; k < 4; ++k) probs[static_cast<std::size_t>(k)] = static_cast<double>(table.count_at(k)) / n;
  return ratio_regression_init(probs);
}

CmnbParams moment_init(const FrequencyTable& table) {
  require_data(table, "moment init");
  const double mean = std::max(table.mean(), 1e-6);
  double var = 0.0;
  for (const auto& e : table.entries()) {
    const double d = static_cast<double>(e.value) - table.mean();
    var += static_cast<double>(e.count) * d * d;
  }
  var /= static_cast<double>(table.total());
  const double r = var > mean ? mean * mean / (var - mean) : 100.0;
  return clamp_start({r, 1.0, mean / (r + mean)});
}

FitResult mle_fit_nb(const FrequencyTable& table, const FitConfig& config) {
  require_data(table, "mle_fit_nb");
  const CmnbParams start = moment_init(table);
  const Objective obj = nb_objective(table);
  VectorXd eta(2);
  eta << std::log(start.r), logit(start.p);
  const Ascent a = ascend(obj, eta, config);
  const double r = std::exp(a.eta[0]);
  const double p = logistic(a.eta[1]);
  FitResult out = finish(ModelKind::Nb, obj, a, NbParams{r, p}, {r, p}, {r, p * (1.0 - p)});
  out.start = "moments";
  return out;
}

FitResult mle_fit_cmp(const FrequencyTable& table, const FitConfig& config) {
  require_data(table, "mle_fit_cmp");
  const Objective obj = cmp_objective(table, config.policy);
  VectorXd eta(2);
  eta << std::log(std::max(table.mean(), 1e-6)), 1.0;
  const Ascent a = ascend(obj, eta, config);
  const double lambda = std::exp(a.eta[0]);
  const double nu = a.eta[1];
  FitResult out =
      finish(ModelKind::Cmp, obj, a, CmpParams{lambda, nu}, {lambda, nu}, {lambda, 1.0});
  out.start = "poisson";
  return out;
}

FitResult mle_fit(const FrequencyTable& table, const FitConfig& config) {
  require_data(table, "mle_fit");
  const Objective obj = cmnb_objective(table, config.policy);

  std::vector<std::pair<std::string, CmnbParams>> starts;
  if (config.init) {
    validate(*config.init);
    starts.emplace_back("explicit", *config.init);
  } else {
    try {
      starts.emplace_back("ratio-regression", ratio_regression_init(table));
    } catch (const std::exception&) {
      starts.emplace_back("moments", moment_init(table));
    }
    // The NB optimum sits on the nu = 1 slice, so ascending from it can only
    // improve on the NB fit.
    const FitResult nb = mle_fit_nb(table, config);
    const auto& q = std::get<NbParams>(nb.params);
    starts.emplace_back("nb-mle", clamp_start({q.r, 1.0, q.p}));
  }

  std::optional<FitResult> best;
  for (const auto& [label, start] : starts) {
    const Ascent a = ascend(obj, cmnb_to_eta(start), config);
    if (a.ll == kNegInf) continue;
    FitResult candidate = finish_cmnb(obj, a);
    candidate.start = label;
    if (!best || candidate.log_likelihood > best->log_likelihood) best = std::move(candidate);
  }
  if (!best) throw NumericalError("mle_fit: no starting point has a finite log-likelihood");
  return *best;
}

FitResult fit_model(const FrequencyTable& table, ModelKind kind, const FitConfig& config) {
  switch (kind) {
    case ModelKind::Cmnb: return mle_fit(table, config);
    case ModelKind::Nb: return mle_fit_nb(table, config);
    case ModelKind::Cmp: return mle_fit_cmp(table, config);
  }
  throw InvalidParameter("fit_model: unknown model");
}

std::vector<double> expected_frequencies(const Family& family, std::int64_t n, std::int64_t k_max,
                                         const TruncationPolicy& policy) {
  if (n < 0) throw DomainError("expected_frequencies: n >= 0 required");
  const NormalizedPmf dist(family, policy);
  std::vector<double> out = dist.pmf_values(k_max);
  for (double& v : out) v *= static_cast<double>(n);
  return out;
}

}  // namespace cmnb
