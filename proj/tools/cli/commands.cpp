#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include "cli/datasets.hpp"
#include "cli/ingest.hpp"
#include "cmnb/analysis.hpp"
#include "cmnb/distribution.hpp"
#include "cmnb/errors.hpp"
#include "cmnb/families.hpp"
#include "cmnb/rng.hpp"
#include "cmnb/sampling.hpp"
#include "json.hpp"

namespace cmnb::cli {
namespace {

using nlohmann::json;

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Finite doubles as numbers, everything else as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json optional_number(const std::optional<T>& v) {
  return v ? number(static_cast<double>(*v)) : json(nullptr);
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::vector<double> printed_params(const FitResult& fit) {
  std::vector<double> par = fit.values;
  if (fit.kind == ModelKind::Nb) par[1] = 1.0 - par[1];
  return par;
}

json family_json(const Family& family) {
  return std::visit(
      [](const auto& q) -> json {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, CmnbParams>) {
          return {{"family", "cmnb"}, {"r", q.r}, {"nu", q.nu}, {"p", q.p}};
        } else if constexpr (std::is_same_v<T, NbParams>) {
          return {{"family", "nb"}, {"r", q.r}, {"p", q.p}};
        } else if constexpr (std::is_same_v<T, CmpParams>) {
          return {{"family", "cmp"}, {"lambda", q.lambda}, {"nu", q.nu}};
        } else if constexpr (std::is_same_v<T, CmbParams>) {
          return {{"family", "cmb"}, {"m", q.m}, {"p", q.p}, {"nu", q.nu}};
        } else {
          return {{"family", "cmnhg"}, {"z", q.z}, {"nu", q.nu}, {"m", q.m}, {"n", q.n}};
        }
      },
      family);
}

ModelReport run_model(const FrequencyTable& table, ModelKind kind, const FitOptions& options) {
  ModelReport out;
  out.kind = kind;
  FitConfig config;
  config.policy.rel_tol = options.rel_tol;
  try {
    out.fit = fit_model(table, kind, config);
    out.par = printed_params(*out.fit);
    Chi2Options chi2;
    chi2.pool_min_expected = options.pool_min_expected;
    chi2.policy = config.policy;
    std::optional<BootstrapOptions> boot;
    if (options.bootstrap > 0) {
      BootstrapOptions b;
      b.replicates = options.bootstrap;
      b.seed = options.seed;
      b.mode = options.bootstrap_mode;
      b.threads = options.threads;
      b.fit = config;
      boot = b;
    }
    out.gof = gof_report(table, kind, out.fit->params, chi2, boot);
  } catch (const InvariantBreach& e) {
    out.error = e.what();
    out.invariant_breach = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "text") return Format::Text;
  if (name == "json") return Format::Json;
  throw InvalidParameter("unknown format '" + name + "' (expected text or json)");
}

std::vector<ModelKind> parse_model_list(const std::string& list) {
  std::vector<ModelKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const ModelKind kind = parse_model_kind(item);
    if (std::find(out.begin(), out.end(), kind) == out.end()) out.push_back(kind);
  }
  if (out.empty()) throw InvalidParameter("model list is empty (use cmnb, nb, cmp)");
  return out;
}

FrequencyTable load_table(const FitOptions& options) {
  if (options.dataset.empty() == options.input.empty()) {
    throw InvalidParameter("exactly one of --data and --input is required");
  }
  if (!options.dataset.empty()) {
    const EmbeddedDataset* d = find_dataset(options.dataset);
    if (!d) {
      std::string names;
      for (const auto& e : embedded_datasets()) names += (names.empty() ? "" : ", ") + e.name;
      throw InvalidParameter("unknown dataset '" + options.dataset + "' (available: " + names + ")");
    }
    return d->table();
  }
  return ingest_file(options.input);
}

FitReport build_fit_report(const FitOptions& options) {
  if (options.models.empty()) throw InvalidParameter("model list is empty (use cmnb, nb, cmp)");
  FitReport report;
  report.options = options;
  report.source = options.dataset.empty() ? options.input : options.dataset;
  report.table = load_table(options);
  if (report.table.empty()) throw InsufficientSupport("the frequency table is empty");

  std::vector<std::future<ModelReport>> jobs;
  for (const ModelKind kind : options.models) {
    jobs.push_back(std::async(std::launch::async, [&report, kind, &options] {
      return run_model(report.table, kind, options);
    }));
  }
  for (auto& j : jobs) report.models.push_back(j.get());
  return report;
}

int fit_exit_code(const FitReport& report) {
  int code = kOk;
  for (const auto& m : report.models) {
    if (m.invariant_breach) return kInvariantBreach;
    if (!m.error.empty() || !m.fit || !m.fit->converged) code = kNumericalFailure;
  }
  return code;
}

std::string render_fit_text(const FitReport& report) {
  const auto& table = report.table;
  const auto counts = table.dense_counts();
  constexpr std::size_t kLabel = 16;
  constexpr std::size_t kCol = 12;
  std::ostringstream out;

  out << "Fit of " << report.source << " (n = " << table.total() << ")\n";
  out << pad_right("Values", kLabel) << pad_left("Frequency", kCol);
  for (const auto& m : report.models) out << pad_left(upper(to_string(m.kind)), kCol);
  out << '\n';

  // Per-value fitted counts; these match the chi-squared classes unless
  // pooling was requested.
  std::vector<std::vector<double>> fitted;
  for (const auto& m : report.models) {
    fitted.push_back(m.fit ? expected_frequencies(m.fit->params, table.total(),
                                                  static_cast<std::int64_t>(counts.size()) - 1)
                           : std::vector<double>{});
  }
  std::vector<std::int64_t> totals(report.models.size(), 0);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    out << pad_right(std::to_string(k), kLabel) << pad_left(std::to_string(counts[k]), kCol);
    for (std::size_t i = 0; i < report.models.size(); ++i) {
      if (fitted[i].empty()) {
        out << pad_left("-", kCol);
        continue;
      }
      const auto e = std::llround(fitted[i][k]);
      totals[i] += e;
      out << pad_left(std::to_string(e), kCol);
    }
    out << '\n';
  }
  out << pad_right("Total", kLabel) << pad_left(std::to_string(table.total()), kCol);
  for (std::size_t i = 0; i < report.models.size(); ++i) {
    out << pad_left(report.models[i].fit ? std::to_string(totals[i]) : "-", kCol);
  }
  out << '\n';

  auto row = [&](const std::string& label, auto cell) {
    out << pad_right(label, kLabel) << pad_left("", kCol);
    for (const auto& m : report.models) out << pad_left(m.fit ? cell(m) : "-", kCol);
    out << '\n';
  };
  for (std::size_t j = 0; j < 3; ++j) {
    row("par" + std::to_string(j + 1), [j](const ModelReport& m) {
      return j < m.par.size() ? fixed(m.par[j], 2) : std::string("-");
    });
  }
  row("chi2", [](const ModelReport& m) { return m.gof ? fixed(m.gof->chi2, 2) : std::string("-"); });
  row("df", [](const ModelReport& m) { return m.gof ? std::to_string(m.gof->df) : std::string("-"); });
  row("p-value", [](const ModelReport& m) {
    return m.gof && m.gof->chi2_pvalue ? fixed(*m.gof->chi2_pvalue, 6) : std::string("-");
  });
  row("K-S", [](const ModelReport& m) { return m.gof ? fixed(m.gof->ks_stat, 6) : std::string("-"); });
  row("p-value (K-S)", [](const ModelReport& m) {
    return m.gof && m.gof->ks_pvalue ? fixed(*m.gof->ks_pvalue, 6) : std::string("-");
  });
  row("loglik", [](const ModelReport& m) { return fixed(m.fit->log_likelihood, 4); });
  row("converged", [](const ModelReport& m) { return std::string(m.fit->converged ? "yes" : "no"); });

  out << "\npar: CMNB (r, nu, p); NB (r, 1 - p); CMP (lambda, nu)\n";
  if (report.options.bootstrap > 0) {
    out << "K-S p-values: parametric bootstrap, B = " << report.options.bootstrap
        << ", seed = " << report.options.seed << "\n";
  }
  for (const auto& m : report.models) {
    if (!m.error.empty()) {
      out << upper(to_string(m.kind)) << ": error: " << m.error << '\n';
    } else if (m.fit && !m.fit->converged) {
      out << upper(to_string(m.kind)) << ": not converged after " << m.fit->iterations
          << " iterations (gradient " << general(m.fit->gradient_norm) << "): " << m.fit->message
          << '\n';
    }
  }
  return out.str();
}

std::string render_fit_json(const FitReport& report) {
  json j;
  j["source"] = report.source;
  j["n"] = report.table.total();
  j["observed"] = report.table.dense_counts();
  j["seed"] = report.options.seed;
  j["bootstrap"] = {{"replicates", report.options.bootstrap},
                    {"mode", report.options.bootstrap_mode == BootstrapMode::Refit ? "refit"
                                                                                   : "refit-free"}};
  j["models"] = json::array();
  for (const auto& m : report.models) {
    json e;
    e["model"] = to_string(m.kind);
    if (!m.error.empty()) e["error"] = m.error;
    if (m.fit) {
      const auto& f = *m.fit;
      e["params"] = family_json(f.params);
      e["par"] = f.values.empty() ? json::array() : json(m.par);
      e["log_likelihood"] = number(f.log_likelihood);
      e["converged"] = f.converged;
      e["iterations"] = f.iterations;
      e["gradient_norm"] = number(f.gradient_norm);
      e["message"] = f.message;
      e["start"] = f.start;
      e["standard_errors"] = f.standard_errors ? json(*f.standard_errors) : json(nullptr);
    }
    if (m.gof) {
      const auto& g = *m.gof;
      e["expected"] = g.expected;
      e["chi2"] = number(g.chi2);
      e["df"] = g.df;
      e["chi2_pvalue"] = optional_number(g.chi2_pvalue);
      e["ks"] = number(g.ks_stat);
      e["ks_pvalue"] = optional_number(g.ks_pvalue);
      e["classes"] = g.class_count;
    }
    j["models"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

Family make_family(const std::string& name, const ParamArgs& a) {
  auto need = [&name](const std::optional<double>& v, const char* flag) {
    if (!v) throw InvalidParameter(name + " requires " + flag);
    return *v;
  };
  auto integer = [&name](double v, const char* flag) {
    if (v != std::floor(v) || std::fabs(v) > 9.0e15) {
      throw InvalidParameter(name + ": " + flag + " must be an integer");
    }
    return static_cast<std::int64_t>(v);
  };
  Family family;
  if (name == "cmnb") {
    family = CmnbParams{need(a.r, "--r"), need(a.nu, "--nu"), need(a.p, "--p")};
  } else if (name == "nb") {
    family = NbParams{need(a.r, "--r"), need(a.p, "--p")};
  } else if (name == "cmp") {
    family = CmpParams{need(a.lambda, "--lambda"), need(a.nu, "--nu")};
  } else if (name == "cmb") {
    family = CmbParams{integer(need(a.m, "--m"), "--m"), need(a.p, "--p"), need(a.nu, "--nu")};
  } else if (name == "cmnhg") {
    family = CmnhgParams{integer(need(a.z, "--z"), "--z"), need(a.nu, "--nu"), need(a.m, "--m"),
                         need(a.nhg, "--nhg")};
  } else {
    throw InvalidParameter("unknown family '" + name + "' (cmnb, nb, cmp, cmb, cmnhg)");
  }
  validate(family);
  return family;
}

std::string run_sample(const Family& family, std::int64_t n, std::uint64_t seed, Format format) {
  if (n < 0) throw InvalidParameter("--n must be >= 0");
  const NormalizedPmf dist(family);
  RngState rng(seed);
  const FrequencyTable table = sample_batch(dist, rng, n);
  if (format == Format::Text) return to_csv(table);
  json j;
  j["params"] = family_json(family);
  j["n"] = n;
  j["seed"] = seed;
  j["counts"] = json::array();
  for (const auto& e : table.entries()) j["counts"].push_back({e.value, e.count});
  return j.dump(2) + "\n";
}

std::string run_pmf(const Family& family, std::int64_t k_max, Format format) {
  if (k_max < 0) throw InvalidParameter("--kmax must be >= 0");
  const NormalizedPmf dist(family);
  const auto pmf = dist.pmf_values(k_max);
  const auto cdf = dist.cdf_values(k_max);
  if (format == Format::Json) {
    json j;
    j["params"] = family_json(family);
    j["log_normalizer"] = number(dist.log_normalizer());
    j["pmf"] = pmf;
    j["cdf"] = cdf;
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "k,pmf,cdf\n";
  char buf[96];
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", k, pmf[k], cdf[k]);
    out << buf;
  }
  return out.str();
}

std::string run_analyze(const CmnbParams& params, int dpcp_terms, Format format) {
  validate(params);
  const NormalizedPmf dist(params);
  const ShapeReport shape = shape_report(params);
  const DispersionReport disp = classify_dispersion(params);
  const DpcpMembership member = is_dpcp(params);
  std::optional<DpcpParams> dpcp;
  std::string dpcp_error;
  try {
    dpcp = dpcp_parametrization(params, dpcp_terms);
  } catch (const std::exception& e) {
    dpcp_error = e.what();
  }
  const double zi = zero_inflation_ratio(params);
  const double zi_nb = zero_inflation_ratio(NbParams{params.r, params.p});
  const double stein = stein_residual(params, [](std::int64_t) { return 1.0; });
  const bool nb_slice = params.nu == 1.0;

  if (format == Format::Json) {
    json j;
    j["params"] = family_json(params);
    j["log_normalizer"] = number(dist.log_normalizer());
    j["truncation_point"] = dist.truncation_point();
    j["mean"] = number(disp.mean);
    j["variance"] = number(disp.variance);
    j["shape"] = to_string(shape.shape);
    j["shape_numerically_consistent"] = shape.numerically_consistent;
    j["infinitely_divisible"] = shape.infinitely_divisible;
    j["nb_slice"] = nb_slice;
    j["dispersion"] = to_string(disp.classification);
    j["delta_0"] = number(disp.delta_values.front());
    j["dpcp"] = {{"sufficient_condition", member.member}, {"reason", member.reason}};
    if (dpcp) {
      j["dpcp"]["lambda"] = number(dpcp->lambda);
      j["dpcp"]["alpha"] = dpcp->alpha;
    } else {
      j["dpcp"]["error"] = dpcp_error;
    }
    j["zero_inflation_ratio"] = number(zi);
    j["zero_inflation_ratio_nb"] = number(zi_nb);
    j["stein_residual_constant"] = number(stein);
    return j.dump(2) + "\n";
  }

  std::ostringstream out;
  auto line = [&out](const std::string& label, const std::string& value) {
    out << pad_right(label, 26) << value << '\n';
  };
  out << "CMNB(r = " << general(params.r) << ", nu = " << general(params.nu)
      << ", p = " << general(params.p) << ")\n";
  line("log normalizer", general(dist.log_normalizer()));
  line("mean", general(disp.mean));
  line("variance", general(disp.variance));
  std::string shape_text = to_string(shape.shape);
  if (shape.infinitely_divisible) shape_text += ", infinitely divisible";
  if (nb_slice) shape_text += ", NB slice (nu = 1)";
  line("shape", shape_text);
  line("dispersion", to_string(disp.classification) + " (Delta_0 = " +
                         general(disp.delta_values.front()) + ")");
  line("DPCP", (member.member ? "yes: " : "undetermined: ") + member.reason);
  if (dpcp) {
    line("  lambda", general(dpcp->lambda));
    for (std::size_t i = 0; i < dpcp->alpha.size(); ++i) {
      line("  alpha_" + std::to_string(i + 1), general(dpcp->alpha[i]));
    }
  } else {
    line("  error", dpcp_error);
  }
  line("P(0)/P(1)", general(zi));
  line("NB 1/(p r) at same r, p", general(zi_nb));
  line("Stein residual, g = 1", general(stein));
  return out.str();
}

std::string run_limits(const LimitArgs& args, Format format) {
  const ParamArgs& a = args.params;
  auto need = [&args](const std::optional<double>& v, const char* flag) {
    if (!v) throw InvalidParameter("limits " + args.kind + " requires " + flag);
    return *v;
  };
  LimitTable table;
  if (args.kind == "cmnb-cmp") {
    const auto grid = args.grid.empty() ? std::vector<double>{10, 1e2, 1e3, 1e4} : args.grid;
    table = limit_table_cmnb_to_cmp(need(a.nu, "--nu"), need(a.lambda, "--lambda"), grid);
  } else if (args.kind == "cmnhg-cmnb") {
    const auto grid = args.grid.empty() ? std::vector<double>{1e2, 1e3, 1e4} : args.grid;
    table = limit_table_cmnhg_to_cmnb(need(a.m, "--m"), need(a.nu, "--nu"), need(a.p, "--p"), grid);
  } else if (args.kind == "cmb-cmp") {
    std::vector<std::int64_t> grid{10, 100, 1000};
    if (!args.grid.empty()) {
      grid.clear();
      for (const double g : args.grid) {
        if (g != std::floor(g) || g < 1) throw InvalidParameter("cmb-cmp grid values must be integers >= 1");
        grid.push_back(static_cast<std::int64_t>(g));
      }
    }
    table = limit_table_cmb_to_cmp(need(a.nu, "--nu"), need(a.lambda, "--lambda"), grid);
  } else {
    throw InvalidParameter("unknown limit '" + args.kind + "' (cmnb-cmp, cmnhg-cmnb, cmb-cmp)");
  }

  if (format == Format::Json) {
    json j;
    j["limit"] = table.name;
    j["rows"] = json::array();
    for (const auto& r : table.rows) j["rows"].push_back({{"grid", r.grid_value}, {"tv", number(r.distance)}});
    j["strictly_decreasing"] = table.strictly_decreasing;
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << table.name << '\n' << pad_right("grid", 14) << "tv distance\n";
  for (const auto& r : table.rows) out << pad_right(general(r.grid_value), 14) << general(r.distance) << '\n';
  out << "strictly decreasing: " << (table.strictly_decreasing ? "yes" : "no") << '\n';
  return out.str();
}

}  // namespace cmnb::cli
