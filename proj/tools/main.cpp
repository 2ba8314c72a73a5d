#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "cli/datasets.hpp"
#include "cli/ingest.hpp"
#include "cmnb/errors.hpp"

using namespace cmnb;
using namespace cmnb::cli;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("CMNB_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InvalidParameter(std::string("CMNB_SEED is not an unsigned integer: ") + env);
    }
  }
  return 1;
}

void add_param_flags(CLI::App* cmd, ParamArgs& p) {
  cmd->add_option("--r", p.r, "r > 0");
  cmd->add_option("--nu", p.nu, "nu >= 0");
  cmd->add_option("--p", p.p, "p in (0, 1)");
  cmd->add_option("--lambda", p.lambda, "CMP lambda");
  cmd->add_option("--m", p.m, "CMB trials or CMNHG m");
  cmd->add_option("--z", p.z, "CMNHG support size");
  cmd->add_option("--nhg", p.nhg, "CMNHG n");
}

int emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return kOk;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << '\n';
    return kInputError;
  }
  out << text;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"COM-negative binomial count models: fitting, sampling, analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format_name = "text";
  std::string output;
  app.add_option("--format", format_name, "text or json")->check(CLI::IsMember({"text", "json"}));
  app.add_option("-o,--output", output, "write to a file instead of stdout");

  FitOptions fit;
  std::string models = "cmnb,nb,cmp";
  std::string boot_mode = "refit-free";
  std::optional<std::uint64_t> fit_seed;
  auto* fit_cmd = app.add_subcommand("fit", "fit models to a frequency table");
  auto* data_opt = fit_cmd->add_option("--data", fit.dataset, "embedded dataset name");
  auto* input_opt = fit_cmd->add_option("--input", fit.input, "CSV 'value,count' or one observation per line");
  data_opt->excludes(input_opt);
  fit_cmd->add_option("--models", models, "comma list of cmnb, nb, cmp");
  fit_cmd->add_option("--seed", fit_seed, "bootstrap seed (default $CMNB_SEED or 1)");
  fit_cmd->add_option("--bootstrap", fit.bootstrap, "KS bootstrap replicates, 0 to skip")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--bootstrap-mode", boot_mode, "refit-free or refit")
      ->check(CLI::IsMember({"refit-free", "refit"}));
  fit_cmd->add_option("--threads", fit.threads, "bootstrap worker threads")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--rel-tol", fit.rel_tol, "series truncation tolerance")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--pool", fit.pool_min_expected, "merge chi-squared classes below this expected count");

  std::string family;
  ParamArgs params;
  std::int64_t sample_n = 0;
  std::optional<std::uint64_t> sample_seed;
  auto* sample_cmd = app.add_subcommand("sample", "draw a frequency table (CSV)");
  sample_cmd->add_option("family", family, "cmnb, nb, cmp, cmb, cmnhg")->required();
  add_param_flags(sample_cmd, params);
  sample_cmd->add_option("--n", sample_n, "number of draws")->required();
  sample_cmd->add_option("--seed", sample_seed, "seed (default $CMNB_SEED or 1)");

  std::int64_t k_max = 20;
  auto* pmf_cmd = app.add_subcommand("pmf", "pmf and cdf columns on 0..kmax");
  pmf_cmd->add_option("family", family, "cmnb, nb, cmp, cmb, cmnhg")->required();
  add_param_flags(pmf_cmd, params);
  pmf_cmd->add_option("--kmax", k_max, "last value");

  int dpcp_terms = 10;
  auto* analyze_cmd = app.add_subcommand("analyze", "shape, dispersion, DPCP and related checks");
  add_param_flags(analyze_cmd, params);
  analyze_cmd->add_option("--dpcp-terms", dpcp_terms, "alpha_1..alpha_N to list")->check(CLI::PositiveNumber);

  LimitArgs limits;
  auto* limits_cmd = app.add_subcommand("limits", "total variation along a limit grid");
  limits_cmd->add_option("kind", limits.kind, "cmnb-cmp, cmnhg-cmnb, cmb-cmp")
      ->required()
      ->check(CLI::IsMember({"cmnb-cmp", "cmnhg-cmnb", "cmb-cmp"}));
  add_param_flags(limits_cmd, limits.params);
  limits_cmd->add_option("--grid", limits.grid, "grid values")->delimiter(',');

  std::string data_name;
  std::string data_input;
  auto* data_cmd = app.add_subcommand("data", "print an embedded dataset or a normalized input file as CSV");
  auto* name_opt = data_cmd->add_option("name", data_name, "embedded dataset name");
  data_cmd->add_option("--input", data_input, "file to normalize")->excludes(name_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    const Format format = parse_format(format_name);
    if (*fit_cmd) {
      fit.models = parse_model_list(models);
      fit.seed = fit_seed ? *fit_seed : default_seed();
      fit.bootstrap_mode = boot_mode == "refit" ? BootstrapMode::Refit : BootstrapMode::RefitFree;
      const FitReport report = build_fit_report(fit);
      const int written = emit(format == Format::Json ? render_fit_json(report) : render_fit_text(report), output);
      if (written != kOk) return written;
      return fit_exit_code(report);
    }
    if (*sample_cmd) {
      const std::uint64_t seed = sample_seed ? *sample_seed : default_seed();
      return emit(run_sample(make_family(family, params), sample_n, seed, format), output);
    }
    if (*pmf_cmd) return emit(run_pmf(make_family(family, params), k_max, format), output);
    if (*analyze_cmd) {
      const Family f = make_family("cmnb", params);
      return emit(run_analyze(std::get<CmnbParams>(f), dpcp_terms, format), output);
    }
    if (*limits_cmd) return emit(run_limits(limits, format), output);
    if (*data_cmd) {
      if (data_name.empty() && data_input.empty()) {
        std::string list;
        for (const auto& d : embedded_datasets()) list += d.name + "  " + d.note + "\n";
        return emit(list, output);
      }
      if (!data_input.empty()) return emit(to_csv(ingest_file(data_input)), output);
      const EmbeddedDataset* d = find_dataset(data_name);
      if (!d) throw InvalidParameter("unknown dataset '" + data_name + "'");
      return emit(to_csv(d->table()), output);
    }
  } catch (const InvariantBreach& e) {
    std::cerr << "invariant breach: " << e.what() << '\n';
    return kInvariantBreach;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InsufficientSupport& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}
