#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmnb/estimation.hpp"
#include "cmnb/frequency_table.hpp"
#include "cmnb/gof.hpp"
#include "cmnb/params.hpp"

namespace cmnb::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kNumericalFailure = 2, kInvariantBreach = 3 };

enum class Format { Text, Json };

Format parse_format(const std::string& name);
std::vector<ModelKind> parse_model_list(const std::string& list);

struct FitOptions {
  // Exactly one of these is set.
  std::string dataset;
  std::string input;
  std::vector<ModelKind> models;
  std::uint64_t seed = 1;
  // 0 turns the KS bootstrap off.
  int bootstrap = 1000;
  BootstrapMode bootstrap_mode = BootstrapMode::RefitFree;
  std::size_t threads = 1;
  double rel_tol = 1e-12;
  std::optional<double> pool_min_expected;
};

struct ModelReport {
  ModelKind kind = ModelKind::Cmnb;
  std::optional<FitResult> fit;
  std::optional<GofReport> gof;
  // Parameters as printed: NB shows (r, 1 - p).
  std::vector<double> par;
  std::string error;
  bool invariant_breach = false;
};

struct FitReport {
  std::string source;
  FrequencyTable table;
  FitOptions options;
  std::vector<ModelReport> models;
};

FrequencyTable load_table(const FitOptions& options);
// Fits run concurrently; models stay in the requested order.
FitReport build_fit_report(const FitOptions& options);
std::string render_fit_text(const FitReport& report);
std::string render_fit_json(const FitReport& report);
int fit_exit_code(const FitReport& report);

// Family parameters from the command line; which are required depends on
// the family.
struct ParamArgs {
  std::optional<double> r, nu, p, lambda, m, z, nhg;
};

Family make_family(const std::string& name, const ParamArgs& args);

std::string run_sample(const Family& family, std::int64_t n, std::uint64_t seed, Format format);
std::string run_pmf(const Family& family, std::int64_t k_max, Format format);
std::string run_analyze(const CmnbParams& params, int dpcp_terms, Format format);

struct LimitArgs {
  std::string kind;  // cmnb-cmp, cmnhg-cmnb, cmb-cmp
  ParamArgs params;
  std::vector<double> grid;  // empty means the default grid
};

std::string run_limits(const LimitArgs& args, Format format);

}  // namespace cmnb::cli
