#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmnb/distribution.hpp"
#include "cmnb/frequency_table.hpp"
#include "cmnb/params.hpp"

namespace cmnb {

enum class ModelKind { Cmnb, Nb, Cmp };

std::string to_string(ModelKind kind);
// Accepts "cmnb", "nb", "cmp".
ModelKind parse_model_kind(const std::string& name);
int parameter_count(ModelKind kind);

struct FitConfig {
  // Starting point for CMNB fits. Empty means automatic.
  std::optional<CmnbParams> init;
  int max_iter = 200;
  // Bound on the sup-norm of the score in fitting coordinates, divided by n.
  double grad_tol = 1e-8;
  int max_halvings = 30;
  // Longest Newton step allowed in fitting coordinates.
  double max_step = 3.0;
  TruncationPolicy policy;
};

struct FitResult {
  ModelKind kind = ModelKind::Cmnb;
  Family params;
  // (r, nu, p) for CMNB, (r, p) for NB, (lambda, nu) for CMP.
  std::vector<double> values;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::optional<std::vector<double>> standard_errors;
  // Log-likelihood of every accepted iterate, starting point first.
  std::vector<double> loglik_trace;
  std::string message;
  // Which starting point produced the result.
  std::string start;
};

// Log-likelihood of the table under CMNB, written through ln C.
double loglik(const FrequencyTable& table, const CmnbParams& params,
              const TruncationPolicy& policy = {});
// Generic sum of n_k log pmf(k).
double loglik(const FrequencyTable& table, const Family& family,
              const TruncationPolicy& policy = {});

// (F1, F2, F3): partial derivatives of the CMNB log-likelihood in r, nu, p.
std::array<double, 3> score(const FrequencyTable& table, const CmnbParams& params,
                            const TruncationPolicy& policy = {});

// Crude (r, nu, p) from the first four relative frequencies. `probs` holds
// P_0..P_3 (more entries are ignored). Throws InsufficientSupport when one of
// them is zero and NumericalError when no valid root exists.
CmnbParams ratio_regression_init(std::span<const double> probs);
CmnbParams ratio_regression_init(const FrequencyTable& table);

// NB moment matching, returned as a CMNB record with nu = 1.
CmnbParams moment_init(const FrequencyTable& table);

FitResult mle_fit(const FrequencyTable& table, const FitConfig& config = {});
FitResult mle_fit_nb(const FrequencyTable& table, const FitConfig& config = {});
FitResult mle_fit_cmp(const FrequencyTable& table, const FitConfig& config = {});
FitResult fit_model(const FrequencyTable& table, ModelKind kind, const FitConfig& config = {});

// n pmf(k), k = 0..k_max.
std::vector<double> expected_frequencies(const Family& family, std::int64_t n,
                                         std::int64_t k_max,
                                         const TruncationPolicy& policy = {});

}  // namespace cmnb
