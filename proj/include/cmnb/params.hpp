#pragma once

#include <cstdint>
#include <string>
#include <variant>

namespace cmnb {

// COM-negative binomial: pmf proportional to (Gamma(r+k)/(k! Gamma(r)))^nu p^k (1-p)^r.
struct CmnbParams {
  double r = 1.0;
  double nu = 1.0;
  double p = 0.5;
};

// Same family written with p_tilde = p^(1/nu), so the pmf is proportional to
// [NB(k; r, p_tilde)]^nu.
struct CmnbTildeParams {
  double r = 1.0;
  double nu = 1.0;
  double p_tilde = 0.5;
};

struct NbParams {
  double r = 1.0;
  double p = 0.5;
};

// COM-Poisson: pmf proportional to lambda^k / (k!)^nu. nu = 0 requires lambda < 1.
struct CmpParams {
  double lambda = 1.0;
  double nu = 1.0;
};

// COM-binomial on {0..m}.
struct CmbParams {
  std::int64_t m = 1;
  double p = 0.5;
  double nu = 1.0;
};

// COM-negative hypergeometric on {0..z}.
struct CmnhgParams {
  std::int64_t z = 0;
  double nu = 1.0;
  double m = 1.0;
  double n = 1.0;
};

using Family = std::variant<CmnbParams, NbParams, CmpParams, CmbParams, CmnhgParams>;

// Throw InvalidParameter naming the violated constraint.
void validate(const CmnbParams& params);
void validate(const CmnbTildeParams& params);
void validate(const NbParams& params);
void validate(const CmpParams& params);
void validate(const CmbParams& params);
void validate(const CmnhgParams& params);
void validate(const Family& family);

std::string family_name(const Family& family);

// Number of free parameters a fit of this family estimates.
int parameter_count(const Family& family);

CmnbTildeParams to_tilde(const CmnbParams& params);
CmnbParams from_tilde(const CmnbTildeParams& params);

}  // namespace cmnb
