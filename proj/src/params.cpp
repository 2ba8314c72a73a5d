#include "cmnb/params.hpp"

#include <cmath>
#include <sstream>

#include "cmnb/errors.hpp"

namespace cmnb {
namespace {

void check(bool ok, const char* family, const char* constraint, double value) {
  if (ok) return;
  std::ostringstream msg;
  msg << family << ": constraint " << constraint << " violated (got " << value << ")";
  throw InvalidParameter(msg.str());
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }
bool open_unit(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

void validate(const CmnbParams& params) {
  check(positive(params.r), "CMNB", "r > 0", params.r);
  check(positive(params.nu), "CMNB", "nu > 0", params.nu);
  check(open_unit(params.p), "CMNB", "0 < p < 1", params.p);
}

void validate(const CmnbTildeParams& params) {
  check(positive(params.r), "CMNB", "r > 0", params.r);
  check(positive(params.nu), "CMNB", "nu > 0", params.nu);
  check(open_unit(params.p_tilde), "CMNB", "0 < p_tilde < 1", params.p_tilde);
}

void validate(const NbParams& params) {
  check(positive(params.r), "NB", "r > 0", params.r);
  check(open_unit(params.p), "NB", "0 < p < 1", params.p);
}

void validate(const CmpParams& params) {
  check(positive(params.lambda), "CMP", "lambda > 0", params.lambda);
  check(std::isfinite(params.nu) && params.nu >= 0.0, "CMP", "nu >= 0", params.nu);
  if (params.nu == 0.0) {
    check(params.lambda < 1.0, "CMP", "lambda < 1 when nu = 0", params.lambda);
  }
}

void validate(const CmbParams& params) {
  check(params.m >= 1, "CMB", "m >= 1", static_cast<double>(params.m));
  check(open_unit(params.p), "CMB", "0 < p < 1", params.p);
  check(positive(params.nu), "CMB", "nu > 0", params.nu);
}

void validate(const CmnhgParams& params) {
  check(params.z >= 0, "CMNHG", "z >= 0", static_cast<double>(params.z));
  check(positive(params.nu), "CMNHG", "nu > 0", params.nu);
  check(positive(params.m), "CMNHG", "m > 0", params.m);
  check(positive(params.n), "CMNHG", "n > 0", params.n);
}

void validate(const Family& family) {
  std::visit([](const auto& params) { validate(params); }, family);
}

std::string family_name(const Family& family) {
  struct Visitor {
    std::string operator()(const CmnbParams&) const { return "cmnb"; }
    std::string operator()(const NbParams&) const { return "nb"; }
    std::string operator()(const CmpParams&) const { return "cmp"; }
    std::string operator()(const CmbParams&) const { return "cmb"; }
    std::string operator()(const CmnhgParams&) const { return "cmnhg"; }
  };
  return std::visit(Visitor{}, family);
}

int parameter_count(const Family& family) {
  struct Visitor {
    int operator()(const CmnbParams&) const { return 3; }
    int operator()(const NbParams&) const { return 2; }
    int operator()(const CmpParams&) const { return 2; }
    int operator()(const CmbParams&) const { return 2; }
    int operator()(const CmnhgParams&) const { return 3; }
  };
  return std::visit(Visitor{}, family);
}

CmnbTildeParams to_tilde(const CmnbParams& params) {
  validate(params);
  return {params.r, params.nu, std::pow(params.p, 1.0 / params.nu)};
}

CmnbParams from_tilde(const CmnbTildeParams& params) {
  validate(params);
  return {params.r, params.nu, std::pow(params.p_tilde, params.nu)};
}

}  // namespace cmnb
