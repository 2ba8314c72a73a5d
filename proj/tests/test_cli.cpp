#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cli/commands.hpp"
#include "cli/datasets.hpp"
#include "cli/ingest.hpp"
#include "cmnb/errors.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cmnb;
using namespace cmnb::cli;
using nlohmann::json;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_frequency_text(text, "t.csv");
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("ingest csv and raw observations") {
  const auto csv = parse_frequency_text("value,count\n0,5\n2,1\n0,3\n");
  CHECK(csv.count_at(0) == 8);
  CHECK(csv.count_at(1) == 0);
  CHECK(csv.count_at(2) == 1);
  CHECK(csv.total() == 9);

  const auto raw = parse_frequency_text("# comment\n3\n\n0\n3\n");
  CHECK(raw.count_at(3) == 2);
  CHECK(raw.count_at(0) == 1);
  CHECK(raw.total() == 3);

  const auto no_header = parse_frequency_text("1,4\r\n2,0\r\n");
  CHECK(no_header.count_at(1) == 4);
  CHECK(no_header.total() == 4);
}

TEST_CASE("ingest errors name the line") {
  CHECK(error_of("value,count\n0,-1\n").find("t.csv:2:") == 0);
  CHECK(error_of("0,-1\n").find("t.csv:1:") == 0);
  CHECK(error_of("value,count\n0,1\n1.5,2\n").find("t.csv:3:") == 0);
  CHECK(error_of("0,1,2\n").find("t.csv:1:") == 0);
  CHECK(error_of("-2\n").find("t.csv:1:") == 0);
  CHECK_FALSE(error_of("").empty());
  CHECK_FALSE(error_of("# only a comment\n").empty());
  CHECK_THROWS_AS(ingest_file("/nonexistent/dir/x.csv"), InputError);
}

TEST_CASE("csv round trip") {
  for (const auto& d : embedded_datasets()) {
    const auto table = d.table();
    CHECK(parse_frequency_text(to_csv(table)) == table);
  }
  CHECK(to_csv(FrequencyTable{}) == "value,count\n");
  CHECK(find_dataset("willmot") != nullptr);
  CHECK(find_dataset("nope") == nullptr);
}

TEST_CASE("model list and format parsing") {
  CHECK(parse_model_list("cmnb,nb").size() == 2);
  CHECK(parse_model_list("cmp").front() == ModelKind::Cmp);
  CHECK_THROWS(parse_model_list(""));
  CHECK_THROWS(parse_model_list("cmnb,poisson"));
  CHECK(parse_format("json") == Format::Json);
  CHECK_THROWS(parse_format("xml"));
}

TEST_CASE("family construction reports the violated constraint") {
  ParamArgs a;
  a.r = -1.0;
  a.nu = 1.0;
  a.p = 0.5;
  try {
    make_family("cmnb", a);
    FAIL("expected an exception");
  } catch (const InvalidParameter& e) {
    CHECK(std::string(e.what()).find("r > 0") != std::string::npos);
  }
  ParamArgs missing;
  missing.r = 1.0;
  CHECK_THROWS_AS(make_family("nb", missing), InvalidParameter);
  CHECK_THROWS_AS(make_family("zip", a), InvalidParameter);
}

TEST_CASE("fit report: text and json agree, fixed seed is deterministic") {
  FitOptions opts;
  opts.dataset = "sim_cmnb";
  opts.models = {ModelKind::Cmnb, ModelKind::Nb, ModelKind::Cmp};
  opts.bootstrap = 40;
  opts.seed = 11;
  const auto report = build_fit_report(opts);
  const std::string js = render_fit_json(report);
  const std::string text = render_fit_text(report);
  CHECK(js == render_fit_json(build_fit_report(opts)));
  CHECK(fit_exit_code(report) == kOk);

  const json doc = json::parse(js);
  CHECK(doc["n"] == 10000);
  REQUIRE(doc["models"].size() == 3);
  const auto rows = lines_of(text);
  const auto row = [&](const std::string& label) -> std::vector<std::string> {
    for (const auto& line : rows) {
      std::istringstream in(line);
      std::string head;
      in >> head;
      if (head == label) {
        std::vector<std::string> cells;
        for (std::string c; in >> c;) cells.push_back(c);
        return cells;
      }
    }
    return {};
  };
  const auto chi2 = row("chi2");
  const auto ks = row("K-S");
  const auto zero = row("0");
  REQUIRE(chi2.size() == 3);
  REQUIRE(ks.size() == 3);
  REQUIRE(zero.size() == 4);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& m = doc["models"][i];
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", m["chi2"].get<double>());
    CHECK(chi2[i] == buf);
    std::snprintf(buf, sizeof buf, "%.6f", m["ks"].get<double>());
    CHECK(ks[i] == buf);
    CHECK(std::stod(zero[i + 1]) == std::round(m["expected"][0].get<double>()));
    CHECK(m["ks_pvalue"].is_number());
  }
  CHECK(text.find("B = 40, seed = 11") != std::string::npos);

  opts.seed = 12;
  CHECK(render_fit_json(build_fit_report(opts)) != js);
}

TEST_CASE("fit exit codes") {
  FitOptions opts;
  opts.dataset = "willmot";
  opts.models = {ModelKind::Nb};
  opts.bootstrap = 0;
  const auto nb_only = build_fit_report(opts);
  CHECK(fit_exit_code(nb_only) == kOk);
  CHECK(json::parse(render_fit_json(nb_only))["models"][0]["ks_pvalue"].is_null());

  opts.dataset = "no_such_data";
  CHECK_THROWS(build_fit_report(opts));

  opts.dataset.clear();
  const std::string path = "cli_test_input.csv";
  {
    std::ofstream out(path);
    out << "value,count\n0,10\n1,x\n";
  }
  opts.input = path;
  CHECK_THROWS_AS(build_fit_report(opts), InputError);
  std::remove(path.c_str());
}

TEST_CASE("sample output") {
  const Family nb = NbParams{1.0, 0.5};
  const auto a = run_sample(nb, 500, 3, Format::Text);
  CHECK(a == run_sample(nb, 500, 3, Format::Text));
  CHECK(a != run_sample(nb, 500, 4, Format::Text));
  CHECK(parse_frequency_text(a).total() == 500);
  CHECK(run_sample(nb, 0, 3, Format::Text) == "value,count\n");
  const json doc = json::parse(run_sample(nb, 500, 3, Format::Json));
  CHECK(doc.is_object());
}

TEST_CASE("pmf, analyze and limits output") {
  const auto pmf = lines_of(run_pmf(NbParams{1.0, 0.5}, 3, Format::Text));
  REQUIRE(pmf.size() == 5);
  CHECK(pmf[0] == "k,pmf,cdf");
  CHECK(pmf[1] == "0,0.5,0.5");

  const json an = json::parse(run_analyze(CmnbParams{0.95, 10.4, 0.36}, 5, Format::Json));
  CHECK(an["dispersion"] == "overdispersed");
  CHECK(an["delta_0"].get<double>() > 0.0);
  CHECK(an["dpcp"]["alpha"].size() == 5);
  const auto text = run_analyze(CmnbParams{0.95, 10.4, 0.36}, 5, Format::Text);
  CHECK(text.find("log-convex") != std::string::npos);

  LimitArgs lim;
  lim.kind = "cmb-cmp";
  lim.params.nu = 2.0;
  lim.params.lambda = 1.0;
  const json lj = json::parse(run_limits(lim, Format::Json));
  CHECK(lj["strictly_decreasing"] == true);
  CHECK(lj["rows"].size() >= 3);
  lim.kind = "bogus";
  CHECK_THROWS(run_limits(lim, Format::Json));
}
