#include <fstream>
#include <sstream>

#include "doctest.h"
#include "foldcalc/manifest.hpp"
#include "support.hpp"

using namespace foldcalc;
using namespace foldcalc::testing;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    read_manifest(in);
  } catch (const ManifestError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("model manifests round-trip") {
  for (const auto& name : model_names()) {
    CAPTURE(name);
    Manifest m = model_manifest(name, 1);
    json a = to_json(m);
    Manifest back = manifest_from_json(json::parse(a.dump()));
    CHECK(to_json(back) == a);
    CHECK(back.forms.size() == m.forms.size());
    CHECK(back.expected.size() == m.expected.size());

    // Forms evaluate identically after reparsing, profiles included.
    std::mt19937 rng(2);
    for (const auto& [fname, f] : m.forms) {
      CompiledForm x(f);
      CompiledForm y(back.forms.at(fname));
      for (int k = 0; k < 10; ++k) {
        auto p = random_point(rng, *f.chart());
        try {
          if (f.degree() == 1)
            CHECK((x.covector(p) - y.covector(p)).cwiseAbs().maxCoeff() <= 1e-12 * (1 + x.max_abs(p)));
          if (f.degree() == 2)
            CHECK((x.skew_matrix(p) - y.skew_matrix(p)).cwiseAbs().maxCoeff() <= 1e-12 * (1 + x.max_abs(p)));
        } catch (const EvalError&) {
        }
      }
    }
  }
  CHECK_THROWS_AS(model_manifest("nope", 1), ManifestError);
}

TEST_CASE("profiles survive serialization exactly") {
  Manifest m = model_manifest("ideal-completion", 1);
  json a = to_json(m);
  REQUIRE(!a["profiles"].empty());
  Manifest back = manifest_from_json(a);
  for (const auto& [name, s] : m.profiles) {
    REQUIRE(back.profiles.count(name));
    CHECK(back.profiles.at(name)->breakpoints() == s->breakpoints());
  }
  for (const auto& [name, s] : m.profiles) {
    for (auto x : {Number::rational(-1, 4), Number::rational(-1, 3), Number(0)})
      CHECK(back.profiles.at(name)->exact_at(x) == s->exact_at(x));
  }
  // Exact rationals are written as "p/q" strings.
  bool saw_fraction = false;
  for (const auto& p : a["profiles"])
    for (const auto& b : p["breakpoints"])
      saw_fraction = saw_fraction || (b.is_string() && b.get<std::string>().find('/') != std::string::npos);
  CHECK(saw_fraction);
}

TEST_CASE("lefschetz fixtures") {
  auto braid = read_manifest_file("braid.json");
  REQUIRE(braid.folded_fibrations.count("braid"));
  CHECK(check_folded_wlf(braid.folded_fibrations.at("braid")).verdict == WlfVerdict::EqualOnHomology);
  auto fib = read_manifest_file("fibrations.json");
  CHECK(fib.fibrations.size() == 2);
  REQUIRE(fib.stabilizations.size() == 1);
  CHECK(fib.stabilizations[0].spec.cls == std::vector<std::int64_t>{0, 1, 1});
  json again = to_json(fib);
  CHECK(to_json(manifest_from_json(again)) == again);
}

TEST_CASE("manifest diagnostics") {
  CHECK(error_of("{\"schema\": \"foldcalc/1\",\n  \"charts\": [ }").find("line 2, column") != std::string::npos);
  CHECK(error_of("{}").find("schema") != std::string::npos);
  CHECK(error_of("{\"schema\": \"foldcalc/9\"}").find("unsupported schema") != std::string::npos);
  std::string chart = R"({"id": "c", "vars": ["x", "y"], "box": [[-1, 1], [-1, 1]]})";
  CHECK(error_of(R"({"schema": "foldcalc/1", "charts": [)" + chart +
                 R"(], "forms": {"a": {"chart": "d", "degree": 1}}})")
            .find("$.forms.a.chart") != std::string::npos);
  CHECK(error_of(R"({"schema": "foldcalc/1", "charts": [)" + chart +
                 R"(], "forms": {"a": {"chart": "c", "degree": 1, "terms": [{"dx": ["q"], "coeff": "1"}]}}})")
            .find("unknown variable 'q'") != std::string::npos);
  CHECK(error_of(R"({"schema": "foldcalc/1", "charts": [)" + chart +
                 R"(], "forms": {"a": {"chart": "c", "degree": 2, "terms": [{"dx": ["x"], "coeff": "1"}]}}})")
            .find("needs 2 differentials") != std::string::npos);
  CHECK(error_of(R"({"schema": "foldcalc/1", "charts": [{"id": "c", "vars": ["x"], "box": []}]})")
            .find("$.charts[0].box") != std::string::npos);
  CHECK(error_of(R"({"schema": "foldcalc/1", "pages": {"p": {"form": [[0, 1], [1, 0]]}}})").find("not skew") !=
        std::string::npos);
  CHECK(error_of(R"({"schema": "foldcalc/1", "pages": {"p": {"form": [[0, 1], [-1, 0]]}},
                    "fibrations": {"w": {"page": "p", "cycles": [{"class": [1, 0, 0]}]}}})")
            .find("rank 2 page") != std::string::npos);
}

TEST_CASE("reports round-trip") {
  Report r;
  r.command = "check contact";
  StructureReport a;
  a.property = "contact";
  a.chart = "r3";
  a.verdict = Verdict::Fail;
  a.margin = -0.25;
  a.witness = {0.5, -1.0, 0.125};
  a.samples = 4913;
  a.notes = {"form alpha"};
  a.values = {{"sigma", 1.0}, {"far", std::numeric_limits<double>::infinity()}};
  a.locus = {{0.0, 0.1, 0.2}, {1.0, 1.1, 1.2}};
  StructureReport b = a;
  b.verdict = Verdict::Pass;
  b.margin = 1.0 / 3.0;
  r.checks = {b, a};
  r.payload = {{"seed", 7}, {"matrix", {{1, 0}, {0, 1}}}};
  r.summary = "two checks";
  r.finalize();
  CHECK(r.verdict == Verdict::Fail);
  json j = to_json(r);
  CHECK(j["schema"] == kReportSchema);
  Report back = report_from_json(json::parse(j.dump()));
  CHECK(back == r);
  CHECK(report_text(back).find("witness (0.5, -1, 0.125)") != std::string::npos);

  Report empty;
  empty.finalize();
  CHECK(empty.verdict == Verdict::Inconclusive);
  r.checks = {b};
  r.finalize();
  CHECK(r.verdict == Verdict::Pass);
  CHECK_THROWS_AS(report_from_json(json{{"schema", "other"}}), ManifestError);
}
