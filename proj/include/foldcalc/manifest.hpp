#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "foldcalc/germs.hpp"
#include "foldcalc/lefschetz.hpp"
#include "foldcalc/models.hpp"
#include "foldcalc/structures.hpp"
#include "json.hpp"

namespace foldcalc {

inline constexpr const char* kManifestSchema = "foldcalc/1";
inline constexpr const char* kReportSchema = "foldcalc-report/1";

/// Raised for malformed manifests; `where` is a JSON path or "line L, column C".
class ManifestError : public Error {
 public:
  ManifestError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

struct ScalarFunction {
  std::string chart;
  Expr expr;
  /// Known critical points, used by gradient-like checks.
  std::vector<std::vector<double>> critical;
};

struct NamedFold {
  std::string chart;
  FoldSpec spec;
};

struct NamedGerm {
  std::string chart;
  Expr f;
  DifferentialForm beta;
};

struct NamedStabilization {
  std::string fibration;
  StabilizationSpec spec;
};

struct Manifest {
  std::string description;
  std::map<std::string, ChartPtr> charts;
  ProfileTable profiles;
  std::map<std::string, DifferentialForm> forms;
  std::map<std::string, VectorField> fields;
  std::map<std::string, ScalarFunction> functions;
  std::map<std::string, NamedFold> folds;
  std::map<std::string, NamedGerm> germs;
  /// Per-chart points per axis.
  std::map<std::string, std::vector<int>> grids;
  std::map<std::string, Page> pages;
  std::map<std::string, AbstractWLF> fibrations;
  std::map<std::string, FoldedWLF> folded_fibrations;
  std::vector<NamedStabilization> stabilizations;
  std::vector<Expectation> expected;

  ChartPtr chart(const std::string& id) const;
  /// The manifest grid for the chart, the `counts` override, or the defaults.
  SampleGrid grid(const ChartPtr& c, const std::vector<int>& counts = {}) const;
};

Manifest manifest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Manifest& m);

/// Parses text, reporting syntax errors by line and column.
Manifest read_manifest(std::istream& in);
Manifest read_manifest_file(const std::string& path);

/// Every expression-bearing object is registered under its chart; missing
/// charts are added from the forms themselves.
void add_form(Manifest& m, const std::string& name, const DifferentialForm& f);
void add_field(Manifest& m, const std::string& name, const VectorField& x);
void add_function(Manifest& m, const std::string& name, const ChartPtr& c, const Expr& e);
void add_fold(Manifest& m, const std::string& name, const ChartPtr& c, const FoldSpec& f);
void add_germ(Manifest& m, const std::string& name, const ContactGerm& g);

// ---------------------------------------------------------------------------
// Reports

struct Report {
  std::string command;
  std::vector<StructureReport> checks;
  Verdict verdict = Verdict::Inconclusive;
  nlohmann::json payload = nlohmann::json::object();
  std::string summary;

  /// Pass iff every check passes, Fail if any fails, Inconclusive otherwise
  /// (including an empty check list).
  void finalize();
  friend bool operator==(const Report&, const Report&) = default;
};

nlohmann::json to_json(const StructureReport& r);
StructureReport structure_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);
std::string report_text(const Report& r);

/// The named model as a manifest. Names: darboux, folded-sphere, convex-sphere,
/// ideal-completion, double, asymmetric-double, fold-collar, dividing-collar.
Manifest model_manifest(const std::string& name, int n);
std::vector<std::string> model_names();

}  // namespace foldcalc
