// foldcalc: manifest-driven certification of contact, symplectic and folded
// structures, the fold/germ correspondence and Lefschetz fibration words.
//
// Exit status: 0 pass, 1 fail or inconclusive, 2 input error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "foldcalc/manifest.hpp"

using namespace foldcalc;
using nlohmann::json;

namespace {

struct Globals {
  std::string manifest;
  std::string grid;
  double tol = 1e-9;
  int seed = 0;
  std::string report;
  std::string format = "text";
};

struct Selection {
  std::string form;
  std::string fold;
  std::string field;
  std::string function;
  std::string germ;
};

class InputError : public Error {
 public:
  using Error::Error;
};

std::vector<int> parse_counts(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      int k = std::stoi(item, &used);
      if (used != item.size() || k < 2) throw std::invalid_argument(item);
      out.push_back(k);
    } catch (const std::exception&) {
      throw InputError("--grid: '" + item + "' is not an integer >= 2");
    }
  }
  return out;
}

Manifest load(const Globals& g, const std::string& positional) {
  std::string path = positional.empty() ? g.manifest : positional;
  if (path.empty() || path == "-") return read_manifest(std::cin);
  return read_manifest_file(path);
}

void write_json(std::ostream& os, const json& j) { os << j.dump(2) << "\n"; }

// Text or JSON report on stdout, both forms to --report when given.
int emit(const Globals& g, Report& r, bool stdout_is_manifest = false) {
  r.payload["seed"] = g.seed;
  std::string text = report_text(r);
  if (!g.report.empty()) {
    std::ofstream js(g.report);
    std::ofstream tx(g.report + ".txt");
    if (!js || !tx) throw InputError("cannot write report to " + g.report);
    write_json(js, to_json(r));
    tx << text;
  }
  std::ostream& os = stdout_is_manifest ? std::cerr : std::cout;
  if (g.format == "json" && !stdout_is_manifest) write_json(os, to_json(r));
  else os << text;
  return r.verdict == Verdict::Pass ? 0 : 1;
}

const NamedFold* fold_on(const Manifest& m, const std::string& chart, const std::string& wanted) {
  if (!wanted.empty()) {
    auto it = m.folds.find(wanted);
    if (it == m.folds.end()) throw InputError("no fold named '" + wanted + "'");
    return it->second.chart == chart ? &it->second : nullptr;
  }
  const NamedFold* found = nullptr;
  for (const auto& [name, f] : m.folds) {
    if (f.chart != chart) continue;
    if (found) throw InputError("several folds on chart " + chart + "; pick one with --fold");
    found = &f;
  }
  return found;
}

const DifferentialForm& form_named(const Manifest& m, const std::string& name) {
  auto it = m.forms.find(name);
  if (it == m.forms.end()) throw InputError("no form named '" + name + "'");
  return it->second;
}

StructureReport run_property(const Manifest& m, const std::string& property, const std::string& form_name,
                             const Selection& sel, const std::vector<int>& counts, CheckOptions opt) {
  if (property == "gradient-like") {
    std::string fx = sel.field.empty() ? form_name : sel.field;
    auto xi = m.fields.find(fx);
    if (xi == m.fields.end()) throw InputError("gradient-like needs --field (no field named '" + fx + "')");
    auto fi = m.functions.find(sel.function);
    if (fi == m.functions.end()) throw InputError("gradient-like needs --function naming a function");
    if (fi->second.chart != xi->second.chart()->id()) throw InputError("field and function live on different charts");
    return check_gradient_like(xi->second, fi->second.expr, fi->second.critical, m.grid(xi->second.chart(), counts),
                               0.1, opt);
  }
  const auto& f = form_named(m, form_name);
  auto grid = m.grid(f.chart(), counts);
  StructureReport r;
  if (property == "contact") r = check_contact(f, grid, opt);
  else if (property == "symplectic") r = check_symplectic(f, grid, opt);
  else if (property == "liouville") r = check_liouville(f, grid, opt);
  else if (property == "folded" || property == "positive-contact-type") {
    const NamedFold* fold = fold_on(m, f.chart()->id(), sel.fold);
    if (!fold) throw InputError("no fold on chart " + f.chart()->id() + " for form " + form_name);
    r = property == "folded" ? check_folded(f, fold->spec, grid, opt)
                             : check_positive_contact_type(f, fold->spec, grid, opt);
  } else {
    throw InputError("unknown property '" + property + "'");
  }
  r.notes.insert(r.notes.begin(), "form " + form_name);
  return r;
}

// Forms a bare `check <property>` applies to.
std::vector<std::string> default_forms(const Manifest& m, const std::string& property, const Selection& sel) {
  std::vector<std::string> out;
  for (const auto& [name, f] : m.forms) {
    int dim = f.chart()->dim();
    bool ok = false;
    if (property == "contact") ok = f.degree() == 1 && dim % 2 == 1;
    else if (property == "symplectic") ok = f.degree() == 2;
    else if (property == "liouville") ok = f.degree() == 1 && dim % 2 == 0;
    else if (property == "folded") ok = f.degree() == 2 && fold_on(m, f.chart()->id(), sel.fold);
    else if (property == "positive-contact-type") ok = f.degree() == 1 && fold_on(m, f.chart()->id(), sel.fold);
    if (ok) out.push_back(name);
  }
  return out;
}

int cmd_check(const Globals& g, const std::string& property, const std::string& path, const Selection& sel) {
  Manifest m = load(g, path);
  auto counts = parse_counts(g.grid);
  CheckOptions opt{g.tol};
  Report r;
  r.command = "check " + property;
  if (property == "expected") {
    if (m.expected.empty()) throw InputError("manifest lists no expectations");
    for (const auto& e : m.expected) {
      StructureReport got = run_property(m, e.property, e.form, sel, counts, opt);
      StructureReport c = got;
      c.property = "expect " + e.property;
      c.verdict = got.verdict == e.verdict ? Verdict::Pass : Verdict::Fail;
      c.notes.push_back(std::string("expected ") + verdict_name(e.verdict) + ", got " + verdict_name(got.verdict));
      r.checks.push_back(c);
    }
  } else if (property == "gradient-like") {
    r.checks.push_back(run_property(m, property, sel.field, sel, counts, opt));
  } else {
    std::vector<std::string> names;
    if (!sel.form.empty()) names.push_back(sel.form);
    else names = default_forms(m, property, sel);
    if (names.empty()) throw InputError("no form in the manifest fits 'check " + property + "'; use --form");
    for (const auto& n : names) r.checks.push_back(run_property(m, property, n, sel, counts, opt));
  }
  r.finalize();
  return emit(g, r);
}

int cmd_model(const Globals& g, const std::string& name, int n) {
  Manifest m = model_manifest(name, n);
  write_json(std::cout, to_json(m));
  return 0;
}

GermOptions germ_options(const Globals& g, double eps) {
  GermOptions o;
  o.counts = parse_counts(g.grid);
  o.check.tol = g.tol;
  if (eps > 0) o.eps = Number::parse_decimal(std::to_string(eps));
  return o;
}

// Fold and lambda from --form/--fold, or the unique 1-form on a chart with a fold.
std::pair<std::string, const NamedFold*> pick_presentation(const Manifest& m, const Selection& sel) {
  std::vector<std::string> names;
  if (!sel.form.empty()) names.push_back(sel.form);
  else names = default_forms(m, "positive-contact-type", sel);
  if (names.size() != 1) throw InputError("pick the primitive with --form (" + std::to_string(names.size()) + " candidates)");
  const auto& f = form_named(m, names[0]);
  if (f.degree() != 1) throw InputError("form " + names[0] + " is not a 1-form");
  const NamedFold* fold = fold_on(m, f.chart()->id(), sel.fold);
  if (!fold) throw InputError("no fold on chart " + f.chart()->id());
  return {names[0], fold};
}

int cmd_fold_to_germ(const Globals& g, const std::string& path, const Selection& sel, double eps) {
  Manifest m = load(g, path);
  auto opt = germ_options(g, eps);
  auto [name, fold] = pick_presentation(m, sel);
  auto fp = make_presentation(m.forms.at(name), fold->spec, opt);
  Report r;
  r.command = "fold-to-germ";
  r.checks = {fp.folded, fp.contact_type};
  try {
    auto germ = fold_to_germ(fp, opt);
    r.checks.push_back(germ.contact);
    r.payload["f"] = to_string(germ.f);
    r.payload["values"] = germ.values;
    Manifest out = m;
    add_germ(out, sel.germ.empty() ? "germ" : sel.germ, germ);
    write_json(std::cout, to_json(out));
  } catch (const ManifestError&) {
    throw;
  } catch (const Error& e) {
    r.summary = e.what();
  }
  r.finalize();
  return emit(g, r, true);
}

const NamedGerm& pick_germ(const Manifest& m, const std::string& wanted) {
  if (!wanted.empty()) {
    auto it = m.germs.find(wanted);
    if (it == m.germs.end()) throw InputError("no germ named '" + wanted + "'");
    return it->second;
  }
  if (m.germs.size() != 1) throw InputError("pick the germ with --germ (" + std::to_string(m.germs.size()) + " candidates)");
  return m.germs.begin()->second;
}

int cmd_germ_to_fold(const Globals& g, const std::string& path, const Selection& sel) {
  Manifest m = load(g, path);
  auto opt = germ_options(g, 0);
  const auto& ng = pick_germ(m, sel.germ);
  ContactGerm germ{m.chart(ng.chart), ng.f, ng.beta, false, {}, {}};
  certify_germ(germ, opt);
  Report r;
  r.command = "germ-to-fold";
  r.checks.push_back(germ.contact);
  try {
    auto fp = germ_to_fold(germ, opt);
    r.checks.push_back(fp.folded);
    r.checks.push_back(fp.contact_type);
    Manifest out = m;
    add_form(out, "lambda_out", fp.lambda);
    add_form(out, "omega_out", fp.omega);
    add_fold(out, "fold_out", fp.chart(), fp.fold);
    write_json(std::cout, to_json(out));
  } catch (const ManifestError&) {
    throw;
  } catch (const Error& e) {
    r.summary = e.what();
  }
  r.finalize();
  return emit(g, r, true);
}

int cmd_roundtrip(const Globals& g, const std::string& path, const Selection& sel, double eps) {
  Manifest m = load(g, path);
  auto opt = germ_options(g, eps);
  auto [name, fold] = pick_presentation(m, sel);
  auto fp = make_presentation(m.forms.at(name), fold->spec, opt);
  Report r;
  r.command = "roundtrip";
  r.checks = {fp.folded, fp.contact_type};
  try {
    auto rt = roundtrip_fold(fp, opt);
    r.checks.push_back(rt.germ.contact);
    r.checks.push_back(rt.normalized.contact);
    r.checks.push_back(rt.out.folded);
    r.checks.push_back(rt.out.contact_type);
    StructureReport s;
    s.property = "roundtrip";
    s.chart = fp.chart()->id();
    s.verdict = rt.verdict;
    s.margin = 2.0 * rt.spacing - rt.hausdorff;
    s.samples = rt.sign_samples;
    s.witness = rt.mismatch_witness;
    s.values = {{"hausdorff", rt.hausdorff},
                {"spacing", rt.spacing},
                {"sign_mismatches", static_cast<double>(rt.sign_mismatches)}};
    r.checks.push_back(s);
  } catch (const ManifestError&) {
    throw;
  } catch (const Error& e) {
    r.summary = e.what();
  }
  r.finalize();
  return emit(g, r);
}

json matrix_json(const IntMatrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < a.cols(); ++k) row.push_back(a(i, k));
    rows.push_back(row);
  }
  return rows;
}

int cmd_lefschetz_check(const Globals& g, const std::string& path) {
  Manifest m = load(g, path);
  if (m.folded_fibrations.empty()) throw InputError("manifest has no folded_fibrations");
  Report r;
  r.command = "lefschetz check";
  for (const auto& [name, fw] : m.folded_fibrations) {
    auto w = check_folded_wlf(fw);
    StructureReport s;
    s.property = "folded-wlf";
    s.chart = name;
    s.verdict = w.verdict == WlfVerdict::EqualOnHomology ? Verdict::Pass
                : w.verdict == WlfVerdict::Distinct     ? Verdict::Fail
                                                        : Verdict::Inconclusive;
    s.notes = {wlf_verdict_name(w.verdict), w.note};
    s.values["necessary_only"] = w.necessary_only ? 1.0 : 0.0;
    r.checks.push_back(s);
    r.payload[name] = {{"verdict", wlf_verdict_name(w.verdict)}, {"plus", matrix_json(w.plus)},
                       {"minus", matrix_json(w.minus)}};
  }
  r.finalize();
  return emit(g, r);
}

int cmd_lefschetz_stabilize(const Globals& g, const std::string& path) {
  Manifest m = load(g, path);
  if (m.stabilizations.empty()) throw InputError("manifest has no stabilizations");
  Report r;
  r.command = "lefschetz stabilize";
  Manifest out = m;
  out.stabilizations.clear();
  for (const auto& s : m.stabilizations) {
    AbstractWLF w;
    try {
      w = stabilize(out.fibrations.at(s.fibration), s.spec);
    } catch (const std::out_of_range&) {
      throw InputError("no fibration named '" + s.fibration + "'");
    } catch (const Error& e) {
      throw InputError(e.what());
    }
    w.page.label = s.fibration + "_page";
    out.pages[w.page.label] = w.page;
    out.fibrations[s.fibration] = w;
    StructureReport c;
    c.property = "stabilization";
    c.chart = s.fibration;
    c.verdict = Verdict::Pass;
    c.values = {{"rank", static_cast<double>(w.page.rank())}, {"cycles", static_cast<double>(w.cycles.size())}};
    r.checks.push_back(c);
    r.payload[s.fibration] = {{"monodromy", matrix_json(monodromy_h1(w))}};
  }
  write_json(std::cout, to_json(out));
  r.finalize();
  return emit(g, r, true);
}

int cmd_lefschetz_search(const Globals& g, const std::string& path, const std::string& a, const std::string& b,
                         int budget) {
  Manifest m = load(g, path);
  auto ia = m.fibrations.find(a);
  auto ib = m.fibrations.find(b);
  if (ia == m.fibrations.end() || ib == m.fibrations.end()) throw InputError("--a and --b must name fibrations");
  SearchResult s;
  try {
    s = common_stabilization_search(ia->second, ib->second, budget);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  Report r;
  r.command = "lefschetz search";
  StructureReport c;
  c.property = "common-stabilization";
  c.chart = a + "," + b;
  c.samples = s.explored;
  c.values = {{"stabilizations", static_cast<double>(s.stabilizations)}, {"truncated", s.truncated ? 1.0 : 0.0}};
  if (s.found) {
    c.verdict = Verdict::Pass;
    c.notes = {"EqualOnHomology after " + std::to_string(s.stabilizations) + " stabilizations"};
    r.payload["plus"] = json::array();
    for (const auto& v : s.found->plus) r.payload["plus"].push_back(std::vector<std::int64_t>(v.cls.data(), v.cls.data() + v.cls.size()));
    r.payload["minus"] = json::array();
    for (const auto& v : s.found->minus) r.payload["minus"].push_back(std::vector<std::int64_t>(v.cls.data(), v.cls.data() + v.cls.size()));
    r.payload["page"] = matrix_json(s.found->page.form);
  } else {
    c.verdict = Verdict::Inconclusive;
    c.notes = {"nothing within budget " + std::to_string(budget) + "; this is not a refutation"};
  }
  r.checks.push_back(c);
  r.finalize();
  return emit(g, r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"foldcalc: certify folded, contact and Liouville structures"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--manifest", g.manifest, "Manifest path; '-' or absent reads stdin");
  app.add_option("--grid", g.grid, "Points per axis, N or N,N,...");
  app.add_option("--tol", g.tol, "Check tolerance");
  app.add_option("--seed", g.seed, "Seed recorded with every report");
  app.add_option("--report", g.report, "Write the JSON report here and the text report to PATH.txt");
  app.add_option("--format", g.format, "Report format on stdout")->check(CLI::IsMember({"json", "text"}));

  Selection sel;
  std::string path;
  std::string property;
  auto* check = app.add_subcommand("check", "Certify a structure on manifest forms");
  check->add_option("property", property, "contact|symplectic|folded|liouville|gradient-like|positive-contact-type|expected")
      ->required()
      ->check(CLI::IsMember({"contact", "symplectic", "folded", "liouville", "gradient-like", "positive-contact-type",
                             "expected"}));
  check->add_option("manifest", path, "Manifest path");
  check->add_option("--form", sel.form, "Form to check (default: every form that fits)");
  check->add_option("--fold", sel.fold, "Fold spec");
  check->add_option("--field", sel.field, "Vector field (gradient-like)");
  check->add_option("--function", sel.function, "Function (gradient-like)");

  std::string model;
  int n = 2;
  auto* mod = app.add_subcommand("model", "Emit a model manifest on stdout");
  mod->add_option("name", model, "Model name")->required()->check(CLI::IsMember(model_names()));
  mod->add_option("--n", n, "Half dimension")->check(CLI::Range(1, 3));

  double eps = 0;
  auto* f2g = app.add_subcommand("fold-to-germ", "Folded presentation to contact germ");
  auto* g2f = app.add_subcommand("germ-to-fold", "Contact germ to folded presentation");
  auto* rt = app.add_subcommand("roundtrip", "fold -> germ -> fold");
  for (auto* s : {f2g, g2f, rt}) {
    s->add_option("manifest", path, "Manifest path");
    s->add_option("--germ", sel.germ, "Germ name");
  }
  for (auto* s : {f2g, rt}) {
    s->add_option("--form", sel.form, "Primitive lambda");
    s->add_option("--fold", sel.fold, "Fold spec");
    s->add_option("--eps", eps, "Collar half-width of the germ profile");
  }

  auto* lef = app.add_subcommand("lefschetz", "Lefschetz fibration words on H_1");
  lef->require_subcommand(1);
  auto* lcheck = lef->add_subcommand("check", "Compare plus and minus monodromies");
  auto* lstab = lef->add_subcommand("stabilize", "Apply the manifest's stabilizations");
  auto* lsearch = lef->add_subcommand("search", "Bounded common-stabilization search");
  std::string fa, fb;
  int budget = 2;
  for (auto* s : {lcheck, lstab, lsearch}) s->add_option("manifest", path, "Manifest path");
  lsearch->add_option("--a", fa, "First fibration")->required();
  lsearch->add_option("--b", fb, "Second fibration")->required();
  lsearch->add_option("--budget", budget, "Maximum stabilizations")->check(CLI::Range(0, 6));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*check) return cmd_check(g, property, path, sel);
    if (*mod) return cmd_model(g, model, n);
    if (*f2g) return cmd_fold_to_germ(g, path, sel, eps);
    if (*g2f) return cmd_germ_to_fold(g, path, sel);
    if (*rt) return cmd_roundtrip(g, path, sel, eps);
    if (*lcheck) return cmd_lefschetz_check(g, path);
    if (*lstab) return cmd_lefschetz_stabilize(g, path);
    if (*lsearch) return cmd_lefschetz_search(g, path, fa, fb, budget);
  } catch (const ManifestError& e) {
    std::cerr << "foldcalc: manifest error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "foldcalc: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
