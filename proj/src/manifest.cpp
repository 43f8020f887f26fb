#include "foldcalc/manifest.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace foldcalc {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Scalars

json num_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double num_from(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ManifestError(where, "expected a number");
}

json exact_json(const Number& x) {
  if (!x.exact()) return x.to_double();
  if (x.q().is_integer()) return x.q().num();
  return std::to_string(x.q().num()) + "/" + std::to_string(x.q().den());
}

Number exact_from(const json& j, const std::string& where) {
  if (j.is_number_integer()) return Number(j.get<std::int64_t>());
  if (j.is_number()) return Number::inexact(j.get<double>());
  if (j.is_string()) {
    auto s = j.get<std::string>();
    auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return Number::parse_decimal(s);
      return Number::rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
    }
  }
  throw ManifestError(where, "expected an integer, decimal or \"p/q\"");
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ManifestError(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ManifestError(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string str(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_string()) throw ManifestError(where + "." + key, "expected a string");
  return v.get<std::string>();
}

template <typename T>
T get_as(const json& j, const std::string& where, const char* what) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ManifestError(where, std::string("expected ") + what);
  }
}

Expr expr_from(const json& j, const ChartPtr& c, const ProfileTable& profiles, const std::string& where) {
  if (j.is_number()) return Expr(exact_from(j, where));
  if (!j.is_string()) throw ManifestError(where, "expected an expression string");
  try {
    return parse_expr(j.get<std::string>(), c->vars(), &profiles);
  } catch (const Error& e) {
    throw ManifestError(where, e.what());
  }
}

// ---------------------------------------------------------------------------
// Splines

json spline_json(const Spline& s) {
  json bp = json::array();
  for (const auto& b : s.breakpoints()) bp.push_back(exact_json(b));
  json pieces = json::array();
  for (const auto& p : s.pieces()) {
    json cs = json::array();
    for (const auto& c : p.coeffs) cs.push_back(exact_json(c));
    pieces.push_back({{"origin", exact_json(p.origin)}, {"coeffs", cs}});
  }
  return {{"name", s.name()}, {"breakpoints", bp}, {"pieces", pieces}};
}

SplinePtr spline_from(const json& j, const std::string& where) {
  std::string name = str(j, "name", where);
  std::vector<Number> bp;
  const auto& jb = field(j, "breakpoints", where);
  for (std::size_t i = 0; i < jb.size(); ++i) bp.push_back(exact_from(jb[i], where + ".breakpoints[" + std::to_string(i) + "]"));
  std::vector<Spline::Piece> pieces;
  const auto& jp = field(j, "pieces", where);
  for (std::size_t i = 0; i < jp.size(); ++i) {
    std::string w = where + ".pieces[" + std::to_string(i) + "]";
    Spline::Piece p;
    p.origin = exact_from(field(jp[i], "origin", w), w + ".origin");
    const auto& jc = field(jp[i], "coeffs", w);
    for (std::size_t k = 0; k < jc.size(); ++k) p.coeffs.push_back(exact_from(jc[k], w + ".coeffs"));
    pieces.push_back(std::move(p));
  }
  try {
    return std::make_shared<const Spline>(name, bp, pieces);
  } catch (const Error& e) {
    throw ManifestError(where, e.what());
  }
}

void collect(const Expr& e, ProfileTable& out) { collect_profiles(e, out); }

// ---------------------------------------------------------------------------
// Charts, forms, fields

json chart_json(const Chart& c) {
  json box = json::array();
  for (const auto& iv : c.box()) box.push_back({num_json(iv.lo), num_json(iv.hi)});
  return {{"id", c.id()}, {"vars", c.vars()}, {"box", box}, {"orientation", c.orientation()}};
}

ChartPtr chart_from(const json& j, const std::string& where) {
  std::string id = str(j, "id", where);
  auto vars = get_as<std::vector<std::string>>(field(j, "vars", where), where + ".vars", "a list of names");
  const auto& jb = field(j, "box", where);
  if (!jb.is_array() || jb.size() != vars.size()) throw ManifestError(where + ".box", "needs one interval per variable");
  std::vector<Interval> box;
  for (std::size_t i = 0; i < jb.size(); ++i) {
    std::string w = where + ".box[" + std::to_string(i) + "]";
    if (!jb[i].is_array() || jb[i].size() != 2) throw ManifestError(w, "expected [lo, hi]");
    box.push_back({num_from(jb[i][0], w), num_from(jb[i][1], w)});
  }
  int orient = j.contains("orientation") ? get_as<int>(j["orientation"], where + ".orientation", "+1 or -1") : 1;
  try {
    return make_chart(id, vars, box, orient);
  } catch (const Error& e) {
    throw ManifestError(where, e.what());
  }
}

json form_json(const DifferentialForm& f) {
  json terms = json::array();
  const auto& vars = f.chart()->vars();
  for (const auto& [mask, c] : f.terms()) {
    json dx = json::array();
    for (int i : mask_indices(mask)) dx.push_back(vars[i]);
    terms.push_back({{"dx", dx}, {"coeff", to_string(c)}});
  }
  return {{"chart", f.chart()->id()}, {"degree", f.degree()}, {"terms", terms}};
}

int index_from(const json& j, const Chart& c, const std::string& where) {
  if (j.is_number_integer()) {
    int i = j.get<int>();
    if (i < 0 || i >= c.dim()) throw ManifestError(where, "index out of range");
    return i;
  }
  if (j.is_string()) {
    int i = c.index_of(j.get<std::string>());
    if (i < 0) throw ManifestError(where, "unknown variable '" + j.get<std::string>() + "' on chart " + c.id());
    return i;
  }
  throw ManifestError(where, "expected a variable name or index");
}

// ---------------------------------------------------------------------------
// Lefschetz data

json vec_json(const IntVector& v) { return std::vector<std::int64_t>(v.data(), v.data() + v.size()); }

json page_json(const Page& p) {
  json rows = json::array();
  for (int i = 0; i < p.rank(); ++i) rows.push_back(vec_json(p.form.row(i).transpose()));
  return {{"form", rows}, {"boundary", p.boundary_components}};
}

Page page_from(const std::string& label, const json& j, const std::string& where) {
  Page p;
  p.label = label;
  const auto& rows = field(j, "form", where);
  if (!rows.is_array()) throw ManifestError(where + ".form", "expected a list of rows");
  auto r = static_cast<Eigen::Index>(rows.size());
  p.form = IntMatrix::Zero(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    auto row = get_as<std::vector<std::int64_t>>(rows[i], where + ".form", "integer rows");
    if (static_cast<Eigen::Index>(row.size()) != r) throw ManifestError(where + ".form", "form is not square");
    for (Eigen::Index k = 0; k < r; ++k) p.form(i, k) = row[k];
  }
  p.boundary_components = j.contains("boundary") ? get_as<int>(j["boundary"], where + ".boundary", "an integer") : 1;
  try {
    validate(p);
  } catch (const Error& e) {
    throw ManifestError(where, e.what());
  }
  return p;
}

json cycles_json(const std::vector<VanishingCycle>& cs) {
  json out = json::array();
  for (const auto& c : cs) out.push_back({{"label", c.label}, {"class", vec_json(c.cls)}});
  return out;
}

std::vector<VanishingCycle> cycles_from(const json& j, const Page& p, const std::string& where) {
  std::vector<VanishingCycle> out;
  if (!j.is_array()) throw ManifestError(where, "expected a list of cycles");
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string w = where + "[" + std::to_string(i) + "]";
    auto cls = get_as<std::vector<std::int64_t>>(field(j[i], "class", w), w + ".class", "an integer vector");
    if (static_cast<int>(cls.size()) != p.rank())
      throw ManifestError(w + ".class", "length " + std::to_string(cls.size()) + " on a rank " + std::to_string(p.rank()) + " page");
    std::string label = j[i].contains("label") ? j[i]["label"].get<std::string>() : "L" + std::to_string(i + 1);
    out.push_back(cycle(label, cls));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

ChartPtr Manifest::chart(const std::string& id) const {
  auto it = charts.find(id);
  if (it == charts.end()) throw ManifestError("charts", "unknown chart '" + id + "'");
  return it->second;
}

SampleGrid Manifest::grid(const ChartPtr& c, const std::vector<int>& counts) const {
  SampleGrid g = SampleGrid::defaults(c);
  std::vector<int> use = counts;
  if (use.empty()) {
    auto it = grids.find(c->id());
    if (it != grids.end()) use = it->second;
  }
  if (use.size() == 1) g.counts.assign(c->dim(), use[0]);
  else if (!use.empty()) {
    if (static_cast<int>(use.size()) != c->dim())
      throw ManifestError("grid", "expected 1 or " + std::to_string(c->dim()) + " counts for chart " + c->id());
    g.counts = use;
  }
  for (int k : g.counts)
    if (k < 2) throw ManifestError("grid", "at least 2 points per axis");
  return g;
}

void add_form(Manifest& m, const std::string& name, const DifferentialForm& f) {
  m.charts.emplace(f.chart()->id(), f.chart());
  m.forms[name] = f;
}

void add_field(Manifest& m, const std::string& name, const VectorField& x) {
  m.charts.emplace(x.chart()->id(), x.chart());
  m.fields[name] = x;
}

void add_function(Manifest& m, const std::string& name, const ChartPtr& c, const Expr& e) {
  m.charts.emplace(c->id(), c);
  m.functions[name] = {c->id(), e, {}};
}

void add_fold(Manifest& m, const std::string& name, const ChartPtr& c, const FoldSpec& f) {
  m.charts.emplace(c->id(), c);
  m.folds[name] = {c->id(), f};
}

void add_germ(Manifest& m, const std::string& name, const ContactGerm& g) {
  m.charts.emplace(g.chart->id(), g.chart);
  m.germs[name] = {g.chart->id(), g.f, g.beta};
}

json to_json(const Manifest& m) {
  ProfileTable profiles = m.profiles;
  json j;
  j["schema"] = kManifestSchema;
  if (!m.description.empty()) j["description"] = m.description;
  json charts = json::array();
  for (const auto& [id, c] : m.charts) charts.push_back(chart_json(*c));
  j["charts"] = charts;

  json forms = json::object();
  for (const auto& [name, f] : m.forms) {
    forms[name] = form_json(f);
    for (const auto& [mask, c] : f.terms()) collect(c, profiles);
  }
  j["forms"] = forms;
  json fields = json::object();
  for (const auto& [name, x] : m.fields) {
    json comps = json::array();
    for (const auto& e : x.components()) {
      comps.push_back(to_string(e));
      collect(e, profiles);
    }
    fields[name] = {{"chart", x.chart()->id()}, {"components", comps}};
  }
  j["fields"] = fields;
  json fns = json::object();
  for (const auto& [name, f] : m.functions) {
    fns[name] = {{"chart", f.chart}, {"expr", to_string(f.expr)}};
    if (!f.critical.empty()) fns[name]["critical"] = f.critical;
    collect(f.expr, profiles);
  }
  j["functions"] = fns;
  json folds = json::object();
  for (const auto& [name, f] : m.folds) {
    folds[name] = {{"chart", f.chart}, {"h", to_string(f.spec.h)}, {"delta", f.spec.delta}};
    collect(f.spec.h, profiles);
  }
  j["folds"] = folds;
  json germs = json::object();
  for (const auto& [name, g] : m.germs) {
    json beta = form_json(g.beta);
    germs[name] = {{"chart", g.chart}, {"f", to_string(g.f)}, {"beta", beta["terms"]}};
    collect(g.f, profiles);
    for (const auto& [mask, c] : g.beta.terms()) collect(c, profiles);
  }
  j["germs"] = germs;
  if (!m.grids.empty()) j["grids"] = m.grids;

  json pages = json::object();
  for (const auto& [name, p] : m.pages) pages[name] = page_json(p);
  json fibs = json::object();
  for (const auto& [name, w] : m.fibrations) {
    fibs[name] = {{"page", w.page.label}, {"cycles", cycles_json(w.cycles)}};
    if (!m.pages.count(w.page.label)) pages[w.page.label] = page_json(w.page);
  }
  json folded = json::object();
  for (const auto& [name, w] : m.folded_fibrations) {
    folded[name] = {{"page", w.page.label}, {"plus", cycles_json(w.plus)}, {"minus", cycles_json(w.minus)}};
    if (!m.pages.count(w.page.label)) pages[w.page.label] = page_json(w.page);
  }
  if (!pages.empty()) j["pages"] = pages;
  if (!fibs.empty()) j["fibrations"] = fibs;
  if (!folded.empty()) j["folded_fibrations"] = folded;
  if (!m.stabilizations.empty()) {
    json st = json::array();
    for (const auto& s : m.stabilizations) {
      st.push_back({{"fibration", s.fibration},
                    {"pairings", s.spec.pairings},
                    {"boundary_delta", s.spec.boundary_delta},
                    {"class", s.spec.cls},
                    {"label", s.spec.label}});
    }
    j["stabilizations"] = st;
  }
  if (!m.expected.empty()) {
    json ex = json::array();
    for (const auto& e : m.expected) {
      ex.push_back({{"property", e.property}, {"form", e.form}, {"chart", e.chart}, {"verdict", verdict_name(e.verdict)}});
    }
    j["expected"] = ex;
  }
  json prof = json::array();
  for (const auto& [name, s] : profiles) prof.push_back(spline_json(*s));
  j["profiles"] = prof;
  return j;
}

Manifest manifest_from_json(const json& j) {
  if (!j.is_object()) throw ManifestError("$", "manifest must be a JSON object");
  auto it = j.find("schema");
  if (it == j.end()) throw ManifestError("$", "missing field 'schema'");
  if (*it != kManifestSchema) throw ManifestError("$.schema", "unsupported schema " + it->dump() + ", expected \"" + kManifestSchema + "\"");
  Manifest m;
  if (j.contains("description")) m.description = j["description"].get<std::string>();

  if (j.contains("profiles")) {
    const auto& ps = j["profiles"];
    for (std::size_t i = 0; i < ps.size(); ++i) {
      auto s = spline_from(ps[i], "$.profiles[" + std::to_string(i) + "]");
      m.profiles[s->name()] = s;
    }
  }
  if (j.contains("charts")) {
    const auto& cs = j["charts"];
    for (std::size_t i = 0; i < cs.size(); ++i) {
      auto c = chart_from(cs[i], "$.charts[" + std::to_string(i) + "]");
      if (!m.charts.emplace(c->id(), c).second)
        throw ManifestError("$.charts[" + std::to_string(i) + "]", "duplicate chart '" + c->id() + "'");
    }
  }
  auto chart_of = [&](const json& o, const std::string& where) {
    std::string id = str(o, "chart", where);
    auto c = m.charts.find(id);
    if (c == m.charts.end()) throw ManifestError(where + ".chart", "unknown chart '" + id + "'");
    return c->second;
  };
  auto terms_of = [&](const json& terms, const ChartPtr& c, int degree, const std::string& where) {
    DifferentialForm f(c, degree);
    if (!terms.is_array()) throw ManifestError(where, "expected a list of terms");
    for (std::size_t k = 0; k < terms.size(); ++k) {
      std::string w = where + "[" + std::to_string(k) + "]";
      const auto& dx = field(terms[k], "dx", w);
      if (!dx.is_array() || static_cast<int>(dx.size()) != degree)
        throw ManifestError(w + ".dx", "needs " + std::to_string(degree) + " differentials");
      std::vector<int> idx;
      for (const auto& d : dx) idx.push_back(index_from(d, *c, w + ".dx"));
      f.add(idx, expr_from(field(terms[k], "coeff", w), c, m.profiles, w + ".coeff"));
    }
    return f;
  };

  if (j.contains("forms")) {
    for (const auto& [name, o] : j["forms"].items()) {
      std::string w = "$.forms." + name;
      auto c = chart_of(o, w);
      int degree = get_as<int>(field(o, "degree", w), w + ".degree", "an integer");
      if (degree < 0 || degree > c->dim()) throw ManifestError(w + ".degree", "out of range");
      m.forms[name] = terms_of(o.contains("terms") ? o["terms"] : json::array(), c, degree, w + ".terms");
    }
  }
  if (j.contains("fields")) {
    for (const auto& [name, o] : j["fields"].items()) {
      std::string w = "$.fields." + name;
      auto c = chart_of(o, w);
      const auto& comps = field(o, "components", w);
      if (!comps.is_array() || static_cast<int>(comps.size()) != c->dim())
        throw ManifestError(w + ".components", "needs " + std::to_string(c->dim()) + " components");
      std::vector<Expr> xs;
      for (std::size_t k = 0; k < comps.size(); ++k)
        xs.push_back(expr_from(comps[k], c, m.profiles, w + ".components[" + std::to_string(k) + "]"));
      m.fields[name] = VectorField(c, xs);
    }
  }
  if (j.contains("functions")) {
    for (const auto& [name, o] : j["functions"].items()) {
      std::string w = "$.functions." + name;
      auto c = chart_of(o, w);
      ScalarFunction f{c->id(), expr_from(field(o, "expr", w), c, m.profiles, w + ".expr"), {}};
      if (o.contains("critical"))
        f.critical = get_as<std::vector<std::vector<double>>>(o["critical"], w + ".critical", "a list of points");
      m.functions[name] = f;
    }
  }
  if (j.contains("folds")) {
    for (const auto& [name, o] : j["folds"].items()) {
      std::string w = "$.folds." + name;
      auto c = chart_of(o, w);
      FoldSpec f{expr_from(field(o, "h", w), c, m.profiles, w + ".h")};
      if (o.contains("delta")) f.delta = num_from(o["delta"], w + ".delta");
      m.folds[name] = {c->id(), f};
    }
  }
  if (j.contains("germs")) {
    for (const auto& [name, o] : j["germs"].items()) {
      std::string w = "$.germs." + name;
      auto c = chart_of(o, w);
      m.germs[name] = {c->id(), expr_from(field(o, "f", w), c, m.profiles, w + ".f"),
                       terms_of(field(o, "beta", w), c, 1, w + ".beta")};
    }
  }
  if (j.contains("grids")) {
    for (const auto& [id, o] : j["grids"].items()) {
      if (!m.charts.count(id)) throw ManifestError("$.grids." + id, "unknown chart");
      m.grids[id] = get_as<std::vector<int>>(o, "$.grids." + id, "a list of counts");
    }
  }
  if (j.contains("pages")) {
    for (const auto& [name, o] : j["pages"].items()) m.pages[name] = page_from(name, o, "$.pages." + name);
  }
  auto page_of = [&](const json& o, const std::string& where) {
    std::string id = str(o, "page", where);
    auto p = m.pages.find(id);
    if (p == m.pages.end()) throw ManifestError(where + ".page", "unknown page '" + id + "'");
    return p->second;
  };
  if (j.contains("fibrations")) {
    for (const auto& [name, o] : j["fibrations"].items()) {
      std::string w = "$.fibrations." + name;
      Page p = page_of(o, w);
      m.fibrations[name] = {p, cycles_from(field(o, "cycles", w), p, w + ".cycles")};
    }
  }
  if (j.contains("folded_fibrations")) {
    for (const auto& [name, o] : j["folded_fibrations"].items()) {
      std::string w = "$.folded_fibrations." + name;
      Page p = page_of(o, w);
      m.folded_fibrations[name] = {p, cycles_from(field(o, "plus", w), p, w + ".plus"),
                                   cycles_from(field(o, "minus", w), p, w + ".minus")};
    }
  }
  if (j.contains("stabilizations")) {
    const auto& st = j["stabilizations"];
    for (std::size_t i = 0; i < st.size(); ++i) {
      std::string w = "$.stabilizations[" + std::to_string(i) + "]";
      NamedStabilization s;
      s.fibration = str(st[i], "fibration", w);
      if (!m.fibrations.count(s.fibration)) throw ManifestError(w + ".fibration", "unknown fibration '" + s.fibration + "'");
      s.spec.pairings = get_as<std::vector<std::int64_t>>(field(st[i], "pairings", w), w + ".pairings", "integers");
      s.spec.cls = get_as<std::vector<std::int64_t>>(field(st[i], "class", w), w + ".class", "integers");
      if (st[i].contains("boundary_delta"))
        s.spec.boundary_delta = get_as<int>(st[i]["boundary_delta"], w + ".boundary_delta", "+1 or -1");
      if (st[i].contains("label")) s.spec.label = str(st[i], "label", w);
      m.stabilizations.push_back(s);
    }
  }
  if (j.contains("expected")) {
    const auto& ex = j["expected"];
    for (std::size_t i = 0; i < ex.size(); ++i) {
      std::string w = "$.expected[" + std::to_string(i) + "]";
      Expectation e{str(ex[i], "property", w), str(ex[i], "form", w), str(ex[i], "chart", w), Verdict::Pass};
      try {
        e.verdict = verdict_from_name(str(ex[i], "verdict", w));
      } catch (const Error& err) {
        throw ManifestError(w + ".verdict", err.what());
      }
      m.expected.push_back(e);
    }
  }
  return m;
}

Manifest read_manifest(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ManifestError("line " + std::to_string(line) + ", column " + std::to_string(col), "JSON syntax error");
  }
  return manifest_from_json(j);
}

Manifest read_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError(path, "cannot open");
  try {
    return read_manifest(in);
  } catch (const ManifestError& e) {
    throw ManifestError(path + ": " + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  }
}

// ---------------------------------------------------------------------------
// Reports

void Report::finalize() {
  if (checks.empty()) {
    verdict = Verdict::Inconclusive;
    return;
  }
  bool all = true;
  for (const auto& c : checks) {
    if (c.verdict == Verdict::Fail) {
      verdict = Verdict::Fail;
      return;
    }
    all = all && c.verdict == Verdict::Pass;
  }
  verdict = all ? Verdict::Pass : Verdict::Inconclusive;
}

json to_json(const StructureReport& r) {
  json values = json::object();
  for (const auto& [k, v] : r.values) values[k] = num_json(v);
  json witness = json::array();
  for (double v : r.witness) witness.push_back(num_json(v));
  return {{"property", r.property}, {"chart", r.chart},     {"verdict", verdict_name(r.verdict)},
          {"margin", num_json(r.margin)}, {"witness", witness}, {"samples", r.samples},
          {"notes", r.notes},       {"values", values},   {"locus", r.locus}};
}

StructureReport structure_report_from_json(const json& j) {
  StructureReport r;
  r.property = str(j, "property", "check");
  r.chart = str(j, "chart", "check");
  r.verdict = verdict_from_name(str(j, "verdict", "check"));
  r.margin = num_from(field(j, "margin", "check"), "check.margin");
  for (const auto& w : field(j, "witness", "check")) r.witness.push_back(num_from(w, "check.witness"));
  r.samples = field(j, "samples", "check").get<std::size_t>();
  r.notes = field(j, "notes", "check").get<std::vector<std::string>>();
  for (const auto& [k, v] : field(j, "values", "check").items()) r.values[k] = num_from(v, "check.values");
  r.locus = field(j, "locus", "check").get<std::vector<std::vector<double>>>();
  return r;
}

json to_json(const Report& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"schema", kReportSchema},
          {"command", r.command},
          {"verdict", verdict_name(r.verdict)},
          {"checks", checks},
          {"payload", r.payload},
          {"summary", r.summary}};
}

Report report_from_json(const json& j) {
  if (!j.contains("schema") || j["schema"] != kReportSchema) throw ManifestError("$.schema", "not a foldcalc report");
  Report r;
  r.command = str(j, "command", "$");
  r.verdict = verdict_from_name(str(j, "verdict", "$"));
  for (const auto& c : field(j, "checks", "$")) r.checks.push_back(structure_report_from_json(c));
  r.payload = field(j, "payload", "$");
  r.summary = str(j, "summary", "$");
  return r;
}

std::string report_text(const Report& r) {
  std::ostringstream os;
  os << r.command << ": " << verdict_name(r.verdict) << "\n";
  os << std::setprecision(6);
  for (const auto& c : r.checks) {
    os << "  " << c.property << " [" << c.chart << "] " << verdict_name(c.verdict) << "  margin " << c.margin
       << "  samples " << c.samples;
    if (!c.witness.empty()) {
      os << "  witness (";
      for (std::size_t i = 0; i < c.witness.size(); ++i) os << (i ? ", " : "") << c.witness[i];
      os << ")";
    }
    os << "\n";
    for (const auto& n : c.notes) os << "    " << n << "\n";
  }
  if (!r.summary.empty()) os << r.summary << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Models

std::vector<std::string> model_names() {
  return {"darboux", "folded-sphere", "convex-sphere", "ideal-completion", "double", "asymmetric-double",
          "fold-collar", "dividing-collar"};
}

Manifest model_manifest(const std::string& name, int n) {
  Manifest m;
  m.description = "model " + name + " n=" + std::to_string(n);
  if (name == "darboux") {
    auto d = darboux_folded(n);
    add_form(m, "omega", d.omega);
    add_form(m, "lambda", d.lambda);
    add_form(m, "lambda_tilde", d.lambda_tilde);
    add_fold(m, "fold", d.chart, d.fold);
    m.expected = d.expected;
  } else if (name == "folded-sphere") {
    auto s = folded_sphere(n);
    for (const auto& sc : s.charts) {
      add_form(m, "omega_" + sc.chart->id(), sc.omega);
      add_form(m, "lambda_" + sc.chart->id(), sc.lambda);
      add_function(m, "height_" + sc.chart->id(), sc.chart, sc.height);
    }
    add_fold(m, "fold", s.band().chart, s.fold);
    for (auto e : s.expected) {
      e.form += "_" + e.chart;
      m.expected.push_back(e);
    }
  } else if (name == "convex-sphere") {
    auto cs = convex_sphere(n);
    add_form(m, "alpha", cs.alpha);
    add_field(m, "X", cs.x);
    for (std::size_t i = 0; i < cs.atlas.charts.size(); ++i) {
      const auto& sc = cs.atlas.charts[i];
      add_germ(m, "germ_" + sc.chart->id(), {sc.chart, cs.f[i], cs.beta[i], false, {}, {}});
    }
    const auto& band = cs.atlas.band();
    add_field(m, "characteristic", characteristic_director(cs.f[2], cs.beta[2]));
    add_function(m, "phi", band.chart, -band.height);
    m.expected = {{"contact", "alpha", cs.chart->id(), Verdict::Pass}};
  } else if (name == "ideal-completion") {
    auto ic = ideal_completion_collar(standard_collar(), make_profile(ProfileKind::IdealU));
    add_form(m, "lambda", ic.lambda);
    add_form(m, "omega", ic.omega);
    add_field(m, "X", ic.field);
    add_field(m, "X_displayed", ic.displayed_field);
    add_function(m, "top_expected", ic.chart, ic.top_expected);
    m.expected = ic.expected;
  } else if (name == "double") {
    ProfileParams pp;
    pp.bridge = Bridge::Plus;
    auto fp = make_profile(ProfileKind::BridgeF, pp);
    pp.bridge = Bridge::Minus;
    auto fm = make_profile(ProfileKind::BridgeF, pp);
    auto d = double_cobordism(standard_collar(CollarKind::Liouville, {-0.5, 0.0}),
                              standard_collar(CollarKind::Liouville, {0.0, 0.5}), fp, fm);
    add_form(m, "omega+", d.plus.omega);
    add_form(m, "lambda+", d.plus.lambda);
    add_fold(m, "fold+", d.plus.chart, d.plus.fold);
    add_form(m, "omega-", d.minus.omega);
    add_form(m, "lambda-", d.minus.lambda);
    add_fold(m, "fold-", d.minus.chart, d.minus.fold);
    m.expected = d.expected;
  } else if (name == "asymmetric-double") {
    auto minus = standard_collar(CollarKind::Liouville, {-0.5, 0.0});
    ProfileParams pp;
    pp.bridge = Bridge::Asymmetric;
    auto ad = asymmetric_double(minus, parse_expr("1 + q1^2/2", minus.gamma->vars()),
                                make_profile(ProfileKind::BridgeF, pp));
    add_form(m, "lambda_minus", ad.lambda_minus);
    add_form(m, "lambda_plus", ad.lambda_plus);
    add_form(m, "lambda", ad.bridge.lambda);
    add_form(m, "omega", ad.bridge.omega);
    add_fold(m, "fold", ad.bridge.chart, ad.bridge.fold);
    add_form(m, "fold_form", ad.fold_form);
    m.expected = ad.expected;
  } else if (name == "fold-collar") {
    GermOptions opt;
    opt.counts = {7};
    auto fp = fold_collar_model(standard_collar(CollarKind::Fold), 0.9, opt);
    add_form(m, "lambda", fp.lambda);
    add_form(m, "omega", fp.omega);
    add_fold(m, "fold", fp.chart(), fp.fold);
    m.expected = {{"folded", "omega", fp.chart()->id(), Verdict::Pass},
                  {"positive-contact-type", "lambda", fp.chart()->id(), Verdict::Pass}};
  } else if (name == "dividing-collar") {
    GermOptions opt;
    opt.counts = {7};
    add_germ(m, "germ", dividing_collar_germ(standard_collar(CollarKind::DividingSet), 0.9, opt));
  } else {
    throw ManifestError("model", "unknown model '" + name + "'");
  }
  return m;
}

}  // namespace foldcalc
