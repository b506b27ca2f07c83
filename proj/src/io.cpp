#include "l2tower/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "l2tower/errors.hpp"

namespace l2t {

namespace {

template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

Json opt(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(); }

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Groups

Word word_from_json(const Json& j) {
  return guarded("word", [&] { return j.get<Word>(); });
}

GroupPresentation presentation_from_json(const Json& j) {
  GroupPresentation pres = guarded("presentation", [&] {
    GroupPresentation p;
    p.generators = j.at("generators").get<std::vector<std::string>>();
    for (const auto& r : j.at("relators")) p.relators.push_back(r.get<Word>());
    return p;
  });
  pres.validate();
  return pres;
}

Json to_json(const GroupPresentation& pres) {
  Json j;
  j["generators"] = pres.generators;
  j["relators"] = Json::array();
  for (const auto& r : pres.relators) j["relators"].push_back(r);
  return j;
}

PadicRep rep_from_json(const Json& j) {
  return guarded("rep", [&] {
    PadicRep rep;
    rep.p = j.at("p").get<std::uint64_t>();
    rep.n = j.at("n").get<int>();
    rep.max_level = j.value("max_level", 1);
    if (rep.n < 1) throw InputError("rep: n must be positive");
    for (const auto& m : j.at("images")) {
      if (m.size() != static_cast<std::size_t>(rep.n)) throw InputError("rep: image has the wrong number of rows");
      IntMatrix a(rep.n, rep.n);
      for (int r = 0; r < rep.n; ++r) {
        const auto& row = m.at(static_cast<std::size_t>(r));
        if (row.size() != static_cast<std::size_t>(rep.n)) throw InputError("rep: image row has the wrong length");
        for (int c = 0; c < rep.n; ++c) a(r, c) = row.at(static_cast<std::size_t>(c)).get<std::int64_t>();
      }
      rep.images.push_back(a);
    }
    return rep;
  });
}

Json to_json(const PadicRep& rep) {
  Json j;
  j["p"] = rep.p;
  j["n"] = rep.n;
  j["max_level"] = rep.max_level;
  j["images"] = Json::array();
  for (const auto& m : rep.images) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(row);
    }
    j["images"].push_back(rows);
  }
  return j;
}

GroupRingElement element_from_json(const Json& j) {
  return guarded("group ring element", [&] {
    GroupRingElement e;
    for (const auto& t : j) e.add(t.at(0).get<std::int64_t>(), t.at(1).get<Word>());
    return e;
  });
}

Json to_json(const GroupRingElement& e) {
  Json j = Json::array();
  for (const auto& [w, c] : e.terms()) j.push_back(Json::array({c, w}));
  return j;
}

EquivariantComplex complex_from_json(const Json& j, const GroupPresentation& pres) {
  if (j.is_object() && j.value("presentation_complex", false)) return presentation_complex(pres);
  EquivariantComplex c = guarded("complex", [&] {
    EquivariantComplex out;
    out.dims = j.at("dims").get<std::vector<std::size_t>>();
    out.num_generators = pres.num_generators();
    const auto& bs = j.at("boundaries");
    if (bs.size() + 1 != out.dims.size()) throw InputError("complex: need one boundary per positive degree");
    for (std::size_t k = 0; k < bs.size(); ++k) {
      GroupRingMatrix m(out.dims[k + 1], out.dims[k]);
      const auto& rows = bs[k];
      if (rows.size() != m.rows) throw InputError("complex: boundary " + std::to_string(k + 1) + " has the wrong row count");
      for (std::size_t r = 0; r < m.rows; ++r) {
        if (rows[r].size() != m.cols)
          throw InputError("complex: boundary " + std::to_string(k + 1) + " has the wrong column count");
        for (std::size_t col = 0; col < m.cols; ++col) m(r, col) = element_from_json(rows[r][col]);
      }
      out.boundaries.push_back(std::move(m));
    }
    return out;
  });
  c.validate_shape();
  return c;
}

Json to_json(const EquivariantComplex& c) {
  Json j;
  j["dims"] = c.dims;
  j["boundaries"] = Json::array();
  for (const auto& b : c.boundaries) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < b.rows; ++r) {
      Json row = Json::array();
      for (std::size_t col = 0; col < b.cols; ++col) row.push_back(to_json(b(r, col)));
      rows.push_back(row);
    }
    j["boundaries"].push_back(rows);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Polynomials and modules

LaurentPoly poly_from_json(const Json& j, int num_vars) {
  return guarded("polynomial", [&] {
    LaurentPoly f(num_vars);
    for (const auto& t : j) {
      auto e = t.at(1).get<Exponent>();
      if (e.size() != static_cast<std::size_t>(num_vars))
        throw InputError("polynomial: exponent vector length differs from d");
      f.add_term(e, t.at(0).get<std::int64_t>());
    }
    return f;
  });
}

Json to_json(const LaurentPoly& f) {
  Json j = Json::array();
  for (const auto& [e, c] : f.terms()) j.push_back(Json::array({c, e}));
  return j;
}

ModulePresentation module_from_json(const Json& j) {
  ModulePresentation m = guarded("module", [&] {
    ModulePresentation out;
    out.p = j.at("p").get<std::uint64_t>();
    out.d = j.at("d").get<int>();
    const auto& rows = j.at("presentation");
    out.rows = rows.size();
    out.cols = j.contains("cols") ? j.at("cols").get<std::size_t>() : (rows.empty() ? 0 : rows[0].size());
    for (const auto& row : rows) {
      if (row.size() != out.cols) throw InputError("module: ragged presentation matrix");
      for (const auto& e : row) out.entries.push_back(poly_from_json(e, out.d));
    }
    return out;
  });
  m.validate();
  return m;
}

Json to_json(const ModulePresentation& m) {
  Json j;
  j["p"] = m.p;
  j["d"] = m.d;
  j["cols"] = m.cols;
  j["presentation"] = Json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(to_json(m(r, c)));
    j["presentation"].push_back(row);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Input documents

PadicRep TowerInput::resolve_rep(std::uint64_t p, int levels) const {
  if (rep) {
    if (rep->p != p)
      throw InputError("--prime " + std::to_string(p) + " differs from the representation prime " + std::to_string(rep->p));
    return *rep;
  }
  if (meridians) return abelian_rep(*meridians, p, levels);
  throw InputError("tower input needs \"rep\" or \"meridian_images\"");
}

EquivariantComplex TowerInput::resolve_complex() const { return complex ? *complex : presentation_complex(pres); }

TowerInput tower_input_from_json(const Json& j) {
  TowerInput t;
  t.pres = presentation_from_json(j);
  if (j.contains("rep")) {
    t.rep = rep_from_json(j.at("rep"));
    t.rep->validate(t.pres);
  }
  if (j.contains("meridian_images")) {
    AbelianizationMap ab;
    ab.images = guarded("meridian_images", [&] { return j.at("meridian_images").get<std::vector<std::vector<int>>>(); });
    ab.d = ab.images.empty() ? 0 : static_cast<int>(ab.images[0].size());
    ab.validate(t.pres);
    t.meridians = ab;
  }
  if (j.contains("complex")) {
    const auto& c = j.at("complex");
    if (!(c.is_object() && c.value("presentation_complex", false))) t.complex = complex_from_json(c, t.pres);
  }
  if (j.contains("d")) t.d = guarded("d", [&] { return j.at("d").get<int>(); });
  return t;
}

Json to_json(const TowerInput& t) {
  Json j = to_json(t.pres);
  if (t.rep) j["rep"] = to_json(*t.rep);
  if (t.meridians) j["meridian_images"] = t.meridians->images;
  if (t.complex) j["complex"] = to_json(*t.complex);
  if (t.d) j["d"] = *t.d;
  return j;
}

LinkInput link_input_from_json(const Json& j) {
  LinkInput l;
  if (j.contains("braid_word")) {
    l.braid_word = guarded("braid_word", [&] { return j.at("braid_word").get<std::vector<int>>(); });
    l.strands = guarded("strands", [&] { return j.at("strands").get<int>(); });
    BraidClosure bc = braid_closure(*l.braid_word, l.strands);
    l.pres = std::move(bc.pres);
    l.ab = std::move(bc.ab);
    l.crossing_linking_number = bc.crossing_linking_number;
  } else {
    l.pres = presentation_from_json(j);
    l.ab.images = guarded("meridian_images", [&] { return j.at("meridian_images").get<std::vector<std::vector<int>>>(); });
    l.ab.d = l.ab.images.empty() ? 0 : static_cast<int>(l.ab.images[0].size());
  }
  l.ab.validate(l.pres);
  return l;
}

Json to_json(const LinkInput& l) {
  Json j;
  if (l.braid_word) {
    j["braid_word"] = *l.braid_word;
    j["strands"] = l.strands;
    return j;
  }
  j = to_json(l.pres);
  j["meridian_images"] = l.ab.images;
  return j;
}

// ---------------------------------------------------------------------------
// Reports

std::string betti_csv(const BettiTable& table) {
  std::ostringstream os;
  auto cell = [&](const std::optional<std::size_t>& v) {
    os << ',';
    if (v) os << *v;
  };
  os << "k,i,index,b_Q,b_Fp,coker_Q,coker_Fp\n";
  for (const auto& r : table.rows) {
    os << r.k << ',' << r.level << ',' << r.index;
    cell(r.b_q);
    cell(r.b_fp);
    cell(r.coker_q);
    cell(r.coker_fp);
    os << '\n';
  }
  return os.str();
}

Json to_json(const Rational& r) { return r.to_string(); }

namespace {

Json rationals(const std::vector<Rational>& v) {
  Json j = Json::array();
  for (const auto& r : v) j.push_back(to_json(r));
  return j;
}

}  // namespace

Json to_json(const LimitEstimate& e) {
  Json j;
  j["estimate"] = to_json(e.estimate);
  j["lower"] = to_json(e.lower);
  j["upper"] = to_json(e.upper);
  j["normalized"] = rationals(e.normalized);
  j["differences"] = rationals(e.differences);
  j["stabilized"] = e.stabilized;
  return j;
}

Json to_json(const ExponentFit& f) {
  Json j;
  j["residuals"] = f.residuals;
  j["slope"] = f.slope ? Json(*f.slope) : Json();
  j["bound"] = f.bound;
  j["slack"] = kExponentSlack;
  j["verdict"] = to_string(f.verdict);
  return j;
}

Json to_json(const MonotonicityResult& m) {
  Json j;
  j["applicable"] = m.applicable;
  j["pass"] = m.pass;
  j["base_level"] = m.base_level;
  j["normalized"] = rationals(m.normalized);
  return j;
}

Json to_json(const DimEstimate& d) {
  Json j;
  j["estimate"] = d.estimate;
  j["per_step"] = d.per_step;
  j["stabilized"] = d.stabilized;
  j["exact_powers"] = d.exact_powers;
  return j;
}

Json to_json(const BettiTable& t) {
  Json j;
  j["p"] = t.p;
  j["top_degree"] = t.top_degree;
  j["cache_key"] = t.cache_key;
  j["certified"] = t.certified;
  j["indices"] = Json::array();
  for (const auto& [level, index] : t.indices) j["indices"].push_back({{"level", level}, {"index", index}});
  j["failed_level"] = t.failed_level ? Json(*t.failed_level) : Json();
  j["failure"] = t.failure;
  j["rows"] = Json::array();
  for (const auto& r : t.rows)
    j["rows"].push_back({{"k", r.k},
                         {"level", r.level},
                         {"index", r.index},
                         {"b_q", opt(r.b_q)},
                         {"b_fp", opt(r.b_fp)},
                         {"coker_q", opt(r.coker_q)},
                         {"coker_fp", opt(r.coker_fp)}});
  return j;
}

Json to_json(const HarrisReport& h) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "harris";
  j["p"] = h.p;
  j["d"] = h.d;
  j["rank"] = h.rank;
  j["levels"] = h.levels;
  j["codims"] = h.codims;
  j["residuals"] = h.residuals;
  j["ratios"] = h.ratios;
  j["included"] = h.included;
  j["sup_ratio"] = h.sup_ratio;
  j["verdict"] = h.pass ? "PASS" : "FAIL";
  return j;
}

Json tower_report_json(const BettiTable& table, const TowerReport& report, const TowerRunInfo& info) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "tower";
  j["p"] = report.p;
  j["levels"] = info.levels;
  j["fields"] = info.fields;
  j["seed"] = info.seed;
  j["table"] = to_json(table);
  j["d_hat"] = report.d_hat ? to_json(*report.d_hat) : Json();
  j["user_d"] = report.user_d ? Json(*report.user_d) : Json();
  j["monotonicity_base"] = report.monotonicity_base;
  j["degrees"] = Json::array();
  for (const auto& d : report.degrees) {
    Json dj;
    dj["k"] = d.k;
    dj["limit_q"] = d.q ? to_json(*d.q) : Json();
    dj["limit_fp"] = d.fp ? to_json(*d.fp) : Json();
    dj["fit_q"] = d.fit_q ? to_json(*d.fit_q) : Json();
    dj["fit_fp"] = d.fit_fp ? to_json(*d.fit_fp) : Json();
    dj["monotonicity"] = d.monotonicity ? to_json(*d.monotonicity) : Json();
    j["degrees"].push_back(dj);
  }
  j["verdict"] = table.failed_level ? "BUDGET" : (report.pass ? "PASS" : "FAIL");
  return j;
}

}  // namespace l2t
