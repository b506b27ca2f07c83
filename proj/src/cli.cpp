#include "l2tower/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "l2tower/alexander.hpp"
#include "l2tower/errors.hpp"
#include "l2tower/io.hpp"
#include "l2tower/iwasawa.hpp"
#include "l2tower/tower.hpp"

namespace l2t {

namespace {

constexpr std::uint64_t kDefaultSeed = 0xB3771;

std::string default_cache_dir() {
  const char* v = std::getenv("BETTI_CACHE");
  return v && *v ? std::string(v) : std::string(".betti-cache");
}

struct Outcome {
  Json report;
  std::string csv;
  int code = kExitOk;
};

struct TowerConfig {
  std::string input;
  std::uint64_t prime = 0;
  int levels = 0;
  std::string fields = "both";
  std::uint64_t seed = kDefaultSeed;
  int base_level = 1;
  std::size_t element_cap = 200000;
  bool no_cache = false;
  unsigned jobs = 1;
  std::optional<int> dim;
};

void require_prime(std::uint64_t p) {
  if (!is_prime(p)) throw InputError("--prime " + std::to_string(p) + " is not prime");
}

void require_levels(int levels) {
  if (levels < 1) throw InputError("--levels must be at least 1");
}

Outcome tower_case(const TowerConfig& c, std::ostream& err) {
  require_prime(c.prime);
  require_levels(c.levels);
  if (c.fields != "q" && c.fields != "fp" && c.fields != "both") throw InputError("--fields must be q, fp or both");
  if (c.base_level < 1) throw InputError("--base-level must be at least 1");
  if (c.element_cap == 0) throw InputError("--element-cap must be positive");

  const TowerInput in = tower_input_from_json(read_json_file(c.input));
  const PadicRep rep = in.resolve_rep(c.prime, c.levels);
  const EquivariantComplex complex = in.resolve_complex();

  TowerOptions opts;
  opts.field_q = c.fields != "fp";
  opts.field_fp = c.fields != "q";
  opts.quotient.element_cap = c.element_cap;
  opts.betti.rank_q.seed = c.seed;
  opts.cache_dir = c.no_cache ? std::string() : default_cache_dir();
  opts.jobs = std::max(1U, c.jobs);

  const BettiTable table = run_tower(in.pres, rep, complex, c.levels, opts);
  if (!opts.cache_dir.empty())
    err << "cache " << opts.cache_dir << ": " << table.cache_hits << " of " << table.indices.size()
        << " levels reused\n";
  if (table.failed_level) err << "budget exceeded at level " << *table.failed_level << ": " << table.failure << "\n";

  const TowerReport report = make_report(table, c.dim ? c.dim : in.d, c.base_level);
  Outcome out;
  out.report = tower_report_json(table, report, {c.seed, c.levels, c.fields});
  out.csv = betti_csv(table);
  out.code = table.failed_level ? kExitBudget : (report.pass ? kExitOk : kExitVerdict);
  return out;
}

Outcome harris_case(const std::string& input, int levels) {
  require_levels(levels);
  const ModulePresentation m = module_from_json(read_json_file(input));
  const HarrisReport h = harris_check(m, levels);
  Outcome out;
  out.report = to_json(h);
  out.code = h.pass ? kExitOk : kExitVerdict;
  return out;
}

struct AlexanderConfig {
  std::string input;
  std::uint64_t prime = 0;
  bool diagonal = false;
  int levels = 0;
  std::uint64_t seed = kDefaultSeed;
  bool no_cache = false;
};

Outcome alexander_case(const AlexanderConfig& c) {
  require_prime(c.prime);
  const LinkInput link = link_input_from_json(read_json_file(c.input));
  const LaurentMatrix a = alexander_matrix(link.pres, link.ab);

  bool fox_ok = true;
  for (const auto& r : link.pres.relators) fox_ok = fox_ok && fox_fundamental_identity(r, link.pres.num_generators());
  const bool row_ok = alexander_row_identity(a, link.ab);

  LaurentRankOptions ro;
  ro.seed = c.seed;

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "alexander";
  j["p"] = c.prime;
  j["d"] = link.ab.d;
  j["generators"] = link.pres.num_generators();
  j["relators"] = link.pres.relators.size();
  Json rows = Json::array();
  for (std::size_t r = 0; r < a.rows; ++r) {
    Json row = Json::array();
    for (std::size_t col = 0; col < a.cols; ++col) row.push_back(a(r, col).to_string());
    rows.push_back(row);
  }
  j["alexander_matrix"] = rows;
  j["fox_identity"] = fox_ok;
  j["row_identity"] = row_ok;
  j["modp_l2_betti_1"] = modp_l2_betti_1(link.pres, link.ab, c.prime, ro);

  bool lk_agree = true;
  if (link.crossing_linking_number) j["crossing_linking_number"] = std::abs(*link.crossing_linking_number);
  if (c.diagonal) {
    Json dj;
    try {
      const DiagonalSpecialization ds = diagonal_specialization(a);
      dj["minor_gcd"] = ds.minor_gcd_string();
      dj["delta"] = ds.delta.empty() ? Json() : Json(ds.delta_string());
      if (ds.d == 2 && !ds.delta.empty()) {
        const std::int64_t lk = linking_number(ds);
        dj["linking_number"] = lk;
        if (link.crossing_linking_number) lk_agree = lk == std::abs(*link.crossing_linking_number);
      }
    } catch (const DegenerateMatrix& e) {
      dj["degenerate"] = true;
      dj["message"] = e.what();
    }
    j["diagonal"] = dj;
  }

  bool tower_ok = true;
  if (c.levels > 0) {
    TowerOptions to;
    to.betti.rank_q.seed = c.seed;
    to.cache_dir = c.no_cache ? std::string() : default_cache_dir();
    const PredictionReport pr = predict_vs_tower(link.pres, link.ab, c.prime, c.levels, std::nullopt, to, ro);
    Json tj;
    tj["levels"] = pr.levels;
    tj["cache_key"] = pr.table.cache_key;
    tj["indices"] = pr.indices;
    tj["b1_q"] = pr.b1_q;
    tj["b1_fp"] = pr.b1_fp;
    tj["limit_q"] = to_json(pr.tower_q);
    tj["limit_fp"] = to_json(pr.tower_fp);
    tj["predicted_q"] = pr.predicted_q ? Json(*pr.predicted_q) : Json();
    tj["predicted_fp"] = pr.predicted_fp;
    tj["linking_number"] = pr.linking_number ? Json(*pr.linking_number) : Json();
    tj["fp_collapses"] = pr.fp_collapses;
    tj["monotone"] = pr.monotone;
    tj["pass"] = pr.pass;
    j["tower"] = tj;
    tower_ok = pr.pass;
  }
  j["linking_numbers_agree"] = lk_agree;
  const bool pass = fox_ok && row_ok && lk_agree && tower_ok;
  j["verdict"] = pass ? "PASS" : "FAIL";
  Outcome out;
  out.report = j;
  out.code = pass ? kExitOk : kExitVerdict;
  return out;
}

Outcome rank_case(const std::string& input, const std::string& field, std::uint64_t prime, std::uint64_t seed) {
  std::ifstream in(input);
  if (!in) throw InputError("cannot open " + input);
  const IntMatrix m = read_triples(in);
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "rank";
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["field"] = field;
  if (field == "q") {
    RankQOptions o;
    o.seed = seed;
    const RankQResult r = rank_q(m, o);
    j["rank"] = r.rank;
    j["certified"] = r.certified;
    j["exact_bareiss"] = r.exact_bareiss;
    j["primes"] = r.primes;
  } else if (field == "fp") {
    require_prime(prime);
    j["p"] = prime;
    j["rank"] = rank_fp(m, prime);
  } else if (field == "snf") {
    const auto factors = snf(m);
    Json fj = Json::array();
    for (const auto& f : factors) fj.push_back(f.get_str());
    j["rank"] = factors.size();
    j["invariant_factors"] = fj;
  } else {
    throw InputError("--field must be q, fp or snf");
  }
  Outcome out;
  out.report = j;
  return out;
}

int code_for(const std::exception_ptr& ep, std::ostream& err) {
  try {
    std::rethrow_exception(ep);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitVerdict;
  }
}

void emit(const Outcome& o, const std::string& report_path, const std::string& csv_path, std::ostream& out) {
  if (!csv_path.empty()) write_text_file(csv_path, o.csv);
  if (!report_path.empty()) write_text_file(report_path, dump(o.report));
  if (csv_path.empty() && !o.csv.empty()) out << o.csv;
  if (report_path.empty() && (o.csv.empty() || !csv_path.empty())) out << dump(o.report);
}

// ---------------------------------------------------------------------------
// Corpus

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

Outcome corpus_case(const Json& cs, const std::filesystem::path& base, std::uint64_t seed, bool no_cache,
                    std::ostream& err) {
  const std::string command = cs.at("command").get<std::string>();
  const std::string input = resolve(base, cs.at("input").get<std::string>());
  const std::uint64_t case_seed = cs.value("seed", seed);
  if (command == "tower") {
    TowerConfig c;
    c.input = input;
    c.prime = cs.at("prime").get<std::uint64_t>();
    c.levels = cs.at("levels").get<int>();
    c.fields = cs.value("fields", std::string("both"));
    c.seed = case_seed;
    c.base_level = cs.value("base_level", 1);
    c.element_cap = cs.value("element_cap", std::size_t{200000});
    c.no_cache = no_cache;
    if (cs.contains("d")) c.dim = cs.at("d").get<int>();
    return tower_case(c, err);
  }
  if (command == "harris") return harris_case(input, cs.at("levels").get<int>());
  if (command == "alexander") {
    AlexanderConfig c;
    c.input = input;
    c.prime = cs.at("prime").get<std::uint64_t>();
    c.diagonal = cs.value("diagonal", false);
    c.levels = cs.value("levels", 0);
    c.seed = case_seed;
    c.no_cache = no_cache;
    return alexander_case(c);
  }
  throw InputError("unknown corpus command \"" + command + "\"");
}

int corpus_run(const std::string& manifest_path, const std::string& output_dir, std::uint64_t seed, bool no_cache,
               std::ostream& out, std::ostream& err) {
  const Json manifest = read_json_file(manifest_path);
  const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
  const Json cases = manifest.value("cases", Json::array());
  if (!cases.is_array()) throw InputError("manifest: \"cases\" must be an array");

  Json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["kind"] = "corpus";
  summary["seed"] = seed;
  summary["cases"] = Json::array();
  std::size_t mismatches = 0;

  for (const auto& cs : cases) {
    const std::string name = cs.value("name", std::string("unnamed"));
    Json row;
    row["name"] = name;
    Outcome o;
    std::string verdict;
    try {
      o = corpus_case(cs, base, seed, no_cache, err);
      verdict = o.report.value("verdict", std::string("?"));
    } catch (...) {
      std::ostringstream msg;
      o.code = code_for(std::current_exception(), msg);
      verdict = "ERROR";
      row["error"] = msg.str().substr(0, msg.str().find_last_not_of('\n') + 1);
    }
    const Json expect = cs.value("expect", Json::object());
    const std::string expected = expect.value("verdict", std::string("PASS"));
    Json diffs = Json::array();
    if (verdict != expected) diffs.push_back({{"path", "/verdict"}, {"expected", expected}, {"actual", verdict}});
    if (expect.contains("values") && !o.report.is_null()) {
      for (const auto& [ptr, want] : expect.at("values").items()) {
        const Json::json_pointer jp(ptr);
        const Json got = o.report.contains(jp) ? o.report.at(jp) : Json();
        if (got != want) diffs.push_back({{"path", ptr}, {"expected", want}, {"actual", got}});
      }
    }
    row["verdict"] = verdict;
    row["expected"] = expected;
    row["exit_code"] = o.code;
    row["status"] = diffs.empty() ? "ok" : "mismatch";
    row["diffs"] = diffs;
    if (!diffs.empty()) ++mismatches;

    out << (diffs.empty() ? "ok       " : "MISMATCH ") << name << "  " << verdict << "\n";
    for (const auto& d : diffs)
      out << "  " << d["path"].get<std::string>() << ": expected " << d["expected"].dump() << ", got "
          << d["actual"].dump() << "\n";

    if (!output_dir.empty() && !o.report.is_null()) {
      write_text_file((std::filesystem::path(output_dir) / (name + ".json")).string(), dump(o.report));
      if (!o.csv.empty()) write_text_file((std::filesystem::path(output_dir) / (name + ".csv")).string(), o.csv);
    }
    summary["cases"].push_back(row);
  }
  summary["verdict"] = mismatches == 0 ? "PASS" : "FAIL";
  if (!output_dir.empty())
    write_text_file((std::filesystem::path(output_dir) / "summary.json").string(), dump(summary));
  out << cases.size() - mismatches << "/" << cases.size() << " cases as expected\n";
  return mismatches == 0 ? kExitOk : kExitVerdict;
}

// ---------------------------------------------------------------------------
// Cache

bool is_cache_file(const std::filesystem::path& p) {
  const std::string name = p.filename().string();
  return p.extension() == ".json" || name.find(".json.tmp.") != std::string::npos;
}

int cache_command(bool list, bool clear, std::ostream& out) {
  const std::filesystem::path dir(default_cache_dir());
  if (!std::filesystem::exists(dir)) {
    out << "cache " << dir.string() << " is empty\n";
    return kExitOk;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && is_cache_file(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (list) {
    for (const auto& f : files) out << f.filename().string() << "  " << std::filesystem::file_size(f) << "\n";
    out << files.size() << " entries in " << dir.string() << "\n";
  }
  if (clear) {
    for (const auto& f : files) std::filesystem::remove(f);
    out << "removed " << files.size() << " entries from " << dir.string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Betti numbers of towers of finite covers", "l2tower"};
  app.require_subcommand(1);

  TowerConfig tc;
  std::string tower_csv, tower_report;
  std::uint64_t dim = 0;
  auto* tower = app.add_subcommand("tower", "Betti numbers along a tower of covers");
  tower->add_option("--input", tc.input, "Tower document (JSON)")->required();
  tower->add_option("--prime", tc.prime, "Prime p of the representation")->required();
  tower->add_option("--levels", tc.levels, "Deepest level")->required();
  tower->add_option("--fields", tc.fields, "q, fp or both")->capture_default_str();
  tower->add_option("--seed", tc.seed, "Seed for randomized kernels")->capture_default_str();
  tower->add_option("--csv", tower_csv, "Write the Betti table as CSV");
  tower->add_option("--report", tower_report, "Write the JSON report");
  tower->add_option("--base-level", tc.base_level, "Monotonicity base level")->capture_default_str();
  tower->add_option("--element-cap", tc.element_cap, "Cap on quotient size")->capture_default_str();
  tower->add_option("--dim", dim, "Group dimension d used by the exponent fit (default: estimated)");
  tower->add_flag("--no-cache", tc.no_cache, "Do not read or write the level cache");
  tower->add_option("--jobs", tc.jobs, "Levels computed in parallel")->capture_default_str();

  std::string harris_input, harris_report;
  int harris_levels = 0;
  auto* harris = app.add_subcommand("harris", "Truncation codimensions of an Iwasawa module");
  harris->add_option("--input", harris_input, "Module document (JSON)")->required();
  harris->add_option("--levels", harris_levels, "Deepest level")->required();
  harris->add_option("--report", harris_report, "Write the JSON report");

  AlexanderConfig ac;
  std::string alex_report;
  auto* alex = app.add_subcommand("alexander", "Fox calculus invariants of a link group");
  alex->add_option("--input", ac.input, "Link document (JSON)")->required();
  alex->add_option("--prime", ac.prime, "Prime p")->required();
  alex->add_flag("--diagonal", ac.diagonal, "Compute the diagonal specialization and linking number");
  alex->add_option("--levels", ac.levels, "Also run the abelian tower to this level and compare");
  alex->add_option("--seed", ac.seed, "Seed for randomized kernels")->capture_default_str();
  alex->add_flag("--no-cache", ac.no_cache, "Do not read or write the level cache");
  alex->add_option("--report", alex_report, "Write the JSON report");

  std::string rank_input, rank_field = "q";
  std::uint64_t rank_prime = 0, rank_seed = kDefaultSeed;
  auto* rank = app.add_subcommand("rank", "Rank or Smith form of an integer matrix given as triples");
  rank->add_option("--input", rank_input, "Triples file")->required();
  rank->add_option("--field", rank_field, "q, fp or snf")->capture_default_str();
  rank->add_option("--prime", rank_prime, "Prime for --field fp");
  rank->add_option("--seed", rank_seed, "Seed for the modular primes")->capture_default_str();

  std::string manifest, output_dir;
  std::uint64_t corpus_seed = kDefaultSeed;
  bool corpus_no_cache = false;
  auto* corpus = app.add_subcommand("corpus", "Run every case of a manifest and compare verdicts");
  corpus->add_option("--manifest", manifest, "Manifest (JSON)")->required();
  corpus->add_option("--output-dir", output_dir, "Write per-case reports and summary.json here");
  corpus->add_option("--seed", corpus_seed, "Seed for randomized kernels")->capture_default_str();
  corpus->add_flag("--no-cache", corpus_no_cache, "Do not read or write the level cache");

  bool cache_list = false, cache_clear = false;
  auto* cache = app.add_subcommand("cache", "Inspect the level cache (BETTI_CACHE, default .betti-cache/)");
  cache->add_flag("--list", cache_list, "List cache entries");
  cache->add_flag("--clear", cache_clear, "Remove cache entries");

  std::vector<std::string> argv_store{"l2tower"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "usage error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
    return kExitInput;
  }

  try {
    if (tower->parsed()) {
      if (tower->count("--dim") > 0) tc.dim = static_cast<int>(dim);
      const Outcome o = tower_case(tc, err);
      emit(o, tower_report, tower_csv, out);
      err << "tower: " << o.report["verdict"].get<std::string>() << "\n";
      return o.code;
    }
    if (harris->parsed()) {
      const Outcome o = harris_case(harris_input, harris_levels);
      emit(o, harris_report, "", out);
      return o.code;
    }
    if (alex->parsed()) {
      const Outcome o = alexander_case(ac);
      emit(o, alex_report, "", out);
      return o.code;
    }
    if (rank->parsed()) {
      emit(rank_case(rank_input, rank_field, rank_prime, rank_seed), "", "", out);
      return kExitOk;
    }
    if (corpus->parsed()) return corpus_run(manifest, output_dir, corpus_seed, corpus_no_cache, out, err);
    if (cache->parsed()) {
      if (!cache_list && !cache_clear) {
        err << "usage error: cache needs --list or --clear\n\n" << cache->help();
        return kExitInput;
      }
      return cache_command(cache_list, cache_clear, out);
    }
  } catch (...) {
    return code_for(std::current_exception(), err);
  }
  return kExitInput;
}

}  // namespace l2t
