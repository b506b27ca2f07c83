#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "l2tower/alexander.hpp"
#include "l2tower/chain.hpp"
#include "l2tower/fpgroup.hpp"
#include "l2tower/iwasawa.hpp"
#include "l2tower/tower.hpp"

namespace l2t {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Parses a file; InputError on missing files or bad syntax.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

Word word_from_json(const Json& j);
GroupPresentation presentation_from_json(const Json& j);
Json to_json(const GroupPresentation& pres);

PadicRep rep_from_json(const Json& j);
Json to_json(const PadicRep& rep);

/// Group-ring element as [[coeff, word], ...].
GroupRingElement element_from_json(const Json& j);
Json to_json(const GroupRingElement& e);

/// {"dims": [...], "boundaries": [d_1, d_2, ...]} with each d_k a list of rows of elements.
EquivariantComplex complex_from_json(const Json& j, const GroupPresentation& pres);
Json to_json(const EquivariantComplex& c);

/// Laurent polynomial as [[coeff, [e_1, ..., e_d]], ...].
LaurentPoly poly_from_json(const Json& j, int num_vars);
Json to_json(const LaurentPoly& f);

ModulePresentation module_from_json(const Json& j);
Json to_json(const ModulePresentation& m);

struct TowerInput {
  GroupPresentation pres;
  std::optional<PadicRep> rep;
  std::optional<AbelianizationMap> meridians;
  /// Empty means the presentation complex.
  std::optional<EquivariantComplex> complex;
  std::optional<int> d;

  /// Explicit rep, or the abelian unipotent one built from the meridian images.
  PadicRep resolve_rep(std::uint64_t p, int levels) const;
  EquivariantComplex resolve_complex() const;
};

TowerInput tower_input_from_json(const Json& j);
Json to_json(const TowerInput& t);

struct LinkInput {
  GroupPresentation pres;
  AbelianizationMap ab;
  std::optional<std::vector<int>> braid_word;
  int strands = 0;
  std::optional<std::int64_t> crossing_linking_number;
};

LinkInput link_input_from_json(const Json& j);
Json to_json(const LinkInput& l);

/// Columns k, i, index, b_Q, b_Fp, coker_Q, coker_Fp.
std::string betti_csv(const BettiTable& table);

Json to_json(const Rational& r);
Json to_json(const LimitEstimate& e);
Json to_json(const ExponentFit& f);
Json to_json(const MonotonicityResult& m);
Json to_json(const DimEstimate& d);
Json to_json(const BettiTable& t);
Json to_json(const HarrisReport& h);

struct TowerRunInfo {
  std::uint64_t seed = 0;
  int levels = 0;
  std::string fields;
};

Json tower_report_json(const BettiTable& table, const TowerReport& report, const TowerRunInfo& info);

/// Dumps with two-space indentation and a trailing newline.
std::string dump(const Json& j);

}  // namespace l2t
