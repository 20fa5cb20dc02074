#pragma once

#include "queuetion/bounds.hpp"
#include "queuetion/dynamics.hpp"

#include <json.hpp>

#include <cctype>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace queuetion {

// Insertion-ordered so reports and golden files are byte-stable.
using Json = nlohmann::ordered_json;

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str());
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << text;
}

namespace detail {

// "p/q" with optional leading '-'; a bare integer counts with q = 1.
inline bool ratio_literal(const std::string& s, std::string* num, std::string* den) {
  std::size_t i = 0;
  if (i < s.size() && s[i] == '-') ++i;
  std::size_t digits_from = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == digits_from) return false;
  if (i == s.size()) {
    *num = s;
    *den = "1";
    return true;
  }
  if (s[i] != '/') return false;
  std::size_t den_from = i + 1;
  i = den_from;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == den_from || i != s.size()) return false;
  *num = s.substr(0, den_from - 1);
  *den = s.substr(den_from);
  return true;
}

}  // namespace detail

// Numbers or "p/q" strings. In exact mode a fractional JSON number is taken at
// its binary value (every JSON double is a dyadic rational), so files written
// by the float path stay readable; decimal fractions meant exactly should be
// spelled as ratio strings.
template <class S>
S parse_scalar(const Json& v, const std::string& what) {
  if (v.is_string()) {
    const std::string& s = v.get_ref<const std::string&>();
    std::string num, den;
    if (!detail::ratio_literal(s, &num, &den))
      throw ParseError(what + ": malformed ratio string \"" + s + "\"");
    if (den.find_first_not_of('0') == std::string::npos)
      throw ParseError(what + ": zero denominator in \"" + s + "\"");
    if constexpr (scalar_traits<S>::exact) {
      return S(Rational(BigInt(num), BigInt(den)));
    } else {
      try {
        return std::stod(num) / std::stod(den);
      } catch (const std::out_of_range&) {
        throw ParseError(what + ": ratio out of double range \"" + s + "\"");
      }
    }
  }
  if constexpr (scalar_traits<S>::exact) {
    if (v.is_number_unsigned()) return S(v.get<std::uint64_t>());
    if (v.is_number_integer()) return S(v.get<std::int64_t>());
    if (v.is_number_float()) return S(v.get<double>());
  } else {
    if (v.is_number()) return v.get<double>();
  }
  throw ParseError(what + ": expected a number or \"p/q\" string");
}

// True when the literal can be carried by rational arithmetic without any
// reading of binary float values: integers and ratio strings.
inline bool exact_literal(const Json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return true;
  if (!v.is_string()) return false;
  std::string num, den;
  return detail::ratio_literal(v.get_ref<const std::string&>(), &num, &den);
}

// Scans the numeric fields of an instance or bid-profile file. Used by the CLI
// to pick the arithmetic mode when none is forced.
inline bool prefers_exact(const Json& file) {
  if (!file.is_object()) return false;
  bool saw = false;
  if (file.contains("participants") && file["participants"].is_array()) {
    for (const auto& e : file["participants"]) {
      if (!e.is_object()) return false;
      for (const char* key : {"t", "w"}) {
        if (!e.contains(key)) return false;
        saw = true;
        if (!exact_literal(e[key])) return false;
      }
    }
  }
  if (file.contains("bids") && file["bids"].is_object()) {
    for (const auto& [id, val] : file["bids"].items()) {
      (void)id;
      saw = true;
      if (!exact_literal(val)) return false;
    }
  }
  return saw;
}

template <class S>
Instance<S> parse_instance(const Json& j) {
  if (!j.is_object() || !j.contains("participants"))
    throw ParseError("instance file: expected an object with a \"participants\" array");
  const Json& arr = j["participants"];
  if (!arr.is_array())
    throw ParseError("instance file: \"participants\" must be an array");
  std::vector<Participant<S>> parts;
  parts.reserve(arr.size());
  for (const Json& e : arr) {
    if (!e.is_object() || !e.contains("id") || !e.contains("t") || !e.contains("w"))
      throw ParseError("participant entry needs \"id\", \"t\" and \"w\"");
    if (!e["id"].is_string())
      throw ParseError("participant \"id\" must be a string");
    std::string id = e["id"].get<std::string>();
    parts.push_back({id, parse_scalar<S>(e["t"], "participant " + id + " t"),
                     parse_scalar<S>(e["w"], "participant " + id + " w")});
  }
  return Instance<S>(std::move(parts));
}

template <class S>
struct BidFile {
  Mechanism kind;
  std::vector<S> bids;  // by participant index
};

// {"kind": "vcg"|"gsp", "bids": {"<id>": value, ...}}; every participant must
// be covered exactly once and ids must exist in the instance.
template <class S>
BidFile<S> parse_bids(const Json& j, const Instance<S>& inst) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("bids"))
    throw ParseError("bids file: expected an object with \"kind\" and \"bids\"");
  if (!j["kind"].is_string())
    throw ParseError("bids file: \"kind\" must be \"vcg\" or \"gsp\"");
  const std::string kind_str = j["kind"].get<std::string>();
  Mechanism kind;
  if (kind_str == "vcg") {
    kind = Mechanism::vcg;
  } else if (kind_str == "gsp") {
    kind = Mechanism::gsp;
  } else {
    throw ParseError("bids file: unknown kind \"" + kind_str + "\"");
  }
  if (!j["bids"].is_object())
    throw ParseError("bids file: \"bids\" must map participant ids to values");
  std::vector<S> bids(inst.size(), S(0));
  std::vector<bool> seen(inst.size(), false);
  std::size_t covered = 0;
  for (const auto& [id, val] : j["bids"].items()) {
    std::size_t idx = inst.index_of(id);
    if (!seen[idx]) ++covered;
    seen[idx] = true;
    bids[idx] = parse_scalar<S>(val, "bid of " + id);
  }
  if (covered != inst.size())
    throw BidCountMismatch("bids file covers " + std::to_string(covered) + " of " +
                           std::to_string(inst.size()) + " participants");
  validate_bids(inst, bids);
  return {kind, std::move(bids)};
}

// Whole small rationals become JSON numbers; everything else becomes a string
// that parse_scalar reads back exactly ("n" or "n/d").
inline Json scalar_json(const Rational& a) {
  if (fits_json_int(a)) return Json(numerator(a).convert_to<std::int64_t>());
  return Json(a.str());
}

inline Json scalar_json(double a) { return Json(a); }

template <class S>
Json instance_json(const Instance<S>& inst) {
  Json parts = Json::array();
  for (const auto& p : inst.participants())
    parts.push_back({{"id", p.id}, {"t", scalar_json(p.t)}, {"w", scalar_json(p.w)}});
  return Json{{"participants", parts}};
}

template <class S>
Json bids_json(Mechanism kind, const Instance<S>& inst, const std::vector<S>& bids) {
  Json by_id = Json::object();
  for (std::size_t i = 0; i < inst.size(); ++i)
    by_id[inst.participant(i).id] = scalar_json(bids[i]);
  return Json{{"kind", mechanism_name(kind)}, {"bids", by_id}};
}

template <class S>
Json ordering_json(const Instance<S>& inst, const Ordering& ord) {
  Json ids = Json::array();
  for (std::size_t p = 1; p <= ord.size(); ++p)
    ids.push_back(inst.participant(ord.participant_at(p)).id);
  return ids;
}

template <class S>
Json outcome_json(Mechanism kind, const Instance<S>& inst, const std::vector<S>& bids,
                  const Outcome<S>& out) {
  Json payments = Json::object();
  Json losses = Json::object();
  for (std::size_t i = 0; i < inst.size(); ++i) {
    payments[inst.participant(i).id] = scalar_json(out.payments[i]);
    losses[inst.participant(i).id] = scalar_json(S(-induced_utility(kind, inst, bids, i)));
  }
  return Json{{"mechanism", mechanism_name(kind)},
              {"ordering", ordering_json(inst, out.ordering)},
              {"payments", payments},
              {"losses", losses},
              {"revenue", scalar_json(out.revenue)}};
}

template <class S>
Json deviation_json(const Instance<S>& inst, const DeviationReport<S>& rep) {
  Json violations = Json::array();
  for (const auto& v : rep.violations)
    violations.push_back({{"participant", inst.participant(v.participant).id},
                          {"target", v.target_position},
                          {"gain", scalar_json(v.gain)}});
  return Json{{"equilibrium", rep.equilibrium}, {"violations", violations}};
}

template <class S>
Json window_json(const WindowReport<S>& rep) {
  Json failures = Json::array();
  for (const auto& f : rep.failures)
    failures.push_back({{"position", f.position},
                        {"side", f.side == WindowSide::lower ? "lower" : "upper"},
                        {"lhs", scalar_json(f.lhs)},
                        {"rhs", scalar_json(f.rhs)}});
  return Json{{"satisfied", rep.satisfied}, {"failures", failures}};
}

template <class S>
Json witness_json(const Instance<S>& inst, const RevenueWitness<S>& w) {
  Json by_id = Json::object();
  for (std::size_t i = 0; i < inst.size(); ++i)
    by_id[inst.participant(i).id] = scalar_json(w.bids[i]);
  return Json{{"ordering", ordering_json(inst, w.ordering)}, {"bids", by_id}};
}

template <class S>
Json bounds_json(const Instance<S>& inst, const RevenueBounds<S>& rb) {
  Json j{{"mechanism", mechanism_name(rb.mechanism)},
         {"lower", scalar_json(rb.lower)},
         {"upper", scalar_json(rb.upper)},
         {"upper_paper_printed_formula", scalar_json(rb.upper_printed_formula)},
         {"upper_construction", scalar_json(rb.upper_construction)}};
  if (rb.lower_construction)
    j["lower_construction"] = scalar_json(*rb.lower_construction);
  j["lower_method"] = rb.lower_method;
  j["upper_method"] = rb.upper_method;
  j["witness_lower"] = witness_json(inst, rb.witness_lower);
  j["witness_upper"] = witness_json(inst, rb.witness_upper);
  return j;
}

template <class S>
Json equilibrium_entry_json(const Instance<S>& inst, const EquilibriumEntry<S>& e) {
  Json by_id = Json::object();
  for (std::size_t i = 0; i < inst.size(); ++i)
    by_id[inst.participant(i).id] = scalar_json(e.bids[i]);
  return Json{{"ordering", ordering_json(inst, e.ordering)},
              {"bids", by_id},
              {"revenue", scalar_json(e.revenue)}};
}

inline Json search_meta_json(const SearchMeta& m) {
  return Json{{"grid", m.grid},
              {"orderings_considered", m.orderings_considered},
              {"orderings_feasible", m.orderings_feasible},
              {"profiles_tested", m.profiles_tested},
              {"entries_kept", m.entries_kept}};
}

template <class S>
Json trace_step_json(const Instance<S>& inst, const TraceStep<S>& s, std::size_t index) {
  return Json{{"step", index},
              {"mover", inst.participant(s.mover).id},
              {"old_bid", scalar_json(s.old_bid)},
              {"new_bid", scalar_json(s.new_bid)},
              {"revenue", scalar_json(s.revenue)}};
}

template <class S>
Json trace_summary_json(const Instance<S>& inst, const Trace<S>& t) {
  Json by_id = Json::object();
  for (std::size_t i = 0; i < inst.size(); ++i)
    by_id[inst.participant(i).id] = scalar_json(t.final_bids[i]);
  return Json{{"converged", t.converged},
              {"stop_reason", t.stop_reason},
              {"steps", t.steps.size()},
              {"final_bids", by_id}};
}

// Random instance files. Uniform draws integer t, w from [1, 20] and yields an
// exact-capable file; lognormal draws positive doubles. Same options, same
// bytes.
struct GenOptions {
  std::size_t n = 4;
  std::uint64_t seed = 0;
  bool lognormal = false;
};

inline Json generate_instance_json(const GenOptions& opts) {
  if (opts.n < 1) throw ValidationError("generation needs n >= 1");
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> uni(1, 20);
  std::lognormal_distribution<double> logn(0.0, 0.5);
  Json parts = Json::array();
  for (std::size_t i = 1; i <= opts.n; ++i) {
    Json entry{{"id", "P" + std::to_string(i)}};
    if (opts.lognormal) {
      entry["t"] = logn(rng);
      entry["w"] = logn(rng);
    } else {
      entry["t"] = uni(rng);
      entry["w"] = uni(rng);
    }
    parts.push_back(entry);
  }
  return Json{{"participants", parts}};
}

}  // namespace queuetion
