#include <queuetion/io.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace queuetion;

namespace {

enum class Fmt { json, csv, table };

Fmt parse_fmt(const std::string& s) {
  if (s == "csv") return Fmt::csv;
  if (s == "table") return Fmt::table;
  return Fmt::json;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

void emit_rows(std::ostream& os, Fmt fmt,
               const std::vector<std::vector<std::string>>& rows) {
  if (fmt == Fmt::csv) {
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c)
        os << (c ? "," : "") << csv_escape(row[c]);
      os << "\n";
    }
    return;
  }
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      if (c + 1 < row.size()) cell.resize(width[c], ' ');
      line += cell;
      if (c + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << "\n";
  }
}

// Scalar cell text via the JSON value: '.' decimals for doubles, "n" or "n/d"
// for rationals.
std::string cell(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

template <class S>
std::string cell_of(const S& x) {
  return cell(scalar_json(x));
}

template <class S>
std::string ordering_str(const Instance<S>& inst, const Ordering& ord) {
  std::string s;
  for (std::size_t p = 1; p <= ord.size(); ++p) {
    if (p > 1) s += " > ";
    s += inst.participant(ord.participant_at(p)).id;
  }
  return s;
}

template <class S>
std::string bids_str(const Instance<S>& inst, const std::vector<S>& bids) {
  std::string s;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (i) s += " ";
    s += inst.participant(i).id + "=" + cell_of(bids[i]);
  }
  return s;
}

template <class S>
S tol_value(double flag) {
  if constexpr (scalar_traits<S>::exact)
    return S(0);
  else
    return flag < 0 ? scalar_traits<double>::default_tolerance() : flag;
}

// auto mode goes exact when every numeric literal in sight is an integer or a
// ratio string, float otherwise.
bool pick_exact(const std::string& mode, const Json& inst, const Json* bids) {
  if (mode == "exact") return true;
  if (mode == "float") return false;
  return prefers_exact(inst) && (!bids || prefers_exact(*bids));
}

Mechanism parse_mech(const std::string& s) {
  return s == "gsp" ? Mechanism::gsp : Mechanism::vcg;
}

template <class S>
int do_order(const Json& jinst, Fmt fmt) {
  auto inst = parse_instance<S>(jinst);
  Ordering ord = smith_order(inst);
  S total = total_weighted_waiting(inst, ord);
  if (fmt == Fmt::json) {
    Json positions = Json::array();
    for (std::size_t p = 1; p <= ord.size(); ++p) {
      const auto& part = inst.participant(ord.participant_at(p));
      positions.push_back({{"position", p},
                           {"id", part.id},
                           {"t", scalar_json(part.t)},
                           {"w", scalar_json(part.w)},
                           {"waiting_cost", scalar_json(waiting_cost(inst, ord, p))}});
    }
    Json j{{"ordering", ordering_json(inst, ord)},
           {"positions", positions},
           {"total_weighted_waiting", scalar_json(total)}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> rows{{"position", "id", "t", "w", "waiting_cost"}};
  for (std::size_t p = 1; p <= ord.size(); ++p) {
    const auto& part = inst.participant(ord.participant_at(p));
    rows.push_back({std::to_string(p), part.id, cell_of(part.t), cell_of(part.w),
                    cell_of(waiting_cost(inst, ord, p))});
  }
  if (fmt == Fmt::csv) {
    rows.push_back({"total", "", "", "", cell_of(total)});
    emit_rows(std::cout, fmt, rows);
  } else {
    emit_rows(std::cout, fmt, rows);
    std::cout << "total: " << cell_of(total) << "\n";
  }
  return 0;
}

template <class S>
int do_run(const Json& jinst, const Json& jbids, const std::string& mech_flag, Fmt fmt) {
  auto inst = parse_instance<S>(jinst);
  auto bf = parse_bids<S>(jbids, inst);
  Mechanism kind = mech_flag.empty() ? bf.kind : parse_mech(mech_flag);
  auto out = mechanism_outcome(kind, inst, bf.bids);
  if (fmt == Fmt::json) {
    std::cout << outcome_json(kind, inst, bf.bids, out).dump(2) << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> rows{{"id", "bid", "payment", "loss"}};
  for (std::size_t i = 0; i < inst.size(); ++i)
    rows.push_back({inst.participant(i).id, cell_of(bf.bids[i]), cell_of(out.payments[i]),
                    cell_of(S(-induced_utility(kind, inst, bf.bids, i)))});
  if (fmt == Fmt::csv) {
    rows.push_back({"revenue", "", "", cell_of(out.revenue)});
    emit_rows(std::cout, fmt, rows);
  } else {
    std::cout << "mechanism: " << mechanism_name(kind) << "\n"
              << "ordering: " << ordering_str(inst, out.ordering) << "\n";
    emit_rows(std::cout, fmt, rows);
    std::cout << "revenue: " << cell_of(out.revenue) << "\n";
  }
  return 0;
}

template <class S>
int do_verify(const Json& jinst, const Json& jbids, const std::string& mech_flag,
              const std::string& method, double tol_flag, Fmt fmt) {
  auto inst = parse_instance<S>(jinst);
  auto bf = parse_bids<S>(jbids, inst);
  Mechanism kind = mech_flag.empty() ? bf.kind : parse_mech(mech_flag);
  const S tol = tol_value<S>(tol_flag);

  std::optional<DeviationReport<S>> dev;
  std::optional<WindowReport<S>> win;
  if (method != "window")
    dev = check_nash_deviation(kind, inst, rank_by_bids(inst, bf.bids), bf.bids,
                               inst.value_rates(), tol);
  if (method != "deviation")
    win = kind == Mechanism::vcg ? vcg_window_check(inst, bf.bids, tol)
                                 : gsp_window_check(inst, bf.bids, tol);

  bool verdict = dev ? dev->equilibrium : win->satisfied;
  bool agree = !dev || !win || dev->equilibrium == win->satisfied;

  if (fmt == Fmt::json) {
    Json j{{"mechanism", mechanism_name(kind)},
           {"method", method},
           {"equilibrium", verdict}};
    if (dev) j["violations"] = deviation_json(inst, *dev)["violations"];
    if (win) j["window"] = window_json(*win);
    if (dev && win) j["methods_agree"] = agree;
    std::cout << j.dump(2) << "\n";
  } else {
    std::vector<std::vector<std::string>> rows{{"field", "value"}};
    rows.push_back({"mechanism", mechanism_name(kind)});
    rows.push_back({"method", method});
    rows.push_back({"equilibrium", verdict ? "true" : "false"});
    if (dev) {
      rows.push_back({"violations", std::to_string(dev->violations.size())});
      for (const auto& v : dev->violations)
        rows.push_back({"violation", inst.participant(v.participant).id + " to position " +
                                         std::to_string(v.target_position) + " gains " +
                                         cell_of(v.gain)});
    }
    if (dev && win) rows.push_back({"methods_agree", agree ? "true" : "false"});
    emit_rows(std::cout, fmt, rows);
  }
  if (!agree) {
    std::cerr << "error: window and deviation checks disagree\n";
    return static_cast<int>(errc::inconsistency);
  }
  return 0;
}

template <class S>
int do_bounds(const Json& jinst, const std::string& mech, Fmt fmt) {
  auto inst = parse_instance<S>(jinst);
  auto rb = revenue_bounds(inst, parse_mech(mech));
  if (fmt == Fmt::json) {
    std::cout << bounds_json(inst, rb).dump(2) << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> rows{{"field", "value"}};
  rows.push_back({"mechanism", mechanism_name(rb.mechanism)});
  rows.push_back({"lower", cell_of(rb.lower)});
  rows.push_back({"upper", cell_of(rb.upper)});
  rows.push_back({"upper_paper_printed_formula", cell_of(rb.upper_printed_formula)});
  rows.push_back({"upper_construction", cell_of(rb.upper_construction)});
  if (rb.lower_construction)
    rows.push_back({"lower_construction", cell_of(*rb.lower_construction)});
  rows.push_back({"lower_method", rb.lower_method});
  rows.push_back({"upper_method", rb.upper_method});
  rows.push_back({"witness_lower", ordering_str(inst, rb.witness_lower.ordering) + " | " +
                                       bids_str(inst, rb.witness_lower.bids)});
  rows.push_back({"witness_upper", ordering_str(inst, rb.witness_upper.ordering) + " | " +
                                       bids_str(inst, rb.witness_upper.bids)});
  emit_rows(std::cout, fmt, rows);
  return 0;
}

template <class S>
int do_oracle(const Json& jinst, const std::string& mech, unsigned grid, Fmt fmt) {
  auto inst = parse_instance<S>(jinst);
  OracleOptions opts;
  opts.grid_refinement = grid;
  auto set = enumerate_equilibria(inst, parse_mech(mech), opts);
  Json lo, hi;
  if (!set.entries.empty()) {
    S min = set.entries.front().revenue, max = min;
    for (const auto& e : set.entries) {
      if (e.revenue < min) min = e.revenue;
      if (e.revenue > max) max = e.revenue;
    }
    lo = scalar_json(min);
    hi = scalar_json(max);
  }
  if (fmt == Fmt::json) {
    for (const auto& e : set.entries)
      std::cout << equilibrium_entry_json(inst, e).dump() << "\n";
    Json summary = search_meta_json(set.search_meta);
    summary["min_revenue"] = lo;
    summary["max_revenue"] = hi;
    std::cout << Json{{"summary", summary}}.dump() << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> rows{{"ordering", "bids", "revenue"}};
  for (const auto& e : set.entries)
    rows.push_back({ordering_str(inst, e.ordering), bids_str(inst, e.bids),
                    cell_of(e.revenue)});
  emit_rows(std::cout, fmt, rows);
  if (fmt == Fmt::table) {
    std::cout << "entries: " << set.entries.size() << "\n"
              << "min revenue: " << cell(lo) << "\n"
              << "max revenue: " << cell(hi) << "\n";
  }
  return 0;
}

template <class S>
int do_dynamics(const Json& jinst, const std::optional<Json>& jbids,
                const std::string& mech_flag, const std::string& start,
                const DynamicsOptions& opts, Fmt fmt) {
  auto inst = parse_instance<S>(jinst);
  Mechanism kind = Mechanism::vcg;
  std::vector<S> profile;
  if (jbids) {
    auto bf = parse_bids<S>(*jbids, inst);
    kind = bf.kind;
    profile = std::move(bf.bids);
  } else if (start == "zero") {
    profile.assign(inst.size(), S(0));
  } else {
    profile = inst.value_rates();
  }
  if (!mech_flag.empty()) kind = parse_mech(mech_flag);

  auto trace = run_dynamics(kind, inst, inst.value_rates(), profile, opts);
  if (fmt == Fmt::json) {
    for (std::size_t s = 0; s < trace.steps.size(); ++s)
      std::cout << trace_step_json(inst, trace.steps[s], s).dump() << "\n";
    std::cout << trace_summary_json(inst, trace).dump() << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> rows{{"step", "mover", "old_bid", "new_bid",
                                              "revenue"}};
  for (std::size_t s = 0; s < trace.steps.size(); ++s)
    rows.push_back({std::to_string(s), inst.participant(trace.steps[s].mover).id,
                    cell_of(trace.steps[s].old_bid), cell_of(trace.steps[s].new_bid),
                    cell_of(trace.steps[s].revenue)});
  emit_rows(std::cout, fmt, rows);
  if (fmt == Fmt::table) {
    std::cout << "converged: " << (trace.converged ? "true" : "false") << "\n"
              << "stop reason: " << trace.stop_reason << "\n"
              << "final bids: " << bids_str(inst, trace.final_bids) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Position auctions over queue slots: cost-minimal ordering, VCG/GSP "
               "outcomes, equilibrium checks, revenue bounds, brute-force oracle, "
               "best-response dynamics."};
  app.require_subcommand(1);

  const auto fmt_ok = CLI::IsMember({"json", "csv", "table"});
  const auto mode_ok = CLI::IsMember({"auto", "exact", "float"});
  const auto mech_ok = CLI::IsMember({"vcg", "gsp"});

  std::string in_path, bids_path, mech, format = "json", mode = "auto";
  std::string method = "both", start = "truthful", dist = "uniform", out_path;
  double tolerance = -1;
  unsigned grid = 1;
  std::size_t gen_n = 4, max_steps = 100;
  std::uint64_t seed = 0;
  std::string rotation = "round-robin", placement = "midpoint";

  auto* c_order = app.add_subcommand("order", "cost-minimal service order");
  c_order->add_option("instance", in_path, "instance file")->required();
  c_order->add_option("--format", format)->check(fmt_ok);
  c_order->add_option("--mode", mode)->check(mode_ok);

  auto* c_run = app.add_subcommand("run", "run a mechanism on a bid profile");
  c_run->add_option("instance", in_path)->required();
  c_run->add_option("--bids", bids_path, "bid profile file")->required();
  c_run->add_option("--mechanism", mech)->check(mech_ok);
  c_run->add_option("--format", format)->check(fmt_ok);
  c_run->add_option("--mode", mode)->check(mode_ok);

  auto* c_verify = app.add_subcommand("verify", "equilibrium check for a bid profile");
  c_verify->add_option("instance", in_path)->required();
  c_verify->add_option("--bids", bids_path)->required();
  c_verify->add_option("--mechanism", mech)->check(mech_ok);
  c_verify->add_option("--method", method)->check(CLI::IsMember({"window", "deviation", "both"}));
  c_verify->add_option("--tolerance", tolerance)->check(CLI::NonNegativeNumber);
  c_verify->add_option("--format", format)->check(fmt_ok);
  c_verify->add_option("--mode", mode)->check(mode_ok);

  auto* c_bounds = app.add_subcommand("bounds", "equilibrium revenue range with witnesses");
  c_bounds->add_option("instance", in_path)->required();
  c_bounds->add_option("--mechanism", mech)->check(mech_ok);
  c_bounds->add_option("--format", format)->check(fmt_ok);
  c_bounds->add_option("--mode", mode)->check(mode_ok);

  auto* c_oracle = app.add_subcommand("oracle", "brute-force equilibrium enumeration");
  c_oracle->add_option("instance", in_path)->required();
  c_oracle->add_option("--mechanism", mech)->check(mech_ok);
  c_oracle->add_option("--grid", grid, "grid refinement level")->check(CLI::PositiveNumber);
  c_oracle->add_option("--format", format)->check(fmt_ok);
  c_oracle->add_option("--mode", mode)->check(mode_ok);

  auto* c_dyn = app.add_subcommand("dynamics", "iterated best-response trace");
  c_dyn->add_option("instance", in_path)->required();
  c_dyn->add_option("--bids", bids_path, "starting profile (default: truthful rates)");
  c_dyn->add_option("--start", start)->check(CLI::IsMember({"truthful", "zero"}));
  c_dyn->add_option("--mechanism", mech)->check(mech_ok);
  c_dyn->add_option("--max-steps", max_steps)->check(CLI::PositiveNumber);
  c_dyn->add_option("--rotation", rotation)->check(CLI::IsMember({"round-robin", "random"}));
  c_dyn->add_option("--seed", seed);
  c_dyn->add_option("--placement", placement)
      ->check(CLI::IsMember({"midpoint", "minimal"}));
  c_dyn->add_option("--format", format)->check(fmt_ok);
  c_dyn->add_option("--mode", mode)->check(mode_ok);

  auto* c_gen = app.add_subcommand("gen", "generate a random instance file");
  c_gen->add_option("--n", gen_n, "participant count")->required()->check(CLI::PositiveNumber);
  c_gen->add_option("--seed", seed)->required();
  c_gen->add_option("--dist", dist)->check(CLI::IsMember({"uniform", "lognormal"}));
  c_gen->add_option("--out", out_path, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(errc::parse);
  }

  try {
    Fmt fmt = parse_fmt(format);
    if (app.got_subcommand(c_gen)) {
      GenOptions g{gen_n, seed, dist == "lognormal"};
      std::string text = generate_instance_json(g).dump(2) + "\n";
      if (out_path.empty())
        std::cout << text;
      else
        write_text_file(out_path, text);
      return 0;
    }

    Json jinst = load_json_file(in_path);
    std::optional<Json> jbids;
    if (!bids_path.empty()) jbids = load_json_file(bids_path);
    bool exact = pick_exact(mode, jinst, jbids ? &*jbids : nullptr);

    if (app.got_subcommand(c_order))
      return exact ? do_order<Rational>(jinst, fmt) : do_order<double>(jinst, fmt);
    if (app.got_subcommand(c_run))
      return exact ? do_run<Rational>(jinst, *jbids, mech, fmt)
                   : do_run<double>(jinst, *jbids, mech, fmt);
    if (app.got_subcommand(c_verify))
      return exact ? do_verify<Rational>(jinst, *jbids, mech, method, tolerance, fmt)
                   : do_verify<double>(jinst, *jbids, mech, method, tolerance, fmt);
    if (app.got_subcommand(c_bounds))
      return exact ? do_bounds<Rational>(jinst, mech, fmt)
                   : do_bounds<double>(jinst, mech, fmt);
    if (app.got_subcommand(c_oracle))
      return exact ? do_oracle<Rational>(jinst, mech, grid, fmt)
                   : do_oracle<double>(jinst, mech, grid, fmt);
    if (app.got_subcommand(c_dyn)) {
      DynamicsOptions d;
      d.max_steps = max_steps;
      d.rotation = rotation == "random" ? Rotation::random_order : Rotation::round_robin;
      d.seed = seed;
      d.placement =
          placement == "minimal" ? BidPlacement::minimal_winning : BidPlacement::midpoint;
      return exact ? do_dynamics<Rational>(jinst, jbids, mech, start, d, fmt)
                   : do_dynamics<double>(jinst, jbids, mech, start, d, fmt);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  }
  return 0;
}
