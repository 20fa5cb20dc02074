#include <queuetion/io.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

using namespace queuetion;

namespace {

const std::string kDataDir = QT_DATA_DIR;

}  // namespace

TEST_CASE("instance files parse in both scalar modes") {
  Json j = load_json_file(kDataDir + "/i3.json");
  auto exact = parse_instance<Rational>(j);
  auto fp = parse_instance<double>(j);
  REQUIRE(exact.size() == 3);
  CHECK(exact.participant(0).id == "A");
  CHECK(exact.participant(1).t == 2);
  CHECK(exact.participant(2).w == 1);
  CHECK(fp.participant(1).w == 4.0);
  CHECK(prefers_exact(j));
}

TEST_CASE("ratio strings carry exact fractions") {
  Json j = parse_json_text(R"({"participants": [
    {"id": "A", "t": "1/3", "w": 2},
    {"id": "B", "t": 5, "w": "7/2"}]})");
  auto inst = parse_instance<Rational>(j);
  CHECK(inst.participant(0).t == Rational(1, 3));
  CHECK(inst.participant(1).w == Rational(7, 2));
  auto fp = parse_instance<double>(j);
  CHECK(fp.participant(0).t == Catch::Approx(1.0 / 3.0));
  CHECK(prefers_exact(j));
}

TEST_CASE("fractional numbers are read at their binary value in exact mode") {
  Json j = parse_json_text(R"({"participants": [{"id": "A", "t": 0.5, "w": 3}]})");
  CHECK_FALSE(prefers_exact(j));
  auto inst = parse_instance<Rational>(j);
  CHECK(inst.participant(0).t == Rational(1, 2));
}

TEST_CASE("malformed input raises parse errors") {
  CHECK_THROWS_AS(parse_json_text("{not json"), ParseError);
  CHECK_THROWS_AS(load_json_file(kDataDir + "/does_not_exist.json"), ParseError);
  CHECK_THROWS_AS(parse_instance<Rational>(parse_json_text("[1,2]")), ParseError);
  CHECK_THROWS_AS(parse_instance<Rational>(parse_json_text(R"({"participants": 3})")),
                  ParseError);
  CHECK_THROWS_AS(
      parse_instance<Rational>(parse_json_text(R"({"participants": [{"id": "A"}]})")),
      ParseError);
  CHECK_THROWS_AS(parse_instance<Rational>(parse_json_text(
                      R"({"participants": [{"id": 1, "t": 1, "w": 1}]})")),
                  ParseError);
  CHECK_THROWS_AS(parse_instance<Rational>(parse_json_text(
                      R"({"participants": [{"id": "A", "t": "1/0", "w": 1}]})")),
                  ParseError);
  CHECK_THROWS_AS(parse_instance<Rational>(parse_json_text(
                      R"({"participants": [{"id": "A", "t": "x/2", "w": 1}]})")),
                  ParseError);
  CHECK_THROWS_AS(parse_instance<Rational>(parse_json_text(
                      R"({"participants": [{"id": "A", "t": true, "w": 1}]})")),
                  ParseError);
}

TEST_CASE("semantic problems raise validation errors") {
  CHECK_THROWS_AS(parse_instance<Rational>(parse_json_text(R"({"participants": []})")),
                  EmptyInstance);
  CHECK_THROWS_AS(parse_instance<Rational>(parse_json_text(
                      R"({"participants": [{"id": "A", "t": 0, "w": 1}]})")),
                  NonPositiveParameter);
  CHECK_THROWS_AS(parse_instance<Rational>(parse_json_text(
                      R"({"participants": [{"id": "A", "t": 1, "w": 1},
                                           {"id": "A", "t": 2, "w": 1}]})")),
                  DuplicateId);
}

TEST_CASE("bid files map ids to the instance index order") {
  auto inst = parse_instance<Rational>(load_json_file(kDataDir + "/i2.json"));
  Json j = parse_json_text(R"({"kind": "gsp", "bids": {"B": "5/2", "A": 3}})");
  auto bf = parse_bids<Rational>(j, inst);
  CHECK(bf.kind == Mechanism::gsp);
  REQUIRE(bf.bids.size() == 2);
  CHECK(bf.bids[0] == 3);
  CHECK(bf.bids[1] == Rational(5, 2));

  CHECK_THROWS_AS(parse_bids<Rational>(parse_json_text(R"({"bids": {}})"), inst),
                  ParseError);
  CHECK_THROWS_AS(
      parse_bids<Rational>(parse_json_text(R"({"kind": "fee", "bids": {}})"), inst),
      ParseError);
  CHECK_THROWS_AS(parse_bids<Rational>(
                      parse_json_text(R"({"kind": "vcg", "bids": {"A": 1}})"), inst),
                  BidCountMismatch);
  CHECK_THROWS_AS(
      parse_bids<Rational>(
          parse_json_text(R"({"kind": "vcg", "bids": {"A": 1, "B": 2, "Z": 3}})"), inst),
      UnknownParticipant);
  CHECK_THROWS_AS(
      parse_bids<Rational>(
          parse_json_text(R"({"kind": "vcg", "bids": {"A": -1, "B": 2}})"), inst),
      NonPositiveParameter);
}

TEST_CASE("scalar serialization keeps exact values re-readable") {
  CHECK(scalar_json(Rational(5)) == Json(5));
  CHECK(scalar_json(Rational(-2)) == Json(-2));
  CHECK(scalar_json(Rational(3, 2)) == Json("3/2"));
  Rational big = Rational(BigInt(1) << 60);
  Json as_json = scalar_json(big);
  REQUIRE(as_json.is_string());
  CHECK(parse_scalar<Rational>(as_json, "x") == big);
  CHECK(parse_scalar<Rational>(scalar_json(Rational(-7, 3)), "x") == Rational(-7, 3));
  CHECK(scalar_json(0.25) == Json(0.25));
}

TEST_CASE("instance and bid serialization round-trips") {
  Json j = parse_json_text(R"({"participants": [
    {"id": "A", "t": "3/2", "w": 2}, {"id": "B", "t": 4, "w": "1/3"}]})");
  auto inst = parse_instance<Rational>(j);
  Json back = instance_json(inst);
  auto again = parse_instance<Rational>(back);
  REQUIRE(again.size() == inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) {
    CHECK(again.participant(i).id == inst.participant(i).id);
    CHECK(again.participant(i).t == inst.participant(i).t);
    CHECK(again.participant(i).w == inst.participant(i).w);
  }

  std::vector<Rational> bids{Rational(5, 4), Rational(2)};
  Json bj = bids_json(Mechanism::vcg, inst, bids);
  auto bf = parse_bids<Rational>(bj, inst);
  CHECK(bf.kind == Mechanism::vcg);
  CHECK(bf.bids == bids);
}

TEST_CASE("reports serialize with the documented shapes") {
  auto inst = parse_instance<Rational>(load_json_file(kDataDir + "/i3.json"));
  std::vector<Rational> bids{3, Rational(7, 2), 2};

  auto rep = is_nash_vcg(inst, bids);
  Json dj = deviation_json(inst, rep);
  CHECK(dj["equilibrium"] == Json(false));
  REQUIRE(!dj["violations"].empty());
  CHECK(dj["violations"][0].contains("participant"));
  CHECK(dj["violations"][0].contains("target"));
  CHECK(dj["violations"][0].contains("gain"));

  Json wj = window_json(vcg_window_check(inst, bids));
  CHECK(wj["satisfied"] == Json(false));
  CHECK(!wj["failures"].empty());

  auto out = vcg_outcome(inst, inst.value_rates());
  Json oj = outcome_json(Mechanism::vcg, inst, inst.value_rates(), out);
  CHECK(oj["mechanism"] == Json("vcg"));
  CHECK(oj["ordering"] == Json::array({"A", "B", "C"}));
  CHECK(oj["revenue"] == scalar_json(out.revenue));
  CHECK(oj["payments"].size() == 3);
  CHECK(oj["losses"].size() == 3);

  auto rb = revenue_bounds(inst, Mechanism::vcg);
  Json bj = bounds_json(inst, rb);
  CHECK(bj["mechanism"] == Json("vcg"));
  CHECK(bj["lower"] == Json(2));
  CHECK(bj["upper"] == Json(12));
  CHECK(bj["upper_paper_printed_formula"] == Json(7));
  CHECK(bj["upper_construction"] == Json(12));
  CHECK(bj["lower_construction"] == Json(2));
  REQUIRE(bj.contains("witness_upper"));
  CHECK(bj["witness_upper"]["ordering"] == Json::array({"A", "B", "C"}));
  auto reread = parse_bids<Rational>(
      Json{{"kind", "vcg"}, {"bids", bj["witness_upper"]["bids"]}}, inst);
  auto ord = rank_by_bids(inst, reread.bids);
  CHECK(detail::revenue_on(Mechanism::vcg, inst, ord.order(), reread.bids) == rb.upper);
}

TEST_CASE("oracle entries and traces serialize as single-line records") {
  auto inst = parse_instance<Rational>(load_json_file(kDataDir + "/i2.json"));
  auto set = enumerate_equilibria(inst, Mechanism::vcg);
  REQUIRE(!set.entries.empty());
  Json ej = equilibrium_entry_json(inst, set.entries.front());
  CHECK(ej.contains("ordering"));
  CHECK(ej.contains("bids"));
  CHECK(ej.contains("revenue"));
  CHECK(ej.dump().find('\n') == std::string::npos);
  Json mj = search_meta_json(set.search_meta);
  CHECK(mj["entries_kept"] == Json(set.entries.size()));

  std::vector<Rational> start{0, 0};
  auto trace = run_dynamics(Mechanism::vcg, inst, inst.value_rates(), start);
  Json summary = trace_summary_json(inst, trace);
  CHECK(summary.contains("converged"));
  CHECK(summary.contains("stop_reason"));
  CHECK(summary["steps"] == Json(trace.steps.size()));
  for (std::size_t s = 0; s < trace.steps.size(); ++s) {
    Json sj = trace_step_json(inst, trace.steps[s], s);
    CHECK(sj["step"] == Json(s));
    CHECK(sj.dump().find('\n') == std::string::npos);
  }
}

TEST_CASE("generated instances are deterministic per seed and parse cleanly") {
  GenOptions opts;
  opts.n = 5;
  opts.seed = 7;
  Json a = generate_instance_json(opts);
  Json b = generate_instance_json(opts);
  CHECK(a.dump(2) == b.dump(2));
  CHECK(prefers_exact(a));
  auto inst = parse_instance<Rational>(a);
  REQUIRE(inst.size() == 5);
  for (const auto& p : inst.participants()) {
    CHECK(p.t >= 1);
    CHECK(p.t <= 20);
    CHECK(p.w >= 1);
    CHECK(p.w <= 20);
  }

  GenOptions other = opts;
  other.seed = 8;
  CHECK(generate_instance_json(other).dump() != a.dump());

  GenOptions logn = opts;
  logn.lognormal = true;
  Json c = generate_instance_json(logn);
  CHECK(c.dump() == generate_instance_json(logn).dump());
  CHECK_FALSE(prefers_exact(c));
  auto finst = parse_instance<double>(c);
  for (const auto& p : finst.participants()) {
    CHECK(p.t > 0.0);
    CHECK(p.w > 0.0);
  }
  CHECK_THROWS_AS(generate_instance_json(GenOptions{0, 1, false}), ValidationError);
}
