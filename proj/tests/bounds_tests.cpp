#include <queuetion/bounds.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "support/generators.hpp"

using namespace queuetion;
using qtest::random_exact_instance;

namespace {

Instance<Rational> i2() {
  return Instance<Rational>({{"A", Rational(1), Rational(3)}, {"B", Rational(2), Rational(4)}});
}

Instance<Rational> i3() {
  return Instance<Rational>({{"A", Rational(1), Rational(3)},
                             {"B", Rational(2), Rational(4)},
                             {"C", Rational(1), Rational(1)}});
}

// The closed-form maximal profile is not maximal here: pricing the long slow
// job ahead of the short one is worth more.
Instance<Rational> swap_pays() {
  return Instance<Rational>({{"P1", Rational(1), Rational(10)},
                             {"P2", Rational(1), Rational(2)},
                             {"P3", Rational(2), Rational(2)}});
}

// Reference extremes by brute force: every permutation passing the
// near-sortedness test, bids from true running caps / suffix floors.
std::pair<Rational, Rational> brute_rate_extremes(const Instance<Rational>& inst) {
  const std::size_t n = inst.size();
  std::vector<std::size_t> ord(n);
  std::iota(ord.begin(), ord.end(), std::size_t{0});
  std::optional<Rational> lo, hi;
  do {
    if (!near_sorted_check(inst, Ordering{ord})) continue;
    Rational rev_hi(0), rev_lo(0), ahead(0);
    Rational cap = inst.value_rate(ord[0]);
    for (std::size_t p = 1; p < n; ++p) {
      ahead += inst.participant(ord[p - 1]).t;
      rev_hi += ahead * inst.participant(ord[p]).t * cap;
      Rational fl(0);
      for (std::size_t q = p + 1; q < n; ++q)
        fl = std::max(fl, inst.value_rate(ord[q]));
      rev_lo += ahead * inst.participant(ord[p]).t * fl;
      cap = std::min(cap, inst.value_rate(ord[p]));
    }
    if (!hi || rev_hi > *hi) hi = rev_hi;
    if (!lo || rev_lo < *lo) lo = rev_lo;
  } while (std::next_permutation(ord.begin(), ord.end()));
  return {*lo, *hi};
}

void expect_sound_witness(Mechanism kind, const Instance<Rational>& inst,
                          const RevenueWitness<Rational>& w, const Rational& value) {
  auto rep = check_nash_deviation(kind, inst, w.ordering, w.bids,
                                  inst.value_rates(), Rational(0));
  INFO(mechanism_name(kind) << " witness on instance of size " << inst.size());
  CHECK(rep.equilibrium);
  CHECK(detail::revenue_on(kind, inst, w.ordering.order(), w.bids) == value);
}

}  // namespace

TEST_CASE("rate-bid bounds reproduce the worked examples") {
  auto b2 = revenue_bounds(i2(), Mechanism::vcg);
  CHECK(b2.lower == 0);
  CHECK(b2.upper == 6);
  CHECK(b2.upper_construction == 6);
  CHECK(*b2.lower_construction == 0);

  auto b3 = revenue_bounds(i3(), Mechanism::vcg);
  CHECK(b3.lower == 2);
  CHECK(b3.upper == 12);
  CHECK(b3.upper_printed_formula == 7);
  CHECK(b3.upper_construction == 12);
  CHECK(*b3.lower_construction == 2);

  Instance<Rational> one({{"A", Rational(2), Rational(5)}});
  auto b1 = revenue_bounds(one, Mechanism::vcg);
  CHECK(b1.lower == 0);
  CHECK(b1.upper == 0);
  CHECK(b1.upper_printed_formula == 0);
}

TEST_CASE("maximum can exceed the closed-form profile via a swapped arrangement") {
  auto inst = swap_pays();
  auto up = vcg_revenue_upper(inst);
  CHECK(up.value == 23);
  CHECK(up.witness.ordering.order() == std::vector<std::size_t>{0, 2, 1});
  CHECK(up.witness.bids == std::vector<Rational>{11, 1, 10});

  auto b = revenue_bounds(inst, Mechanism::vcg);
  CHECK(b.upper == 23);
  CHECK(b.upper_construction == 18);
  CHECK(b.upper_printed_formula == 6);
  expect_sound_witness(Mechanism::vcg, inst, b.witness_upper, b.upper);
}

TEST_CASE("rate-bid extremes match the oracle on random instances") {
  std::mt19937_64 rng(0x60061eULL);
  std::uniform_int_distribution<std::size_t> nd(1, 5);
  for (int rep = 0; rep < 40; ++rep) {
    auto inst = random_exact_instance(rng, nd(rng));
    auto [olo, ohi] = oracle_revenue_extremes(inst, Mechanism::vcg);
    INFO("rep " << rep << " n=" << inst.size());
    CHECK(vcg_revenue_upper(inst).value == ohi);
    CHECK(vcg_revenue_lower_dp(inst).value == olo);
  }
}

TEST_CASE("rate-bid extremes survive tied value rates") {
  std::vector<Instance<Rational>> crafted;
  // all rates equal, distinct times
  crafted.push_back(Instance<Rational>({{"a", Rational(1), Rational(2)},
                                        {"b", Rational(2), Rational(4)},
                                        {"c", Rational(3), Rational(6)},
                                        {"d", Rational(5), Rational(10)}}));
  // two tied buckets
  crafted.push_back(Instance<Rational>({{"a", Rational(1), Rational(4)},
                                        {"b", Rational(3), Rational(12)},
                                        {"c", Rational(2), Rational(2)},
                                        {"d", Rational(4), Rational(4)}}));
  // singleton wedged between tied buckets
  crafted.push_back(Instance<Rational>({{"a", Rational(2), Rational(10)},
                                        {"b", Rational(1), Rational(5)},
                                        {"c", Rational(1), Rational(3)},
                                        {"d", Rational(2), Rational(2)},
                                        {"e", Rational(3), Rational(3)}}));
  for (std::size_t i = 0; i < crafted.size(); ++i) {
    const auto& inst = crafted[i];
    auto [olo, ohi] = oracle_revenue_extremes(inst, Mechanism::vcg);
    INFO("crafted tie instance " << i);
    CHECK(vcg_revenue_upper(inst).value == ohi);
    CHECK(vcg_revenue_lower_dp(inst).value == olo);
  }

  std::mt19937_64 rng(0x7173ULL);
  std::uniform_int_distribution<std::size_t> nd(2, 5);
  for (int rep = 0; rep < 30; ++rep) {
    auto inst = random_exact_instance(rng, nd(rng), 4, false);  // ties likely
    auto [olo, ohi] = oracle_revenue_extremes(inst, Mechanism::vcg);
    INFO("random tie-prone rep " << rep);
    CHECK(vcg_revenue_upper(inst).value == ohi);
    CHECK(vcg_revenue_lower_dp(inst).value == olo);
  }
}

TEST_CASE("rate-bid extremes match an independent brute force at larger sizes") {
  std::mt19937_64 rng(0xb0b0ULL);
  for (int rep = 0; rep < 12; ++rep) {
    std::size_t n = 6 + std::size_t(rep % 2);
    auto inst = random_exact_instance(rng, n, 9, rep % 3 != 0);
    auto [blo, bhi] = brute_rate_extremes(inst);
    INFO("rep " << rep << " n=" << n);
    CHECK(vcg_revenue_upper(inst).value == bhi);
    CHECK(vcg_revenue_lower_dp(inst).value == blo);
  }
}

TEST_CASE("bound witnesses are equilibria and attain their bounds") {
  std::mt19937_64 rng(0x3a11ULL);
  std::uniform_int_distribution<std::size_t> nd(1, 6);
  for (int rep = 0; rep < 25; ++rep) {
    auto inst = random_exact_instance(rng, nd(rng), 12, rep % 4 != 0);
    auto b = revenue_bounds(inst, Mechanism::vcg);
    expect_sound_witness(Mechanism::vcg, inst, b.witness_lower, b.lower);
    expect_sound_witness(Mechanism::vcg, inst, b.witness_upper, b.upper);
    CHECK(b.lower <= b.upper);
    CHECK(b.lower <= *b.lower_construction);
    CHECK(b.upper_construction <= b.upper);
    // truthful play is an equilibrium, so its revenue sits inside
    Rational truthful = vcg_outcome(inst, inst.value_rates()).revenue;
    CHECK(b.lower <= truthful);
    CHECK(truthful <= b.upper);
  }
}

TEST_CASE("bounds scale linearly in waiting values and in service times") {
  std::mt19937_64 rng(0x5ca1eULL);
  std::uniform_int_distribution<std::size_t> nd(1, 6);
  for (int rep = 0; rep < 15; ++rep) {
    auto inst = random_exact_instance(rng, nd(rng), 10, rep % 3 != 0);
    auto base = revenue_bounds(inst, Mechanism::vcg);
    const Rational c(3, 2);
    std::vector<Participant<Rational>> ws, ts;
    for (const auto& p : inst.participants()) {
      ws.push_back({p.id, p.t, p.w * c});
      ts.push_back({p.id, p.t * c, p.w});
    }
    auto scaled_w = revenue_bounds(Instance<Rational>(std::move(ws)), Mechanism::vcg);
    auto scaled_t = revenue_bounds(Instance<Rational>(std::move(ts)), Mechanism::vcg);
    INFO("rep " << rep);
    CHECK(scaled_w.lower == base.lower * c);
    CHECK(scaled_w.upper == base.upper * c);
    CHECK(scaled_t.lower == base.lower * c);
    CHECK(scaled_t.upper == base.upper * c);
    CHECK(scaled_w.upper_printed_formula == base.upper_printed_formula * c);
    CHECK(scaled_t.upper_printed_formula == base.upper_printed_formula * c);
  }
}

TEST_CASE("level-bid bounds agree with the oracle and carry sound witnesses") {
  auto b3 = revenue_bounds(i3(), Mechanism::gsp);
  CHECK(b3.lower == 2);
  CHECK(b3.upper == 12);
  expect_sound_witness(Mechanism::gsp, i3(), b3.witness_lower, b3.lower);
  expect_sound_witness(Mechanism::gsp, i3(), b3.witness_upper, b3.upper);

  auto b2 = revenue_bounds(i2(), Mechanism::gsp);
  CHECK(b2.lower == 0);
  CHECK(b2.upper == 6);

  std::mt19937_64 rng(0x911eadULL);
  std::uniform_int_distribution<std::size_t> nd(1, 4);
  for (int rep = 0; rep < 15; ++rep) {
    auto inst = random_exact_instance(rng, nd(rng), 8, rep % 3 != 0);
    auto [olo, ohi] = oracle_revenue_extremes(inst, Mechanism::gsp);
    auto b = revenue_bounds(inst, Mechanism::gsp);
    INFO("rep " << rep << " n=" << inst.size());
    CHECK(b.lower == olo);
    CHECK(b.upper == ohi);
    expect_sound_witness(Mechanism::gsp, inst, b.witness_lower, b.lower);
    expect_sound_witness(Mechanism::gsp, inst, b.witness_upper, b.upper);
  }
}

TEST_CASE("level-bid maximum can strictly exceed the rate-bid maximum") {
  Instance<Rational> inst({{"P1", Rational(3), Rational(4)},
                           {"P2", Rational(6), Rational(4)},
                           {"P3", Rational(3), Rational(5)}});
  CHECK(vcg_revenue_upper(inst).value == 63);
  auto up = gsp_revenue_upper(inst);
  CHECK(up.value == 66);
  expect_sound_witness(Mechanism::gsp, inst, up.witness, up.value);
}

TEST_CASE("closed-form maximal profiles of the two mechanisms price identically") {
  std::mt19937_64 rng(0x1dea1ULL);
  std::uniform_int_distribution<std::size_t> nd(1, 7);
  for (int rep = 0; rep < 30; ++rep) {
    auto inst = random_exact_instance(rng, nd(rng), 12, rep % 5 != 0);
    Rational vcg_side = vcg_outcome(inst, max_equilibrium_bids_vcg(inst)).revenue;
    Rational gsp_side = gsp_outcome(inst, max_equilibrium_bids_gsp(inst)).revenue;
    INFO("rep " << rep << " n=" << inst.size());
    CHECK(vcg_side == gsp_side);
    CHECK(revenue_bounds(inst, Mechanism::vcg).upper_construction == vcg_side);
  }
}

TEST_CASE("level-bid bounds beyond the enumeration limit") {
  std::mt19937_64 rng(0xcafeULL);
  auto inst = random_exact_instance(rng, 6);
  CHECK_THROWS_AS(revenue_bounds(inst, Mechanism::gsp), OracleLimitExceeded);
  auto up = gsp_revenue_upper(inst);  // stays total: falls back to the profile
  CHECK(up.value == gsp_outcome(inst, max_equilibrium_bids_gsp(inst)).revenue);
  CHECK(up.method.find("not certified") != std::string::npos);
  CHECK(check_nash_deviation(Mechanism::gsp, inst, up.witness.ordering,
                             up.witness.bids, inst.value_rates(), Rational(0))
            .equilibrium);
}
