#pragma once

#include "queuetion/equilibrium.hpp"
#include "queuetion/oracle.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace queuetion {

template <class S>
struct RevenueWitness {
  Ordering ordering;
  std::vector<S> bids;  // by participant index
};

template <class S>
struct BoundResult {
  S value;
  RevenueWitness<S> witness;
  std::string method;
};

// Aggregated report. `upper_printed_formula` is the flat pair sum
// sum_{i<j} t_i t_j v_{sigma(j)} on the efficient order; the attained maximum
// uses the rate one slot earlier, so the two differ whenever adjacent rates
// do, and both are carried so the gap stays visible. `upper_construction` is
// the revenue of the closed-form maximal profile on the efficient order (the
// same number for both mechanisms); `lower_construction` likewise for the
// minimal closed-form profile, which exists only for the rate-bid mechanism.
template <class S>
struct RevenueBounds {
  Mechanism mechanism;
  S lower;
  S upper;
  S upper_printed_formula;
  S upper_construction;
  std::optional<S> lower_construction;
  RevenueWitness<S> witness_lower;
  RevenueWitness<S> witness_upper;
  std::string lower_method;
  std::string upper_method;
};

namespace detail {

inline constexpr std::size_t kNoMember = static_cast<std::size_t>(-1);

// Participants bucketed by equal value rate, buckets in decreasing rate
// order, members inside a bucket by decreasing t then index.
template <class S>
struct TieGroup {
  S v;
  std::vector<std::size_t> members;
  std::vector<S> t;
  S total{0};
  S pairs{0};  // sum over member pairs i<j of t_i * t_j
};

template <class S>
std::vector<TieGroup<S>> tie_groups(const Instance<S>& inst) {
  std::vector<std::size_t> idx(inst.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto rate_above = [&](std::size_t a, std::size_t b) {
    return inst.participant(a).w * inst.participant(b).t >
           inst.participant(b).w * inst.participant(a).t;
  };
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (rate_above(a, b)) return true;
    if (rate_above(b, a)) return false;
    if (inst.participant(a).t != inst.participant(b).t)
      return inst.participant(a).t > inst.participant(b).t;
    return a < b;
  });
  std::vector<TieGroup<S>> groups;
  for (std::size_t i : idx) {
    if (groups.empty() || rate_above(groups.back().members.front(), i)) {
      groups.push_back(TieGroup<S>{});
      groups.back().v = inst.value_rate(i);
    }
    auto& g = groups.back();
    const S ti = inst.participant(i).t;
    g.pairs += g.total * ti;
    g.total += ti;
    g.members.push_back(i);
    g.t.push_back(ti);
  }
  return groups;
}

template <class S>
struct ExtremeCell {
  bool reached = false;
  S value{0};
  std::size_t from = 0;            // borrow state at the previous level
  std::size_t x_pos = kNoMember;   // member sent across the right boundary
  std::size_t special = kNoMember; // member occupying the sensitive slot
};

template <class S>
struct ExtremeResult {
  S value;
  Ordering ordering;
  std::vector<S> bids;
};

// Exact extreme of equilibrium revenue over every admissible arrangement:
// rate-sorted up to disjoint adjacent transpositions. Any such arrangement is
// some bucket concatenation with per-boundary swaps, and the supporting bid
// box is pinned slotwise by the two neighbouring rates (cap = min of the two
// rates in front when maximizing, floor = max of the two behind when
// minimizing), so revenue decomposes per bucket plus boundary terms. Inside a
// bucket only one slot is sensitive: the first (its cap rises to the previous
// bucket's rate) for the maximum, the last (its floor drops to the next
// bucket's rate) for the minimum; the rest contribute a layout-independent
// amount since sum_p prefix_t(p) * t_p is symmetric. The walk is over buckets
// with one unit of lookahead: state = which member of the next bucket, if
// any, was pulled back across the boundary. Linear after sorting for
// all-distinct rates; bucket-quadratic under ties.
template <class S>
ExtremeResult<S> near_sorted_extreme(const Instance<S>& inst, bool maximize) {
  const auto groups = tie_groups(inst);
  const std::size_t m = groups.size();

  std::vector<S> pref(m + 1, S(0));
  for (std::size_t k = 0; k < m; ++k) pref[k + 1] = pref[k] + groups[k].total;

  std::vector<std::vector<ExtremeCell<S>>> dp(m + 1);
  for (std::size_t k = 0; k < m; ++k) dp[k].resize(groups[k].members.size() + 1);
  dp[m].resize(1);
  dp[0].back().reached = true;

  for (std::size_t k = 0; k < m; ++k) {
    const auto& g = groups[k];
    const std::size_t gk = g.members.size();
    const S vk = g.v;
    const std::size_t none_next = (k + 1 < m) ? groups[k + 1].members.size() : 0;
    for (std::size_t b = 0; b <= gk; ++b) {
      const auto& cur = dp[k][b];
      if (!cur.reached) continue;
      const bool borrowed = b < gk;
      auto relax = [&](std::size_t state, const S& total, std::size_t x_pos,
                       std::size_t special) {
        auto& cell = dp[k + 1][state];
        if (!cell.reached || (maximize ? total > cell.value : total < cell.value)) {
          cell.reached = true;
          cell.value = total;
          cell.from = b;
          cell.x_pos = x_pos;
          cell.special = special;
        }
      };

      const std::size_t hand = gk - (borrowed ? 1 : 0);
      if (hand == 0) {  // the whole bucket was pulled into the previous segment
        relax(none_next, cur.value, kNoMember, kNoMember);
        continue;
      }
      const S tb = borrowed ? g.t[b] : S(0);
      const S t_hand = g.total - tb;
      const S pairs_hand = g.pairs - tb * (g.total - tb);
      const S c_hand = pref[k] + tb;  // service time already in front

      // Keep the bucket whole.
      {
        S cost = vk * (c_hand * t_hand + pairs_hand);
        std::size_t special = kNoMember;
        if (maximize) {
          if (!borrowed && k >= 1) {
            special = 0;  // largest t takes the boosted first slot
            cost += (groups[k - 1].v - vk) * c_hand * g.t[0];
          }
        } else {
          const S vnext = (k + 1 < m) ? groups[k + 1].v : S(0);
          std::optional<S> best;
          for (std::size_t l = 0; l < gk; ++l) {
            if (l == b) continue;
            S prod = (c_hand + t_hand - g.t[l]) * g.t[l];
            if (!best || prod > *best) {
              best = prod;
              special = l;
            }
          }
          cost -= (vk - vnext) * *best;
        }
        relax(none_next, cur.value + cost, kNoMember, special);
      }

      // Swap member x with a member of the next bucket pulled back across
      // the boundary; the pair occupies the last two slots of this segment.
      if (k + 1 < m) {
        const auto& ng = groups[k + 1];
        for (std::size_t x = 0; x < gk; ++x) {
          if (x == b) continue;
          const S tx = g.t[x];
          const S rest_t = t_hand - tx;
          const S rest_pairs = pairs_hand - tx * rest_t;
          S base = vk * (c_hand * rest_t + rest_pairs);
          std::size_t special = kNoMember;
          S pulled_cap = vk;
          if (maximize && !borrowed && k >= 1) {
            if (hand >= 2) {
              special = (x == 0) ? 1 : 0;
              base += (groups[k - 1].v - vk) * c_hand * g.t[special];
            } else {
              pulled_cap = groups[k - 1].v;  // the pulled member inherits the boost
            }
          }
          S floor_x(0);
          if (!maximize)
            floor_x = (ng.members.size() >= 2)
                          ? ng.v
                          : (k + 2 < m ? groups[k + 2].v : S(0));
          const S before_pull = c_hand + rest_t;
          for (std::size_t j = 0; j < ng.members.size(); ++j) {
            const S ty = ng.t[j];
            S cost = base;
            if (maximize) {
              cost += before_pull * ty * pulled_cap;
              cost += (before_pull + ty) * tx * ng.v;
            } else {
              cost += before_pull * ty * vk;
              cost += (before_pull + ty) * tx * floor_x;
            }
            relax(j, cur.value + cost, x, special);
          }
        }
      }
    }
  }

  // Recover the arrangement, then read the extreme bids off it.
  std::vector<ExtremeCell<S>> seg(m);
  std::vector<std::size_t> borrow_of(m, kNoMember);
  std::size_t state = 0;
  for (std::size_t k = m; k >= 1; --k) {
    const auto& cell = dp[k][state];
    seg[k - 1] = cell;
    if (k < m && state < groups[k].members.size()) borrow_of[k - 1] = state;
    state = cell.from;
  }

  std::vector<std::size_t> order;
  order.reserve(inst.size());
  for (std::size_t k = 0; k < m; ++k) {
    const auto& g = groups[k];
    const std::size_t skip_in = seg[k].from;  // emitted by the previous segment
    const std::size_t x = seg[k].x_pos;
    const std::size_t special = seg[k].special;
    std::vector<std::size_t> rest;
    for (std::size_t p = 0; p < g.members.size(); ++p) {
      if (p == skip_in || p == x || p == special) continue;
      rest.push_back(p);
    }
    if (maximize && special != kNoMember) order.push_back(g.members[special]);
    for (std::size_t p : rest) order.push_back(g.members[p]);
    if (!maximize && special != kNoMember) order.push_back(g.members[special]);
    if (borrow_of[k] != kNoMember) {
      order.push_back(groups[k + 1].members[borrow_of[k]]);
      order.push_back(g.members[x]);
    }
  }

  Ordering ordering{order};
  const std::size_t n = inst.size();
  auto v_at = [&](std::size_t p) { return inst.value_rate(order[p - 1]); };
  std::vector<S> bids(n, S(0));
  if (maximize) {
    for (std::size_t p = 2; p <= n; ++p) {
      S cap = v_at(p - 1);
      if (p >= 3 && v_at(p - 2) < cap) cap = v_at(p - 2);
      bids[order[p - 1]] = cap;
    }
    S top = v_at(1);
    if (n >= 2 && v_at(2) > top) top = v_at(2);
    bids[order[0]] = top + S(1);
  } else {
    for (std::size_t p = 1; p <= n; ++p) {
      S fl(0);
      if (p + 1 <= n) fl = v_at(p + 1);
      if (p + 2 <= n && v_at(p + 2) > fl) fl = v_at(p + 2);
      bids[order[p - 1]] = fl;
    }
  }

  // The witness must reproduce the optimum and support itself: monotone bids
  // plus both window edges at every slot. All checks are linear.
  const S tol = scalar_traits<S>::default_tolerance();
  S rev(0), ahead(0);
  for (std::size_t p = 1; p <= n; ++p) {
    rev += ahead * inst.participant(order[p - 1]).t * bids[order[p - 1]];
    ahead += inst.participant(order[p - 1]).t;
  }
  const S value = dp[m][0].value;
  if (!scalar_traits<S>::close(rev, value, tol))
    throw InternalInconsistency("revenue extreme witness does not reproduce its value");
  for (std::size_t p = 1; p <= n; ++p) {
    if (p < n && !scalar_traits<S>::leq(bids[order[p]], bids[order[p - 1]], tol))
      throw InternalInconsistency("revenue extreme witness bids are not monotone");
    if (p < n && !scalar_traits<S>::leq(bids[order[p]], v_at(p), tol))
      throw InternalInconsistency("revenue extreme witness breaks a lower window edge");
    if (p >= 2 && !scalar_traits<S>::leq(v_at(p), bids[order[p - 2]], tol))
      throw InternalInconsistency("revenue extreme witness breaks an upper window edge");
  }
  return {value, std::move(ordering), std::move(bids)};
}

// Exact level-bid extreme by sweeping every arrangement's constraint system;
// feasible per-arrangement sets are boxes in the componentwise order, so each
// contributes its extreme corner. Factorial in N: gated by the oracle cap.
template <class S>
ExtremeResult<S> level_bid_extreme(const Instance<S>& inst, bool maximize) {
  const std::size_t n = inst.size();
  const S big = detail::bid_ceiling(inst);
  std::vector<std::size_t> ord(n);
  std::iota(ord.begin(), ord.end(), std::size_t{0});
  std::optional<ExtremeResult<S>> best;
  do {
    auto cons = detail::equilibrium_constraints(Mechanism::gsp, inst, ord);
    auto corner = maximize ? detail::max_solution(n, cons, big)
                           : detail::min_solution(n, cons, big);
    if (!corner) continue;
    std::vector<S> bids(n);
    for (std::size_t p = 0; p < n; ++p) bids[ord[p]] = (*corner)[p];
    S rev = detail::revenue_on(Mechanism::gsp, inst, ord, bids);
    if (!best || (maximize ? rev > best->value : rev < best->value))
      best = ExtremeResult<S>{std::move(rev), Ordering{ord}, std::move(bids)};
  } while (std::next_permutation(ord.begin(), ord.end()));
  if (!best)
    throw InternalInconsistency(
        "no arrangement supports any level-bid equilibrium; the closed-form "
        "profile should always qualify");
  return *best;
}

}  // namespace detail

// Companion closed form sum_{i<j} t_{sigma(i)} t_{sigma(j)} v_{sigma(j)} on
// the efficient order; compare RevenueBounds::upper_printed_formula.
template <class S>
S printed_upper_formula(const Instance<S>& inst) {
  const Ordering sigma = smith_order(inst);
  S total(0), ahead(0);
  for (std::size_t p = 1; p <= inst.size(); ++p) {
    const std::size_t who = sigma.participant_at(p);
    total += ahead * inst.participant(who).t * inst.value_rate(who);
    ahead += inst.participant(who).t;
  }
  return total;
}

// Largest equilibrium revenue under rate bids, with a witness that attains
// it. Exact for every N; the closed-form profile on the efficient order is
// not always maximal (swapped arrangements can price a long, low-rate job
// ahead of a short one), so this searches the full admissible family.
template <class S>
BoundResult<S> vcg_revenue_upper(const Instance<S>& inst) {
  auto r = detail::near_sorted_extreme(inst, true);
  return {std::move(r.value),
          {std::move(r.ordering), std::move(r.bids)},
          "exact maximum over admissible arrangements (dynamic programme)"};
}

// Smallest equilibrium revenue under rate bids, same search run downhill.
template <class S>
BoundResult<S> vcg_revenue_lower_dp(const Instance<S>& inst) {
  auto r = detail::near_sorted_extreme(inst, false);
  return {std::move(r.value),
          {std::move(r.ordering), std::move(r.bids)},
          "exact minimum over admissible arrangements (dynamic programme)"};
}

// Largest equilibrium revenue under level bids. Level-bid constraint systems
// decouple across slots where rate-bid windows chain, so the level-bid
// maximum can strictly exceed the rate-bid one and can sit on arrangements
// outside the near-sorted family; no small recurrence covers it. Within the
// oracle cap this is exact by exhaustive sweep; beyond it the closed-form
// profile's revenue is returned and flagged, since its maximality is not
// certified out there.
template <class S>
BoundResult<S> gsp_revenue_upper(const Instance<S>& inst) {
  if (inst.size() <= oracle_limits().equilibria_max) {
    auto r = detail::level_bid_extreme(inst, true);
    return {std::move(r.value),
            {std::move(r.ordering), std::move(r.bids)},
            "exact maximum (exhaustive arrangement sweep)"};
  }
  auto bids = max_equilibrium_bids_gsp(inst);
  auto out = gsp_outcome(inst, bids);
  return {std::move(out.revenue),
          {smith_order(inst), std::move(bids)},
          "closed-form profile on the efficient order (maximality above the "
          "enumeration limit not certified)"};
}

template <class S>
RevenueBounds<S> revenue_bounds(const Instance<S>& inst, Mechanism kind) {
  RevenueBounds<S> out{kind,
                       S(0),
                       S(0),
                       printed_upper_formula(inst),
                       S(0),
                       std::nullopt,
                       {identity_ordering(inst.size()), {}},
                       {identity_ordering(inst.size()), {}},
                       "",
                       ""};
  const auto max_vcg = max_equilibrium_bids_vcg(inst);
  out.upper_construction = vcg_outcome(inst, max_vcg).revenue;
  if (kind == Mechanism::vcg) {
    auto up = vcg_revenue_upper(inst);
    auto lo = vcg_revenue_lower_dp(inst);
    out.lower = std::move(lo.value);
    out.upper = std::move(up.value);
    out.lower_construction =
        vcg_outcome(inst, min_equilibrium_bids_vcg(inst)).revenue;
    out.witness_lower = std::move(lo.witness);
    out.witness_upper = std::move(up.witness);
    out.lower_method = std::move(lo.method);
    out.upper_method = std::move(up.method);
    return out;
  }
  if (inst.size() > oracle_limits().equilibria_max)
    throw OracleLimitExceeded(
        "level-bid lower bound is oracle-only and supports at most " +
        std::to_string(oracle_limits().equilibria_max) + " participants");
  auto up = gsp_revenue_upper(inst);
  auto lo = detail::level_bid_extreme(inst, false);
  out.lower = std::move(lo.value);
  out.upper = std::move(up.value);
  out.witness_lower = {std::move(lo.ordering), std::move(lo.bids)};
  out.witness_upper = std::move(up.witness);
  out.lower_method = "exact minimum (exhaustive arrangement sweep)";
  out.upper_method = std::move(up.method);
  return out;
}

}  // namespace queuetion
