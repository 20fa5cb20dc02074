#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "equilibrium.hpp"

namespace queuetion {

struct OracleLimits {
  std::size_t ordering_max;
  std::size_t equilibria_max;
};

// Hard caps on brute-force sizes. QUEUECTION_ORACLE_LIMIT replaces both caps
// for explicitly accepted long runs.
inline OracleLimits oracle_limits() {
  OracleLimits lim{8, 5};
  if (const char* env = std::getenv("QUEUECTION_ORACLE_LIMIT")) {
    std::string s(env);
    if (s.empty() || s.size() > 6 ||
        s.find_first_not_of("0123456789") != std::string::npos)
      throw ValidationError("QUEUECTION_ORACLE_LIMIT must be a small non-negative integer");
    std::size_t n = std::stoul(s);
    lim.ordering_max = n;
    lim.equilibria_max = n;
  }
  return lim;
}

// Exact minimiser of total weighted waiting over all N! orderings; ties go to
// the lexicographically first index sequence. Branch and bound: the running
// cost only grows, so a prefix already at the incumbent cannot win.
template <class S>
std::pair<Ordering, S> oracle_optimal_ordering(const Instance<S>& inst) {
  if (inst.size() > oracle_limits().ordering_max)
    throw SizeLimitExceeded("ordering search supports at most " +
                            std::to_string(oracle_limits().ordering_max) +
                            " participants");
  const std::size_t n = inst.size();
  std::vector<std::size_t> prefix, best;
  std::vector<bool> used(n, false);
  std::optional<S> best_cost;
  S elapsed(0), cost(0);

  auto recurse = [&](auto&& self) -> void {
    if (prefix.size() == n) {
      if (!best_cost || cost < *best_cost) {
        best_cost = cost;
        best = prefix;
      }
      return;
    }
    if (best_cost && !prefix.empty() && cost >= *best_cost) return;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const auto& p = inst.participant(i);
      S add = p.w * elapsed;
      used[i] = true;
      prefix.push_back(i);
      cost += add;
      elapsed += p.t;
      self(self);
      elapsed -= p.t;
      cost -= add;
      prefix.pop_back();
      used[i] = false;
    }
  };
  recurse(recurse);
  return {Ordering(best), *best_cost};
}

template <class S>
struct EquilibriumEntry {
  Ordering ordering;
  std::vector<S> bids;
  S revenue;
};

struct SearchMeta {
  std::string grid;
  std::size_t orderings_considered = 0;
  std::size_t orderings_feasible = 0;
  std::size_t profiles_tested = 0;
  std::size_t entries_kept = 0;
};

template <class S>
struct EquilibriumSet {
  std::vector<EquilibriumEntry<S>> entries;
  SearchMeta search_meta;
};

struct OracleOptions {
  unsigned grid_refinement = 1;
  // Equilibrium orderings under rate bidding can only be near-sorted, so those
  // runs may skip the rest up front. Left on for speed; turned off when
  // near-sortedness is itself the claim under test.
  bool prune_near_sorted = true;
};

namespace detail {

// x[a] <= x[b] + c over variables 0..n-1 plus an anchor node n fixed at 0.
template <class S>
struct DiffConstraint {
  std::size_t a, b;
  S c;
};

// Pointwise-max solution with the anchor at 0, every variable capped at
// `big`; nullopt when the constraints are contradictory (negative cycle).
// Bellman-Ford; sizes here are tiny and the arithmetic must stay exact.
template <class S>
std::optional<std::vector<S>> max_solution(std::size_t n,
                                           const std::vector<DiffConstraint<S>>& cons,
                                           const S& big) {
  std::vector<S> dist(n + 1, big);
  dist[n] = S(0);
  for (std::size_t round = 0; round <= n + 1; ++round) {
    bool moved = false;
    for (const auto& e : cons) {
      S cand = dist[e.b] + e.c;
      if (cand < dist[e.a]) {
        dist[e.a] = std::move(cand);
        moved = true;
      }
    }
    if (!moved) {
      dist.pop_back();
      return dist;
    }
  }
  return std::nullopt;  // still relaxing after |V| rounds
}

// Pointwise-min solution: negate variables, which reverses every constraint.
template <class S>
std::optional<std::vector<S>> min_solution(std::size_t n,
                                           const std::vector<DiffConstraint<S>>& cons,
                                           const S& big) {
  std::vector<DiffConstraint<S>> rev;
  rev.reserve(cons.size());
  for (const auto& e : cons) rev.push_back({e.b, e.a, e.c});
  auto neg = max_solution(n, rev, big);
  if (!neg) return std::nullopt;
  for (auto& x : *neg) x = -x;
  return neg;
}

// Equilibrium constraints for bids consistent with the arrangement `ord`
// (bids non-increasing along it). Variable p-1 is the bid at position p.
template <class S>
std::vector<DiffConstraint<S>> equilibrium_constraints(Mechanism kind,
                                                       const Instance<S>& inst,
                                                       const std::vector<std::size_t>& ord) {
  const std::size_t n = ord.size();
  const std::size_t anchor = n;
  std::vector<DiffConstraint<S>> cons;
  auto rate = [&](std::size_t pos) { return inst.value_rate(ord[pos - 1]); };
  auto node = [&](std::size_t pos) { return pos <= n ? pos - 1 : anchor; };
  for (std::size_t p = 1; p <= n; ++p)
    cons.push_back({anchor, p - 1, S(0)});  // bids are non-negative
  for (std::size_t p = 2; p <= n; ++p)
    cons.push_back({p - 1, p - 2, S(0)});  // non-increasing along ord
  if (kind == Mechanism::vcg) {
    for (std::size_t p = 2; p <= n; ++p)
      cons.push_back({p - 1, anchor, rate(p - 1)});  // b_p <= v_(p-1)
    for (std::size_t p = 1; p + 1 <= n; ++p)
      cons.push_back({anchor, p - 1, -rate(p + 1)});  // b_p >= v_(p+1)
  } else {
    for (std::size_t k = 1; k <= n; ++k) {
      S v = rate(k);
      S span(0);
      for (std::size_t j = k - 1; j >= 1; --j) {  // deter moves up to j
        span += inst.participant(ord[j - 1]).t;
        cons.push_back({node(k + 1), node(j), -(v * span)});
        if (j == 1) break;
      }
      span = S(0);
      for (std::size_t j = k + 1; j <= n; ++j) {  // deter moves down to j
        span += inst.participant(ord[j - 1]).t;
        cons.push_back({node(k + 1), node(j + 1), v * span});
      }
    }
  }
  return cons;
}

// Above any bid the constraint systems can force: used for coordinates with
// no upper bound at all, where only revenue-irrelevant headroom remains.
template <class S>
S bid_ceiling(const Instance<S>& inst) {
  S rates(0), times(0);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    rates += inst.value_rate(i);
    times += inst.participant(i).t;
  }
  return rates * times + S(1);
}

template <class S>
S revenue_on(Mechanism kind, const Instance<S>& inst,
             const std::vector<std::size_t>& ord, const std::vector<S>& bids) {
  S total(0);
  for (std::size_t slot = 0; slot < ord.size(); ++slot)
    total += slot_payment(kind, inst, ord, bids, slot);
  return total;
}

}  // namespace detail

// Exhaustive equilibrium search. For every candidate arrangement the set of
// supporting bid profiles is an intersection of difference constraints, so its
// componentwise min and max are themselves equilibria and revenue, linear with
// non-negative weights in the bids, is extremal exactly there. The grid fills
// the box between those two profiles: per position its endpoints, any value
// rates strictly inside, and dyadic midpoints added by grid_refinement
// (nested, so refining never loses an entry). Every sampled profile still has
// to pass the full deviation check.
//
// An entry is any pair (arrangement, bids) with bids non-increasing along the
// arrangement and no profitable single-participant move. Ties in the bids mean
// several arrangements can share a profile; each shows up as its own entry.
template <class S>
EquilibriumSet<S> enumerate_equilibria(const Instance<S>& inst, Mechanism kind,
                                       const OracleOptions& opts = {}) {
  if (inst.size() > oracle_limits().equilibria_max)
    throw SizeLimitExceeded("equilibrium enumeration supports at most " +
                            std::to_string(oracle_limits().equilibria_max) +
                            " participants");
  if (opts.grid_refinement < 1)
    throw ValidationError("grid_refinement must be at least 1");

  const std::size_t n = inst.size();
  EquilibriumSet<S> out;
  out.search_meta.grid =
      "per-position polytope endpoints + interior value rates + dyadic midpoints, "
      "refinement " + std::to_string(opts.grid_refinement);

  if (n == 1) {
    out.entries.push_back({identity_ordering(1), {S(0)}, S(0)});
    out.search_meta.orderings_considered = 1;
    out.search_meta.orderings_feasible = 1;
    out.search_meta.profiles_tested = 1;
    out.search_meta.entries_kept = 1;
    return out;
  }

  const S big = detail::bid_ceiling(inst);
  const S tol = scalar_traits<S>::default_tolerance();
  const auto rates = inst.value_rates();

  std::vector<std::size_t> ord(n);
  for (std::size_t i = 0; i < n; ++i) ord[i] = i;
  std::sort(ord.begin(), ord.end());

  do {
    ++out.search_meta.orderings_considered;
    Ordering arrangement(ord);
    if (kind == Mechanism::vcg && opts.prune_near_sorted &&
        !near_sorted_check(inst, arrangement))
      continue;

    auto cons = detail::equilibrium_constraints(kind, inst, ord);
    auto hi = detail::max_solution(n, cons, big);
    auto lo = detail::min_solution(n, cons, big);
    if (!hi || !lo) continue;
    bool feasible = true;
    for (std::size_t p = 0; p < n && feasible; ++p)
      if ((*lo)[p] > (*hi)[p]) feasible = false;
    if (!feasible) continue;
    ++out.search_meta.orderings_feasible;

    // Candidate values per position, sorted, endpoints always present.
    std::vector<std::vector<S>> cand(n);
    for (std::size_t p = 0; p < n; ++p) {
      std::vector<S>& c = cand[p];
      c.push_back((*lo)[p]);
      if ((*hi)[p] != (*lo)[p]) c.push_back((*hi)[p]);
      for (const auto& v : rates)
        if ((*lo)[p] < v && v < (*hi)[p]) c.push_back(v);
      S width = (*hi)[p] - (*lo)[p];
      std::size_t cuts = std::size_t(1) << (opts.grid_refinement - 1);
      if (width > S(0))
        for (std::size_t k = 1; k < cuts; ++k)
          c.push_back((*lo)[p] + width * S(k) / S(cuts));
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
    }

    std::vector<S> bids(inst.size());
    std::vector<S> chosen(n);
    auto fill = [&](auto&& self, std::size_t p) -> void {
      if (p == n) {
        ++out.search_meta.profiles_tested;
        for (std::size_t q = 0; q < n; ++q) bids[ord[q]] = chosen[q];
        if (check_nash_deviation(kind, inst, arrangement, bids, rates, tol).equilibrium)
          out.entries.push_back(
              {arrangement, bids, detail::revenue_on(kind, inst, ord, bids)});
        return;
      }
      for (const auto& value : cand[p]) {
        if (p > 0 && value > chosen[p - 1]) break;  // keep bids non-increasing
        chosen[p] = value;
        self(self, p + 1);
      }
    };
    fill(fill, 0);
  } while (std::next_permutation(ord.begin(), ord.end()));

  std::sort(out.entries.begin(), out.entries.end(),
            [](const EquilibriumEntry<S>& x, const EquilibriumEntry<S>& y) {
              if (x.ordering.order() != y.ordering.order())
                return x.ordering.order() < y.ordering.order();
              return x.bids < y.bids;
            });
  out.entries.erase(std::unique(out.entries.begin(), out.entries.end(),
                                [](const EquilibriumEntry<S>& x,
                                   const EquilibriumEntry<S>& y) {
                                  return x.ordering.order() == y.ordering.order() &&
                                         x.bids == y.bids;
                                }),
                    out.entries.end());
  out.search_meta.entries_kept = out.entries.size();
  return out;
}

template <class S>
EquilibriumSet<S> enumerate_equilibria(const Instance<S>& inst, Mechanism kind,
                                       unsigned grid_refinement) {
  OracleOptions opts;
  opts.grid_refinement = grid_refinement;
  return enumerate_equilibria(inst, kind, opts);
}

template <class S>
std::pair<S, S> oracle_revenue_extremes(const Instance<S>& inst, Mechanism kind,
                                        const OracleOptions& opts = {}) {
  auto set = enumerate_equilibria(inst, kind, opts);
  if (set.entries.empty())
    throw InternalInconsistency("equilibrium set is empty; truthful play should be in it");
  S lo = set.entries.front().revenue, hi = lo;
  for (const auto& e : set.entries) {
    if (e.revenue < lo) lo = e.revenue;
    if (e.revenue > hi) hi = e.revenue;
  }
  return {lo, hi};
}

}  // namespace queuetion
