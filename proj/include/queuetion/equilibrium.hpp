#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mechanisms.hpp"

namespace queuetion {

template <class S>
struct Violation {
  std::size_t participant;   // participant index
  std::size_t from_position;  // 1-based position occupied before deviating
  std::size_t target_position;
  S gain;  // loss reduction achieved by the move; > 0 breaks equilibrium
};

template <class S>
struct DeviationReport {
  bool equilibrium;
  std::vector<Violation<S>> violations;
};

enum class WindowSide { lower, upper };

template <class S>
struct WindowFailure {
  std::size_t position;  // the window's own position k
  WindowSide side;
  S lhs;
  S rhs;
};

template <class S>
struct WindowReport {
  bool satisfied;
  std::vector<WindowFailure<S>> failures;
};

namespace detail {

// Queue after the occupant of slot `from` rebids to sit at slot `to`
// (0-based); everyone in between shifts by one.
inline std::vector<std::size_t> moved_arrangement(const std::vector<std::size_t>& order,
                                                  std::size_t from, std::size_t to) {
  std::vector<std::size_t> arr = order;
  std::size_t who = arr[from];
  arr.erase(arr.begin() + from);
  arr.insert(arr.begin() + to, who);
  return arr;
}

template <class S>
S deviation_gain(Mechanism kind, const Instance<S>& inst, const Ordering& ord,
                 const std::vector<S>& bids, const std::vector<S>& rates,
                 std::size_t k, std::size_t j) {
  ord.check_position(k);
  ord.check_position(j);
  S current = slot_loss(kind, inst, ord.order(), bids, rates, k - 1);
  S deviated = slot_loss(kind, inst, moved_arrangement(ord.order(), k - 1, j - 1),
                         bids, rates, j - 1);
  return current - deviated;
}

}  // namespace detail

// Gain for the participant at position k of the realized ranking from rebidding
// to occupy position j, everyone else's bid held fixed.
template <class S>
S vcg_deviation_gain(const Instance<S>& inst, const std::vector<S>& bids,
                     std::size_t k, std::size_t j) {
  return detail::deviation_gain(Mechanism::vcg, inst, rank_by_bids(inst, bids), bids,
                                inst.value_rates(), k, j);
}

template <class S>
S gsp_deviation_gain(const Instance<S>& inst, const std::vector<S>& bids,
                     std::size_t k, std::size_t j) {
  return detail::deviation_gain(Mechanism::gsp, inst, rank_by_bids(inst, bids), bids,
                                inst.value_rates(), k, j);
}

// Full deviation enumeration against an explicit arrangement. This is the
// semantic definition of equilibrium; the window checks below must agree with
// it and the tests hold them to that.
template <class S>
DeviationReport<S> check_nash_deviation(Mechanism kind, const Instance<S>& inst,
                                        const Ordering& ord, const std::vector<S>& bids,
                                        const std::vector<S>& rates, const S& tol) {
  DeviationReport<S> rep{true, {}};
  for (std::size_t k = 1; k <= ord.size(); ++k)
    for (std::size_t j = 1; j <= ord.size(); ++j) {
      if (j == k) continue;
      S gain = detail::deviation_gain(kind, inst, ord, bids, rates, k, j);
      if (scalar_traits<S>::positive(gain, tol)) {
        rep.equilibrium = false;
        rep.violations.push_back({ord.participant_at(k), k, j, std::move(gain)});
      }
    }
  return rep;
}

template <class S>
DeviationReport<S> is_nash_vcg(const Instance<S>& inst, const std::vector<S>& bids,
                               const S& tol = scalar_traits<S>::default_tolerance()) {
  return check_nash_deviation(Mechanism::vcg, inst, rank_by_bids(inst, bids), bids,
                              inst.value_rates(), tol);
}

template <class S>
DeviationReport<S> is_nash_gsp(const Instance<S>& inst, const std::vector<S>& bids,
                               const S& tol = scalar_traits<S>::default_tolerance()) {
  return check_nash_deviation(Mechanism::gsp, inst, rank_by_bids(inst, bids), bids,
                              inst.value_rates(), tol);
}

// Closed-form equilibrium test for rate bids: under the realized ranking every
// value rate must sit between the neighbouring bids,
//   b at position k+1  <=  v at position k  <=  b at position k-1.
// Sufficiency rests on the ranking being bid-sorted, which makes any longer
// move a weighted average of these adjacent comparisons.
template <class S>
WindowReport<S> vcg_window_check(const Instance<S>& inst, const std::vector<S>& bids,
                                 const S& tol = scalar_traits<S>::default_tolerance()) {
  Ordering ord = rank_by_bids(inst, bids);
  const std::size_t n = ord.size();
  WindowReport<S> rep{true, {}};
  for (std::size_t k = 1; k <= n; ++k) {
    S v = inst.value_rate(ord.participant_at(k));
    if (k + 1 <= n) {
      S below = bids[ord.participant_at(k + 1)];
      if (!scalar_traits<S>::leq(below, v, tol)) {
        rep.satisfied = false;
        rep.failures.push_back({k, WindowSide::lower, below, v});
      }
    }
    if (k >= 2) {
      S above = bids[ord.participant_at(k - 1)];
      if (!scalar_traits<S>::leq(v, above, tol)) {
        rep.satisfied = false;
        rep.failures.push_back({k, WindowSide::upper, v, above});
      }
    }
  }
  return rep;
}

// Closed-form equilibrium test for level bids; pairwise conditions, one per
// (occupant k, target j):
//   j < k:  B_(j) - B_(k+1)  >=  v_(k) * (t_j + ... + t_(k-1))
//   j > k:  B_(k+1) - B_(j+1)  <=  v_(k) * (t_(k+1) + ... + t_j)
// with B past the last position read as 0.
template <class S>
WindowReport<S> gsp_window_check(const Instance<S>& inst, const std::vector<S>& bids,
                                 const S& tol = scalar_traits<S>::default_tolerance()) {
  Ordering ord = rank_by_bids(inst, bids);
  const std::size_t n = ord.size();
  auto bid_at = [&](std::size_t pos) {  // level bid by position, 0 past the end
    return pos <= n ? bids[ord.participant_at(pos)] : S(0);
  };
  WindowReport<S> rep{true, {}};
  for (std::size_t k = 1; k <= n; ++k) {
    S v = inst.value_rate(ord.participant_at(k));
    S span(0);  // t_j + ... + t_(k-1), built down from j = k-1
    for (std::size_t j = k - 1; j >= 1; --j) {
      span += inst.participant(ord.participant_at(j)).t;
      S lhs = bid_at(j) - bid_at(k + 1);
      if (!scalar_traits<S>::leq(v * span, lhs, tol)) {
        rep.satisfied = false;
        rep.failures.push_back({k, WindowSide::upper, lhs, v * span});
      }
      if (j == 1) break;
    }
    span = S(0);  // t_(k+1) + ... + t_j going down from j = k+1
    for (std::size_t j = k + 1; j <= n; ++j) {
      span += inst.participant(ord.participant_at(j)).t;
      S lhs = bid_at(k + 1) - bid_at(j + 1);
      if (!scalar_traits<S>::leq(lhs, v * span, tol)) {
        rep.satisfied = false;
        rep.failures.push_back({k, WindowSide::lower, lhs, v * span});
      }
    }
  }
  return rep;
}

// Revenue-maximal equilibrium rate bids on the cost-minimal order: each bid
// sits at the top of its window, b at position k = v at position k-1, with a
// free bid above everything at the front.
template <class S>
std::vector<S> max_equilibrium_bids_vcg(const Instance<S>& inst) {
  Ordering ord = smith_order(inst);
  std::vector<S> bids(inst.size());
  bids[ord.participant_at(1)] = inst.value_rate(ord.participant_at(1)) + S(1);
  for (std::size_t k = 2; k <= inst.size(); ++k)
    bids[ord.participant_at(k)] = inst.value_rate(ord.participant_at(k - 1));
  return bids;
}

// Revenue-minimal equilibrium rate bids on the cost-minimal order: each bid at
// the bottom of its window, b at position k = v at position k+1, last bid 0.
template <class S>
std::vector<S> min_equilibrium_bids_vcg(const Instance<S>& inst) {
  Ordering ord = smith_order(inst);
  std::vector<S> bids(inst.size());
  for (std::size_t k = 1; k + 1 <= inst.size(); ++k)
    bids[ord.participant_at(k)] = inst.value_rate(ord.participant_at(k + 1));
  bids[ord.participant_at(inst.size())] = S(0);
  return bids;
}

// Revenue-maximal equilibrium level bids on the cost-minimal order: adjacent
// move-down caps telescoped at equality,
//   B at position p = sum over i >= p of v_(i-1) * t_i   (p >= 2).
// The front bid is never paid along this order, so it is free to be as large
// as needed; it must deter every move into position 1, not just the adjacent
// one, since the pairwise conditions do not follow from the adjacent ones.
template <class S>
std::vector<S> max_equilibrium_bids_gsp(const Instance<S>& inst) {
  Ordering ord = smith_order(inst);
  const std::size_t n = inst.size();
  std::vector<S> bids(n);
  S acc(0);
  for (std::size_t p = n; p >= 2; --p) {
    acc += inst.value_rate(ord.participant_at(p - 1)) *
           inst.participant(ord.participant_at(p)).t;
    bids[ord.participant_at(p)] = acc;
  }
  S top = (n >= 2 ? bids[ord.participant_at(2)] : S(0)) + S(1);
  S ahead(0);  // t_1 + ... + t_(k-1)
  for (std::size_t k = 2; k <= n; ++k) {
    ahead += inst.participant(ord.participant_at(k - 1)).t;
    S deter = inst.value_rate(ord.participant_at(k)) * ahead +
              (k + 1 <= n ? bids[ord.participant_at(k + 1)] : S(0));
    if (deter > top) top = deter;
  }
  bids[ord.participant_at(1)] = top;
  return bids;
}

// Equilibrium orderings can differ from the value-sorted one only by adjacent
// flips: v at position i must still dominate everything two or more slots
// later.
template <class S>
bool near_sorted_check(const Instance<S>& inst, const Ordering& ord) {
  if (ord.size() != inst.size())
    throw BidCountMismatch("ordering size does not match instance");
  if (ord.size() < 3) return true;
  S suffix_max = inst.value_rate(ord.participant_at(ord.size()));
  for (std::size_t i = ord.size() - 2; i >= 1; --i) {
    if (inst.value_rate(ord.participant_at(i)) < suffix_max) return false;
    S next = inst.value_rate(ord.participant_at(i + 1));
    if (next > suffix_max) suffix_max = next;
    if (i == 1) break;
  }
  return true;
}

}  // namespace queuetion
