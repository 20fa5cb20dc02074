#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "core.hpp"

namespace queuetion {

enum class Mechanism { vcg, gsp };

inline std::string mechanism_name(Mechanism m) {
  return m == Mechanism::vcg ? "vcg" : "gsp";
}

// Bids are indexed by participant. VCG bids are rates (money per unit time of
// service delay caused); GSP bids are levels (money).
template <class S>
void validate_bids(const Instance<S>& inst, const std::vector<S>& bids) {
  if (bids.size() != inst.size())
    throw BidCountMismatch("expected " + std::to_string(inst.size()) + " bids, got " +
                           std::to_string(bids.size()));
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (!scalar_traits<S>::finite(bids[i]))
      throw NonFiniteParameter("bid of " + inst.participant(i).id + " must be finite");
    if (bids[i] < S(0))
      throw NonPositiveParameter("bid of " + inst.participant(i).id +
                                 " must be non-negative");
  }
}

// Non-increasing bids; equal bids resolved by ascending participant index.
template <class S>
Ordering rank_by_bids(const Instance<S>& inst, const std::vector<S>& bids) {
  validate_bids(inst, bids);
  std::vector<std::size_t> order(inst.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return bids[a] > bids[b]; });
  return Ordering(std::move(order));
}

template <class S>
struct Outcome {
  Ordering ordering;
  std::vector<S> payments;  // by participant index
  S revenue;
};

namespace detail {

// Payment charged to the participant occupying `slot` (0-based) of
// `arrangement`, given everyone's bids. Neither mechanism reads the occupant's
// own bid, so this evaluates deviation scenarios as well as honest rankings.
template <class S>
S slot_payment(Mechanism kind, const Instance<S>& inst,
               const std::vector<std::size_t>& arrangement,
               const std::vector<S>& bids, std::size_t slot) {
  if (kind == Mechanism::vcg) {
    S behind(0);
    for (std::size_t q = slot + 1; q < arrangement.size(); ++q)
      behind += inst.participant(arrangement[q]).t * bids[arrangement[q]];
    return inst.participant(arrangement[slot]).t * behind;
  }
  if (slot + 1 >= arrangement.size()) return S(0);
  return bids[arrangement[slot + 1]] * inst.participant(arrangement[slot]).t;
}

// Total loss (waiting valued at the given true rate, plus payment) of the
// participant occupying `slot`.
template <class S>
S slot_loss(Mechanism kind, const Instance<S>& inst,
            const std::vector<std::size_t>& arrangement, const std::vector<S>& bids,
            const std::vector<S>& rates, std::size_t slot) {
  S ahead(0);
  for (std::size_t q = 0; q < slot; ++q) ahead += inst.participant(arrangement[q]).t;
  const std::size_t who = arrangement[slot];
  return rates[who] * inst.participant(who).t * ahead +
         slot_payment(kind, inst, arrangement, bids, slot);
}

}  // namespace detail

template <class S>
Outcome<S> mechanism_outcome(Mechanism kind, const Instance<S>& inst,
                             const std::vector<S>& bids) {
  Ordering ord = rank_by_bids(inst, bids);
  std::vector<S> pay(inst.size(), S(0));
  S revenue(0);
  for (std::size_t p = 1; p <= inst.size(); ++p) {
    S x = detail::slot_payment(kind, inst, ord.order(), bids, p - 1);
    pay[ord.participant_at(p)] = x;
    revenue += x;
  }
  return Outcome<S>{std::move(ord), std::move(pay), std::move(revenue)};
}

template <class S>
Outcome<S> vcg_outcome(const Instance<S>& inst, const std::vector<S>& bids) {
  return mechanism_outcome(Mechanism::vcg, inst, bids);
}

template <class S>
Outcome<S> gsp_outcome(const Instance<S>& inst, const std::vector<S>& bids) {
  return mechanism_outcome(Mechanism::gsp, inst, bids);
}

// Utility = -(true-value waiting cost + payment) at the realized position.
// `rates` defaults to the instance's own value rates.
template <class S>
S induced_utility(Mechanism kind, const Instance<S>& inst, const std::vector<S>& bids,
                  std::size_t participant, const std::vector<S>& rates) {
  if (participant >= inst.size())
    throw PositionOutOfRange("participant index out of range");
  Ordering ord = rank_by_bids(inst, bids);
  return -detail::slot_loss(kind, inst, ord.order(), bids, rates,
                            ord.position_of(participant) - 1);
}

template <class S>
S induced_utility(Mechanism kind, const Instance<S>& inst, const std::vector<S>& bids,
                  std::size_t participant) {
  return induced_utility(kind, inst, bids, participant, inst.value_rates());
}

// The normal-form game a mechanism induces on an instance: bid vectors as
// actions, queue positions plus payments as outcomes.
template <class S>
struct GameDescription {
  Mechanism kind;
  Instance<S> instance;

  S utility(const std::vector<S>& bids, std::size_t participant) const {
    return induced_utility(kind, instance, bids, participant);
  }
  Outcome<S> outcome(const std::vector<S>& bids) const {
    return mechanism_outcome(kind, instance, bids);
  }
};

template <class S>
GameDescription<S> game_description(const Instance<S>& inst, Mechanism kind) {
  return GameDescription<S>{kind, inst};
}

}  // namespace queuetion
