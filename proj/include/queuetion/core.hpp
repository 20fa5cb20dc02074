#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace queuetion {

// One queue participant: service time t > 0, value of time w > 0.
// The value rate v = w / t drives every ordering and equilibrium question.
template <class S>
struct Participant {
  std::string id;
  S t{};
  S w{};
};

template <class S>
class Instance {
 public:
  explicit Instance(std::vector<Participant<S>> participants)
      : participants_(std::move(participants)) {
    if (participants_.empty()) throw EmptyInstance("instance has no participants");
    for (const auto& p : participants_) {
      if (!scalar_traits<S>::finite(p.t) || !scalar_traits<S>::finite(p.w))
        throw NonFiniteParameter("participant " + p.id + ": t and w must be finite");
      if (!(p.t > S(0)))
        throw NonPositiveParameter("participant " + p.id + ": t must be > 0");
      if (!(p.w > S(0)))
        throw NonPositiveParameter("participant " + p.id + ": w must be > 0");
    }
    for (std::size_t i = 0; i < participants_.size(); ++i)
      for (std::size_t j = i + 1; j < participants_.size(); ++j)
        if (participants_[i].id == participants_[j].id)
          throw DuplicateId("duplicate participant id: " + participants_[i].id);
  }

  std::size_t size() const { return participants_.size(); }
  const Participant<S>& participant(std::size_t i) const { return participants_[i]; }
  const std::vector<Participant<S>>& participants() const { return participants_; }

  std::size_t index_of(const std::string& id) const {
    for (std::size_t i = 0; i < participants_.size(); ++i)
      if (participants_[i].id == id) return i;
    throw UnknownParticipant("unknown participant id: " + id);
  }

  S value_rate(std::size_t i) const {
    return participants_[i].w / participants_[i].t;
  }

  std::vector<S> value_rates() const {
    std::vector<S> v;
    v.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) v.push_back(value_rate(i));
    return v;
  }

 private:
  std::vector<Participant<S>> participants_;
};

// A queue arrangement. Positions are 1-based throughout the public API;
// slot p-1 of the underlying vector holds the participant index served p-th.
class Ordering {
 public:
  explicit Ordering(std::vector<std::size_t> order) : order_(std::move(order)) {
    std::vector<bool> seen(order_.size(), false);
    for (std::size_t idx : order_) {
      if (idx >= order_.size() || seen[idx])
        throw PositionOutOfRange("ordering is not a permutation of participant indices");
      seen[idx] = true;
    }
    positions_.resize(order_.size());
    for (std::size_t p = 0; p < order_.size(); ++p) positions_[order_[p]] = p + 1;
  }

  std::size_t size() const { return order_.size(); }

  std::size_t participant_at(std::size_t position) const {
    check_position(position);
    return order_[position - 1];
  }

  std::size_t position_of(std::size_t participant) const {
    if (participant >= order_.size())
      throw PositionOutOfRange("participant index out of range");
    return positions_[participant];
  }

  const std::vector<std::size_t>& order() const { return order_; }

  bool operator==(const Ordering& o) const { return order_ == o.order_; }

  void check_position(std::size_t position) const {
    if (position < 1 || position > order_.size())
      throw PositionOutOfRange("position " + std::to_string(position) +
                               " outside 1.." + std::to_string(order_.size()));
  }

 private:
  std::vector<std::size_t> order_;
  std::vector<std::size_t> positions_;
};

inline Ordering identity_ordering(std::size_t n) {
  std::vector<std::size_t> o(n);
  std::iota(o.begin(), o.end(), std::size_t{0});
  return Ordering(std::move(o));
}

// Waiting cost of the participant served at `position`: their w times the
// total service time of everyone ahead of them (own service excluded).
template <class S>
S waiting_cost(const Instance<S>& inst, const Ordering& ord, std::size_t position) {
  if (ord.size() != inst.size())
    throw BidCountMismatch("ordering size does not match instance");
  ord.check_position(position);
  S ahead(0);
  for (std::size_t p = 1; p < position; ++p) ahead += inst.participant(ord.participant_at(p)).t;
  return inst.participant(ord.participant_at(position)).w * ahead;
}

template <class S>
S total_weighted_waiting(const Instance<S>& inst, const Ordering& ord) {
  if (ord.size() != inst.size())
    throw BidCountMismatch("ordering size does not match instance");
  S total(0), elapsed(0);
  for (std::size_t p = 1; p <= ord.size(); ++p) {
    const auto& part = inst.participant(ord.participant_at(p));
    total += part.w * elapsed;
    elapsed += part.t;
  }
  return total;
}

// Cost-minimal service order: non-ascending value rate w/t, ties broken by
// ascending participant index.
template <class S>
Ordering smith_order(const Instance<S>& inst) {
  std::vector<std::size_t> order(inst.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    // compare w_a/t_a > w_b/t_b without division
    return inst.participant(a).w * inst.participant(b).t >
           inst.participant(b).w * inst.participant(a).t;
  });
  return Ordering(std::move(order));
}

}  // namespace queuetion
