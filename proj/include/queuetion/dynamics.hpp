#pragma once

#include "queuetion/equilibrium.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace queuetion {

// Where inside the admissible interval a rebid lands. Midpoint avoids
// knife-edge ties; minimal_winning takes the lowest bid that still secures
// the target slot (boundary bids rely on the index tie-break, so each
// candidate is verified against the realized ranking before use).
enum class BidPlacement { midpoint, minimal_winning };

enum class Rotation { round_robin, random_order };

template <class S>
struct TraceStep {
  std::size_t mover;
  S old_bid;
  S new_bid;
  S revenue;  // organizer revenue right after the move
};

template <class S>
struct Trace {
  std::vector<TraceStep<S>> steps;
  bool converged = false;
  std::vector<S> final_bids;
  // "equilibrium": a full pass changed nothing and the profile checks out.
  // "stalled": a full pass changed nothing, yet some profitable move exists
  // whose target slot no realizable bid reaches (tied neighbours).
  // "step-limit": max_steps moves were spent first.
  std::string stop_reason;
};

struct DynamicsOptions {
  std::size_t max_steps = 100;
  Rotation rotation = Rotation::round_robin;
  std::uint64_t seed = 0;
  BidPlacement placement = BidPlacement::midpoint;
};

// Loss-minimizing rebid for one participant, everyone else's bid held fixed.
// Candidate target slots are scored with the same moved-arrangement losses
// the equilibrium check uses; a slot only counts if some concrete bid
// actually lands there under the realized ranking. Returns the current bid
// when no reachable slot strictly beats it.
template <class S>
S best_response(Mechanism kind, const Instance<S>& inst, const std::vector<S>& rates,
                const std::vector<S>& profile, std::size_t participant,
                BidPlacement placement = BidPlacement::midpoint,
                const S& tol = scalar_traits<S>::default_tolerance()) {
  if (participant >= inst.size())
    throw UnknownParticipant("participant index " + std::to_string(participant) +
                             " out of range");
  validate_bids(inst, profile);
  if (rates.size() != inst.size())
    throw BidCountMismatch("rate count does not match instance");
  const std::size_t n = inst.size();
  if (n == 1) return profile[participant];

  const Ordering ord = rank_by_bids(inst, profile);
  const std::size_t from = ord.position_of(participant);
  std::vector<std::size_t> rest;  // everyone else, ranking order preserved
  rest.reserve(n - 1);
  for (std::size_t idx : ord.order())
    if (idx != participant) rest.push_back(idx);

  std::optional<S> best_gain;
  S best_bid = profile[participant];
  std::vector<S> probe = profile;
  for (std::size_t j = 1; j <= n; ++j) {
    if (j == from) continue;
    const S gain = detail::deviation_gain(kind, inst, ord, profile, rates, from, j);
    if (!scalar_traits<S>::positive(gain, tol)) continue;
    if (best_gain && !(gain > *best_gain)) continue;

    const std::optional<S> above =
        j >= 2 ? std::optional<S>(profile[rest[j - 2]]) : std::nullopt;
    const S below = j <= n - 1 ? profile[rest[j - 1]] : S(0);
    std::vector<S> candidates;
    const S mid = above ? (*above + below) / S(2) : below + S(1);
    if (placement == BidPlacement::minimal_winning) candidates.push_back(below);
    candidates.push_back(mid);
    if (above) {
      candidates.push_back(below);
      candidates.push_back(*above);
    }
    const auto moved = detail::moved_arrangement(ord.order(), from - 1, j - 1);
    for (const S& cand : candidates) {
      probe[participant] = cand;
      if (rank_by_bids(inst, probe).order() != moved) continue;
      best_gain = gain;
      best_bid = cand;
      break;
    }
    probe[participant] = profile[participant];
  }
  return best_bid;
}

template <class S>
Trace<S> run_dynamics(Mechanism kind, const Instance<S>& inst,
                      const std::vector<S>& rates, std::vector<S> profile,
                      const DynamicsOptions& opts = {}) {
  if (opts.max_steps < 1) throw ValidationError("max_steps must be at least 1");
  validate_bids(inst, profile);
  const std::size_t n = inst.size();
  const S tol = scalar_traits<S>::default_tolerance();

  Trace<S> trace;
  std::mt19937_64 rng(opts.seed);
  std::vector<std::size_t> rota(n);
  std::iota(rota.begin(), rota.end(), std::size_t{0});

  while (trace.steps.size() < opts.max_steps) {
    if (opts.rotation == Rotation::random_order)
      std::shuffle(rota.begin(), rota.end(), rng);
    bool changed = false;
    for (std::size_t mover : rota) {
      S fresh = best_response(kind, inst, rates, profile, mover, opts.placement, tol);
      if (scalar_traits<S>::close(fresh, profile[mover], tol)) continue;
      S old = profile[mover];
      profile[mover] = fresh;
      trace.steps.push_back({mover, std::move(old), fresh,
                             mechanism_outcome(kind, inst, profile).revenue});
      changed = true;
      if (trace.steps.size() == opts.max_steps) break;
    }
    if (!changed) {
      Ordering ord = rank_by_bids(inst, profile);
      trace.converged =
          check_nash_deviation(kind, inst, ord, profile, rates, tol).equilibrium;
      trace.stop_reason = trace.converged ? "equilibrium" : "stalled";
      trace.final_bids = std::move(profile);
      return trace;
    }
  }
  trace.stop_reason = "step-limit";
  trace.final_bids = std::move(profile);
  return trace;
}

}  // namespace queuetion
