#include "tlcqsc/policy.hpp"

#include <algorithm>
#include <stdexcept>

namespace tlcqsc {

const std::vector<NodeId> Policy::empty_set_{};

namespace {

constexpr EventIndex kDeadlineWindow = 1 << 16;
constexpr EventIndex kReleaseWindow = 16;

std::optional<EnvelopeId> uniform_pick(const PendingMap& pending, SplitMix64& rng) {
  std::vector<EnvelopeId> eligible;
  eligible.reserve(pending.size());
  for (const auto& [eid, env] : pending) {
    if (env.deadline != kIndefinite) eligible.push_back(eid);
  }
  if (eligible.empty()) return std::nullopt;
  return eligible[rng.next_below(eligible.size())];
}

}  // namespace

EventIndex ObliviousPolicy::deadline_for(const Envelope&, EventIndex now,
                                         SplitMix64& rng) {
  return now + 1 + rng.next_below(kDeadlineWindow);
}

std::optional<EnvelopeId> ObliviousPolicy::pick(const PendingMap& pending,
                                                const std::vector<Step>&,
                                                EventIndex, SplitMix64& rng) {
  return uniform_pick(pending, rng);
}

DelaySetPolicy::DelaySetPolicy(std::uint32_t n, std::uint32_t f_d,
                               std::vector<Entry> schedule)
    : schedule_(std::move(schedule)) {
  for (const auto& e : schedule_) {
    if (e.set.size() > f_d) {
      throw std::invalid_argument("DelaySetPolicy: delay set larger than f_d");
    }
    for (NodeId i : e.set) {
      if (i >= n) throw std::invalid_argument("DelaySetPolicy: bad node id in set");
    }
  }
}

std::vector<DelaySetPolicy::Entry> DelaySetPolicy::rotation(std::uint32_t n,
                                                            std::uint32_t f_d,
                                                            EventIndex period,
                                                            EventIndex horizon) {
  std::vector<Entry> out;
  if (f_d == 0 || n < 2) return out;
  NodeId k = 0;
  for (EventIndex at = 0; at <= horizon; at += period) {
    out.push_back({at, {k}});
    k = (k + 1) % n;
  }
  return out;
}

EventIndex DelaySetPolicy::deadline_for(const Envelope&, EventIndex now,
                                        SplitMix64& rng) {
  return now + 1 + rng.next_below(kDeadlineWindow);
}

std::optional<std::vector<NodeId>> DelaySetPolicy::delay_set_update(EventIndex now) {
  std::optional<std::vector<NodeId>> change;
  while (next_entry_ < schedule_.size() && schedule_[next_entry_].at <= now) {
    change = schedule_[next_entry_].set;
    next_entry_++;
  }
  if (change) current_ = *change;
  return change;
}

std::optional<EnvelopeId> DelaySetPolicy::pick(const PendingMap& pending,
                                               const std::vector<Step>&, EventIndex,
                                               SplitMix64& rng) {
  // Indefinite envelopes are never elected; quiescence is legal when nothing
  // else is pending.
  return uniform_pick(pending, rng);
}

bool TicketAwarePolicy::held(const Envelope& env,
                             const std::vector<Step>& last_sent_step) const {
  if (!env.ticket) return false;
  auto it = intel_.find(env.ticket->round);
  if (it == intel_.end() || !it->second.best_msgs.count(env.msg)) return false;
  // Withhold until the recipient has observably moved past the proposal's
  // step; after that it arrives too late to be witnessed but still spoils.
  return last_sent_step[env.recipient] <= env.step;
}

EventIndex TicketAwarePolicy::deadline_for(const Envelope& env, EventIndex now,
                                           SplitMix64& rng) {
  bool target = false;
  if (env.ticket) {
    RoundIntel& ri = intel_[env.ticket->round];
    if (ri.best_msgs.empty() || env.ticket->value > ri.best) {
      ri.best = env.ticket->value;
      ri.best_msgs = {env.msg};
    } else if (env.ticket->value == ri.best) {
      ri.best_msgs.insert(env.msg);
    }
    target = ri.best_msgs.count(env.msg) > 0;
  }
  // Withheld targets get a far deadline so the commitment never forces them
  // out while the hold is still active; everything else uses the normal
  // window. One draw either way keeps the stream aligned with the sealed run.
  EventIndex jitter = rng.next_below(kDeadlineWindow);
  return now + 1 + (target ? (EventIndex{1} << 20) : 0) + jitter;
}

std::optional<EnvelopeId> TicketAwarePolicy::pick(
    const PendingMap& pending, const std::vector<Step>& last_sent_step,
    EventIndex, SplitMix64& rng) {
  // Priority: (1) a withheld envelope whose hold has expired, so it lands as
  // a spoiler well before the round is evaluated; (2) uniform among the rest;
  // (3) an actively held envelope if nothing else remains (cornered).
  std::vector<EnvelopeId> released, normal, active;
  for (const auto& [eid, env] : pending) {
    if (env.deadline == kIndefinite) continue;
    if (!env.ticket || !held(env, last_sent_step)) {
      bool target = false;
      if (env.ticket) {
        auto it = intel_.find(env.ticket->round);
        target = it != intel_.end() && it->second.best_msgs.count(env.msg) > 0;
      }
      (target ? released : normal).push_back(eid);
    } else {
      active.push_back(eid);
    }
  }
  if (!released.empty()) return *std::min_element(released.begin(), released.end());
  if (!normal.empty()) return normal[rng.next_below(normal.size())];
  if (!active.empty()) return *std::min_element(active.begin(), active.end());
  return std::nullopt;
}

std::unique_ptr<Policy> make_policy(const std::string& kind, std::uint32_t n,
                                    std::uint32_t f_d,
                                    std::vector<DelaySetPolicy::Entry> schedule) {
  if (kind == "oblivious") return std::make_unique<ObliviousPolicy>();
  if (kind == "delayset") {
    return std::make_unique<DelaySetPolicy>(n, f_d, std::move(schedule));
  }
  if (kind == "ticketaware") return std::make_unique<TicketAwarePolicy>();
  throw std::invalid_argument("unknown adversary kind: " + kind);
}

}  // namespace tlcqsc
