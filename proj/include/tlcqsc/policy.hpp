#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tlcqsc/message.hpp"
#include "tlcqsc/splitmix64.hpp"
#include "tlcqsc/types.hpp"

namespace tlcqsc {

/// One point-to-point leg of a broadcast, as the network scheduler sees it.
/// Carries labels (step, kind, plaintext ticket when unsealed) but never the
/// message payload itself, so oblivious policies cannot read contents even by
/// accident.
struct Envelope {
  EnvelopeId eid = 0;
  MsgId msg = kNoMsg;
  NodeId sender = 0;
  NodeId recipient = 0;
  EventIndex send_event = 0;
  EventIndex deadline = kIndefinite;  // indefinite only while sender is delayed
  Step step = 0;
  MessageKind mkind = MessageKind::Raw;
  struct TicketInfo {
    Round round;
    TicketValue value;
  };
  std::optional<TicketInfo> ticket;  // set only for unsealed proposal Raws
};

using PendingMap = std::map<EnvelopeId, Envelope>;

/// Scheduler policy: commits a delivery deadline for every envelope when it
/// enters the network, and picks which pending envelope goes next (delivering
/// before the committed deadline is allowed; postponing past it is not — the
/// simulator enforces overdue deliveries itself). `last_sent_step` is the
/// network-observable progress signal: the highest step each node has labeled
/// a broadcast with.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual const char* name() const = 0;
  virtual const std::vector<NodeId>& delay_set() const { return empty_set_; }

  /// Deadline for a newly sent envelope from a non-delayed sender.
  virtual EventIndex deadline_for(const Envelope& env, EventIndex now,
                                  SplitMix64& rng) = 0;

  /// Next envelope to deliver, or nullopt for quiescence. Must return an
  /// envelope whose sender is outside the delay set whenever one is pending.
  virtual std::optional<EnvelopeId> pick(const PendingMap& pending,
                                         const std::vector<Step>& last_sent_step,
                                         EventIndex now, SplitMix64& rng) = 0;

  /// Delay-set change due at `now`, if any (checked before every pick).
  virtual std::optional<std::vector<NodeId>> delay_set_update(EventIndex /*now*/) {
    return std::nullopt;
  }

 protected:
  static const std::vector<NodeId> empty_set_;
};

/// Uniformly pseudorandom delivery order; a pure function of the seed and the
/// pending envelope ids.
class ObliviousPolicy : public Policy {
 public:
  const char* name() const override { return "oblivious"; }
  EventIndex deadline_for(const Envelope& env, EventIndex now,
                          SplitMix64& rng) override;
  std::optional<EnvelopeId> pick(const PendingMap& pending,
                                 const std::vector<Step>& last_sent_step,
                                 EventIndex now, SplitMix64& rng) override;
};

/// Indefinitely delays the current delay set's messages; otherwise oblivious.
/// The set follows a fixed schedule of (event, set) entries; envelopes of
/// senders leaving the set get immediate finite deadlines.
class DelaySetPolicy : public Policy {
 public:
  struct Entry {
    EventIndex at = 0;
    std::vector<NodeId> set;
  };

  DelaySetPolicy(std::uint32_t n, std::uint32_t f_d, std::vector<Entry> schedule);

  const char* name() const override { return "delayset"; }
  const std::vector<NodeId>& delay_set() const override { return current_; }
  EventIndex deadline_for(const Envelope& env, EventIndex now,
                          SplitMix64& rng) override;
  std::optional<EnvelopeId> pick(const PendingMap& pending,
                                 const std::vector<Step>& last_sent_step,
                                 EventIndex now, SplitMix64& rng) override;
  std::optional<std::vector<NodeId>> delay_set_update(EventIndex now) override;

  /// A rotation schedule cycling single-node delay sets, used by default when
  /// no explicit schedule is given. Empty when f_d == 0.
  static std::vector<Entry> rotation(std::uint32_t n, std::uint32_t f_d,
                                     EventIndex period, EventIndex horizon);

 private:
  std::vector<Entry> schedule_;
  std::size_t next_entry_ = 0;
  std::vector<NodeId> current_;
};

/// Reads plaintext lottery tickets and starves the best proposal of each
/// round of witnesses: its Raw envelopes are withheld until the recipient has
/// observably moved past the proposal's step, then delivered promptly so they
/// still spoil every later commit attempt. Sealed tickets are opaque to it,
/// which degenerates the policy to the oblivious pick.
class TicketAwarePolicy : public Policy {
 public:
  const char* name() const override { return "ticketaware"; }
  EventIndex deadline_for(const Envelope& env, EventIndex now,
                          SplitMix64& rng) override;
  std::optional<EnvelopeId> pick(const PendingMap& pending,
                                 const std::vector<Step>& last_sent_step,
                                 EventIndex now, SplitMix64& rng) override;

 private:
  bool held(const Envelope& env, const std::vector<Step>& last_sent_step) const;

  struct RoundIntel {
    TicketValue best = 0;
    std::set<MsgId> best_msgs;  // all argmax proposals (ties held together)
  };
  std::map<Round, RoundIntel> intel_;
};

std::unique_ptr<Policy> make_policy(const std::string& kind, std::uint32_t n,
                                    std::uint32_t f_d,
                                    std::vector<DelaySetPolicy::Entry> schedule = {});

}  // namespace tlcqsc
