#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tlcqsc/message.hpp"
#include "tlcqsc/types.hpp"

namespace tlcqsc {

enum class TraceKind : std::uint8_t {
  Config,
  Send,      // a Raw or Ack broadcast enters the network
  Cert,      // a witnessed-certificate broadcast enters the network
  Deliver,   // the network hands one envelope to its recipient
  Apply,     // a record clears holdback and is delivered causally at a node
  Advance,   // a node's logical clock moves forward
  Propose,   // a round-start Raw carried a proposal
  Resolve,   // a node finished a round and picked its best confirmed proposal
  Reveal,    // ticket values for a round, emitted after the round first ends
  Commit,    // a node decided the round committed
  Finalize,  // a node's finalized chain grew
  SdSet,     // the adversary changed its indefinite-delay set
  Halt,      // end of run
};

const char* to_string(TraceKind k);

enum class AdvanceVia : std::uint8_t { Threshold, Viral };
enum class HaltReason : std::uint8_t { Quiescent, MaxEvents };

/// One trace line. A flat struct rather than a variant: only the fields
/// meaningful for `kind` are populated, everything else stays defaulted.
struct TraceEvent {
  EventIndex e = 0;  // virtual time (deliveries so far) when this happened
  TraceKind kind = TraceKind::Halt;

  NodeId node = 0;   // acting node (sender / applier / advancer / resolver)
  NodeId from = 0;   // Deliver/Apply: original sender
  NodeId to = 0;     // Deliver/Apply: recipient
  std::uint32_t seq = 0;
  Step step = 0;
  MessageKind mkind = MessageKind::Raw;
  MsgId msg = kNoMsg;
  MsgId of = kNoMsg;
  std::vector<NodeId> ackers;
  std::vector<MsgId> basis;  // Advance: certified Raws used; Send(raw): advanced_on

  Round round = 0;
  MsgId parent = kNoMsg;             // Propose: parent reference
  std::string ticket_commitment;     // Propose
  std::vector<TicketValue> tickets;  // Reveal: per proposer id order of arrival
  std::vector<NodeId> ticket_nodes;  // Reveal: proposer ids matching `tickets`
  MsgId best = kNoMsg;               // Resolve/Commit: winning proposal's Raw
  bool committed = false;            // Resolve
  std::string block;                 // Commit/Finalize: block hash (hex)

  Step from_step = 0, to_step = 0;
  AdvanceVia via = AdvanceVia::Threshold;

  std::vector<NodeId> sd;  // SdSet: new delay set
  HaltReason reason = HaltReason::Quiescent;
  std::vector<NodeId> pending_senders;  // Halt: senders of still-pending envelopes
};

/// Echo of the run configuration, embedded as the first trace line and in
/// every experiment output for provenance.
struct TraceConfig {
  std::uint32_t n = 1;
  std::uint32_t f_d = 0;
  std::uint64_t seed = 0;
  std::string adversary = "oblivious";
  std::uint64_t max_events = 0;
  Step max_step = 0;
  std::uint32_t t_m = 1;
  std::uint32_t t_w = 0;
  bool self_ack = true;
  bool qsc = false;
  Round rounds = 0;
  bool pipeline = false;
  bool encrypt_tickets = true;
  std::string spoiler_horizon = "eval";  // "eval" | "strict"

  bool majoritarian() const { return t_m > n / 2 && t_w > n / 2; }
  std::uint32_t round_stride() const { return pipeline ? 1 : 3; }
  Step round_start(Round r) const { return r * round_stride(); }
  Step round_end(Round r) const { return round_start(r) + 3; }
  std::uint32_t lanes() const { return pipeline ? 3 : 1; }
};

struct Trace {
  TraceConfig config;
  std::vector<TraceEvent> events;
  bool truncated = false;  // event budget hit before quiescence

  void write_ndjson(std::ostream& os) const;
  std::string to_ndjson() const;
  static Trace parse_ndjson(std::istream& is);
};

std::string event_to_json(const TraceEvent& ev);
std::string config_to_json(const TraceConfig& cfg);

}  // namespace tlcqsc
