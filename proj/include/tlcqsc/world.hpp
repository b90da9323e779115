#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tlcqsc/qsc.hpp"
#include "tlcqsc/record.hpp"
#include "tlcqsc/tlc.hpp"
#include "tlcqsc/trace.hpp"
#include "tlcqsc/types.hpp"

namespace tlcqsc {

struct WorldConfig {
  std::uint32_t n = 1;
  std::uint64_t seed = 0;
  Step max_step = 0;
  TlcConfig tlc;
  QscConfig qsc;
};

/// A broadcast that left some node and now needs fan-out to the others.
struct Outbound {
  MsgId msg = kNoMsg;
  NodeId sender = 0;
};

/// The protocol state of all n nodes plus the shared record store. Strictly
/// deterministic and policy-free: the driver (simulator or exhaustive
/// explorer) decides which network delivery happens next and calls deliver().
/// Value-copyable so the exhaustive checker can branch.
class World {
 public:
  World(const WorldConfig& cfg, Trace* trace);
  World(const World& other);
  World& operator=(const World& other);

  /// Broadcast every node's initial step-0 message (self-delivery included).
  void start();

  /// Hand record `msg` to node `to` as one network delivery at time `e`.
  void deliver(MsgId msg, NodeId to, EventIndex e);

  /// Broadcasts staged since the last call, in emission order.
  std::vector<Outbound> take_outbound() { return std::exchange(outbound_, {}); }

  const RecordStore& store() const { return store_; }
  const WorldConfig& config() const { return cfg_; }
  Step node_step(NodeId i) const { return nodes_[i].clock.step(); }
  Step last_sent_step(NodeId i) const { return nodes_[i].last_sent_step; }
  bool all_done() const;
  const QscNode& qsc(NodeId i) const { return nodes_[i].qsc; }
  const HoldbackBuffer& holdback(NodeId i) const { return nodes_[i].holdback; }
  BlockForge& forge() { return forge_; }

  /// Raw/Ack/Cert broadcasts per (node, step); indexed [node][step][kind].
  std::uint64_t sends(NodeId i, Step s, MessageKind k) const;

  /// Canonical digest of the full protocol state, for exhaustive-state
  /// memoization. Covers node states and delivered counts; pending network
  /// contents are derivable from these plus the shared store. Different salts
  /// give independently mixed digests over the same serialization.
  std::uint64_t state_fingerprint(std::uint64_t salt = 0) const;

 private:
  struct NodeState {
    TlcClock clock;
    QscNode qsc;
    HoldbackBuffer holdback;
    std::uint32_t next_seq = 0;
    Step last_sent_step = 0;
  };

  void apply(NodeId i, MsgId id, EventIndex e);
  void flush(NodeId i, EventIndex e);
  void rebind_store();

  WorldConfig cfg_;
  Trace* trace_;  // may be null (exhaustive exploration)
  RecordStore store_;
  BlockForge forge_{&store_};
  std::vector<NodeState> nodes_;
  std::vector<Outbound> outbound_;
  std::map<std::pair<NodeId, Step>, std::uint64_t> send_counts_[3];
  std::vector<std::vector<std::pair<NodeId, TicketValue>>> round_tickets_;
  std::vector<bool> round_revealed_;
};

}  // namespace tlcqsc
