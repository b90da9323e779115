#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "tlcqsc/message.hpp"
#include "tlcqsc/types.hpp"
#include "tlcqsc/vector_clock.hpp"

namespace tlcqsc {

/// One entry of a node's append-only log: a broadcast message stamped with
/// the sender's knowledge vector at emission. Acks and Certs are records too,
/// so thresholds can be audited from logs alone.
struct LogRecord {
  MsgId id = kNoMsg;
  NodeId node = 0;
  std::uint32_t seq = 0;  // consecutive from 0 per node
  VectorClock vt;         // vt[node] == seq + 1 (covers itself)
  Message msg;
};

/// Msg ids are a pure function of (sender, sequence number) so that a record
/// keeps the same identity no matter how deliveries interleave around it.
inline MsgId msg_id_of(NodeId node, std::uint32_t seq) {
  return (static_cast<MsgId>(node) + 1) << 32 | seq;
}
inline NodeId msg_id_node(MsgId id) { return static_cast<NodeId>((id >> 32) - 1); }
inline std::uint32_t msg_id_seq(MsgId id) { return static_cast<std::uint32_t>(id); }

/// Run-global record store: every node's append-only log.
class RecordStore {
 public:
  explicit RecordStore(std::size_t n) : n_(n), logs_(n), log_hash_(n, kHashSeed) {}

  const LogRecord& add(NodeId node, std::uint32_t seq, VectorClock vt, Message msg);
  const LogRecord& by_id(MsgId id) const;
  const LogRecord* find(NodeId node, std::uint32_t seq) const;
  std::size_t size() const { return total_; }
  std::size_t nodes() const { return n_; }
  std::size_t log_len(NodeId node) const { return logs_[node].size(); }

  /// Rolling digest of one node's log contents, for state memoization.
  std::uint64_t log_hash(NodeId node) const { return log_hash_[node]; }

  /// Exactly the records r with r.vt <= vt. Throws if vt names records the
  /// store does not hold (uncovered gap).
  std::vector<const LogRecord*> history_of(const VectorClock& vt) const;

 private:
  static constexpr std::uint64_t kHashSeed = 1469598103934665603ULL;

  std::size_t n_;
  std::size_t total_ = 0;
  std::vector<std::vector<LogRecord>> logs_;
  std::vector<std::uint64_t> log_hash_;
};

/// Holdback delivery for one receiving node. Records arrive from the network
/// in arbitrary order; offer() hands them out in causal order, buffering a
/// record until everything its vector timestamp covers has been delivered.
/// Holds ids only, so buffers stay valid across copies of the owning state.
class HoldbackBuffer {
 public:
  HoldbackBuffer() = default;
  explicit HoldbackBuffer(std::size_t n) : delivered_(n, 0) {}

  /// Offer an arrived record; returns ids of the records now deliverable, in
  /// causal order. A duplicate (node,seq) with identical content is ignored;
  /// differing content cannot happen under fail-stop and is flagged as a
  /// harness bug.
  std::vector<MsgId> offer(const RecordStore& store, MsgId id);

  /// Count of records from each sender already delivered.
  const std::vector<std::uint32_t>& delivered() const { return delivered_; }
  std::uint32_t delivered_from(NodeId j) const { return delivered_[j]; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  bool deliverable(const LogRecord& rec) const;

  std::vector<std::uint32_t> delivered_;
  std::map<std::pair<NodeId, std::uint32_t>, MsgId> buffer_;
};

}  // namespace tlcqsc
