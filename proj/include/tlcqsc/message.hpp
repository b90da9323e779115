#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tlcqsc/types.hpp"

namespace tlcqsc {

enum class MessageKind : std::uint8_t { Raw, Ack, Cert };

const char* to_string(MessageKind k);

/// Per-proposal lottery ticket. When sealed, the value is hidden from the
/// network scheduler until the round has ended.
struct Ticket {
  TicketValue value = 0;
  bool sealed = true;

  /// The value read as a fraction in [0,1), for reporting.
  double as_fraction() const {
    return static_cast<double>(value) / 18446744073709551616.0;  // 2^64
  }
};

/// Consensus payload riding on a round-start Raw. Carries content only; the
/// complete block (hash links included) is formed deterministically when the
/// round resolves. parent_ref names the Raw of the proposal this one builds
/// on (kNoMsg = the shared genesis block).
struct Proposal {
  Round round = 0;
  NodeId proposer = 0;
  Ticket ticket;
  std::vector<TxId> txs;
  MsgId parent_ref = kNoMsg;
};

/// One protocol broadcast. Raw messages open a step; Acks witness a Raw;
/// Certs assert that a Raw collected a witness threshold of acks.
struct Message {
  MessageKind kind = MessageKind::Raw;
  Step step = 0;
  MsgId of = kNoMsg;                  // Ack/Cert: the Raw being referenced
  std::vector<NodeId> ackers;         // Cert: who acknowledged (issuer included)
  std::vector<MsgId> advanced_on;     // Raw: certified Raws used to reach this step
  std::optional<Proposal> proposal;   // Raw at a round-start step
};

}  // namespace tlcqsc
