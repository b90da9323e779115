#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "tlcqsc/message.hpp"
#include "tlcqsc/record.hpp"
#include "tlcqsc/sha256.hpp"
#include "tlcqsc/splitmix64.hpp"
#include "tlcqsc/types.hpp"

namespace tlcqsc {

struct QscConfig {
  bool enabled = false;
  Round rounds = 0;
  bool pipeline = false;        // a round starts on every step instead of every third
  bool encrypt_tickets = true;  // sealed tickets: hidden from the scheduler
  enum class Horizon : std::uint8_t { Eval, Strict } spoiler_horizon = Horizon::Eval;
  enum class Rule : std::uint8_t { Standard, ConfirmOnly } rule = Rule::Standard;

  std::uint32_t step_stride() const { return pipeline ? 1 : 3; }
  // With pipelining, parent linkage reaches back to the most recent round
  // already resolved at propose time, three rounds back; rounds therefore
  // form three interleaved chains (lanes).
  std::uint32_t round_stride() const { return pipeline ? 3 : 1; }
  Step round_start(Round r) const { return r * step_stride(); }
  Step round_end(Round r) const { return round_start(r) + 3; }
  std::optional<Round> round_starting_at(Step s) const {
    if (s % step_stride() != 0) return std::nullopt;
    Round r = s / step_stride();
    if (r >= rounds) return std::nullopt;
    return r;
  }
  Step last_step() const {
    return rounds == 0 ? 0 : round_end(rounds - 1);
  }
};

/// Fully formed block: proposal content plus hash linkage. round -1 (stored
/// as genesis flag) is the shared genesis block.
struct Block {
  bool genesis = false;
  Round round = 0;
  NodeId proposer = 0;
  Digest parent_hash{};
  std::vector<TxId> txs;
  Digest hash{};
};

Block genesis_block();

/// Deterministic block formation: same (winning proposal, parent block) gives
/// a bit-identical block on every node. Transactions whose id already appears
/// in the ancestor chain are dropped without penalty; `spent` must hold the
/// ancestor tx set.
Block form_block(const Proposal& winning, const Block& parent,
                 const std::set<TxId>& spent);

/// Memoized materialization of the block a proposal denotes, following
/// parent references back to genesis. Shared per run; pure given the store.
class BlockForge {
 public:
  explicit BlockForge(const RecordStore* store) : store_(store) {}
  const Block& genesis() const { return genesis_; }
  const Block& for_proposal(MsgId proposal_raw);

 private:
  const RecordStore* store_;
  Block genesis_ = genesis_block();
  std::map<MsgId, Block> memo_;
};

/// Per-node, per-round consensus view, evaluated when the node reaches the
/// round's end step.
struct RoundOutcome {
  bool resolved = false;
  MsgId best = kNoMsg;  // Raw carrying the best confirmed proposal
  NodeId best_proposer = 0;
  TicketValue best_ticket = 0;
  bool committed = false;
};

/// Per-node QSC engine. Watches the node's causally delivered records, draws
/// tickets, decorates round-start Raws with proposals, and evaluates the
/// commit rule at each round end.
class QscNode {
 public:
  struct PropView {
    MsgId raw_id = kNoMsg;
    NodeId proposer = 0;
    TicketValue ticket = 0;
    MsgId parent_ref = kNoMsg;
  };
  struct RoundEvent {
    Round round = 0;
    RoundOutcome outcome;
    std::vector<Round> newly_finalized;  // rounds pinned by this commit, ascending
  };

  QscNode() = default;
  QscNode(NodeId self, QscConfig cfg, std::uint64_t run_seed)
      : self_(self), cfg_(cfg),
        ticket_rng_(substream(run_seed, kStreamTicketBase + self)) {}

  void on_apply(const LogRecord& rec);

  /// Round evaluations triggered by an advance from `from` to `to`; results
  /// are returned in round order for the host to log.
  std::vector<RoundEvent> on_advance(Step from, Step to);

  /// Proposal payload for a Raw at step `s`, if a round starts there.
  std::optional<Proposal> make_proposal(Step s);

  const RoundOutcome* outcome(Round r) const;
  /// Raw id of the proposal finalized for round r, if any.
  MsgId finalized(Round r) const;
  /// Rounds-to-finality for round r (first committing round minus r), -1 if
  /// the run ended before this node finalized r.
  std::int64_t rounds_to_finality(Round r) const;
  bool committed(Round r) const;

  const QscConfig& config() const { return cfg_; }

 private:
  void eval(Round r, std::vector<RoundEvent>& out);
  const PropView* best_confirmed(Round r) const;

  NodeId self_ = 0;
  QscConfig cfg_;
  SplitMix64 ticket_rng_{0};
  Round ticket_pos_ = 0;

  struct RawView {
    MsgId raw_id;
    NodeId sender;
    std::vector<MsgId> advanced_on;
  };
  std::map<Round, std::vector<PropView>> proposals_;  // apply order per round
  std::unordered_map<MsgId, Step> certified_;         // Raw id -> cert step
  std::map<Step, std::vector<RawView>> raws_by_step_;
  std::map<Round, std::size_t> spoiler_cutoff_;  // proposals_ size at s+2 crossing
  Round next_cutoff_ = 0;

  Round next_eval_ = 0;
  std::map<Round, RoundOutcome> outcomes_;
  std::map<Round, MsgId> finalized_;
  std::map<Round, std::int64_t> rtf_;
};

}  // namespace tlcqsc
