#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "tlcqsc/message.hpp"
#include "tlcqsc/record.hpp"
#include "tlcqsc/types.hpp"

namespace tlcqsc {

struct TlcConfig {
  std::uint32_t n = 1;
  std::uint32_t t_m = 1;  // distinct (witnessed) step-s messages needed to advance
  std::uint32_t t_w = 0;  // distinct acknowledgments a message needs; 0 = unwitnessed
  bool self_ack = true;   // a node's own broadcast counts as its first ack

  bool majoritarian() const { return t_m > n / 2 && t_w > n / 2; }
};

/// Threshold logical clock state machine for one node. Consumes causally
/// delivered records, stages outgoing broadcasts and advance notices; the
/// host stamps, logs and fans out the staged messages.
class TlcClock {
 public:
  struct AdvanceNotice {
    Step from = 0, to = 0;
    bool viral = false;
    std::vector<MsgId> basis;  // certified Raws used (Raw senders' ids if t_w == 0)
  };
  struct Staged {
    bool is_advance = false;  // staging order is the emission order
    Message message;
    AdvanceNotice advance;
  };

  TlcClock() = default;
  TlcClock(NodeId self, TlcConfig cfg, Step max_step)
      : self_(self), cfg_(cfg), max_step_(max_step) {}

  /// Broadcast the single initial step-0 message. Calling twice is a
  /// protocol error.
  void on_start();

  /// React to a causally delivered record (own broadcasts included).
  void on_apply(const LogRecord& rec);

  Step step() const { return step_; }
  bool done() const { return step_ >= max_step_; }
  bool started() const { return started_; }

  /// Acknowledgers collected so far for the node's own current-step message.
  const std::vector<NodeId>& own_ackers() const { return ack_tally_; }
  const std::vector<MsgId>& step_raws() const { return raw_ids_; }
  const std::vector<MsgId>& step_certs() const { return cert_ids_; }
  MsgId own_raw() const { return own_raw_; }
  bool cert_emitted() const { return cert_emitted_; }

  std::vector<Staged> take_staged() { return std::exchange(staged_, {}); }

 private:
  void stage(Message m) {
    Staged s;
    s.message = std::move(m);
    staged_.push_back(std::move(s));
  }
  void stage(AdvanceNotice a) {
    Staged s;
    s.is_advance = true;
    s.advance = std::move(a);
    staged_.push_back(std::move(s));
  }
  void reset_step_state();
  void catch_up(Step target);
  void advance_check();
  void maybe_cert();

  NodeId self_ = 0;
  TlcConfig cfg_;
  Step max_step_ = 0;
  bool started_ = false;
  Step step_ = 0;

  // Current-step tallies. Skipped and abandoned steps leave no residue; late
  // arrivals for left steps are ignored here (QSC keeps its own view).
  std::set<NodeId> raw_senders_;
  std::vector<MsgId> raw_ids_;      // step-s Raws in apply order
  std::vector<MsgId> cert_ids_;     // certified step-s Raws in apply order
  std::set<MsgId> certs_seen_;
  MsgId own_raw_ = kNoMsg;
  std::vector<NodeId> ack_tally_;   // distinct ackers of own_raw_
  bool cert_emitted_ = false;

  std::vector<Staged> staged_;
};

}  // namespace tlcqsc
