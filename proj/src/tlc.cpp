#include "tlcqsc/tlc.hpp"

#include <algorithm>
#include <stdexcept>

namespace tlcqsc {

void TlcClock::on_start() {
  if (started_) throw std::logic_error("TlcClock::on_start called twice");
  started_ = true;
  Message m;
  m.kind = MessageKind::Raw;
  m.step = 0;
  stage(std::move(m));
}

void TlcClock::reset_step_state() {
  raw_senders_.clear();
  raw_ids_.clear();
  cert_ids_.clear();
  certs_seen_.clear();
  own_raw_ = kNoMsg;
  ack_tally_.clear();
  cert_emitted_ = false;
}

void TlcClock::catch_up(Step target) {
  if (target <= step_) return;
  if (target > max_step_) {
    throw std::logic_error("TlcClock::catch_up: target beyond final step");
  }
  AdvanceNotice note{step_, target, /*viral=*/true, {}};
  reset_step_state();
  step_ = target;
  stage(std::move(note));
  Message m;
  m.kind = MessageKind::Raw;
  m.step = step_;
  stage(std::move(m));  // skipped steps get no Raw from this node
}

void TlcClock::maybe_cert() {
  if (cert_emitted_ || own_raw_ == kNoMsg) return;
  if (ack_tally_.size() < cfg_.t_w) return;
  cert_emitted_ = true;
  Message m;
  m.kind = MessageKind::Cert;
  m.step = step_;
  m.of = own_raw_;
  m.ackers = ack_tally_;
  stage(std::move(m));
}

void TlcClock::advance_check() {
  if (done()) return;
  const auto& pool = cfg_.t_w > 0 ? cert_ids_ : raw_ids_;
  if (pool.size() < cfg_.t_m) return;
  AdvanceNotice note{step_, step_ + 1, /*viral=*/false,
                     {pool.begin(), pool.begin() + cfg_.t_m}};
  // Advancing abandons witnessing of the node's own step-s message.
  reset_step_state();
  step_ += 1;
  std::vector<MsgId> basis = note.basis;
  stage(std::move(note));
  Message m;
  m.kind = MessageKind::Raw;
  m.step = step_;
  m.advanced_on = std::move(basis);
  stage(std::move(m));
}

void TlcClock::on_apply(const LogRecord& rec) {
  const Message& m = rec.msg;
  switch (m.kind) {
    case MessageKind::Raw: {
      if (m.step > step_) catch_up(m.step);
      if (m.step != step_ || done()) break;  // too late: no ack, sender catches
                                             // up through causal delivery
      if (!raw_senders_.insert(rec.node).second) break;
      raw_ids_.push_back(rec.id);
      if (rec.node == self_) {
        own_raw_ = rec.id;
        if (cfg_.self_ack) ack_tally_.push_back(self_);
        if (cfg_.t_w > 0) maybe_cert();
      } else if (cfg_.t_w > 0) {
        Message ack;
        ack.kind = MessageKind::Ack;
        ack.step = step_;
        ack.of = rec.id;
        stage(std::move(ack));
      }
      if (cfg_.t_w == 0) advance_check();
      break;
    }
    case MessageKind::Ack: {
      if (m.step != step_ || done() || cert_emitted_) break;
      if (own_raw_ == kNoMsg || m.of != own_raw_) break;
      if (std::find(ack_tally_.begin(), ack_tally_.end(), rec.node) !=
          ack_tally_.end()) {
        break;
      }
      ack_tally_.push_back(rec.node);
      maybe_cert();
      break;
    }
    case MessageKind::Cert: {
      if (m.step > step_) catch_up(m.step);
      if (m.step != step_ || done()) break;  // late certs never reopen a step
      if (!certs_seen_.insert(m.of).second) break;
      cert_ids_.push_back(m.of);
      advance_check();
      break;
    }
  }
}

}  // namespace tlcqsc
