#include "tlcqsc/qsc.hpp"

#include <algorithm>
#include <stdexcept>

namespace tlcqsc {

namespace {

void put_le64(std::vector<std::uint8_t>& v, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}
void put_le32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

Digest block_hash(const Block& b) {
  std::vector<std::uint8_t> enc;
  enc.insert(enc.end(), b.parent_hash.begin(), b.parent_hash.end());
  put_le64(enc, b.genesis ? ~0ULL : b.round);
  put_le32(enc, b.genesis ? ~0U : b.proposer);
  put_le32(enc, static_cast<std::uint32_t>(b.txs.size()));
  for (TxId t : b.txs) put_le64(enc, t);
  return sha256(enc);
}

}  // namespace

Block genesis_block() {
  Block g;
  g.genesis = true;
  g.hash = block_hash(g);
  return g;
}

Block form_block(const Proposal& winning, const Block& parent,
                 const std::set<TxId>& spent) {
  Block b;
  b.round = winning.round;
  b.proposer = winning.proposer;
  b.parent_hash = parent.hash;
  for (TxId t : winning.txs) {
    if (!spent.count(t)) b.txs.push_back(t);
  }
  b.hash = block_hash(b);
  return b;
}

const Block& BlockForge::for_proposal(MsgId proposal_raw) {
  if (proposal_raw == kNoMsg) return genesis_;
  auto it = memo_.find(proposal_raw);
  if (it != memo_.end()) return it->second;

  const LogRecord& rec = store_->by_id(proposal_raw);
  if (!rec.msg.proposal) {
    throw std::logic_error("BlockForge: record carries no proposal");
  }
  const Proposal& p = *rec.msg.proposal;
  const Block& parent = for_proposal(p.parent_ref);  // memoizes ancestors first

  // Spent set: post-filter contents of every ancestor block, walked by
  // parent reference. All ancestors are in the memo after the call above.
  std::set<TxId> spent;
  for (MsgId a = p.parent_ref; a != kNoMsg;) {
    const Block& ab = memo_.at(a);
    spent.insert(ab.txs.begin(), ab.txs.end());
    a = store_->by_id(a).msg.proposal->parent_ref;
  }
  Block b = form_block(p, parent, spent);
  return memo_.emplace(proposal_raw, std::move(b)).first->second;
}

void QscNode::on_apply(const LogRecord& rec) {
  if (!cfg_.enabled) return;
  const Message& m = rec.msg;
  if (m.kind == MessageKind::Raw) {
    raws_by_step_[m.step].push_back({rec.id, rec.node, m.advanced_on});
    if (m.proposal) {
      proposals_[m.proposal->round].push_back(
          {rec.id, m.proposal->proposer, m.proposal->ticket.value,
           m.proposal->parent_ref});
    }
  } else if (m.kind == MessageKind::Cert) {
    certified_.try_emplace(m.of, m.step);
  }
}

std::optional<Proposal> QscNode::make_proposal(Step s) {
  if (!cfg_.enabled) return std::nullopt;
  auto r = cfg_.round_starting_at(s);
  if (!r) return std::nullopt;

  // Tickets are positional in the node's private stream so that a node that
  // skipped rounds still draws the same value for round r as it would have.
  if (ticket_pos_ > *r) throw std::logic_error("QscNode: duplicate proposal for round");
  while (ticket_pos_ < *r) { ticket_rng_.next(); ticket_pos_++; }
  Ticket ticket{ticket_rng_.next(), cfg_.encrypt_tickets};
  ticket_pos_++;

  Proposal p;
  p.round = *r;
  p.proposer = self_;
  p.ticket = ticket;
  p.txs = {(static_cast<TxId>(*r) << 20) | self_};
  if (*r >= cfg_.round_stride()) {
    Round parent_round = *r - cfg_.round_stride();
    const RoundOutcome* po = outcome(parent_round);
    if (po == nullptr || !po->resolved) {
      throw std::logic_error("QscNode: proposing before parent round resolved");
    }
    p.parent_ref = po->best;
  }
  return p;
}

const QscNode::PropView* QscNode::best_confirmed(Round r) const {
  auto it = proposals_.find(r);
  if (it == proposals_.end()) return nullptr;
  Step s = cfg_.round_start(r);
  const PropView* best = nullptr;
  for (const auto& p : it->second) {
    auto cit = certified_.find(p.raw_id);
    if (cit == certified_.end() || cit->second != s) continue;  // not confirmed
    if (best == nullptr || p.ticket > best->ticket ||
        (p.ticket == best->ticket && p.proposer < best->proposer)) {
      best = &p;
    }
  }
  return best;
}

void QscNode::eval(Round r, std::vector<RoundEvent>& out) {
  const Step s = cfg_.round_start(r);
  const PropView* best = best_confirmed(r);
  if (best == nullptr) {
    // Advancing to s+1 requires t_m certified step-s messages, each carrying
    // a proposal, so an empty confirmed set means the harness is broken.
    throw std::logic_error("QscNode::eval: no confirmed proposal at round end");
  }

  // Reconfirmation: some certified step-(s+1) Raw recorded best's certificate
  // in the threshold set it advanced on.
  bool reconfirmed = false;
  auto rit = raws_by_step_.find(s + 1);
  if (rit != raws_by_step_.end()) {
    for (const auto& m : rit->second) {
      auto cit = certified_.find(m.raw_id);
      if (cit == certified_.end() || cit->second != s + 1) continue;
      if (std::find(m.advanced_on.begin(), m.advanced_on.end(), best->raw_id) !=
          m.advanced_on.end()) {
        reconfirmed = true;
        break;
      }
    }
  }

  // Spoilers: any other proposal seen within the horizon, confirmed or not,
  // with a ticket at least as good.
  const auto& props = proposals_.at(r);
  std::size_t horizon = props.size();
  if (cfg_.spoiler_horizon == QscConfig::Horizon::Strict) {
    auto hit = spoiler_cutoff_.find(r);
    if (hit != spoiler_cutoff_.end()) horizon = std::min(horizon, hit->second);
  }
  bool spoiled = false;
  for (std::size_t i = 0; i < horizon; ++i) {
    if (props[i].raw_id != best->raw_id && props[i].ticket >= best->ticket) {
      spoiled = true;
      break;
    }
  }

  RoundOutcome oc;
  oc.resolved = true;
  oc.best = best->raw_id;
  oc.best_proposer = best->proposer;
  oc.best_ticket = best->ticket;
  oc.committed = cfg_.rule == QscConfig::Rule::ConfirmOnly ? true
                                                           : (reconfirmed && !spoiled);
  outcomes_[r] = oc;

  RoundEvent ev;
  ev.round = r;
  ev.outcome = oc;
  if (oc.committed) {
    // The winning proposal and all its ancestors become final, permanently.
    MsgId cur = best->raw_id;
    Round cr = r;
    while (cur != kNoMsg) {
      auto [it2, fresh] = finalized_.try_emplace(cr, cur);
      if (!fresh) break;  // older prefix already pinned (kept as first written)
      rtf_[cr] = static_cast<std::int64_t>(r) - static_cast<std::int64_t>(cr);
      ev.newly_finalized.push_back(cr);
      // Follow the parent reference of the proposal we just finalized.
      const PropView* pv = nullptr;
      for (const auto& p : proposals_.at(cr)) {
        if (p.raw_id == cur) { pv = &p; break; }
      }
      if (pv == nullptr) throw std::logic_error("QscNode: finalized unknown proposal");
      if (pv->parent_ref == kNoMsg) break;
      cur = pv->parent_ref;
      cr -= cfg_.round_stride();
    }
    std::reverse(ev.newly_finalized.begin(), ev.newly_finalized.end());
  }
  out.push_back(std::move(ev));
}

std::vector<QscNode::RoundEvent> QscNode::on_advance(Step /*from*/, Step to) {
  std::vector<RoundEvent> out;
  if (!cfg_.enabled) return out;
  // Spoiler horizons freeze before evaluations run for the same advance.
  while (next_cutoff_ < cfg_.rounds && cfg_.round_start(next_cutoff_) + 2 <= to) {
    auto it = proposals_.find(next_cutoff_);
    spoiler_cutoff_.try_emplace(next_cutoff_,
                                it == proposals_.end() ? 0 : it->second.size());
    next_cutoff_++;
  }
  while (next_eval_ < cfg_.rounds && cfg_.round_end(next_eval_) <= to) {
    eval(next_eval_, out);
    next_eval_++;
  }
  return out;
}

const RoundOutcome* QscNode::outcome(Round r) const {
  auto it = outcomes_.find(r);
  return it == outcomes_.end() ? nullptr : &it->second;
}

MsgId QscNode::finalized(Round r) const {
  auto it = finalized_.find(r);
  return it == finalized_.end() ? kNoMsg : it->second;
}

std::int64_t QscNode::rounds_to_finality(Round r) const {
  auto it = rtf_.find(r);
  return it == rtf_.end() ? -1 : it->second;
}

bool QscNode::committed(Round r) const {
  auto it = outcomes_.find(r);
  return it != outcomes_.end() && it->second.committed;
}

}  // namespace tlcqsc
