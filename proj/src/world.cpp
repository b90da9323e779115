#include "tlcqsc/world.hpp"

#include <algorithm>
#include <stdexcept>

namespace tlcqsc {

World::World(const WorldConfig& cfg, Trace* trace)
    : cfg_(cfg), trace_(trace), store_(cfg.n) {
  if (cfg.n == 0) throw std::invalid_argument("World: n must be >= 1");
  if (cfg.tlc.t_m < 1 || cfg.tlc.t_m > cfg.n || cfg.tlc.t_w > cfg.n) {
    throw std::invalid_argument("World: thresholds out of range");
  }
  if (cfg.qsc.enabled && !(cfg.tlc.majoritarian())) {
    throw std::invalid_argument("World: consensus requires majority thresholds");
  }
  nodes_.reserve(cfg.n);
  for (NodeId i = 0; i < cfg.n; ++i) {
    NodeState ns;
    ns.clock = TlcClock(i, cfg.tlc, cfg.max_step);
    ns.qsc = QscNode(i, cfg.qsc, cfg.seed);
    ns.holdback = HoldbackBuffer(cfg.n);
    nodes_.push_back(std::move(ns));
  }
  round_tickets_.resize(cfg.qsc.rounds);
  round_revealed_.resize(cfg.qsc.rounds, false);
}

World::World(const World& other)
    : cfg_(other.cfg_), trace_(other.trace_), store_(other.store_),
      forge_(other.forge_), nodes_(other.nodes_), outbound_(other.outbound_),
      round_tickets_(other.round_tickets_), round_revealed_(other.round_revealed_) {
  for (int k = 0; k < 3; ++k) send_counts_[k] = other.send_counts_[k];
  rebind_store();
}

World& World::operator=(const World& other) {
  if (this == &other) return *this;
  cfg_ = other.cfg_;
  trace_ = other.trace_;
  store_ = other.store_;
  forge_ = other.forge_;
  nodes_ = other.nodes_;
  outbound_ = other.outbound_;
  round_tickets_ = other.round_tickets_;
  round_revealed_ = other.round_revealed_;
  for (int k = 0; k < 3; ++k) send_counts_[k] = other.send_counts_[k];
  rebind_store();
  return *this;
}

void World::rebind_store() { forge_ = BlockForge(&store_); }

void World::start() {
  for (NodeId i = 0; i < cfg_.n; ++i) {
    nodes_[i].clock.on_start();
    flush(i, 0);
  }
}

bool World::all_done() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [](const NodeState& ns) { return ns.clock.done(); });
}

std::uint64_t World::sends(NodeId i, Step s, MessageKind k) const {
  const auto& m = send_counts_[static_cast<int>(k)];
  auto it = m.find({i, s});
  return it == m.end() ? 0 : it->second;
}

void World::deliver(MsgId msg, NodeId to, EventIndex e) {
  if (trace_) {
    TraceEvent ev;
    ev.e = e;
    ev.kind = TraceKind::Deliver;
    ev.msg = msg;
    ev.from = store_.by_id(msg).node;
    ev.to = to;
    trace_->events.push_back(std::move(ev));
  }
  apply(to, msg, e);
  flush(to, e);
}

void World::apply(NodeId i, MsgId id, EventIndex e) {
  auto ready = nodes_[i].holdback.offer(store_, id);
  for (MsgId rid : ready) {
    const LogRecord& rec = store_.by_id(rid);
    if (trace_) {
      TraceEvent ev;
      ev.e = e;
      ev.kind = TraceKind::Apply;
      ev.to = i;
      ev.from = rec.node;
      ev.seq = rec.seq;
      ev.step = rec.msg.step;
      ev.mkind = rec.msg.kind;
      ev.msg = rec.id;
      trace_->events.push_back(std::move(ev));
    }
    nodes_[i].clock.on_apply(rec);
    nodes_[i].qsc.on_apply(rec);
  }
}

void World::flush(NodeId i, EventIndex e) {
  NodeState& ns = nodes_[i];
  while (true) {
    auto staged = ns.clock.take_staged();
    if (staged.empty()) break;
    for (auto& item : staged) {
      if (item.is_advance) {
        const auto& a = item.advance;
        if (trace_) {
          TraceEvent ev;
          ev.e = e;
          ev.kind = TraceKind::Advance;
          ev.node = i;
          ev.from_step = a.from;
          ev.to_step = a.to;
          ev.via = a.viral ? AdvanceVia::Viral : AdvanceVia::Threshold;
          ev.basis = a.basis;
          trace_->events.push_back(std::move(ev));
        }
        auto revents = ns.qsc.on_advance(a.from, a.to);
        for (const auto& rev : revents) {
          if (trace_) {
            TraceEvent ev;
            ev.e = e;
            ev.kind = TraceKind::Resolve;
            ev.round = rev.round;
            ev.node = i;
            ev.best = rev.outcome.best;
            ev.committed = rev.outcome.committed;
            trace_->events.push_back(std::move(ev));
            if (!round_revealed_[rev.round]) {
              round_revealed_[rev.round] = true;
              TraceEvent rv;
              rv.e = e;
              rv.kind = TraceKind::Reveal;
              rv.round = rev.round;
              for (const auto& [node, val] : round_tickets_[rev.round]) {
                rv.ticket_nodes.push_back(node);
                rv.tickets.push_back(val);
              }
              trace_->events.push_back(std::move(rv));
            }
            if (rev.outcome.committed) {
              const Block& blk = forge_.for_proposal(rev.outcome.best);
              TraceEvent cm;
              cm.e = e;
              cm.kind = TraceKind::Commit;
              cm.round = rev.round;
              cm.node = i;
              cm.best = rev.outcome.best;
              cm.block = hex(blk.hash);
              trace_->events.push_back(std::move(cm));
              TraceEvent fz;
              fz.e = e;
              fz.kind = TraceKind::Finalize;
              fz.node = i;
              fz.round = rev.round;
              fz.block = hex(blk.hash);
              trace_->events.push_back(std::move(fz));
            }
          }
        }
        continue;
      }

      Message m = std::move(item.message);
      std::optional<Proposal> prop;
      if (m.kind == MessageKind::Raw) {
        prop = ns.qsc.make_proposal(m.step);
        if (prop) m.proposal = prop;
      }
      const Step step = m.step;
      const MessageKind kind = m.kind;
      const MsgId of = m.of;
      const std::vector<NodeId> ackers = m.ackers;
      const std::vector<MsgId> advanced_on = m.advanced_on;

      VectorClock vt(cfg_.n);
      for (NodeId j = 0; j < cfg_.n; ++j) vt[j] = ns.holdback.delivered_from(j);
      vt[i] = ns.next_seq + 1;  // a record covers itself
      const std::uint32_t seq = ns.next_seq;
      MsgId id = store_.add(i, seq, std::move(vt), std::move(m)).id;
      ns.next_seq++;
      ns.last_sent_step = std::max(ns.last_sent_step, step);
      send_counts_[static_cast<int>(kind)][{i, step}]++;

      if (trace_) {
        TraceEvent ev;
        ev.e = e;
        ev.kind = kind == MessageKind::Cert ? TraceKind::Cert : TraceKind::Send;
        ev.node = i;
        ev.seq = seq;
        ev.step = step;
        ev.mkind = kind;
        ev.msg = id;
        ev.of = of;
        ev.ackers = ackers;
        if (kind == MessageKind::Raw) ev.basis = advanced_on;
        trace_->events.push_back(std::move(ev));
        if (prop) {
          TraceEvent pe;
          pe.e = e;
          pe.kind = TraceKind::Propose;
          pe.round = prop->round;
          pe.node = i;
          pe.msg = id;
          pe.parent = prop->parent_ref;
          std::uint8_t buf[8];
          for (int b = 0; b < 8; ++b) {
            buf[b] = static_cast<std::uint8_t>(prop->ticket.value >> (8 * b));
          }
          pe.ticket_commitment = hex_prefix(sha256(buf, 8), 16);
          trace_->events.push_back(std::move(pe));
        }
      }
      if (prop && prop->round < round_tickets_.size()) {
        round_tickets_[prop->round].push_back({i, prop->ticket.value});
      }

      outbound_.push_back({id, i});
      apply(i, id, e);  // synchronous self-delivery, never schedulable
    }
  }
}

std::uint64_t World::state_fingerprint(std::uint64_t salt) const {
  // FNV-1a over a canonical serialization of everything behavior-relevant:
  // per-node log digests, delivery matrix, clock tallies (order included,
  // since the advance basis is the first-t_m set in apply order), and round
  // outcomes. States with equal fingerprints behave identically onward.
  std::uint64_t h = 1469598103934665603ULL ^ SplitMix64::scramble(salt);
  auto mix = [&h](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xFF;
      h *= 1099511628211ULL;
    }
  };
  for (NodeId j = 0; j < cfg_.n; ++j) mix(store_.log_hash(j));
  for (const NodeState& ns : nodes_) {
    mix(ns.clock.step());
    mix(ns.next_seq);
    for (std::uint32_t d : ns.holdback.delivered()) mix(d);
    for (NodeId a : ns.clock.own_ackers()) mix(a + 1);
    mix(ns.clock.own_raw());
    mix(ns.clock.cert_emitted() ? 1 : 0);
    mix(0xA5);
    for (MsgId m : ns.clock.step_raws()) mix(m);
    mix(0xA6);
    for (MsgId m : ns.clock.step_certs()) mix(m);
    for (Round r = 0; r < cfg_.qsc.rounds; ++r) {
      const RoundOutcome* oc = ns.qsc.outcome(r);
      if (oc == nullptr) {
        mix(0xFFFFFFFFFFFFFFFFULL);
      } else {
        mix(oc->best);
        mix(oc->committed ? 1 : 0);
      }
    }
  }
  return h;
}

}  // namespace tlcqsc
