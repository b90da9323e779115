#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "tlcqsc/qsc.hpp"
#include "tlcqsc/sim.hpp"

using namespace tlcqsc;

namespace {

QscConfig sequential_cfg(Round rounds) {
  QscConfig cfg;
  cfg.enabled = true;
  cfg.rounds = rounds;
  return cfg;
}

// Feeds hand-built records into one node's consensus view. Causal order is
// the holdback layer's contract, so records can be fed directly here.
struct Bench {
  QscNode node;
  std::vector<std::uint32_t> seqs{std::vector<std::uint32_t>(8, 0)};

  Bench(QscConfig cfg, NodeId self = 0, std::uint64_t seed = 1)
      : node(self, cfg, seed) {}

  LogRecord feed(NodeId from, Message m) {
    LogRecord r;
    r.node = from;
    r.seq = seqs[from]++;
    r.id = msg_id_of(from, r.seq);
    r.msg = std::move(m);
    node.on_apply(r);
    return r;
  }

  LogRecord proposal(NodeId from, Step s, Round round, TicketValue ticket) {
    Message m;
    m.kind = MessageKind::Raw;
    m.step = s;
    Proposal p;
    p.round = round;
    p.proposer = from;
    p.ticket = Ticket{ticket, true};
    m.proposal = p;
    return feed(from, std::move(m));
  }

  LogRecord cert(NodeId from, Step s, MsgId of) {
    Message m;
    m.kind = MessageKind::Cert;
    m.step = s;
    m.of = of;
    return feed(from, std::move(m));
  }

  LogRecord step_raw(NodeId from, Step s, std::vector<MsgId> advanced_on) {
    Message m;
    m.kind = MessageKind::Raw;
    m.step = s;
    m.advanced_on = std::move(advanced_on);
    return feed(from, std::move(m));
  }
};

}  // namespace

TEST_CASE("tickets replay from the node's private stream by round position") {
  QscConfig cfg = sequential_cfg(3);
  QscNode n0(0, cfg, 42);
  auto p = n0.make_proposal(0);
  REQUIRE(p.has_value());
  auto oracle = substream(42, kStreamTicketBase + 0);
  CHECK(p->ticket.value == oracle.next());
  CHECK(p->ticket.sealed);
  CHECK(p->parent_ref == kNoMsg);

  // A node that skipped rounds still draws the positional value.
  QscConfig pipe = sequential_cfg(5);
  pipe.pipeline = true;
  QscNode n1(1, pipe, 42);
  auto p2 = n1.make_proposal(2);  // proposes first at round 2
  REQUIRE(p2.has_value());
  auto oracle2 = substream(42, kStreamTicketBase + 1);
  oracle2.next();
  oracle2.next();
  CHECK(p2->ticket.value == oracle2.next());
  CHECK(p2->parent_ref == kNoMsg);  // rounds 0..2 build on genesis when pipelined
}

TEST_CASE("plaintext mode unseals tickets") {
  QscConfig cfg = sequential_cfg(1);
  cfg.encrypt_tickets = false;
  QscNode n0(0, cfg, 7);
  CHECK_FALSE(n0.make_proposal(0)->ticket.sealed);
}

TEST_CASE("no proposal off round-start steps or past the last round") {
  QscConfig cfg = sequential_cfg(2);
  QscNode n0(0, cfg, 7);
  CHECK_FALSE(n0.make_proposal(1).has_value());
  CHECK_FALSE(n0.make_proposal(2).has_value());
  CHECK(n0.make_proposal(0).has_value());
  CHECK_FALSE(n0.make_proposal(6).has_value());  // would be round 2
}

TEST_CASE("a certified proposal recorded by a certified successor commits") {
  Bench b(sequential_cfg(1));
  auto pa = b.proposal(0, 0, 0, 500);
  auto pb = b.proposal(1, 0, 0, 900);
  auto pc = b.proposal(2, 0, 0, 100);
  b.cert(0, 0, pa.id);
  b.cert(1, 0, pb.id);
  auto m = b.step_raw(1, 1, {pb.id, pa.id});  // records pb's certificate
  b.cert(1, 1, m.id);
  (void)pc;

  auto events = b.node.on_advance(0, 3);
  REQUIRE(events.size() == 1);
  const RoundOutcome& oc = events[0].outcome;
  CHECK(oc.best == pb.id);  // highest confirmed ticket
  CHECK(oc.best_proposer == 1);
  CHECK(oc.committed);
  CHECK(b.node.finalized(0) == pb.id);
  CHECK(b.node.rounds_to_finality(0) == 0);
}

TEST_CASE("an unwitnessed raw is visible but never confirmed") {
  Bench b(sequential_cfg(1));
  auto pa = b.proposal(0, 0, 0, 900);  // best ticket but no certificate
  auto pb = b.proposal(1, 0, 0, 500);
  b.cert(1, 0, pb.id);
  auto m = b.step_raw(1, 1, {pb.id});
  b.cert(1, 1, m.id);

  auto events = b.node.on_advance(0, 3);
  const RoundOutcome& oc = events[0].outcome;
  CHECK(oc.best == pb.id);        // pa is not eligible
  CHECK_FALSE(oc.committed);      // but pa spoils: its ticket is higher
  CHECK(b.node.finalized(0) == kNoMsg);
  CHECK(b.node.rounds_to_finality(0) == -1);
  (void)pa;
}

TEST_CASE("confirmation alone is not enough: the record must be reconfirmed") {
  // The round's best proposal is certified, but no certified step-(s+1) raw
  // recorded that fact, so its confirmed status cannot be known to spread.
  Bench b(sequential_cfg(1));
  auto pa = b.proposal(0, 0, 0, 900);
  auto pb = b.proposal(1, 0, 0, 500);
  b.cert(0, 0, pa.id);
  b.cert(1, 0, pb.id);
  auto m = b.step_raw(1, 1, {pb.id});  // advanced without pa's certificate
  b.cert(1, 1, m.id);
  auto m2 = b.step_raw(0, 1, {pa.id, pb.id});  // records it, but never certified

  auto events = b.node.on_advance(0, 3);
  const RoundOutcome& oc = events[0].outcome;
  CHECK(oc.best == pa.id);
  CHECK_FALSE(oc.committed);
  (void)m2;
}

TEST_CASE("equal tickets spoil each other and break ties by proposer id") {
  Bench b(sequential_cfg(1));
  auto p2 = b.proposal(2, 0, 0, 700);
  auto p1 = b.proposal(1, 0, 0, 700);
  b.cert(2, 0, p2.id);
  b.cert(1, 0, p1.id);
  auto m = b.step_raw(1, 1, {p1.id, p2.id});
  b.cert(1, 1, m.id);

  auto events = b.node.on_advance(0, 3);
  const RoundOutcome& oc = events[0].outcome;
  CHECK(oc.best_proposer == 1);  // tie breaks toward the smaller id
  CHECK_FALSE(oc.committed);     // the other equal ticket spoils the round
}

TEST_CASE("a single confirmed proposal wins by itself") {
  Bench b(sequential_cfg(1));
  auto pa = b.proposal(0, 0, 0, 1);
  b.cert(0, 0, pa.id);
  auto m = b.step_raw(0, 1, {pa.id});
  b.cert(0, 1, m.id);
  auto events = b.node.on_advance(0, 3);
  CHECK(events[0].outcome.best == pa.id);
  CHECK(events[0].outcome.committed);
}

TEST_CASE("the strict spoiler horizon ignores late arrivals, the default does not") {
  auto run_with = [](QscConfig::Horizon h) {
    QscConfig cfg = sequential_cfg(1);
    cfg.spoiler_horizon = h;
    Bench b(cfg);
    auto pb = b.proposal(1, 0, 0, 500);
    b.cert(1, 0, pb.id);
    auto m = b.step_raw(1, 1, {pb.id});
    b.cert(1, 1, m.id);
    b.node.on_advance(0, 2);             // horizon freezes here
    b.proposal(0, 0, 0, 900);            // spoiler learned after step s+2
    auto events = b.node.on_advance(2, 3);
    return events.at(0).outcome.committed;
  };
  CHECK(run_with(QscConfig::Horizon::Strict));
  CHECK_FALSE(run_with(QscConfig::Horizon::Eval));
}

TEST_CASE("commit finalizes the whole ancestor chain") {
  QscConfig cfg = sequential_cfg(2);
  Bench b(cfg);
  // Round 0: pa wins but its recording raw is never certified, so the node
  // cannot commit the round on its own.
  auto pa = b.proposal(0, 0, 0, 900);
  b.cert(0, 0, pa.id);
  b.step_raw(0, 1, {pa.id});
  b.node.on_advance(0, 3);
  CHECK_FALSE(b.node.committed(0));

  // Round 1: node 0's proposal builds on pa and commits; round 0 is pinned
  // retroactively.
  Message m;
  m.kind = MessageKind::Raw;
  m.step = 3;
  Proposal p;
  p.round = 1;
  p.proposer = 0;
  p.ticket = Ticket{800, true};
  p.parent_ref = pa.id;
  m.proposal = p;
  auto p1 = b.feed(0, std::move(m));
  b.cert(0, 3, p1.id);
  auto m1 = b.step_raw(0, 4, {p1.id});
  b.cert(0, 4, m1.id);
  auto events = b.node.on_advance(3, 6);
  REQUIRE(events.size() == 1);
  CHECK(events[0].outcome.committed);
  CHECK(events[0].newly_finalized == std::vector<Round>{0, 1});
  CHECK(b.node.finalized(0) == pa.id);
  CHECK(b.node.finalized(1) == p1.id);
  CHECK(b.node.rounds_to_finality(0) == 1);
  CHECK(b.node.rounds_to_finality(1) == 0);
}

TEST_CASE("block formation is deterministic and filters spent transactions") {
  Proposal w;
  w.round = 4;
  w.proposer = 2;
  w.txs = {10, 11, 12};
  Block parent = genesis_block();
  Block b1 = form_block(w, parent, {});
  Block b2 = form_block(w, parent, {});
  CHECK(b1.hash == b2.hash);  // same (winning, parent) on any node
  CHECK(b1.txs == std::vector<TxId>{10, 11, 12});

  Block filtered = form_block(w, parent, {11});
  CHECK(filtered.txs == std::vector<TxId>{10, 12});
  CHECK(filtered.hash != b1.hash);

  Proposal empty;
  empty.round = 0;
  empty.proposer = 0;
  Block be = form_block(empty, parent, {});
  CHECK(be.txs.empty());  // a valid empty block

  // Tamper evidence: a different parent changes every descendant hash.
  Block other_parent = form_block(empty, parent, {});
  Block on_other = form_block(w, other_parent, {});
  CHECK(on_other.hash != b1.hash);
  CHECK(on_other.parent_hash == other_parent.hash);
}

TEST_CASE("a single node commits every round and chains its own blocks") {
  SimConfig cfg;
  cfg.n = 1;
  cfg.seed = 6;
  cfg.tlc = TlcConfig{1, 1, 1, true};
  cfg.qsc.enabled = true;
  cfg.qsc.rounds = 5;
  cfg.max_step = cfg.qsc.last_step();
  cfg.max_events = 1000;
  auto rr = run_simulation(cfg);
  REQUIRE_FALSE(rr.truncated);
  for (Round r = 0; r < 5; ++r) {
    CHECK(rr.world.qsc(0).committed(r));
    CHECK(rr.world.qsc(0).rounds_to_finality(r) == 0);
  }
}

TEST_CASE("pipelined rounds overlap: a proposal on every step") {
  SimConfig cfg;
  cfg.n = 3;
  cfg.seed = 15;
  cfg.tlc = TlcConfig{3, 2, 2, true};
  cfg.qsc.enabled = true;
  cfg.qsc.rounds = 6;
  cfg.qsc.pipeline = true;
  cfg.max_step = cfg.qsc.last_step();
  cfg.max_events = 100000;
  auto rr = run_simulation(cfg);
  REQUIRE_FALSE(rr.truncated);
  std::set<Step> propose_steps;
  for (const auto& ev : rr.trace.events) {
    if (ev.kind == TraceKind::Propose) {
      propose_steps.insert(ev.round);  // pipelined: round == start step
    }
  }
  CHECK(propose_steps == std::set<Step>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("ticket values enter the trace only after the round ends") {
  SimConfig cfg;
  cfg.n = 3;
  cfg.seed = 8;
  cfg.tlc = TlcConfig{3, 2, 2, true};
  cfg.qsc.enabled = true;
  cfg.qsc.rounds = 2;
  cfg.max_step = cfg.qsc.last_step();
  cfg.max_events = 100000;
  auto rr = run_simulation(cfg);
  for (Round r = 0; r < 2; ++r) {
    std::size_t last_propose = 0, reveal_at = 0, first_resolve = 0;
    bool saw_reveal = false, saw_resolve = false;
    for (std::size_t i = 0; i < rr.trace.events.size(); ++i) {
      const auto& ev = rr.trace.events[i];
      if (ev.round != r) continue;
      if (ev.kind == TraceKind::Propose) last_propose = i;
      if (ev.kind == TraceKind::Reveal && !saw_reveal) {
        reveal_at = i;
        saw_reveal = true;
        CHECK(ev.tickets.size() == 3);
      }
      if (ev.kind == TraceKind::Resolve && !saw_resolve) {
        first_resolve = i;
        saw_resolve = true;
      }
    }
    REQUIRE(saw_reveal);
    REQUIRE(saw_resolve);
    CHECK(last_propose < reveal_at);
    CHECK(first_resolve < reveal_at);  // revealed right after the round ends
  }
}
