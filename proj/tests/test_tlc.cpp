#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "tlcqsc/periods.hpp"
#include "tlcqsc/record.hpp"
#include "tlcqsc/tlc.hpp"

using namespace tlcqsc;

namespace {

// Drives a clock directly with hand-built records; vector timestamps are
// irrelevant at this layer (causal order is the caller's contract).
struct Script {
  TlcClock clock;
  std::vector<std::uint32_t> seqs{std::vector<std::uint32_t>(8, 0)};

  Script(NodeId self, TlcConfig cfg, Step max_step)
      : clock(self, cfg, max_step) {}

  LogRecord feed(NodeId from, Message m) {
    LogRecord r;
    r.node = from;
    r.seq = seqs[from]++;
    r.id = msg_id_of(from, r.seq);
    r.msg = std::move(m);
    clock.on_apply(r);
    return r;
  }

  static Message raw(Step s) {
    Message m;
    m.kind = MessageKind::Raw;
    m.step = s;
    return m;
  }
  static Message ack(Step s, MsgId of) {
    Message m;
    m.kind = MessageKind::Ack;
    m.step = s;
    m.of = of;
    return m;
  }
  static Message cert(Step s, MsgId of) {
    Message m;
    m.kind = MessageKind::Cert;
    m.step = s;
    m.of = of;
    return m;
  }

  struct Drained {
    std::vector<Message> msgs;
    std::vector<TlcClock::AdvanceNotice> advances;
  };
  Drained drain() {
    Drained d;
    for (auto& s : clock.take_staged()) {
      if (s.is_advance) {
        d.advances.push_back(s.advance);
      } else {
        d.msgs.push_back(s.message);
      }
    }
    return d;
  }
};

int count_kind(const std::vector<Message>& ms, MessageKind k) {
  int c = 0;
  for (const auto& m : ms) {
    if (m.kind == k) c++;
  }
  return c;
}

}  // namespace

TEST_CASE("start broadcasts the single initial step-0 message, once") {
  Script s(0, TlcConfig{3, 2, 2, true}, 10);
  s.clock.on_start();
  auto d = s.drain();
  REQUIRE(d.msgs.size() == 1);
  CHECK(d.msgs[0].kind == MessageKind::Raw);
  CHECK(d.msgs[0].step == 0);
  CHECK_THROWS_AS(s.clock.on_start(), std::logic_error);
}

TEST_CASE("single-node group: start leads straight to an advance") {
  Script s(0, TlcConfig{1, 1, 0, true}, 10);
  s.clock.on_start();
  auto d = s.drain();
  REQUIRE(d.msgs.size() == 1);
  s.feed(0, d.msgs[0]);  // self-delivery
  d = s.drain();
  REQUIRE(d.advances.size() == 1);
  CHECK(d.advances[0].from == 0);
  CHECK(d.advances[0].to == 1);
  CHECK(s.clock.step() == 1);
  REQUIRE(d.msgs.size() == 1);
  CHECK(d.msgs[0].step == 1);
}

TEST_CASE("one witnessed step from one node's perspective") {
  // B with majority thresholds: its raw gets acked by A (plus itself), so B
  // certifies it; B advances once two certified step-0 messages are known.
  Script b(1, TlcConfig{3, 2, 2, true}, 10);
  b.clock.on_start();
  auto d = b.drain();
  auto braw = b.feed(1, d.msgs[0]);  // self-delivery counts as first ack
  CHECK(b.drain().msgs.empty());

  b.feed(0, Script::ack(0, braw.id));  // A witnesses B's message
  d = b.drain();
  REQUIRE(count_kind(d.msgs, MessageKind::Cert) == 1);
  CHECK(d.msgs[0].of == braw.id);
  CHECK(d.msgs[0].ackers == std::vector<NodeId>{1, 0});

  auto bcert = b.feed(1, d.msgs[0]);  // own certificate counts toward t_m
  (void)bcert;
  CHECK(b.clock.step() == 0);

  auto araw = b.feed(0, Script::raw(0));
  d = b.drain();  // ack for A's raw
  CHECK(count_kind(d.msgs, MessageKind::Ack) == 1);
  b.feed(0, Script::cert(0, araw.id));
  d = b.drain();
  REQUIRE(d.advances.size() == 1);
  CHECK(d.advances[0].to == 1);
  CHECK_FALSE(d.advances[0].viral);
  // Basis: the first two certified step-0 messages, in apply order.
  CHECK(d.advances[0].basis == std::vector<MsgId>{braw.id, araw.id});
  CHECK(count_kind(d.msgs, MessageKind::Raw) == 1);
  CHECK(d.msgs.back().step == 1);
  CHECK(d.msgs.back().advanced_on == d.advances[0].basis);
}

TEST_CASE("a node can advance on other nodes' certified messages alone") {
  Script i(0, TlcConfig{3, 2, 2, true}, 10);
  i.clock.on_start();
  i.feed(0, i.drain().msgs[0]);

  auto araw = i.feed(1, Script::raw(0));
  auto braw = i.feed(2, Script::raw(0));
  i.drain();
  i.feed(1, Script::cert(0, araw.id));
  CHECK(i.clock.step() == 0);  // one short of t_m: no action
  i.feed(2, Script::cert(0, braw.id));
  CHECK(i.clock.step() == 1);  // advanced with its own message never certified
}

TEST_CASE("messages for steps the node has left get no acknowledgment") {
  Script i(0, TlcConfig{3, 2, 0, true}, 10);  // unwitnessed: raws advance
  i.clock.on_start();
  i.feed(0, i.drain().msgs[0]);
  i.feed(1, Script::raw(0));
  i.drain();
  i.feed(1, Script::raw(1));
  i.feed(2, Script::raw(1));
  CHECK(i.clock.step() == 2);
  i.drain();
  auto before = i.clock.step();
  i.feed(2, Script::raw(1));  // too late for step 1
  auto d = i.drain();
  CHECK(d.msgs.empty());
  CHECK(i.clock.step() == before);
}

TEST_CASE("late acknowledgments never produce a certificate for a left step") {
  Script i(0, TlcConfig{3, 2, 2, true}, 10);
  i.clock.on_start();
  auto own = i.feed(0, i.drain().msgs[0]);
  auto a = i.feed(1, Script::raw(0));
  auto b = i.feed(2, Script::raw(0));
  i.drain();
  i.feed(1, Script::cert(0, a.id));
  i.feed(2, Script::cert(0, b.id));
  REQUIRE(i.clock.step() == 1);  // advanced, abandoning its own witnessing
  i.drain();
  i.feed(1, Script::ack(0, own.id));
  i.feed(2, Script::ack(0, own.id));
  CHECK(i.drain().msgs.empty());
}

TEST_CASE("viral catch-up jumps straight to the carrier's step") {
  Script i(0, TlcConfig{3, 2, 2, true}, 10);
  i.clock.on_start();
  i.feed(0, i.drain().msgs[0]);

  i.feed(1, Script::raw(3));
  auto d = i.drain();
  CHECK(i.clock.step() == 3);
  REQUIRE(d.advances.size() == 1);
  CHECK(d.advances[0].viral);
  CHECK(d.advances[0].from == 0);
  CHECK(d.advances[0].to == 3);
  // Exactly one raw, for step 3; skipped steps get none. The carrier's raw
  // is acknowledged after the jump.
  std::vector<Step> raw_steps;
  for (const auto& m : d.msgs) {
    if (m.kind == MessageKind::Raw) raw_steps.push_back(m.step);
  }
  CHECK(raw_steps == std::vector<Step>{3});
  CHECK(count_kind(d.msgs, MessageKind::Ack) == 1);
}

TEST_CASE("a carrier for the node's current step is a no-op") {
  Script i(0, TlcConfig{3, 2, 2, true}, 10);
  i.clock.on_start();
  i.feed(0, i.drain().msgs[0]);
  i.feed(1, Script::raw(2));
  CHECK(i.clock.step() == 2);
  i.drain();
  i.feed(2, Script::raw(2));  // same step: just witnessed, no jump
  auto d = i.drain();
  CHECK(d.advances.empty());
  CHECK(count_kind(d.msgs, MessageKind::Raw) == 0);
}

TEST_CASE("chained jumps emit raws only for the steps actually visited") {
  Script i(0, TlcConfig{3, 2, 2, true}, 10);
  i.clock.on_start();
  i.feed(0, i.drain().msgs[0]);
  i.feed(1, Script::raw(2));
  i.feed(2, Script::raw(5));
  auto d = i.drain();
  std::vector<Step> raw_steps;
  for (const auto& m : d.msgs) {
    if (m.kind == MessageKind::Raw) raw_steps.push_back(m.step);
  }
  CHECK(raw_steps == std::vector<Step>{2, 5});
  CHECK(i.clock.step() == 5);
}

TEST_CASE("certificates for a later step also trigger catch-up") {
  Script i(0, TlcConfig{3, 2, 2, true}, 10);
  i.clock.on_start();
  i.feed(0, i.drain().msgs[0]);
  i.feed(1, Script::cert(4, msg_id_of(1, 0)));
  CHECK(i.clock.step() == 4);
}

TEST_CASE("acknowledgments for other nodes' messages are not tallied") {
  Script i(0, TlcConfig{3, 2, 2, true}, 10);
  i.clock.on_start();
  i.feed(0, i.drain().msgs[0]);
  i.feed(1, Script::ack(0, msg_id_of(2, 0)));  // ack of someone else's raw
  CHECK(i.drain().msgs.empty());
  CHECK(i.clock.own_ackers().size() == 1);  // still just the self-ack
}

TEST_CASE("the final step is passive: no acks, no further advances") {
  Script i(0, TlcConfig{3, 2, 2, true}, 2);
  i.clock.on_start();
  i.feed(0, i.drain().msgs[0]);
  i.feed(1, Script::raw(2));
  CHECK(i.clock.step() == 2);
  CHECK(i.clock.done());
  i.drain();
  i.feed(2, Script::raw(2));
  CHECK(i.drain().msgs.empty());  // no witnessing at the cap
}

TEST_CASE("unwitnessed mode advances on a threshold of distinct raws") {
  Script i(0, TlcConfig{3, 2, 0, true}, 10);
  i.clock.on_start();
  auto own = i.feed(0, i.drain().msgs[0]);
  CHECK(i.clock.step() == 0);
  auto other = i.feed(1, Script::raw(0));
  auto d = i.drain();
  CHECK(i.clock.step() == 1);
  REQUIRE(d.advances.size() == 1);
  CHECK(d.advances[0].basis == std::vector<MsgId>{own.id, other.id});
  CHECK(count_kind(d.msgs, MessageKind::Ack) == 0);  // no witnessing traffic
}

// Period delineation over hand-built advance traces.

namespace {

Trace advance_trace(std::uint32_t n, std::uint32_t t_m, std::uint32_t t_w,
                    std::vector<std::tuple<EventIndex, NodeId, Step>> advances) {
  Trace t;
  t.config.n = n;
  t.config.t_m = t_m;
  t.config.t_w = t_w;
  std::vector<Step> cur(n, 0);
  for (auto [e, node, to] : advances) {
    TraceEvent ev;
    ev.e = e;
    ev.kind = TraceKind::Advance;
    ev.node = node;
    ev.from_step = cur[node];
    ev.to_step = to;
    cur[node] = to;
    t.events.push_back(ev);
  }
  return t;
}

}  // namespace

TEST_CASE("a period starts when the second of three nodes reaches the step") {
  auto t = advance_trace(3, 2, 2,
                         {{1, 0, 1}, {3, 1, 1}, {4, 2, 1}, {6, 1, 2}, {9, 0, 2}});
  auto periods = global_periods(t, t.config);
  CHECK(periods.at(0).first == 0);
  CHECK(periods.at(1).first == 3);  // second node arrived at e=3
  CHECK(periods.at(0).second == 3);
  CHECK(periods.at(2).first == 9);
  CHECK(periods.at(2).second == kIndefinite);
}

TEST_CASE("single-node periods start when the node does") {
  auto t = advance_trace(1, 1, 1, {{2, 0, 1}, {5, 0, 2}});
  auto periods = global_periods(t, t.config);
  CHECK(periods.at(1).first == 2);
  CHECK(periods.at(2).first == 5);
}

TEST_CASE("a lagging node does not hold periods back") {
  // C never leaves step 0; the majority of {A, B} sets every boundary.
  auto t = advance_trace(3, 2, 2,
                         {{1, 0, 1}, {2, 1, 1}, {5, 0, 2}, {7, 1, 2}, {11, 0, 3}});
  auto periods = global_periods(t, t.config);
  CHECK(periods.at(1).first == 2);
  CHECK(periods.at(2).first == 7);
  CHECK(periods.count(3) == 0);  // majority never reached step 3
}

TEST_CASE("periods require majority thresholds") {
  auto t = advance_trace(3, 2, 0, {{1, 0, 1}});
  CHECK_THROWS_AS(global_periods(t, t.config), std::invalid_argument);
}
