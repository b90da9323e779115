#include "tlcqsc/sim.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace tlcqsc {

namespace {
constexpr EventIndex kReleaseWindow = 16;
}

void SimConfig::validate() const {
  if (n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (f_d >= n) throw std::invalid_argument("config: f_d must satisfy f_d < n");
  if (tlc.t_m < 1 || tlc.t_m > n) throw std::invalid_argument("config: t_m out of range");
  if (tlc.t_w > n) throw std::invalid_argument("config: t_w out of range");
  if (adversary != "oblivious" && adversary != "delayset" && adversary != "ticketaware") {
    throw std::invalid_argument("config: unknown adversary " + adversary);
  }
  if (adversary != "delayset" && !delay_schedule.empty()) {
    throw std::invalid_argument("config: delay schedule requires delayset adversary");
  }
  for (const auto& e : delay_schedule) {
    if (e.set.size() > f_d) {
      throw std::invalid_argument("config: delay set larger than f_d");
    }
  }
  if (qsc.enabled) {
    if (!(tlc.t_m > n / 2 && tlc.t_w > n / 2)) {
      throw std::invalid_argument("config: consensus requires t_m > n/2 and t_w > n/2");
    }
    if (max_step < qsc.last_step()) {
      throw std::invalid_argument("config: max_step below the final round's end");
    }
  }
}

TraceConfig SimConfig::trace_config() const {
  TraceConfig tc;
  tc.n = n;
  tc.f_d = f_d;
  tc.seed = seed;
  tc.adversary = adversary;
  tc.max_events = max_events;
  tc.max_step = max_step;
  tc.t_m = tlc.t_m;
  tc.t_w = tlc.t_w;
  tc.self_ack = tlc.self_ack;
  tc.qsc = qsc.enabled;
  tc.rounds = qsc.rounds;
  tc.pipeline = qsc.pipeline;
  tc.encrypt_tickets = qsc.encrypt_tickets;
  tc.spoiler_horizon =
      qsc.spoiler_horizon == QscConfig::Horizon::Strict ? "strict" : "eval";
  return tc;
}

RunResult run_simulation(const SimConfig& cfg, bool record_trace) {
  cfg.validate();

  Trace trace;
  trace.config = cfg.trace_config();

  WorldConfig wc;
  wc.n = cfg.n;
  wc.seed = cfg.seed;
  wc.max_step = cfg.max_step;
  wc.tlc = cfg.tlc;
  wc.tlc.n = cfg.n;
  wc.qsc = cfg.qsc;

  World world(wc, record_trace ? &trace : nullptr);
  auto policy = make_policy(cfg.adversary, cfg.n, cfg.f_d, cfg.delay_schedule);
  SplitMix64 rng = substream(cfg.seed, kStreamScheduler);

  PendingMap pending;
  EnvelopeId next_eid = 1;
  EventIndex now = 0;
  std::set<NodeId> delay_set;

  auto apply_set_change = [&](const std::vector<NodeId>& next) {
    std::set<NodeId> fresh(next.begin(), next.end());
    // Senders leaving the set get immediate finite deadlines for everything
    // of theirs still in flight; committed deadlines are never postponed.
    for (auto& [eid, env] : pending) {
      if (env.deadline == kIndefinite && !fresh.count(env.sender)) {
        env.deadline = now + 1 + rng.next_below(kReleaseWindow);
      }
    }
    delay_set = std::move(fresh);
    if (record_trace) {
      TraceEvent ev;
      ev.e = now;
      ev.kind = TraceKind::SdSet;
      ev.sd = next;
      trace.events.push_back(ev);
    }
  };

  auto enqueue_outbound = [&]() {
    for (const Outbound& ob : world.take_outbound()) {
      const LogRecord& rec = world.store().by_id(ob.msg);
      for (NodeId to = 0; to < cfg.n; ++to) {
        if (to == ob.sender) continue;  // self-delivery already happened
        Envelope env;
        env.eid = next_eid++;
        env.msg = ob.msg;
        env.sender = ob.sender;
        env.recipient = to;
        env.send_event = now;
        env.step = rec.msg.step;
        env.mkind = rec.msg.kind;
        if (rec.msg.proposal && !rec.msg.proposal->ticket.sealed) {
          env.ticket = Envelope::TicketInfo{rec.msg.proposal->round,
                                            rec.msg.proposal->ticket.value};
        }
        env.deadline = delay_set.count(ob.sender)
                           ? kIndefinite
                           : policy->deadline_for(env, now, rng);
        pending.emplace(env.eid, env);
      }
    }
  };

  if (auto change = policy->delay_set_update(now)) apply_set_change(*change);
  world.start();
  enqueue_outbound();

  std::vector<Step> last_sent(cfg.n, 0);
  bool truncated = false;
  while (true) {
    if (auto change = policy->delay_set_update(now)) apply_set_change(*change);
    if (now >= cfg.max_events) {
      truncated = true;
      break;
    }

    // A committed deadline forces delivery; otherwise the policy chooses.
    std::optional<EnvelopeId> choice;
    EventIndex best_deadline = kIndefinite;
    for (const auto& [eid, env] : pending) {
      if (env.deadline != kIndefinite && env.deadline <= now + 1 &&
          env.deadline < best_deadline) {
        best_deadline = env.deadline;
        choice = eid;
      }
    }
    if (!choice) {
      for (NodeId i = 0; i < cfg.n; ++i) last_sent[i] = world.last_sent_step(i);
      choice = policy->pick(pending, last_sent, now, rng);
    }
    if (!choice) break;  // quiescent

    Envelope env = pending.at(*choice);
    pending.erase(*choice);
    now += 1;
    world.deliver(env.msg, env.recipient, now);
    enqueue_outbound();
  }

  std::set<NodeId> senders;
  for (const auto& [eid, env] : pending) senders.insert(env.sender);
  std::vector<NodeId> pending_senders(senders.begin(), senders.end());

  if (record_trace) {
    TraceEvent halt;
    halt.e = now;
    halt.kind = TraceKind::Halt;
    halt.reason = truncated ? HaltReason::MaxEvents : HaltReason::Quiescent;
    halt.pending_senders = pending_senders;
    trace.events.push_back(halt);
    trace.truncated = truncated;
  }

  RunResult result(cfg, std::move(trace), std::move(world));
  result.truncated = truncated;
  result.quiescent = !truncated;
  result.pending_senders = std::move(pending_senders);
  return result;
}

}  // namespace tlcqsc
