#include "tlcqsc/check.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace tlcqsc {

namespace {

struct Checker {
  const Trace& trace;
  const TraceConfig& cfg;
  std::vector<Violation> out;

  explicit Checker(const Trace& t) : trace(t), cfg(t.config) {}

  void report(const std::string& prop, std::size_t idx, std::vector<NodeId> nodes,
              std::string detail) {
    for (const auto& v : out) {
      if (v.property == prop) return;  // keep the first offense only
    }
    Violation v;
    v.property = prop;
    v.event_index = idx;
    v.e = idx < trace.events.size() ? trace.events[idx].e : 0;
    v.nodes = std::move(nodes);
    v.detail = std::move(detail);
    out.push_back(std::move(v));
  }

  void run() {
    check_clock_properties();
    check_causality();
    if (cfg.majoritarian() && cfg.t_w > 0) {
      check_period_bounds();
      check_two_step_broadcast();
    }
    if (!trace.truncated) check_quiescence();
    if (cfg.qsc) check_qsc();
  }

  // Monotonicity, pacing, TLC2 (one raw delivered per sender per step),
  // TLC3 (one raw broadcast per node per step) in a single pass.
  void check_clock_properties() {
    std::vector<Step> steps(cfg.n, 0);
    std::set<std::pair<NodeId, Step>> raw_sent;
    std::set<std::tuple<NodeId, NodeId, Step>> raw_applied;

    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const auto& ev = trace.events[i];
      if (ev.kind == TraceKind::Advance) {
        if (ev.to_step <= ev.from_step || steps[ev.node] != ev.from_step) {
          report("monotonicity", i, {ev.node}, "clock moved backwards or skipped state");
        }
        steps[ev.node] = std::max(steps[ev.node], ev.to_step);
        std::uint32_t at_or_past = 0;
        for (Step s : steps) {
          if (s + 1 >= ev.to_step) at_or_past++;
        }
        if (at_or_past < cfg.t_m) {
          std::ostringstream os;
          os << "advance to " << ev.to_step << " with only " << at_or_past
             << " nodes at step >= " << ev.to_step - 1;
          report("pacing", i, {ev.node}, os.str());
        }
      } else if (ev.kind == TraceKind::Send && ev.mkind == MessageKind::Raw) {
        if (!raw_sent.insert({ev.node, ev.step}).second) {
          report("tlc3_single_broadcast", i, {ev.node},
                 "second raw broadcast for one step");
        }
      } else if (ev.kind == TraceKind::Apply && ev.mkind == MessageKind::Raw) {
        if (!raw_applied.insert({ev.to, ev.from, ev.step}).second) {
          report("tlc2_no_duplication", i, {ev.to, ev.from},
                 "duplicate raw delivered for one (sender, step)");
        }
      }
    }
  }

  // Replays vector clocks from send events and verifies that every apply is
  // gapless per sender and covered by the record's emission-time knowledge.
  void check_causality() {
    std::vector<std::vector<std::uint32_t>> counts(
        cfg.n, std::vector<std::uint32_t>(cfg.n, 0));
    std::unordered_map<MsgId, std::vector<std::uint32_t>> vts;

    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const auto& ev = trace.events[i];
      if (ev.kind == TraceKind::Send || ev.kind == TraceKind::Cert) {
        auto vt = counts[ev.node];
        vt[ev.node] = ev.seq + 1;
        vts.emplace(ev.msg, std::move(vt));
      } else if (ev.kind == TraceKind::Apply) {
        auto it = vts.find(ev.msg);
        if (it == vts.end()) {
          report("causal_delivery", i, {ev.to}, "apply of a never-sent record");
          continue;
        }
        if (counts[ev.to][ev.from] != ev.seq) {
          report("causal_delivery", i, {ev.to, ev.from},
                 "per-sender delivery out of order or gapped");
        }
        for (NodeId j = 0; j < cfg.n; ++j) {
          std::uint32_t need = it->second[j];
          if (j == ev.from) need -= 1;
          if (counts[ev.to][j] < need) {
            report("causal_delivery", i, {ev.to, j},
                   "record applied before its causal history");
            break;
          }
        }
        counts[ev.to][ev.from] += 1;
      }
    }
  }

  // Period bound 1: no raw for step s+1 is broadcast before period s starts.
  // Period bound 2: no certificate for step s covers a raw formulated after
  // period s+1 began. Both evaluated in trace order so that an advance and
  // the broadcasts it triggers within one delivery stay correctly ordered.
  void check_period_bounds() {
    const std::uint32_t majority = cfg.n / 2 + 1;
    std::vector<Step> steps(cfg.n, 0);
    Step frontier = 0;
    std::map<Step, std::size_t> period_start_idx;
    period_start_idx[0] = 0;
    std::unordered_map<MsgId, std::size_t> raw_idx;

    auto reached = [&](Step s) {
      std::uint32_t c = 0;
      for (Step x : steps) {
        if (x >= s) c++;
      }
      return c >= majority;
    };

    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const auto& ev = trace.events[i];
      if (ev.kind == TraceKind::Advance) {
        steps[ev.node] = ev.to_step;
        while (reached(frontier + 1)) {
          frontier++;
          period_start_idx[frontier] = i;
        }
      } else if (ev.kind == TraceKind::Send && ev.mkind == MessageKind::Raw) {
        raw_idx[ev.msg] = i;
        if (ev.step > frontier + 1) {
          std::ostringstream os;
          os << "raw for step " << ev.step << " sent before period "
             << ev.step - 1 << " started";
          report("period_bound_1", i, {ev.node}, os.str());
        }
      } else if (ev.kind == TraceKind::Cert) {
        auto pit = period_start_idx.find(ev.step + 1);
        auto rit = raw_idx.find(ev.of);
        if (rit == raw_idx.end()) {
          report("period_bound_2", i, {ev.node}, "certificate for unknown raw");
        } else if (pit != period_start_idx.end() && rit->second >= pit->second) {
          std::ostringstream os;
          os << "step-" << ev.step << " certificate covers a raw formulated after "
             << "period " << ev.step + 1 << " began";
          report("period_bound_2", i, {ev.node}, os.str());
        }
      }
    }
  }

  // Every certified step-s raw that some advancer used is in every node's
  // causal history by that node's own advance to step s+2 (or beyond).
  void check_two_step_broadcast() {
    std::map<Step, std::set<MsgId>> used;  // step -> basis raws of s -> s+1 advances
    for (const auto& ev : trace.events) {
      if (ev.kind == TraceKind::Advance && ev.via == AdvanceVia::Threshold) {
        used[ev.from_step].insert(ev.basis.begin(), ev.basis.end());
      }
    }
    std::vector<std::unordered_map<MsgId, std::size_t>> applied(cfg.n);
    std::vector<std::map<Step, std::size_t>> first_reach(cfg.n);
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const auto& ev = trace.events[i];
      if (ev.kind == TraceKind::Apply && ev.mkind == MessageKind::Raw) {
        applied[ev.to].emplace(ev.msg, i);
      } else if (ev.kind == TraceKind::Advance) {
        first_reach[ev.node].emplace(ev.to_step, i);
      }
    }
    for (const auto& [s, msgs] : used) {
      for (NodeId k = 0; k < cfg.n; ++k) {
        // First advance of k to a step >= s+2, if any.
        auto it = first_reach[k].lower_bound(s + 2);
        if (it == first_reach[k].end()) continue;
        for (MsgId m : msgs) {
          auto ait = applied[k].find(m);
          if (ait == applied[k].end() || ait->second > it->second) {
            std::ostringstream os;
            os << "certified step-" << s << " raw " << m
               << " not in node's history by its step-" << s + 2 << " advance";
            report("two_step_broadcast", it->second, {k}, os.str());
            break;
          }
        }
      }
    }
  }

  // Legal quiescence: every still-pending envelope originates in the final
  // delay set; live nodes are never left mutually stuck.
  void check_quiescence() {
    std::vector<NodeId> sd;
    std::vector<Step> steps(cfg.n, 0);
    std::optional<std::size_t> halt_idx;
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const auto& ev = trace.events[i];
      if (ev.kind == TraceKind::SdSet) sd = ev.sd;
      if (ev.kind == TraceKind::Advance) steps[ev.node] = ev.to_step;
      if (ev.kind == TraceKind::Halt) halt_idx = i;
    }
    if (!halt_idx) return;
    const auto& halt = trace.events[*halt_idx];
    if (halt.reason != HaltReason::Quiescent) return;
    for (NodeId s : halt.pending_senders) {
      if (std::find(sd.begin(), sd.end(), s) == sd.end()) {
        report("liveness_quiescence", *halt_idx, {s},
               "quiescent with a pending envelope from a live sender");
        return;
      }
    }
    if (halt.pending_senders.empty()) {
      for (NodeId i = 0; i < cfg.n; ++i) {
        if (steps[i] < cfg.max_step) {
          report("liveness_quiescence", *halt_idx, {i},
                 "deadlock: no pending envelopes but a node has not finished");
          return;
        }
      }
    }
  }

  void check_qsc() {
    const std::uint32_t stride = cfg.pipeline ? 3 : 1;
    std::unordered_map<MsgId, MsgId> parent_of;
    std::map<Round, std::pair<MsgId, std::size_t>> committed_best;
    // finalized[node][round] = proposal, with the event index that pinned it
    std::vector<std::map<Round, std::pair<MsgId, std::size_t>>> finalized(cfg.n);

    auto lineage_rounds = [&](Round r) {
      std::vector<Round> rs;
      for (Round x = r;; x -= stride) {
        rs.push_back(x);
        if (x < stride) break;
      }
      return rs;
    };

    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const auto& ev = trace.events[i];
      if (ev.kind == TraceKind::Propose) {
        parent_of[ev.msg] = ev.parent;
      } else if (ev.kind == TraceKind::Commit) {
        auto [it, fresh] = committed_best.try_emplace(ev.round, ev.best, i);
        if (!fresh && it->second.first != ev.best) {
          report("qsc_commit_safety", i, {ev.node},
                 "two nodes committed different proposals for one round");
        }
        // Irrevocability: walk this commit's lineage; a round may never be
        // re-finalized to a different proposal at the same node.
        MsgId cur = ev.best;
        for (Round r : lineage_rounds(ev.round)) {
          auto [fit, added] = finalized[ev.node].try_emplace(r, cur, i);
          if (!added && fit->second.first != cur) {
            std::ostringstream os;
            os << "node's finalized round " << r << " changed";
            report("qsc_irrevocability", i, {ev.node}, os.str());
            break;
          }
          auto pit = parent_of.find(cur);
          if (pit == parent_of.end() || pit->second == kNoMsg) break;
          cur = pit->second;
        }
      }
    }

    // Commit safety also binds every node's resolution of the round.
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const auto& ev = trace.events[i];
      if (ev.kind != TraceKind::Resolve) continue;
      auto it = committed_best.find(ev.round);
      if (it != committed_best.end() && it->second.first != ev.best) {
        std::size_t idx = std::max(i, it->second.second);
        report("qsc_commit_safety", idx, {ev.node},
               "a node resolved a committed round to a different proposal");
      }
    }

    // Prefix consistency: any two nodes' finalized chains agree on every
    // round both have finalized (chains are contiguous per lane, so this is
    // exactly the prefix relation).
    for (NodeId a = 0; a < cfg.n; ++a) {
      for (NodeId b = a + 1; b < cfg.n; ++b) {
        for (const auto& [r, pa] : finalized[a]) {
          auto bit = finalized[b].find(r);
          if (bit != finalized[b].end() && bit->second.first != pa.first) {
            report("qsc_prefix_consistency", std::max(pa.second, bit->second.second),
                   {a, b}, "finalized chains disagree on a common round");
          }
        }
      }
    }
  }
};

}  // namespace

std::vector<Violation> check_all(const Trace& trace) {
  Checker c(trace);
  c.run();
  return c.out;
}

std::string format_violation(const Violation& v) {
  std::ostringstream os;
  os << v.property << " at event " << v.event_index << " (e=" << v.e << ")";
  if (!v.nodes.empty()) {
    os << " nodes[";
    for (std::size_t i = 0; i < v.nodes.size(); ++i) {
      if (i) os << ',';
      os << v.nodes[i];
    }
    os << ']';
  }
  os << ": " << v.detail;
  return os.str();
}

}  // namespace tlcqsc
