#include "tlcqsc/exhaustive.hpp"

#include <optional>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "tlcqsc/world.hpp"

namespace tlcqsc {

namespace {

bool ready_at(const LogRecord& rec, const std::vector<std::uint32_t>& delivered) {
  if (delivered[rec.node] != rec.seq) return false;
  for (std::size_t j = 0; j < delivered.size(); ++j) {
    std::uint32_t need = rec.vt[j];
    if (j == rec.node) need -= 1;
    if (delivered[j] < need) return false;
  }
  return true;
}

// Commit safety from the omniscient view: once any node committed round r to
// proposal p, every node resolving r must pick p.
std::optional<std::string> safety_violation(const World& w) {
  const auto& qcfg = w.config().qsc;
  for (Round r = 0; r < qcfg.rounds; ++r) {
    MsgId committed = kNoMsg;
    for (NodeId i = 0; i < w.config().n; ++i) {
      const RoundOutcome* oc = w.qsc(i).outcome(r);
      if (oc != nullptr && oc->committed) {
        if (committed == kNoMsg) committed = oc->best;
        if (oc->best != committed) {
          std::ostringstream os;
          os << "round " << r << ": conflicting commits " << committed << " vs "
             << oc->best;
          return os.str();
        }
      }
    }
    if (committed == kNoMsg) continue;
    for (NodeId i = 0; i < w.config().n; ++i) {
      const RoundOutcome* oc = w.qsc(i).outcome(r);
      if (oc != nullptr && oc->resolved && oc->best != committed) {
        std::ostringstream os;
        os << "round " << r << ": node " << i << " resolved " << oc->best
           << " against committed " << committed;
        return os.str();
      }
    }
  }
  return std::nullopt;
}

struct Key {
  std::uint64_t lo, hi;
  bool operator==(const Key&) const = default;
};
struct KeyHash {
  std::size_t operator()(const Key& k) const { return k.lo ^ (k.hi * 0x9E3779B97F4A7C15ULL); }
};

Key state_key(const World& w) {
  // Two independently salted digests; states merge only on a 128-bit match.
  return {w.state_fingerprint(0), w.state_fingerprint(0x2545F4914F6CDD1DULL)};
}

}  // namespace

ExhaustiveResult exhaustive_safety(std::uint32_t n, std::uint32_t t_m,
                                   std::uint32_t t_w, Round rounds,
                                   std::uint64_t state_budget, QscConfig::Rule rule,
                                   std::uint64_t seed) {
  if (n > 4 || rounds > 2) {
    throw std::invalid_argument("exhaustive_safety: n <= 4 and rounds <= 2 only");
  }
  WorldConfig wc;
  wc.n = n;
  wc.seed = seed;
  wc.tlc = TlcConfig{n, t_m, t_w, true};
  wc.qsc.enabled = true;
  wc.qsc.rounds = rounds;
  wc.qsc.rule = rule;
  wc.qsc.spoiler_horizon = QscConfig::Horizon::Eval;  // state merging relies on it
  wc.max_step = wc.qsc.last_step();

  ExhaustiveResult result;
  std::unordered_set<Key, KeyHash> seen;

  struct Frame {
    World world;
    std::vector<ScheduleStep> path;
  };
  std::vector<Frame> stack;

  {
    World w0(wc, nullptr);
    w0.start();
    w0.take_outbound();  // fan-out is implicit: pending = logs minus delivered
    stack.push_back({std::move(w0), {}});
  }

  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();

    if (auto bad = safety_violation(fr.world)) {
      result.status = ExhaustiveResult::Status::Violated;
      result.counterexample = fr.path;
      result.detail = *bad;
      return result;
    }
    if (++result.states_explored > state_budget) {
      result.status = ExhaustiveResult::Status::Inconclusive;
      result.detail = "state budget exceeded";
      return result;
    }

    // Branch over every causally ready undelivered record, per recipient.
    const RecordStore& store = fr.world.store();
    for (NodeId to = 0; to < n; ++to) {
      const auto& delivered = fr.world.holdback(to).delivered();
      for (NodeId from = 0; from < n; ++from) {
        if (from == to) continue;
        std::uint32_t next = delivered[from];
        if (next >= store.log_len(from)) continue;
        const LogRecord* rec = store.find(from, next);
        if (!ready_at(*rec, delivered)) continue;

        Frame child{fr.world, fr.path};
        child.world.deliver(rec->id, to, 0);
        child.world.take_outbound();
        child.path.push_back({from, next, to});
        Key k = state_key(child.world);
        if (seen.insert(k).second) {
          stack.push_back(std::move(child));
        } else {
          result.states_merged++;
        }
      }
    }
  }

  result.status = ExhaustiveResult::Status::Safe;
  return result;
}

}  // namespace tlcqsc
