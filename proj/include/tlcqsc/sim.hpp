#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tlcqsc/policy.hpp"
#include "tlcqsc/trace.hpp"
#include "tlcqsc/world.hpp"

namespace tlcqsc {

struct SimConfig {
  std::uint32_t n = 1;
  std::uint32_t f_d = 0;            // max indefinitely delayed nodes, < n
  std::uint64_t seed = 0;
  std::string adversary = "oblivious";
  std::uint64_t max_events = 1'000'000;  // liveness bound on deliveries
  Step max_step = 0;
  TlcConfig tlc;
  QscConfig qsc;
  std::vector<DelaySetPolicy::Entry> delay_schedule;  // delayset adversary only

  void validate() const;
  TraceConfig trace_config() const;
};

struct RunResult {
  Trace trace;
  bool truncated = false;
  bool quiescent = false;
  std::vector<NodeId> pending_senders;  // senders of undelivered envelopes at halt
  World world;  // final protocol state, for statistics extraction

  RunResult(const SimConfig& cfg, Trace t, World w)
      : trace(std::move(t)), world(std::move(w)) {
    (void)cfg;
  }
};

/// Deterministic discrete-event run: alternates the policy's next_delivery
/// with node receive handlers until quiescence or the event budget. Identical
/// SimConfig gives a bit-identical Trace.
RunResult run_simulation(const SimConfig& cfg, bool record_trace = true);

}  // namespace tlcqsc
