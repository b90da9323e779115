#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlcqsc/qsc.hpp"
#include "tlcqsc/types.hpp"

namespace tlcqsc {

/// One delivery of an exhaustive schedule: sender's record `seq` to
/// `recipient`.
struct ScheduleStep {
  NodeId sender = 0;
  std::uint32_t seq = 0;
  NodeId recipient = 0;
};

struct ExhaustiveResult {
  enum class Status { Safe, Violated, Inconclusive } status = Status::Safe;
  std::vector<ScheduleStep> counterexample;  // schedule reaching the violation
  std::string detail;
  std::uint64_t states_explored = 0;
  std::uint64_t states_merged = 0;

  bool safe() const { return status == Status::Safe; }
};

/// Enumerates every delivery interleaving of a small instance and checks the
/// commit-safety invariant in every reachable state. Exploration branches
/// only on causally ready deliveries (delivering an unready envelope merely
/// buffers it, so every behavior is preserved) and merges states with equal
/// canonical digests. A blown state budget yields Inconclusive, never a
/// silent pass. Small instances only: n <= 4, rounds <= 2.
ExhaustiveResult exhaustive_safety(std::uint32_t n, std::uint32_t t_m,
                                   std::uint32_t t_w, Round rounds,
                                   std::uint64_t state_budget = 20'000'000,
                                   QscConfig::Rule rule = QscConfig::Rule::Standard,
                                   std::uint64_t seed = 0);

}  // namespace tlcqsc
