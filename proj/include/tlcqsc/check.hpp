#pragma once

#include <string>
#include <vector>

#include "tlcqsc/trace.hpp"
#include "tlcqsc/types.hpp"

namespace tlcqsc {

/// First offending event for one property: a minimal counterexample prefix.
struct Violation {
  std::string property;
  std::size_t event_index = 0;  // position in Trace::events
  EventIndex e = 0;             // virtual time of that event
  std::vector<NodeId> nodes;
  std::string detail;
};

/// Post-hoc verification of every asserted protocol property over a recorded
/// trace. Pure and deterministic; empty result means every enabled property
/// holds. Majoritarian-only checks are skipped for other configurations, and
/// the quiescence-legality check is skipped on truncated traces.
std::vector<Violation> check_all(const Trace& trace);

std::string format_violation(const Violation& v);

}  // namespace tlcqsc
