#pragma once

#include <map>
#include <utility>

#include "tlcqsc/trace.hpp"
#include "tlcqsc/types.hpp"

namespace tlcqsc {

/// Global time periods: period s begins at the event where a majority of
/// nodes (the (n/2+1)-th) first reaches step s, and ends where period s+1
/// begins (kIndefinite while still open at the end of the trace). Computed
/// post hoc — no node knows these boundaries online. Majoritarian
/// configurations only; throws otherwise.
std::map<Step, std::pair<EventIndex, EventIndex>> global_periods(
    const Trace& trace, const TraceConfig& config);

}  // namespace tlcqsc
