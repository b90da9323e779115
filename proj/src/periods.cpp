#include "tlcqsc/periods.hpp"

#include <stdexcept>
#include <vector>

namespace tlcqsc {

std::map<Step, std::pair<EventIndex, EventIndex>> global_periods(
    const Trace& trace, const TraceConfig& config) {
  if (!config.majoritarian()) {
    throw std::invalid_argument("global_periods: requires majority thresholds");
  }
  const std::uint32_t majority = config.n / 2 + 1;
  std::vector<Step> steps(config.n, 0);

  std::map<Step, std::pair<EventIndex, EventIndex>> periods;
  periods[0] = {0, kIndefinite};  // every node starts at step 0

  auto reached = [&](Step s) {
    std::uint32_t c = 0;
    for (Step x : steps) {
      if (x >= s) c++;
    }
    return c >= majority;
  };

  Step frontier = 0;  // highest step whose period has started
  for (const auto& ev : trace.events) {
    if (ev.kind != TraceKind::Advance) continue;
    steps[ev.node] = ev.to_step;
    while (reached(frontier + 1)) {
      frontier += 1;
      periods[frontier] = {ev.e, kIndefinite};
      periods[frontier - 1].second = ev.e;
    }
  }
  return periods;
}

}  // namespace tlcqsc
