#pragma once

#include <cstdint>
#include <limits>

namespace tlcqsc {

using NodeId = std::uint32_t;
using Step = std::uint32_t;
using Round = std::uint32_t;
using MsgId = std::uint64_t;      // 0 is reserved as "none"
using EnvelopeId = std::uint64_t;
using EventIndex = std::uint64_t; // virtual time: count of network deliveries
using TicketValue = std::uint64_t;
using TxId = std::uint64_t;

inline constexpr MsgId kNoMsg = 0;
inline constexpr EventIndex kIndefinite = std::numeric_limits<EventIndex>::max();

}  // namespace tlcqsc
