#include "tlcqsc/vector_clock.hpp"

#include <algorithm>
#include <stdexcept>

namespace tlcqsc {

bool VectorClock::leq(const VectorClock& a, const VectorClock& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("VectorClock::leq: dimension mismatch");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
  }
  return true;
}

void VectorClock::merge(const VectorClock& other) {
  if (size() != other.size()) {
    throw std::invalid_argument("VectorClock::merge: dimension mismatch");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    entries_[i] = std::max(entries_[i], other.entries_[i]);
  }
}

}  // namespace tlcqsc
