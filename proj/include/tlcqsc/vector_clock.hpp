#pragma once

#include <cstdint>
#include <vector>

#include "tlcqsc/types.hpp"

namespace tlcqsc {

/// Per-node knowledge vector: entry j counts how many of node j's records are
/// covered (a record's own clock covers the record itself, so a record with
/// sequence number q from node j has vt[j] = q+1).
class VectorClock {
 public:
  VectorClock() = default;
  explicit VectorClock(std::size_t n) : entries_(n, 0) {}

  std::size_t size() const { return entries_.size(); }
  std::uint32_t operator[](std::size_t i) const { return entries_[i]; }
  std::uint32_t& operator[](std::size_t i) { return entries_[i]; }

  /// Component-wise a <= b. Dimension mismatch is a usage error.
  static bool leq(const VectorClock& a, const VectorClock& b);

  /// Component-wise maximum. Commutative, associative, idempotent.
  void merge(const VectorClock& other);

  bool operator==(const VectorClock& other) const = default;

  const std::vector<std::uint32_t>& entries() const { return entries_; }

 private:
  std::vector<std::uint32_t> entries_;
};

}  // namespace tlcqsc
