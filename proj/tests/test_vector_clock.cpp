#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "tlcqsc/splitmix64.hpp"
#include "tlcqsc/vector_clock.hpp"

using namespace tlcqsc;

namespace {

VectorClock vc(std::initializer_list<std::uint32_t> xs) {
  VectorClock v(xs.size());
  std::size_t i = 0;
  for (auto x : xs) v[i++] = x;
  return v;
}

VectorClock random_vc(SplitMix64& rng, std::size_t n, std::uint32_t bound) {
  VectorClock v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = static_cast<std::uint32_t>(rng.next_below(bound));
  }
  return v;
}

}  // namespace

TEST_CASE("component-wise dominance") {
  CHECK(VectorClock::leq(vc({1, 0, 0}), vc({1, 1, 0})));
  CHECK_FALSE(VectorClock::leq(vc({1, 0, 0}), vc({0, 1, 0})));  // concurrent
  auto a = vc({3, 1, 4});
  CHECK(VectorClock::leq(a, a));  // reflexive
}

TEST_CASE("dimension mismatch is a usage error") {
  CHECK_THROWS_AS(VectorClock::leq(vc({1, 2}), vc({1, 2, 3})), std::invalid_argument);
  auto a = vc({1, 2});
  CHECK_THROWS_AS(a.merge(vc({1, 2, 3})), std::invalid_argument);
}

TEST_CASE("leq is a partial order on random vectors") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    auto a = random_vc(rng, 4, 5), b = random_vc(rng, 4, 5), c = random_vc(rng, 4, 5);
    CHECK(VectorClock::leq(a, a));
    if (VectorClock::leq(a, b) && VectorClock::leq(b, a)) CHECK(a == b);
    if (VectorClock::leq(a, b) && VectorClock::leq(b, c)) {
      CHECK(VectorClock::leq(a, c));
    }
  }
}

TEST_CASE("merge is the component-wise max: commutative, associative, idempotent") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 2000; ++trial) {
    auto a = random_vc(rng, 3, 9), b = random_vc(rng, 3, 9), c = random_vc(rng, 3, 9);

    auto ab = a;
    ab.merge(b);
    auto ba = b;
    ba.merge(a);
    CHECK(ab == ba);

    auto ab_c = ab;
    ab_c.merge(c);
    auto bc = b;
    bc.merge(c);
    auto a_bc = a;
    a_bc.merge(bc);
    CHECK(ab_c == a_bc);

    auto aa = a;
    aa.merge(a);
    CHECK(aa == a);

    // The merge is an upper bound of both inputs.
    CHECK(VectorClock::leq(a, ab));
    CHECK(VectorClock::leq(b, ab));
  }
}
