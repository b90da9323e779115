#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tlcqsc {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(const std::uint8_t* data, std::size_t len);
Digest sha256(const std::vector<std::uint8_t>& data);

std::string hex(const Digest& d);
std::string hex_prefix(const Digest& d, std::size_t bytes);

}  // namespace tlcqsc
