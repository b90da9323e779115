#include "tlcqsc/sha256.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace tlcqsc {

Digest sha256(const std::uint8_t* data, std::size_t len) {
  Digest out{};
  unsigned int out_len = 0;
  if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 ||
      out_len != out.size()) {
    throw std::runtime_error("sha256: EVP_Digest failed");
  }
  return out;
}

Digest sha256(const std::vector<std::uint8_t>& data) {
  return sha256(data.data(), data.size());
}

std::string hex(const Digest& d) { return hex_prefix(d, d.size()); }

std::string hex_prefix(const Digest& d, std::size_t bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(bytes * 2);
  for (std::size_t i = 0; i < bytes && i < d.size(); ++i) {
    s.push_back(digits[d[i] >> 4]);
    s.push_back(digits[d[i] & 0xF]);
  }
  return s;
}

}  // namespace tlcqsc
