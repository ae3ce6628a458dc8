#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace bilex {

/// 64-bit FNV-1a, used for representation fingerprints.
class Fnv1a {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) byte(c);
    byte(0xff);  // separator so ("ab","c") != ("a","bc")
  }
  void update_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<unsigned char>(v >> (8 * i)));
  }
  void update_double(double v) { update_u64(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t digest() const { return state_; }

 private:
  void byte(unsigned char c) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t v);

}  // namespace bilex
