#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace tadb {

// 64-bit FNV-1a; stable across platforms, unlike std::hash.
class Fnv1a {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
  }
  void update_word(std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (word >> (8 * i)) & 0xff;
      state_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a(std::string_view bytes) {
  Fnv1a h;
  h.update(bytes);
  return h.digest();
}

inline std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace tadb
