#ifndef QEFORGE_HASH_H_
#define QEFORGE_HASH_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace qeforge {

// FNV-1a, 64 bit. Stable across platforms, unlike std::hash.
inline uint64_t Fnv1a64(std::string_view data, uint64_t salt = 0) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= (salt >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string HexDigest(uint64_t h) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = kHex[h & 0xf];
  return out;
}

}  // namespace qeforge

#endif  // QEFORGE_HASH_H_
