#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace abstain {

// 64-bit FNV-1a. Used for payload checksums and keyed id hashing; chosen over
// std::hash because the result must be identical across platforms and runs.
inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
  return fnv1a64(s.data(), s.size(), seed);
}

// splitmix64 finalizer; mixes a key with a seed into a well-distributed word.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t keyed_hash(std::string_view key, std::uint64_t seed,
                                std::uint64_t salt = 0) {
  return mix64(fnv1a64(key) ^ mix64(seed ^ salt));
}

// Maps a keyed hash into [0,1).
inline double hash_to_unit(std::string_view key, std::uint64_t seed,
                           std::uint64_t salt = 0) {
  return static_cast<double>(keyed_hash(key, seed, salt) >> 11) * 0x1.0p-53;
}

std::string to_hex(std::uint64_t value);

}  // namespace abstain
