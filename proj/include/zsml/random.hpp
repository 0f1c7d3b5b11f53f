#ifndef ZSML_RANDOM_HPP
#define ZSML_RANDOM_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace zsml {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Sub-seed for a named module/phase. Every random stream in the project is
// derived from one master seed through this, so any stage can be rerun in
// isolation and reproduce its part of a larger run.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  return splitmix64(master ^ fnv1a64(tag));
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::string_view tag) {
  return std::mt19937_64(derive_seed(master, tag));
}

} // namespace zsml

#endif // ZSML_RANDOM_HPP
