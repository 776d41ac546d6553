#include "qrg/rng.hpp"

namespace qrg {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t name_hash(std::string_view name) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (b + 0x632BE59BD9B4E019ull + (a << 6) + (a >> 2)));
}

std::uint64_t stream_seed(std::uint64_t master, std::string_view name,
                          std::initializer_list<std::uint64_t> idx) {
  std::uint64_t s = mix_keys(splitmix64(master), name_hash(name));
  for (auto i : idx) s = mix_keys(s, i);
  return s;
}

}  // namespace qrg
