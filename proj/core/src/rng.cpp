#include "semcom/rng.hpp"

namespace semcom {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

Stream& RandomStreams::get(std::string_view name) {
  auto it = streams_.find(name);
  if (it == streams_.end()) {
    std::uint64_t seed = mix_seed(master_ ^ mix_seed(fnv1a64(name)));
    it = streams_.emplace(std::string(name), std::make_unique<Stream>(seed)).first;
  }
  return *it->second;
}

}  // namespace semcom
