#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <string_view>

namespace semcom {

// One deterministic random stream. Thin wrapper over mt19937_64 so all draws
// go through one place and stay reproducible per (master seed, stream name).
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return std::generate_canonical<double, 53>(gen_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(gen_); }
  // integer in [0, n)
  std::uint64_t integer(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
  }

  template <typename It>
  void shuffle(It first, It last) {
    std::shuffle(first, last, gen_);
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Named sub-streams derived deterministically from a master seed. The usual
// names are "init", "data", "eve_data", "fading", "noise", "dropout",
// "eve_fading", "eve_noise", "perturbation", "eval".
class RandomStreams {
 public:
  explicit RandomStreams(std::uint64_t master_seed) : master_(master_seed) {}

  Stream& get(std::string_view name);
  std::uint64_t master_seed() const { return master_; }

 private:
  std::uint64_t master_;
  std::map<std::string, std::unique_ptr<Stream>, std::less<>> streams_;
};

// splitmix64 finalizer; used to decorrelate derived stream seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

}  // namespace semcom
