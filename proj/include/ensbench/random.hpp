#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace ensbench {

// Seed derivation
// ---------------
// Every random stream in the library is keyed by a master seed plus an
// ordered path of integer labels (dataset, learner, method, run, fold,
// member, purpose). derive_seed folds the labels into the master seed with
// the splitmix64 finalizer:
//
//   h  = splitmix64(master)
//   h  = splitmix64(h ^ (label_i + 0x9e3779b97f4a7c15 * (i + 1)))   for each i
//
// Text labels (dataset names, purpose tags) are reduced to integers with
// 64-bit FNV-1a first. The result depends only on the label values and their
// order, so serial and parallel execution draw identical streams.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t label_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> labels) {
  std::uint64_t h = splitmix64(master);
  std::uint64_t i = 0;
  for (std::uint64_t label : labels) {
    ++i;
    h = splitmix64(h ^ (label + 0x9e3779b97f4a7c15ULL * i));
  }
  return h;
}

// Purpose tags keep streams that share a (run, fold, member) path apart.
namespace purpose {
inline constexpr std::uint64_t folds = label_hash("folds");
inline constexpr std::uint64_t ensemble = label_hash("ensemble");
inline constexpr std::uint64_t resample = label_hash("resample");
inline constexpr std::uint64_t init = label_hash("init");
inline constexpr std::uint64_t noise = label_hash("noise");
inline constexpr std::uint64_t synthetic = label_hash("synthetic");
}  // namespace purpose

/// Portable random stream.
///
/// std::mt19937_64's output sequence is fixed by the standard, but the
/// standard distributions are not, so integer and real draws are derived
/// here directly from the engine's 64-bit words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n); n must be positive. Rejection sampling, unbiased.
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound + 1) % bound;
    std::uint64_t x = engine_();
    while (x > limit) x = engine_();
    return static_cast<std::size_t>(x % bound);
  }

  /// Uniform real in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ensbench
