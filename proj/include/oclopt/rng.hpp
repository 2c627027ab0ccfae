#pragma once

#include <cstdint>

namespace oclopt {

/// Substream identifiers. Each purpose draws from an independent key so that
/// e.g. changing the replay sampler never perturbs the data stream.
enum class Purpose : std::uint64_t {
  kStreamStructure = 1,
  kBatch = 2,
  kEvaluation = 3,
  kRouting = 4,
  kReservoir = 5,
  kReplay = 6,
  kValidation = 7,
  kModelInit = 8,
  kTheory = 9,
  kTest = 10,
};

/// SplitMix64 in counter mode.
///
/// Draw i of a stream with key K is mix(K + (i + 1) * golden), so a stream is
/// fully described by (key, counter) and substreams for any (seed, purpose,
/// index) triple are random-access. All conversions to real numbers are
/// done here so that results do not depend on the standard library's
/// distribution implementations.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  CounterRng() = default;
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, Purpose purpose, std::uint64_t index = 0)
      : key_(derive(seed, purpose, index)) {}

  static std::uint64_t mix(std::uint64_t z);
  static std::uint64_t derive(std::uint64_t seed, Purpose purpose, std::uint64_t index = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n), n > 0 (multiply-shift, bias < n / 2^64).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via the Marsaglia polar method.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }
  /// Restores a position previously read with counter(); drops any cached normal.
  void seek(std::uint64_t counter) {
    counter_ = counter;
    has_spare_ = false;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace oclopt
