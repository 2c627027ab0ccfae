#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "oclopt/rng.hpp"
#include "oclopt/stream.hpp"

namespace oclopt {

/// Holdout items are tagged so that a stricter mode can keep the online
/// validation split apart from the metric-evaluation split.
enum class RecordTag : std::uint8_t { kTrain = 0, kValidation = 1, kEvaluation = 2 };

struct Record {
  Example example;
  std::uint64_t id = 0;
  std::uint64_t arrival = 0;
  RecordTag tag = RecordTag::kTrain;
};

/// Record ids are (t, position in batch) packed into one integer.
inline std::uint64_t record_id(std::uint64_t t, std::size_t index) {
  return (t << 20) | static_cast<std::uint64_t>(index);
}

/// Pointers into pool / batch storage; valid until the next pool mutation.
using Minibatch = std::vector<const Example*>;

/// Training pool S_t: a reservoir (Algorithm R) under a capacity limit.
class DataPool {
 public:
  static constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

  explicit DataPool(std::size_t capacity = kUnlimited, std::uint64_t seed = 0);

  /// Offers one record; returns true if it was stored.
  bool offer(Record record);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::uint64_t seen_count() const { return seen_; }
  const std::vector<Record>& items() const { return items_; }
  /// True while items are stored in arrival order (no eviction has happened).
  bool arrival_sorted() const { return sorted_; }

  // Single-step transaction used by the protocol driver.
  void begin();
  void commit();
  void rollback();

  /// Little-endian layout: u32 d_in, then per record d_in f64 features,
  /// f64 label, u64 arrival step. Loading sets seen_count = record count.
  void save(const std::string& path) const;
  static DataPool load(const std::string& path, std::size_t capacity = kUnlimited,
                       std::uint64_t seed = 0);

 private:
  struct Undo {
    std::size_t slot;
    Record previous;
  };

  std::size_t capacity_;
  std::vector<Record> items_;
  std::uint64_t seen_ = 0;
  bool sorted_ = true;
  CounterRng rng_;

  bool in_txn_ = false;
  std::size_t txn_size_ = 0;
  std::uint64_t txn_seen_ = 0;
  bool txn_sorted_ = true;
  CounterRng txn_rng_;
  std::vector<Undo> undo_;
};

/// Holdout pool S_t^V. Every datum of a batch is routed here independently
/// with probability `fraction`; never capacity-limited.
class HoldoutPool {
 public:
  explicit HoldoutPool(double fraction = 0.05, std::uint64_t seed = 0, bool split_tags = false);

  double fraction() const { return fraction_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const std::vector<Record>& items() const { return items_; }
  /// Number of stored items with arrival <= t (items are arrival-ordered).
  std::size_t count_until(std::uint64_t t) const;
  bool split_tags() const { return split_tags_; }

  void begin();
  void commit();
  void rollback();

 private:
  friend std::vector<std::size_t> update(DataPool&, HoldoutPool&, const StreamBatch&);

  double fraction_;
  bool split_tags_;
  std::vector<Record> items_;
  CounterRng rng_;
  std::size_t txn_size_ = 0;
  CounterRng txn_rng_;
  std::uint64_t last_t_ = 0;
  std::uint64_t txn_last_t_ = 0;
};

/// Integrates a batch: each datum goes to the holdout with probability
/// holdout.fraction(), otherwise it is offered to the reservoir. Returns the
/// batch indices routed to training.
std::vector<std::size_t> update(DataPool& pool, HoldoutPool& holdout, const StreamBatch& batch);

/// m draws uniform with replacement over stored items.
Minibatch sample_pure_replay(const DataPool& pool, std::size_t m, CounterRng& rng);

/// m/2 draws from the current step's training data and m/2 from stored items
/// with arrival in [t − window, t − 1]. window = 0 means t − 1 (full
/// history). If the history window is empty all m come from the current
/// data; if the current data is empty all m come from the history.
Minibatch sample_mixed_replay(const DataPool& pool, const StreamBatch& current,
                              std::span<const std::size_t> current_train, std::size_t m,
                              std::uint64_t window, CounterRng& rng);

/// Uniform with replacement over holdout items with arrival <= t and the
/// requested tag (kTrain acts as "any tag").
Minibatch sample_holdout(const HoldoutPool& holdout, std::uint64_t t, std::size_t m,
                         CounterRng& rng, RecordTag tag = RecordTag::kTrain);

}  // namespace oclopt
