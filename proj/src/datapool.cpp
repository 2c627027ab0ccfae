#include "oclopt/datapool.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "oclopt/errors.hpp"

namespace oclopt {

static_assert(std::endian::native == std::endian::little,
              "pool persistence assumes a little-endian host");

DataPool::DataPool(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed, Purpose::kReservoir) {
  if (capacity_ == 0) throw ConfigError("pool capacity must be >= 1");
}

bool DataPool::offer(Record record) {
  ++seen_;
  if (items_.size() < capacity_) {
    if (!items_.empty() && record.arrival < items_.back().arrival) sorted_ = false;
    items_.push_back(std::move(record));
    return true;
  }
  const std::uint64_t slot = rng_.below(seen_);
  if (slot >= capacity_) return false;
  if (in_txn_ && slot < txn_size_) undo_.push_back({slot, items_[slot]});
  items_[slot] = std::move(record);
  sorted_ = false;
  return true;
}

void DataPool::begin() {
  in_txn_ = true;
  txn_size_ = items_.size();
  txn_seen_ = seen_;
  txn_sorted_ = sorted_;
  txn_rng_ = rng_;
  undo_.clear();
}

void DataPool::commit() {
  in_txn_ = false;
  undo_.clear();
}

void DataPool::rollback() {
  if (!in_txn_) return;
  for (auto it = undo_.rbegin(); it != undo_.rend(); ++it) items_[it->slot] = std::move(it->previous);
  items_.resize(txn_size_);
  seen_ = txn_seen_;
  sorted_ = txn_sorted_;
  rng_ = txn_rng_;
  in_txn_ = false;
  undo_.clear();
}

namespace {

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool get(std::ifstream& in, T& value) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&value), sizeof(T)));
}

}  // namespace

void DataPool::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const auto d = static_cast<std::uint32_t>(items_.empty() ? 0 : items_.front().example.x.size());
  put(out, d);
  for (const auto& r : items_) {
    for (Eigen::Index i = 0; i < r.example.x.size(); ++i) put(out, r.example.x[i]);
    put(out, static_cast<double>(r.example.label));
    put(out, r.arrival);
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

DataPool DataPool::load(const std::string& path, std::size_t capacity, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::uint32_t d = 0;
  if (!get(in, d)) throw Error("truncated pool file '" + path + "'");
  DataPool pool(capacity, seed);
  std::vector<std::size_t> per_step;
  while (true) {
    Record r;
    r.example.x.resize(d);
    double first = 0.0;
    if (d > 0) {
      if (!get(in, first)) break;
      r.example.x[0] = first;
      for (std::uint32_t i = 1; i < d; ++i)
        if (!get(in, r.example.x[i])) throw Error("truncated record in '" + path + "'");
    }
    double label = 0.0;
    if (!get(in, label)) {
      if (d == 0) break;
      throw Error("truncated record in '" + path + "'");
    }
    if (!get(in, r.arrival)) throw Error("truncated record in '" + path + "'");
    r.example.label = static_cast<int>(label);
    if (per_step.size() <= r.arrival) per_step.resize(r.arrival + 1, 0);
    r.id = record_id(r.arrival, per_step[r.arrival]++);
    pool.offer(std::move(r));
  }
  return pool;
}

HoldoutPool::HoldoutPool(double fraction, std::uint64_t seed, bool split_tags)
    : fraction_(fraction), split_tags_(split_tags), rng_(seed, Purpose::kRouting) {
  if (!(fraction_ >= 0.0 && fraction_ <= 1.0)) throw ConfigError("holdout fraction must lie in [0, 1]");
}

std::size_t HoldoutPool::count_until(std::uint64_t t) const {
  const auto it = std::upper_bound(items_.begin(), items_.end(), t,
                                   [](std::uint64_t v, const Record& r) { return v < r.arrival; });
  return static_cast<std::size_t>(it - items_.begin());
}

void HoldoutPool::begin() {
  txn_size_ = items_.size();
  txn_rng_ = rng_;
  txn_last_t_ = last_t_;
}

void HoldoutPool::commit() {}

void HoldoutPool::rollback() {
  items_.resize(txn_size_);
  rng_ = txn_rng_;
  last_t_ = txn_last_t_;
}

std::vector<std::size_t> update(DataPool& pool, HoldoutPool& holdout, const StreamBatch& batch) {
  if (batch.t <= holdout.last_t_)
    throw Error("batch step " + std::to_string(batch.t) + " does not exceed the last integrated step");
  holdout.last_t_ = batch.t;
  std::vector<std::size_t> train;
  train.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Record r{batch.examples[i], record_id(batch.t, i), batch.t, RecordTag::kTrain};
    if (holdout.fraction_ > 0.0 && holdout.rng_.bernoulli(holdout.fraction_)) {
      r.tag = RecordTag::kValidation;
      if (holdout.split_tags_ && holdout.rng_.bernoulli(0.5)) r.tag = RecordTag::kEvaluation;
      holdout.items_.push_back(std::move(r));
    } else {
      pool.offer(std::move(r));
      train.push_back(i);
    }
  }
  return train;
}

Minibatch sample_pure_replay(const DataPool& pool, std::size_t m, CounterRng& rng) {
  if (pool.empty()) throw EmptyPoolError("pure replay from an empty pool");
  Minibatch out;
  out.reserve(m);
  const auto& items = pool.items();
  for (std::size_t i = 0; i < m; ++i) out.push_back(&items[rng.below(items.size())].example);
  return out;
}

Minibatch sample_mixed_replay(const DataPool& pool, const StreamBatch& current,
                              std::span<const std::size_t> current_train, std::size_t m,
                              std::uint64_t window, CounterRng& rng) {
  if (m % 2 != 0) throw ConfigError("mixed replay needs an even minibatch size");
  const std::uint64_t t = current.t;
  const std::uint64_t span = window == 0 ? (t > 0 ? t - 1 : 0) : std::min<std::uint64_t>(window, t - 1);
  const std::uint64_t lo = t - span;  // arrival in [lo, t-1]
  const auto& items = pool.items();
  auto in_window = [&](const Record& r) { return span > 0 && r.arrival >= lo && r.arrival < t; };

  Minibatch out;
  out.reserve(m);
  const std::size_t n_current = current_train.size();
  std::size_t from_current = m / 2;

  // Arrival-sorted pools give the window as a contiguous range.
  if (pool.arrival_sorted()) {
    std::size_t begin = 0, end = 0;
    if (span > 0) {
      auto first = std::lower_bound(items.begin(), items.end(), lo,
                                    [](const Record& r, std::uint64_t v) { return r.arrival < v; });
      auto last = std::lower_bound(first, items.end(), t,
                                   [](const Record& r, std::uint64_t v) { return r.arrival < v; });
      begin = static_cast<std::size_t>(first - items.begin());
      end = static_cast<std::size_t>(last - items.begin());
    }
    const std::size_t n_history = end - begin;
    if (n_history == 0 && n_current == 0)
      throw EmptyPoolError("mixed replay with neither current nor history data");
    if (n_history == 0) from_current = m;
    if (n_current == 0) from_current = 0;
    for (std::size_t i = 0; i < from_current; ++i)
      out.push_back(&current.examples[current_train[rng.below(n_current)]]);
    for (std::size_t i = from_current; i < m; ++i) out.push_back(&items[begin + rng.below(n_history)].example);
    return out;
  }

  // Reservoir order is arbitrary: rejection-sample the window, falling back
  // to an explicit candidate list when the window is a small part of the pool.
  Minibatch history;
  history.reserve(m);
  const std::size_t want = m - m / 2;
  std::size_t attempts = 0;
  while (span > 0 && history.size() < want && attempts < 32 * m + 64) {
    const Record& r = items[rng.below(items.size())];
    ++attempts;
    if (in_window(r)) history.push_back(&r.example);
  }
  std::vector<std::size_t> candidates;
  if (span > 0 && history.size() < want) {
    for (std::size_t i = 0; i < items.size(); ++i)
      if (in_window(items[i])) candidates.push_back(i);
  }
  const bool have_history = !history.empty() || !candidates.empty();
  if (!have_history && n_current == 0)
    throw EmptyPoolError("mixed replay with neither current nor history data");
  if (!have_history) from_current = m;
  if (n_current == 0) from_current = 0;
  for (std::size_t i = 0; i < from_current; ++i)
    out.push_back(&current.examples[current_train[rng.below(n_current)]]);
  const std::size_t need = m - from_current;
  std::size_t used = 0;
  while (out.size() < m && used < history.size() && used < need) out.push_back(history[used++]);
  while (out.size() < m) {
    if (!candidates.empty()) {
      out.push_back(&items[candidates[rng.below(candidates.size())]].example);
    } else {
      const Record* r = nullptr;
      do {
        r = &items[rng.below(items.size())];
      } while (!in_window(*r));
      out.push_back(&r->example);
    }
  }
  return out;
}

Minibatch sample_holdout(const HoldoutPool& holdout, std::uint64_t t, std::size_t m,
                         CounterRng& rng, RecordTag tag) {
  const std::size_t n = holdout.count_until(t);
  if (n == 0) return {};
  const auto& items = holdout.items();
  Minibatch out;
  out.reserve(m);
  if (tag == RecordTag::kTrain) {
    for (std::size_t i = 0; i < m; ++i) out.push_back(&items[rng.below(n)].example);
    return out;
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < n; ++i)
    if (items[i].tag == tag) eligible.push_back(i);
  if (eligible.empty()) return {};
  for (std::size_t i = 0; i < m; ++i) out.push_back(&items[eligible[rng.below(eligible.size())]].example);
  return out;
}

}  // namespace oclopt
