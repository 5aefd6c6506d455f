#pragma once

#include <cstdint>
#include <vector>

#include "cftp/event.hpp"
#include "cftp/rng.hpp"

namespace cftp {

// The fixed random event sequence u_0, u_{-1}, u_{-2}, ... shared by every
// horizon of one backward run. Labels are drawn lazily, each exactly once;
// extending the horizon never rewrites history, so re-reads are stable.
class BackwardEventStore {
 public:
  BackwardEventStore(const EventTable& table, std::uint64_t seed)
      : table_(&table), seed_(seed), rng_(seed) {}

  // Event index at time -t.
  int at(std::uint64_t t) {
    while (labels_.size() <= t) labels_.push_back(table_->draw(rng_));
    return labels_[t];
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t drawn() const { return labels_.size(); }
  const EventTable& table() const { return *table_; }

 private:
  const EventTable* table_;
  std::uint64_t seed_;
  Rng rng_;
  std::vector<int> labels_;
};

}  // namespace cftp
