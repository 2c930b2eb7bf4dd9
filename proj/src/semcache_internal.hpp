#pragma once

#include <atomic>
#include <limits>

#include "semsum/semcache.hpp"

namespace semsum {

inline constexpr Timestamp kNoTimestamp = std::numeric_limits<Timestamp>::min();

struct SemanticCache::Slot {
  CacheEntry entry;
  std::atomic<std::uint64_t> hit_count{0};
  std::atomic<Timestamp> last_hit_at{kNoTimestamp};
  std::atomic<std::uint64_t> last_access{0};

  CacheEntry materialize() const {
    CacheEntry out = entry;
    out.hit_count = hit_count.load();
    const Timestamp t = last_hit_at.load();
    if (t != kNoTimestamp) out.last_hit_at = t;
    return out;
  }
};

struct SemanticCache::Counters {
  std::atomic<std::uint64_t> lookups{0};
  std::atomic<std::uint64_t> hits{0};
  std::atomic<std::uint64_t> misses{0};
  std::atomic<std::uint64_t> evictions{0};
  std::atomic<std::uint64_t> invalidations{0};
  std::atomic<std::uint64_t> inserts{0};
  std::atomic<std::uint64_t> flushes{0};
  std::atomic<std::uint64_t> flushed{0};
  std::atomic<std::uint64_t> tick{0};
};

}  // namespace semsum
