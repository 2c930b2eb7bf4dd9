// Reference models written without the library's code paths. Tests compare
// the library against these.
#pragma once

#include <cmath>
#include <cstdint>
#include <list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

inline bool alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : s) {
    if (alnum(c)) {
      cur.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Term-frequency feature hashing, L2 normalized. Empty when no token.
inline std::vector<double> hash_embed(std::string_view text, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  bool any = false;
  for (const auto& t : tokens(text)) {
    v[fnv1a(t) % dim] += 1.0;
    any = true;
  }
  if (!any) return {};
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

/// Linear scan over every live entry. Scores within `tie` of each other
/// count as equal and the latest insertion wins.
class ScanIndex {
 public:
  struct Best {
    std::uint64_t id;
    double similarity;
  };

  void insert(std::uint64_t id, std::vector<double> v) {
    entries_.push_back({id, seq_++, std::move(v), true});
  }

  bool remove(std::uint64_t id) {
    for (auto& e : entries_) {
      if (e.live && e.id == id) {
        e.live = false;
        return true;
      }
    }
    return false;
  }

  std::optional<Best> best(const std::vector<double>& probe, double threshold,
                           double tie = 1e-12) const {
    const Entry* pick = nullptr;
    double pick_sim = 0.0;
    for (const auto& e : entries_) {
      if (!e.live) continue;
      const double s = std::fmax(-1.0, std::fmin(1.0, cosine(e.v, probe)));
      if (pick == nullptr || s > pick_sim + tie ||
          (std::fabs(s - pick_sim) <= tie && e.seq > pick->seq)) {
        pick = &e;
        pick_sim = s;
      }
    }
    if (pick == nullptr || pick_sim < threshold) return std::nullopt;
    return Best{pick->id, pick_sim};
  }

 private:
  struct Entry {
    std::uint64_t id;
    std::uint64_t seq;
    std::vector<double> v;
    bool live;
  };
  std::vector<Entry> entries_;
  std::uint64_t seq_ = 0;
};

/// Recency list: front is the least recently used key.
class LruModel {
 public:
  explicit LruModel(std::size_t capacity) : capacity_(capacity) {}

  /// Returns the evicted key, if any.
  std::optional<std::uint64_t> insert(std::uint64_t key) {
    order_.push_back(key);
    if (order_.size() > capacity_) {
      const std::uint64_t victim = order_.front();
      order_.pop_front();
      return victim;
    }
    return std::nullopt;
  }

  void touch(std::uint64_t key) {
    order_.remove(key);
    order_.push_back(key);
  }

  void erase(std::uint64_t key) { order_.remove(key); }
  bool contains(std::uint64_t key) const {
    for (auto k : order_) {
      if (k == key) return true;
    }
    return false;
  }
  std::size_t size() const { return order_.size(); }

 private:
  std::size_t capacity_;
  std::list<std::uint64_t> order_;
};

}  // namespace oracle
