#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "semsum/semindex.hpp"
#include "semsum/vectorspace.hpp"

namespace semsum {

/// Microseconds since the Unix epoch.
using Timestamp = std::int64_t;
using Clock = std::function<Timestamp()>;

Timestamp system_now();

enum class CacheScope : std::uint8_t { per_document = 0, global = 1 };

struct CacheConfig {
  double similarity_threshold = 0.8;
  std::size_t capacity = 100000;
  CacheScope scope = CacheScope::per_document;

  /// Throws ConfigError on a threshold outside [0, 1] or zero capacity.
  void validate() const;
};

struct CacheEntry {
  EntryId entry_id = 0;
  std::string doc_id;
  std::uint64_t doc_version = 0;
  std::string query_text;
  StoredEmbedding query_embedding;
  std::string summary_text;
  std::uint32_t summary_word_budget = 0;
  Timestamp created_at = 0;
  std::uint64_t hit_count = 0;
  std::optional<Timestamp> last_hit_at;
};

struct CacheHit {
  CacheEntry entry;
  double similarity = 0.0;
};

struct CacheStats {
  std::uint64_t entries = 0;
  std::uint64_t lookups = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  /// Entries removed by document invalidation.
  std::uint64_t invalidations = 0;
  std::uint64_t inserts = 0;
  std::uint64_t flushes = 0;
  /// Entries removed by flushes.
  std::uint64_t flushed = 0;
  double hit_rate = 0.0;
};

/// Semantic cache of query-aware summaries keyed on query embeddings.
///
/// Entries are scoped to their document (or pooled, with CacheScope::global)
/// and to the document's live version. Capacity overflow evicts the least
/// recently used entry, where a hit or an insert counts as a use.
///
/// Query embeddings are stored at float precision, the precision of the
/// snapshot format, so a restored cache answers lookups bit-for-bit like the
/// original.
class SemanticCache {
 public:
  SemanticCache(Eigen::Index dim, CacheConfig config, Clock clock = system_now);
  ~SemanticCache();

  SemanticCache(SemanticCache&&) noexcept;
  SemanticCache& operator=(SemanticCache&&) noexcept;

  Eigen::Index dim() const noexcept { return dim_; }
  const CacheConfig& config() const noexcept { return config_; }

  /// Adds a document at `version`. Re-registering at the live version is a
  /// no-op; any other version must go through invalidate_document.
  void register_document(const std::string& doc_id, std::uint64_t version);
  std::optional<std::uint64_t> document_version(const std::string& doc_id) const;

  std::optional<CacheHit> lookup(const std::string& doc_id, const std::string& query_text,
                                 const EmbeddingVector& query_embedding,
                                 std::optional<double> threshold_override = std::nullopt);

  CacheEntry insert_summary(const std::string& doc_id, std::uint64_t doc_version,
                            const std::string& query_text,
                            const EmbeddingVector& query_embedding,
                            const std::string& summary_text, std::uint32_t word_budget);

  /// Purges every entry of `doc_id` and moves it to `new_version`.
  std::size_t invalidate_document(const std::string& doc_id, std::uint64_t new_version);

  /// Removes all entries; counters and document versions are kept.
  std::size_t flush();

  CacheStats stats() const;
  std::size_t size() const;
  std::size_t document_entry_count(const std::string& doc_id) const;

  /// Copies of all entries ordered by entry id.
  std::vector<CacheEntry> entries() const;

  struct DocumentInfo {
    std::string doc_id;
    std::uint64_t version = 0;
    std::size_t entries = 0;
  };
  /// Registered documents ordered by id.
  std::vector<DocumentInfo> documents() const;

  void snapshot(std::ostream& out) const;
  void snapshot(const std::filesystem::path& destination) const;
  static SemanticCache restore(std::istream& in, Clock clock = system_now);
  static SemanticCache restore(const std::filesystem::path& source, Clock clock = system_now);

 private:
  struct Slot;
  struct DocState {
    std::uint64_t version = 0;
    std::size_t entries = 0;
  };

  const std::string& scope_key(const std::string& doc_id) const;
  SemIndex<float>& index_for(const std::string& key);
  void erase_locked(EntryId id);
  void evict_one_locked();
  void insert_restored_locked(CacheEntry entry, std::uint64_t last_access);

  Eigen::Index dim_;
  CacheConfig config_;
  Clock clock_;

  mutable std::unique_ptr<std::shared_mutex> mutex_;
  std::unordered_map<EntryId, std::unique_ptr<Slot>> slots_;
  std::unordered_map<std::string, SemIndex<float>> indexes_;
  std::unordered_map<std::string, DocState> docs_;
  EntryId next_id_ = 0;

  struct Counters;
  std::unique_ptr<Counters> counters_;
};

}  // namespace semsum
