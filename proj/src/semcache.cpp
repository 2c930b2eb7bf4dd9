#include "semsum/semcache.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>

#include "semcache_internal.hpp"
#include "semsum/text.hpp"

namespace semsum {
namespace {

const std::string kGlobalScope;

}  // namespace

Timestamp system_now() {
  using namespace std::chrono;
  return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
}

void CacheConfig::validate() const {
  if (!(similarity_threshold >= 0.0 && similarity_threshold <= 1.0)) {
    throw ConfigError("similarity threshold must lie in [0, 1]");
  }
  if (capacity < 1) throw ConfigError("cache capacity must be >= 1");
}

SemanticCache::SemanticCache(Eigen::Index dim, CacheConfig config, Clock clock)
    : dim_(dim),
      config_(config),
      clock_(std::move(clock)),
      mutex_(std::make_unique<std::shared_mutex>()),
      counters_(std::make_unique<Counters>()) {
  if (dim < 1) throw DimensionError("cache dimension must be >= 1");
  config_.validate();
}

SemanticCache::~SemanticCache() = default;
SemanticCache::SemanticCache(SemanticCache&&) noexcept = default;
SemanticCache& SemanticCache::operator=(SemanticCache&&) noexcept = default;

const std::string& SemanticCache::scope_key(const std::string& doc_id) const {
  return config_.scope == CacheScope::global ? kGlobalScope : doc_id;
}

SemIndex<float>& SemanticCache::index_for(const std::string& key) {
  auto it = indexes_.find(key);
  if (it == indexes_.end()) it = indexes_.emplace(key, SemIndex<float>(dim_)).first;
  return it->second;
}

void SemanticCache::register_document(const std::string& doc_id, std::uint64_t version) {
  std::unique_lock lock(*mutex_);
  const auto it = docs_.find(doc_id);
  if (it == docs_.end()) {
    docs_.emplace(doc_id, DocState{version, 0});
    return;
  }
  if (it->second.version != version) {
    throw VersionOrderError("document " + doc_id + " is registered at version " +
                            std::to_string(it->second.version) +
                            "; use invalidate_document to change it");
  }
}

std::optional<std::uint64_t> SemanticCache::document_version(const std::string& doc_id) const {
  std::shared_lock lock(*mutex_);
  const auto it = docs_.find(doc_id);
  if (it == docs_.end()) return std::nullopt;
  return it->second.version;
}

std::optional<CacheHit> SemanticCache::lookup(const std::string& doc_id,
                                              const std::string& /*query_text*/,
                                              const EmbeddingVector& query_embedding,
                                              std::optional<double> threshold_override) {
  check_same_dim(query_embedding.size(), dim_);
  const double threshold = threshold_override.value_or(config_.similarity_threshold);
  const StoredEmbedding probe = query_embedding.cast<float>();

  std::shared_lock lock(*mutex_);
  if (docs_.find(doc_id) == docs_.end()) {
    throw UnknownDocumentError("unknown document: " + doc_id);
  }
  counters_->lookups.fetch_add(1);

  std::optional<Match> match;
  if (const auto it = indexes_.find(scope_key(doc_id)); it != indexes_.end()) {
    match = it->second.query_best(probe, threshold);
  }
  if (match) {
    Slot& slot = *slots_.at(match->entry_id);
    // Invalidation purges eagerly; this guards the invariant if that ever changes.
    if (slot.entry.doc_version != docs_.at(slot.entry.doc_id).version) match.reset();
  }
  if (!match) {
    counters_->misses.fetch_add(1);
    return std::nullopt;
  }

  Slot& slot = *slots_.at(match->entry_id);
  slot.hit_count.fetch_add(1);
  slot.last_hit_at.store(clock_());
  slot.last_access.store(counters_->tick.fetch_add(1) + 1);
  counters_->hits.fetch_add(1);
  return CacheHit{slot.materialize(), match->similarity};
}

CacheEntry SemanticCache::insert_summary(const std::string& doc_id, std::uint64_t doc_version,
                                         const std::string& query_text,
                                         const EmbeddingVector& query_embedding,
                                         const std::string& summary_text,
                                         std::uint32_t word_budget) {
  check_same_dim(query_embedding.size(), dim_);
  check_embedding(query_embedding);
  if (is_zero(query_embedding)) throw DegenerateVectorError("zero query embedding");
  if (word_budget < 1) throw Error("summary word budget must be >= 1");
  const std::size_t words = text::word_count(summary_text);
  if (words == 0) throw EmptyInputError("summary text is empty");
  if (2 * words > 3 * static_cast<std::size_t>(word_budget)) {
    throw Error("summary has " + std::to_string(words) + " words, over 1.5x the budget of " +
                std::to_string(word_budget));
  }

  std::unique_lock lock(*mutex_);
  const auto doc = docs_.find(doc_id);
  if (doc == docs_.end()) throw UnknownDocumentError("unknown document: " + doc_id);
  if (doc->second.version != doc_version) {
    throw StaleVersionError("document " + doc_id + " is at version " +
                            std::to_string(doc->second.version) + ", not " +
                            std::to_string(doc_version));
  }
  if (slots_.size() >= config_.capacity) evict_one_locked();

  auto slot = std::make_unique<Slot>();
  CacheEntry& e = slot->entry;
  e.entry_id = next_id_++;
  e.doc_id = doc_id;
  e.doc_version = doc_version;
  e.query_text = query_text;
  e.query_embedding = query_embedding.cast<float>();
  e.summary_text = summary_text;
  e.summary_word_budget = word_budget;
  e.created_at = clock_();
  slot->last_access.store(counters_->tick.fetch_add(1) + 1);

  index_for(scope_key(doc_id)).insert(e.query_embedding, e.entry_id);
  CacheEntry out = slot->materialize();
  slots_.emplace(e.entry_id, std::move(slot));
  ++docs_[doc_id].entries;
  counters_->inserts.fetch_add(1);
  return out;
}

void SemanticCache::erase_locked(EntryId id) {
  const auto it = slots_.find(id);
  if (it == slots_.end()) return;
  const std::string& doc_id = it->second->entry.doc_id;
  if (auto idx = indexes_.find(scope_key(doc_id)); idx != indexes_.end()) {
    idx->second.remove(id);
    if (idx->second.empty()) indexes_.erase(idx);
  }
  if (auto d = docs_.find(doc_id); d != docs_.end() && d->second.entries > 0) {
    --d->second.entries;
  }
  slots_.erase(it);
}

void SemanticCache::evict_one_locked() {
  if (slots_.empty()) return;
  auto victim = slots_.begin();
  for (auto it = slots_.begin(); it != slots_.end(); ++it) {
    if (it->second->last_access.load() < victim->second->last_access.load()) victim = it;
  }
  erase_locked(victim->first);
  counters_->evictions.fetch_add(1);
}

std::size_t SemanticCache::invalidate_document(const std::string& doc_id,
                                               std::uint64_t new_version) {
  std::unique_lock lock(*mutex_);
  const auto doc = docs_.find(doc_id);
  if (doc == docs_.end()) throw UnknownDocumentError("unknown document: " + doc_id);
  if (new_version <= doc->second.version) {
    throw VersionOrderError("new version " + std::to_string(new_version) +
                            " does not exceed current version " +
                            std::to_string(doc->second.version) + " of " + doc_id);
  }
  std::vector<EntryId> doomed;
  for (const auto& [id, slot] : slots_) {
    if (slot->entry.doc_id == doc_id) doomed.push_back(id);
  }
  for (EntryId id : doomed) erase_locked(id);
  doc->second.version = new_version;
  doc->second.entries = 0;
  counters_->invalidations.fetch_add(doomed.size());
  return doomed.size();
}

std::size_t SemanticCache::flush() {
  std::unique_lock lock(*mutex_);
  const std::size_t removed = slots_.size();
  slots_.clear();
  indexes_.clear();
  for (auto& [id, doc] : docs_) doc.entries = 0;
  counters_->flushes.fetch_add(1);
  counters_->flushed.fetch_add(removed);
  return removed;
}

CacheStats SemanticCache::stats() const {
  std::shared_lock lock(*mutex_);
  CacheStats s;
  s.entries = slots_.size();
  s.lookups = counters_->lookups.load();
  s.hits = counters_->hits.load();
  s.misses = counters_->misses.load();
  s.evictions = counters_->evictions.load();
  s.invalidations = counters_->invalidations.load();
  s.inserts = counters_->inserts.load();
  s.flushes = counters_->flushes.load();
  s.flushed = counters_->flushed.load();
  s.hit_rate = s.lookups == 0 ? 0.0 : static_cast<double>(s.hits) / static_cast<double>(s.lookups);
  return s;
}

std::size_t SemanticCache::size() const {
  std::shared_lock lock(*mutex_);
  return slots_.size();
}

std::size_t SemanticCache::document_entry_count(const std::string& doc_id) const {
  std::shared_lock lock(*mutex_);
  const auto it = docs_.find(doc_id);
  return it == docs_.end() ? 0 : it->second.entries;
}

std::vector<CacheEntry> SemanticCache::entries() const {
  std::shared_lock lock(*mutex_);
  std::vector<CacheEntry> out;
  out.reserve(slots_.size());
  for (const auto& [id, slot] : slots_) out.push_back(slot->materialize());
  std::sort(out.begin(), out.end(),
            [](const CacheEntry& a, const CacheEntry& b) { return a.entry_id < b.entry_id; });
  return out;
}

std::vector<SemanticCache::DocumentInfo> SemanticCache::documents() const {
  std::shared_lock lock(*mutex_);
  std::vector<DocumentInfo> out;
  out.reserve(docs_.size());
  for (const auto& [id, doc] : docs_) out.push_back({id, doc.version, doc.entries});
  std::sort(out.begin(), out.end(),
            [](const DocumentInfo& a, const DocumentInfo& b) { return a.doc_id < b.doc_id; });
  return out;
}

void SemanticCache::insert_restored_locked(CacheEntry entry, std::uint64_t last_access) {
  auto slot = std::make_unique<Slot>();
  slot->hit_count.store(entry.hit_count);
  slot->last_hit_at.store(entry.last_hit_at.value_or(kNoTimestamp));
  slot->last_access.store(last_access);
  const EntryId id = entry.entry_id;
  index_for(scope_key(entry.doc_id)).insert(entry.query_embedding, id);
  ++docs_[entry.doc_id].entries;
  slot->entry = std::move(entry);
  slots_.emplace(id, std::move(slot));
}

}  // namespace semsum
