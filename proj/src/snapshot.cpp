// Binary snapshot of a SemanticCache.
//
// Layout (all integers little-endian):
//   "SSC1"  u32 header_len  header[header_len]
//   header: u32 dim, u64 entry_count, u64 doc_count, f64 threshold,
//           u64 capacity, u8 scope, u64 x 9 counters, u64 next_entry_id
//   doc_count   x { str doc_id, u64 version }
//   entry_count x { u64 id, str doc_id, u64 doc_version, str query,
//                   f32 x dim embedding, str summary, u32 budget,
//                   i64 created_at, u64 hit_count, u8 has_last_hit,
//                   i64 last_hit_at, u64 last_access }
//   str = u32 byte length + UTF-8 bytes

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <sstream>

#include "semcache_internal.hpp"

namespace semsum {
namespace {

constexpr char kMagic[4] = {'S', 'S', 'C', '1'};
constexpr std::uint32_t kHeaderBytes = 4 + 8 + 8 + 8 + 8 + 1 + 9 * 8 + 8;

class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& out) : out_(out) {}

  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }

  template <typename T>
  void uint(T v) {
    unsigned char b[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    raw(b, sizeof(T));
  }

  void u8(std::uint8_t v) { uint(v); }
  void u32(std::uint32_t v) { uint(v); }
  void u64(std::uint64_t v) { uint(v); }
  void i64(std::int64_t v) { uint(static_cast<std::uint64_t>(v)); }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }

 private:
  std::ostream& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string data) : data_(std::move(data)) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw SnapshotFormatError(std::string("truncated snapshot while reading ") + what, pos_);
    }
  }

  template <typename T>
  T uint(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::uint8_t u8(const char* what) { return uint<std::uint8_t>(what); }
  std::uint32_t u32(const char* what) { return uint<std::uint32_t>(what); }
  std::uint64_t u64(const char* what) { return uint<std::uint64_t>(what); }
  std::int64_t i64(const char* what) { return static_cast<std::int64_t>(u64(what)); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

  std::string str(const char* what) {
    const std::size_t at = pos_;
    const std::uint32_t n = u32(what);
    if (remaining() < n) {
      throw SnapshotFormatError(std::string("string length overruns snapshot in ") + what, at);
    }
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

void SemanticCache::snapshot(std::ostream& out) const {
  std::shared_lock lock(*mutex_);
  ByteWriter w(out);

  w.raw(kMagic, 4);
  w.u32(kHeaderBytes);
  w.u32(static_cast<std::uint32_t>(dim_));
  w.u64(slots_.size());
  w.u64(docs_.size());
  w.f64(config_.similarity_threshold);
  w.u64(config_.capacity);
  w.u8(static_cast<std::uint8_t>(config_.scope));
  w.u64(counters_->lookups.load());
  w.u64(counters_->hits.load());
  w.u64(counters_->misses.load());
  w.u64(counters_->evictions.load());
  w.u64(counters_->invalidations.load());
  w.u64(counters_->inserts.load());
  w.u64(counters_->flushes.load());
  w.u64(counters_->flushed.load());
  w.u64(counters_->tick.load());
  w.u64(next_id_);

  std::vector<std::pair<std::string, std::uint64_t>> docs;
  for (const auto& [id, d] : docs_) docs.emplace_back(id, d.version);
  std::sort(docs.begin(), docs.end());
  for (const auto& [id, version] : docs) {
    w.str(id);
    w.u64(version);
  }

  std::vector<const Slot*> ordered;
  for (const auto& [id, slot] : slots_) ordered.push_back(slot.get());
  std::sort(ordered.begin(), ordered.end(),
            [](const Slot* a, const Slot* b) { return a->entry.entry_id < b->entry.entry_id; });
  for (const Slot* slot : ordered) {
    const CacheEntry e = slot->materialize();
    w.u64(e.entry_id);
    w.str(e.doc_id);
    w.u64(e.doc_version);
    w.str(e.query_text);
    for (Eigen::Index k = 0; k < dim_; ++k) w.f32(e.query_embedding[k]);
    w.str(e.summary_text);
    w.u32(e.summary_word_budget);
    w.i64(e.created_at);
    w.u64(e.hit_count);
    w.u8(e.last_hit_at ? 1 : 0);
    w.i64(e.last_hit_at.value_or(0));
    w.u64(slot->last_access.load());
  }
  if (!out) throw Error("failed to write cache snapshot");
}

void SemanticCache::snapshot(const std::filesystem::path& destination) const {
  // Write-then-rename keeps the previous snapshot intact on failure.
  std::filesystem::path tmp = destination;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open snapshot destination " + tmp.string());
    snapshot(out);
    out.flush();
    if (!out) throw Error("failed to write snapshot " + tmp.string());
  }
  std::filesystem::rename(tmp, destination);
}

SemanticCache SemanticCache::restore(std::istream& in, Clock clock) {
  ByteReader r(std::string(std::istreambuf_iterator<char>(in), {}));

  if (r.bytes(4, "magic") != std::string(kMagic, 4)) {
    throw SnapshotFormatError("bad magic, expected SSC1", 0);
  }
  const std::size_t header_at = r.offset();
  const std::uint32_t header_len = r.u32("header length");
  if (header_len != kHeaderBytes) {
    throw SnapshotFormatError("unsupported header length " + std::to_string(header_len),
                              header_at);
  }
  r.need(header_len, "header");

  const std::size_t dim_at = r.offset();
  const std::uint32_t dim = r.u32("dim");
  if (dim < 1) throw SnapshotFormatError("dimension must be >= 1", dim_at);
  const std::uint64_t entry_count = r.u64("entry count");
  const std::uint64_t doc_count = r.u64("document count");

  CacheConfig config;
  config.similarity_threshold = r.f64("threshold");
  config.capacity = r.u64("capacity");
  const std::size_t scope_at = r.offset();
  const std::uint8_t scope = r.u8("scope");
  if (scope > 1) throw SnapshotFormatError("unknown cache scope", scope_at);
  config.scope = static_cast<CacheScope>(scope);

  SemanticCache cache(static_cast<Eigen::Index>(dim), config, std::move(clock));
  Counters& c = *cache.counters_;
  c.lookups = r.u64("lookups");
  c.hits = r.u64("hits");
  c.misses = r.u64("misses");
  c.evictions = r.u64("evictions");
  c.invalidations = r.u64("invalidations");
  c.inserts = r.u64("inserts");
  c.flushes = r.u64("flushes");
  c.flushed = r.u64("flushed");
  c.tick = r.u64("tick");
  cache.next_id_ = r.u64("next entry id");

  for (std::uint64_t i = 0; i < doc_count; ++i) {
    std::string id = r.str("document id");
    const std::uint64_t version = r.u64("document version");
    cache.docs_[std::move(id)] = DocState{version, 0};
  }

  std::unique_lock lock(*cache.mutex_);
  for (std::uint64_t i = 0; i < entry_count; ++i) {
    const std::size_t entry_at = r.offset();
    CacheEntry e;
    e.entry_id = r.u64("entry id");
    e.doc_id = r.str("entry document id");
    e.doc_version = r.u64("entry document version");
    e.query_text = r.str("query text");
    e.query_embedding.resize(dim);
    for (std::uint32_t k = 0; k < dim; ++k) e.query_embedding[k] = r.f32("embedding");
    e.summary_text = r.str("summary text");
    e.summary_word_budget = r.u32("word budget");
    e.created_at = r.i64("created_at");
    e.hit_count = r.u64("hit count");
    const std::uint8_t has_last_hit = r.u8("last hit flag");
    const std::int64_t last_hit = r.i64("last hit");
    if (has_last_hit) e.last_hit_at = last_hit;
    const std::uint64_t last_access = r.u64("last access");

    const auto doc = cache.docs_.find(e.doc_id);
    if (doc == cache.docs_.end() || doc->second.version != e.doc_version) {
      throw SnapshotFormatError("entry refers to an unknown document version", entry_at);
    }
    if (!e.query_embedding.allFinite() || e.query_embedding.squaredNorm() == 0.0f) {
      throw SnapshotFormatError("entry embedding is not a usable vector", entry_at);
    }
    if (cache.slots_.count(e.entry_id)) {
      throw SnapshotFormatError("duplicate entry id", entry_at);
    }
    cache.insert_restored_locked(std::move(e), last_access);
  }
  if (r.remaining() != 0) throw SnapshotFormatError("trailing bytes after last entry", r.offset());
  lock.unlock();
  return cache;
}

SemanticCache SemanticCache::restore(const std::filesystem::path& source, Clock clock) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw Error("cannot open snapshot " + source.string());
  return restore(in, std::move(clock));
}

}  // namespace semsum
