#include "semsum/pipeline.hpp"

#include <chrono>

#include "semsum/text.hpp"

namespace semsum {
namespace {

using SteadyClock = std::chrono::steady_clock;

double seconds_since(SteadyClock::time_point start) {
  return std::chrono::duration<double>(SteadyClock::now() - start).count();
}

// Accumulates calls into one trace.
class Ledger {
 public:
  Ledger(AnswerTrace& trace, Providers& providers)
      : t_(trace), p_(providers), start_(SteadyClock::now()) {}

  ChatResponse chat(const ChatRequest& request) {
    const auto start = SteadyClock::now();
    ChatResponse r = p_.chat.chat(request);
    const double wall = seconds_since(start);
    t_.input_tokens += r.input_token_count;
    t_.output_tokens += r.output_token_count;
    t_.latency_llm += modeled() ? r.provider_latency : wall;
    ++t_.chat_calls;
    return r;
  }

  EmbeddingVector embed(std::string_view s) {
    const auto start = SteadyClock::now();
    TimedEmbedding e = p_.embed.embed_timed(s);
    const double wall = seconds_since(start);
    t_.latency_encoding += modeled() ? e.latency : wall;
    return std::move(e.vector);
  }

  // Runs a cache operation over `entries` candidates.
  template <typename F>
  auto cache_op(std::size_t entries, F&& op) {
    const auto start = SteadyClock::now();
    struct Charge {
      Ledger& l;
      SteadyClock::time_point start;
      std::size_t entries;
      ~Charge() {
        l.t_.latency_cache_search +=
            l.modeled() ? l.p_.search_model.cost(entries) : seconds_since(start);
      }
    } charge{*this, start, entries};
    return op();
  }

  void finish() {
    if (modeled()) {
      t_.latency_total = t_.latency_llm + t_.latency_cache_search + t_.latency_encoding;
    } else {
      t_.latency_total = seconds_since(start_);
    }
  }

 private:
  bool modeled() const { return p_.latency == LatencyMode::modeled; }

  AnswerTrace& t_;
  Providers& p_;
  SteadyClock::time_point start_;
};

AnswerTrace new_trace(const std::string& doc_id, const std::string& question_id, Method method) {
  AnswerTrace t;
  t.doc_id = doc_id;
  t.question_id = question_id;
  t.method = method;
  return t;
}

void require_question(const std::string& question) {
  if (question.empty()) throw EmptyInputError("question must not be empty");
}

void require_document(const Document& doc) {
  if (doc.text.empty()) throw EmptyInputError("document " + doc.doc_id + " has no text");
}

// Brings the cache's view of the document to doc.version.
void sync_document(SemanticCache& cache, const Document& doc) {
  const auto current = cache.document_version(doc.doc_id);
  if (!current) {
    cache.register_document(doc.doc_id, doc.version);
  } else if (*current < doc.version) {
    cache.invalidate_document(doc.doc_id, doc.version);
  } else if (*current > doc.version) {
    throw StaleVersionError("document " + doc.doc_id + " is cached at version " +
                            std::to_string(*current) + ", request carries " +
                            std::to_string(doc.version));
  }
}

std::size_t scope_entries(const SemanticCache& cache, const std::string& doc_id) {
  return cache.config().scope == CacheScope::global ? cache.size()
                                                    : cache.document_entry_count(doc_id);
}

std::string checked_summary(std::string text) {
  if (text::word_count(text) == 0) throw ProviderProtocolError("model returned an empty summary");
  return text;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::full_document:
      return "full_document";
    case Method::no_retrieval:
      return "no_retrieval";
    case Method::noncontextual_summary:
      return "noncontextual_summary";
    case Method::contextual_summary_cached:
      return "contextual_summary_cached";
    case Method::full_prompt_answer_cache:
      return "full_prompt_answer_cache";
  }
  return "full_document";
}

Method method_from_string(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method: " + std::string(name));
}

void MethodConfig::validate() const {
  if (!(similarity_threshold >= 0.0 && similarity_threshold <= 1.0)) {
    throw ConfigError("similarity threshold must lie in [0, 1]");
  }
  if (summary_word_budget < 1) throw ConfigError("summary word budget must be >= 1");
}

std::optional<std::string> SummaryStore::get(const std::string& doc_id,
                                             std::uint64_t version) const {
  std::lock_guard lock(mutex_);
  const auto it = summaries_.find({doc_id, version});
  if (it == summaries_.end()) return std::nullopt;
  return it->second;
}

void SummaryStore::put(const std::string& doc_id, std::uint64_t version, std::string summary) {
  std::lock_guard lock(mutex_);
  summaries_[{doc_id, version}] = std::move(summary);
}

std::size_t SummaryStore::erase_document(const std::string& doc_id) {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (auto it = summaries_.lower_bound({doc_id, 0});
       it != summaries_.end() && it->first.first == doc_id;) {
    it = summaries_.erase(it);
    ++n;
  }
  return n;
}

std::size_t SummaryStore::size() const {
  std::lock_guard lock(mutex_);
  return summaries_.size();
}

std::string clamp_summary(const std::string& summary, std::uint32_t word_budget) {
  const std::size_t limit = 3 * static_cast<std::size_t>(word_budget) / 2;
  auto words = text::split_words(summary);
  if (words.size() <= limit) return summary;
  words.resize(limit);
  return text::join(words, " ");
}

AnswerTrace answer_full_document(const Document& doc, const std::string& question_id,
                                 const std::string& question, Providers& providers) {
  require_document(doc);
  require_question(question);
  AnswerTrace t = new_trace(doc.doc_id, question_id, Method::full_document);
  Ledger ledger(t, providers);
  t.answer_text = ledger.chat(build_answer_prompt(doc.text, question)).text;
  t.reference_text = doc.text;
  ledger.finish();
  return t;
}

AnswerTrace answer_no_retrieval(const std::string& doc_id, const std::string& question_id,
                                const std::string& question, Providers& providers) {
  require_question(question);
  AnswerTrace t = new_trace(doc_id, question_id, Method::no_retrieval);
  Ledger ledger(t, providers);
  t.answer_text = ledger.chat(build_answer_prompt(kNoDocumentReference, question)).text;
  t.reference_text = std::string(kNoDocumentReference);
  ledger.finish();
  return t;
}

AnswerTrace answer_noncontextual_summary(const Document& doc, const std::string& question_id,
                                         const std::string& question, Providers& providers,
                                         SummaryStore& store, std::uint32_t word_budget) {
  require_document(doc);
  require_question(question);
  if (word_budget < 1) throw ConfigError("summary word budget must be >= 1");
  AnswerTrace t = new_trace(doc.doc_id, question_id, Method::noncontextual_summary);
  t.budget = word_budget;
  Ledger ledger(t, providers);

  std::optional<std::string> summary = store.get(doc.doc_id, doc.version);
  if (!summary) {
    summary = checked_summary(
        ledger.chat(build_noncontextual_summary_prompt(doc.text, word_budget)).text);
    store.put(doc.doc_id, doc.version, *summary);
  }
  t.answer_text = ledger.chat(build_answer_prompt(*summary, question)).text;
  t.reference_text = *summary;
  t.summary_doc_version = doc.version;
  ledger.finish();
  return t;
}

AnswerTrace answer_contextual_cached(const Document& doc, const std::string& question_id,
                                     const std::string& question, Providers& providers,
                                     SemanticCache& cache, const MethodConfig& config) {
  require_document(doc);
  require_question(question);
  config.validate();
  AnswerTrace t = new_trace(doc.doc_id, question_id, Method::contextual_summary_cached);
  t.threshold = config.similarity_threshold;
  t.budget = config.summary_word_budget;
  Ledger ledger(t, providers);

  const EmbeddingVector q = ledger.embed(question);
  sync_document(cache, doc);
  const auto hit = ledger.cache_op(scope_entries(cache, doc.doc_id), [&] {
    return cache.lookup(doc.doc_id, question, q, config.similarity_threshold);
  });

  std::string summary;
  if (hit) {
    t.cache_hit = true;
    t.similarity_of_hit = hit->similarity;
    t.summary_doc_version = hit->entry.doc_version;
    summary = hit->entry.summary_text;
  } else {
    summary = clamp_summary(
        checked_summary(ledger
                            .chat(build_contextual_summary_prompt(doc.text, question,
                                                                  config.summary_word_budget))
                            .text),
        config.summary_word_budget);
    ledger.cache_op(0, [&] {
      return cache.insert_summary(doc.doc_id, doc.version, question, q, summary,
                                  config.summary_word_budget);
    });
    t.summary_doc_version = doc.version;
  }
  t.answer_text = ledger.chat(build_answer_prompt(summary, question)).text;
  t.reference_text = std::move(summary);
  ledger.finish();
  return t;
}

AnswerTrace answer_prompt_cached(const Document& doc, const std::string& question_id,
                                 const std::string& question, Providers& providers,
                                 SemanticCache& answer_cache, const MethodConfig& config) {
  require_document(doc);
  require_question(question);
  config.validate();
  AnswerTrace t = new_trace(doc.doc_id, question_id, Method::full_prompt_answer_cache);
  t.threshold = config.similarity_threshold;
  Ledger ledger(t, providers);

  const ChatRequest request = build_answer_prompt(doc.text, question);
  const EmbeddingVector key = ledger.embed(render_prompt(request));
  sync_document(answer_cache, doc);
  const auto hit = ledger.cache_op(scope_entries(answer_cache, doc.doc_id), [&] {
    return answer_cache.lookup(doc.doc_id, question, key, config.similarity_threshold);
  });

  if (hit) {
    t.cache_hit = true;
    t.similarity_of_hit = hit->similarity;
    t.answer_text = hit->entry.summary_text;
  } else {
    t.answer_text = ledger.chat(request).text;
    t.reference_text = doc.text;
    const std::size_t words = text::word_count(t.answer_text);
    if (words > 0) {
      ledger.cache_op(0, [&] {
        return answer_cache.insert_summary(doc.doc_id, doc.version, question, key, t.answer_text,
                                           static_cast<std::uint32_t>(words));
      });
    }
  }
  ledger.finish();
  return t;
}

MethodRunner::MethodRunner(MethodConfig config, Providers providers, CacheConfig cache_config)
    : config_(config),
      providers_(providers),
      summary_cache_(providers.embed.dim(), cache_config),
      answer_cache_(providers.embed.dim(), cache_config) {
  config_.validate();
}

AnswerTrace MethodRunner::answer(const Document& doc, const std::string& question_id,
                                 const std::string& question) {
  AnswerTrace t;
  switch (config_.method) {
    case Method::full_document:
      t = answer_full_document(doc, question_id, question, providers_);
      break;
    case Method::no_retrieval:
      t = answer_no_retrieval(doc.doc_id, question_id, question, providers_);
      break;
    case Method::noncontextual_summary:
      t = answer_noncontextual_summary(doc, question_id, question, providers_, summary_store_,
                                       config_.summary_word_budget);
      break;
    case Method::contextual_summary_cached:
      return answer_contextual_cached(doc, question_id, question, providers_, summary_cache_,
                                      config_);
    case Method::full_prompt_answer_cache:
      t = answer_prompt_cached(doc, question_id, question, providers_, answer_cache_, config_);
      break;
  }
  // Config columns are recorded for every method so report rows line up.
  t.threshold = config_.similarity_threshold;
  t.budget = config_.summary_word_budget;
  return t;
}

std::size_t MethodRunner::invalidate_document(const std::string& doc_id,
                                              std::uint64_t new_version) {
  std::size_t removed = 0;
  for (SemanticCache* cache : {&summary_cache_, &answer_cache_}) {
    const auto current = cache->document_version(doc_id);
    if (!current) {
      cache->register_document(doc_id, new_version);
    } else {
      removed += cache->invalidate_document(doc_id, new_version);
    }
  }
  summary_store_.erase_document(doc_id);
  return removed;
}

}  // namespace semsum
