#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "semsum/document.hpp"
#include "semsum/providers.hpp"
#include "semsum/semcache.hpp"

namespace semsum {

enum class Method : std::uint8_t {
  full_document,
  no_retrieval,
  noncontextual_summary,
  contextual_summary_cached,
  full_prompt_answer_cache,
};

inline constexpr std::array<Method, 5> kAllMethods = {
    Method::full_document, Method::no_retrieval, Method::noncontextual_summary,
    Method::contextual_summary_cached, Method::full_prompt_answer_cache};

std::string_view to_string(Method method);
/// Accepts the snake_case names produced by to_string; throws ConfigError.
Method method_from_string(std::string_view name);

struct MethodConfig {
  Method method = Method::contextual_summary_cached;
  double similarity_threshold = 0.8;
  std::uint32_t summary_word_budget = 200;

  /// Throws ConfigError on a threshold outside [0, 1] or a zero budget.
  void validate() const;
};

struct AnswerTrace {
  std::string question_id;
  std::string doc_id;
  Method method = Method::full_document;
  double threshold = 0.0;
  std::uint32_t budget = 0;
  std::string answer_text;
  bool cache_hit = false;
  std::optional<double> similarity_of_hit;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  // Seconds.
  double latency_llm = 0.0;
  double latency_cache_search = 0.0;
  double latency_encoding = 0.0;
  double latency_total = 0.0;
  std::optional<double> utility;

  std::uint32_t chat_calls = 0;
  /// Text the answer was generated from: a summary, the document, or the
  /// no-document placeholder. Empty on answer-cache hits.
  std::string reference_text;
  /// Document version of the summary used, for the summary methods.
  std::optional<std::uint64_t> summary_doc_version;
};

/// How trace latencies are obtained. `modeled` charges the providers'
/// reported latencies and a fixed cache-search cost model, so traces are
/// reproducible; `measured` uses wall-clock time for every component and
/// counts the remainder of the request only in latency_total.
enum class LatencyMode { modeled, measured };

struct CacheSearchModel {
  double base_s = 1e-6;
  double per_entry_s = 1e-8;

  double cost(std::size_t entries) const {
    return base_s + per_entry_s * static_cast<double>(entries);
  }
};

struct Providers {
  ChatProvider& chat;
  EmbeddingProvider& embed;
  LatencyMode latency = LatencyMode::modeled;
  CacheSearchModel search_model{};
};

/// Query-agnostic summaries, one per (document, version).
class SummaryStore {
 public:
  std::optional<std::string> get(const std::string& doc_id, std::uint64_t version) const;
  void put(const std::string& doc_id, std::uint64_t version, std::string summary);
  /// Drops every version of `doc_id`; returns how many were held.
  std::size_t erase_document(const std::string& doc_id);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::uint64_t>, std::string> summaries_;
};

AnswerTrace answer_full_document(const Document& doc, const std::string& question_id,
                                 const std::string& question, Providers& providers);

/// Answers from the model's own knowledge; `doc_id` only labels the trace.
AnswerTrace answer_no_retrieval(const std::string& doc_id, const std::string& question_id,
                                const std::string& question, Providers& providers);

AnswerTrace answer_noncontextual_summary(const Document& doc, const std::string& question_id,
                                         const std::string& question, Providers& providers,
                                         SummaryStore& store, std::uint32_t word_budget);

AnswerTrace answer_contextual_cached(const Document& doc, const std::string& question_id,
                                     const std::string& question, Providers& providers,
                                     SemanticCache& cache, const MethodConfig& config);

/// Baseline keyed on the embedding of the whole answer prompt. Answers are
/// kept in a SemanticCache of their own, one word budget per answer length.
AnswerTrace answer_prompt_cached(const Document& doc, const std::string& question_id,
                                 const std::string& question, Providers& providers,
                                 SemanticCache& answer_cache, const MethodConfig& config);

/// Summaries longer than 1.5x the budget are cut to that many words so the
/// cache accepts them.
std::string clamp_summary(const std::string& summary, std::uint32_t word_budget);

/// One method configuration together with the stores it owns.
class MethodRunner {
 public:
  MethodRunner(MethodConfig config, Providers providers, CacheConfig cache_config = {});

  AnswerTrace answer(const Document& doc, const std::string& question_id,
                     const std::string& question);

  /// Moves `doc_id` to `new_version` in every store. Returns the number of
  /// cached entries removed.
  std::size_t invalidate_document(const std::string& doc_id, std::uint64_t new_version);

  const MethodConfig& config() const noexcept { return config_; }
  SemanticCache& summary_cache() noexcept { return summary_cache_; }
  SemanticCache& answer_cache() noexcept { return answer_cache_; }
  SummaryStore& summary_store() noexcept { return summary_store_; }

 private:
  MethodConfig config_;
  Providers providers_;
  SemanticCache summary_cache_;
  SemanticCache answer_cache_;
  SummaryStore summary_store_;
};

}  // namespace semsum
