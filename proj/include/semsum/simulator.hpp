#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semsum/corpus.hpp"
#include "semsum/metrics.hpp"
#include "semsum/pipeline.hpp"

namespace semsum {

struct SimulationOptions {
  std::uint64_t order_seed = 1;
  /// Score against FullDocument answers instead of the corpus gold answers.
  bool gold_from_full_document = false;
  CacheConfig cache{};
  LatencyMode latency = LatencyMode::modeled;
};

/// Indexes into corpus.questions in replay order: one seeded shuffle across
/// all documents.
std::vector<std::size_t> question_order(const Corpus& corpus, std::uint64_t seed);

struct RunResult {
  /// One per method config, in input order.
  std::vector<RunReport> reports;
  /// Stats of the cache each config used (summary cache, or answer cache for
  /// the prompt-cache baseline; zeros for methods without a cache).
  std::vector<CacheStats> cache_stats;
  std::vector<std::size_t> order;
  bool complete = true;
  /// Provider failure that stopped the run, if any.
  std::string error;
};

/// Replays the shuffled question stream once per config against fresh
/// stores and scores each trace with `utility_embed` (defaults to `embed`).
/// A provider failure stops the run; traces produced so far are kept.
RunResult run_stream(const Corpus& corpus, const std::vector<MethodConfig>& configs,
                     ChatProvider& chat, EmbeddingProvider& embed,
                     const SimulationOptions& options = {},
                     EmbeddingProvider* utility_embed = nullptr);

/// ContextualSummaryCached over the threshold x budget grid, identical
/// streams. Reports are ordered by threshold, then budget.
RunResult run_sweep(const Corpus& corpus, const std::vector<double>& thresholds,
                    const std::vector<std::uint32_t>& budgets, ChatProvider& chat,
                    EmbeddingProvider& embed, const SimulationOptions& options = {});

/// run_sweep at the single budget of `config`.
RunResult threshold_selection_sweep(const Corpus& corpus, const std::vector<double>& thresholds,
                                    const MethodConfig& config, ChatProvider& chat,
                                    EmbeddingProvider& embed,
                                    const SimulationOptions& options = {});

/// One row per report: threshold, budget, hit rate and the mean/std
/// utility, token and latency figures.
std::string sweep_to_csv(const std::vector<RunReport>& reports, const std::string& corpus_label);

struct UpdateResult {
  std::uint64_t version = 0;
  std::size_t word_count = 0;
  /// Cached entries purged across all runners.
  std::size_t removed = 0;
};

/// Replaces the document text, bumps its version and invalidates it in every
/// runner. Throws UnknownDocumentError, EmptyInputError, or IntegrityError
/// when the new text fails the word filter.
UpdateResult apply_document_update(Corpus& corpus, const std::string& doc_id,
                                   std::string new_text, const std::vector<MethodRunner*>& runners,
                                   const CorpusFilter& filter = {});

}  // namespace semsum
