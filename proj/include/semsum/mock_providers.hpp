#pragma once

#include <atomic>
#include <optional>
#include <string>
#include <string_view>

#include "semsum/providers.hpp"

namespace semsum {

/// Latencies the mock providers charge instead of doing real work.
struct MockDelays {
  double chat_base_s = 0.100;
  double chat_per_100_output_tokens_s = 0.001;
  double embed_s = 0.0001;
  /// Actually sleep for the charged time (wall-clock experiments).
  bool sleep = false;
};

namespace mock {

inline constexpr std::string_view kNoAnswer = "unknown";

/// Extractive summary of at most `word_budget` words. With a question,
/// sentences are ranked by token overlap with it (earlier first on ties);
/// without one, by position. Selected sentences keep document order.
std::string summarize(std::string_view document, std::optional<std::string_view> question,
                      std::uint32_t word_budget);

/// Up to three words following the first question-token match inside the
/// reference sentence that overlaps the question most. The span stops early
/// at clause punctuation. Returns kNoAnswer when nothing overlaps.
std::string answer(std::string_view reference, std::string_view question);

}  // namespace mock

/// Deterministic stand-in for an LLM: interprets the three prompt templates
/// with the extractive rules in namespace mock.
class MockChatProvider : public ChatProvider {
 public:
  explicit MockChatProvider(MockDelays delays = {}, TokenEstimator tokens = {});

  ChatResponse chat(const ChatRequest& request) override;
  std::string name() const override { return "mock-extractive-v1"; }

  /// Number of chat calls served so far.
  std::uint64_t calls() const noexcept { return calls_.load(); }

 private:
  MockDelays delays_;
  TokenEstimator tokens_;
  std::atomic<std::uint64_t> calls_{0};
};

/// Feature-hashing bag-of-words embedding: lowercase alphanumeric tokens,
/// bucket = fnv1a64(token) mod dim, term-frequency counts, L2 normalized.
class HashEmbeddingProvider : public EmbeddingProvider {
 public:
  static constexpr Eigen::Index kDefaultDim = 64;

  explicit HashEmbeddingProvider(Eigen::Index dim = kDefaultDim, MockDelays delays = {});

  EmbeddingVector embed(std::string_view text) override;
  TimedEmbedding embed_timed(std::string_view text) override;
  Eigen::Index dim() const override { return dim_; }
  std::string name() const override;

 private:
  Eigen::Index dim_;
  MockDelays delays_;
};

}  // namespace semsum
