#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semsum/vectorspace.hpp"

namespace semsum {

enum class Role { system, assistant, user };

std::string_view to_string(Role role);
Role role_from_string(std::string_view name);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  double top_p = 1.0;
  std::optional<std::uint32_t> max_output_words;
};

struct ChatResponse {
  std::string text;
  std::uint64_t input_token_count = 0;
  std::uint64_t output_token_count = 0;
  /// Seconds.
  double provider_latency = 0.0;
};

/// Text handed to the model for token accounting: message contents joined by
/// newlines.
std::string render_prompt(const ChatRequest& request);

/// Throws EmptyInputError unless the request is non-empty and opens with a
/// system message.
void check_request(const ChatRequest& request);

/// Pluggable token estimator; the default is ceil(bytes / 4).
class TokenEstimator {
 public:
  using CountFn = std::function<std::uint64_t(std::string_view)>;

  TokenEstimator();
  TokenEstimator(std::string name, CountFn fn);

  std::uint64_t count(std::string_view text) const { return fn_(text); }
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  CountFn fn_;
};

std::uint64_t count_tokens(std::string_view text);

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatResponse chat(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct TimedEmbedding {
  EmbeddingVector vector;
  /// Seconds.
  double latency = 0.0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Returns a unit-norm embedding of `text`.
  virtual EmbeddingVector embed(std::string_view text) = 0;
  /// Embeds and reports the time charged for it; wall-clock unless the
  /// provider models its latency.
  virtual TimedEmbedding embed_timed(std::string_view text);
  virtual Eigen::Index dim() const = 0;
  virtual std::string name() const = 0;
};

// Prompt templates for the three LLM steps of the QA workflow.
ChatRequest build_noncontextual_summary_prompt(std::string_view document,
                                               std::uint32_t word_budget);
ChatRequest build_contextual_summary_prompt(std::string_view document, std::string_view question,
                                            std::uint32_t word_budget);
ChatRequest build_answer_prompt(std::string_view reference, std::string_view question);

/// Reference slot used when answering without any document.
inline constexpr std::string_view kNoDocumentReference = "(no document provided)";

enum class PromptKind { noncontextual_summary, contextual_summary, answer, unknown };

/// Recognises requests produced by the builders above.
PromptKind classify_prompt(const ChatRequest& request);

/// Word budget stated in a summary prompt, if any.
std::optional<std::uint32_t> prompt_word_budget(const ChatRequest& request);

}  // namespace semsum
