#include <chrono>
#include <cmath>
#include <regex>

#include "semsum/providers.hpp"

namespace semsum {
namespace {

// Line breaks inside the system instructions are part of the templates.
constexpr std::string_view kNoncontextualSystem =
    "You are an Expert at Summarizing text content and all your outputs are expertly curated. "
    "You will\n"
    "ask the user for a document. You will then write a precise, detailed {budget}-word summary "
    "for the\n"
    "document. The summary should be informative and stick to the information from the "
    "document.";

constexpr std::string_view kContextualSystem =
    "You are an Expert at Summarizing text content and all your outputs are expertly curated. "
    "You will\n"
    "ask the user for a document, then for a question. You will then write a precise, detailed "
    "{budget}-word\n"
    "summary for the document that will help answering the question and follow-up or related "
    "questions.\n"
    "The summary you write *must* contain a precise, detailed answer to the question, *if and "
    "only if*\n"
    "it is present in the document. The summary should be informative and stick to the "
    "information from\n"
    "the document.";

constexpr std::string_view kAnswerSystem =
    "You are an Expert at Answering questions using text content and all your outputs are "
    "expertly\n"
    "curated. You will ask the user for a document, then for a question. You will then write a "
    "concise\n"
    "(max. 3 words) answer to the question, *if and only if* it is present in the document. The "
    "answer\n"
    "should be informative and stick to the information from the document.";

constexpr std::string_view kAskDocumentToSummarize =
    "What is the document you would like to summarize?";
constexpr std::string_view kAskDocumentToUse = "What is the document you would like to use?";
constexpr std::string_view kAskQuestion = "What is the question you would like to answer?";
constexpr std::string_view kSummaryLeadIn = "Here is a summary of the document:\n";
constexpr std::string_view kContextualLeadIn =
    "Here is a summary of the document that answers your question:\n";
constexpr std::string_view kAnswerLeadIn = "Here is the answer to your question:\n";

std::string with_budget(std::string_view tmpl, std::uint32_t budget) {
  std::string out(tmpl);
  const std::string_view slot = "{budget}";
  out.replace(out.find(slot), slot.size(), std::to_string(budget));
  return out;
}

void require_text(std::string_view s, const char* what) {
  if (s.empty()) throw EmptyInputError(std::string(what) + " must not be empty");
}

ChatMessage msg(Role role, std::string_view content) { return {role, std::string(content)}; }

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system:
      return "system";
    case Role::assistant:
      return "assistant";
    case Role::user:
      return "user";
  }
  return "user";
}

Role role_from_string(std::string_view name) {
  if (name == "system") return Role::system;
  if (name == "assistant") return Role::assistant;
  if (name == "user") return Role::user;
  throw ProviderProtocolError("unknown message role: " + std::string(name));
}

std::string render_prompt(const ChatRequest& request) {
  std::string out;
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    if (i) out.push_back('\n');
    out += request.messages[i].content;
  }
  return out;
}

void check_request(const ChatRequest& request) {
  if (request.messages.empty()) throw EmptyInputError("chat request has no messages");
  if (request.messages.front().role != Role::system) {
    throw EmptyInputError("chat request must open with a system message");
  }
}

TokenEstimator::TokenEstimator() : TokenEstimator("bytes_div_4_ceil", count_tokens) {}

TokenEstimator::TokenEstimator(std::string name, CountFn fn)
    : name_(std::move(name)), fn_(std::move(fn)) {}

std::uint64_t count_tokens(std::string_view text) { return (text.size() + 3) / 4; }

TimedEmbedding EmbeddingProvider::embed_timed(std::string_view text) {
  const auto start = std::chrono::steady_clock::now();
  EmbeddingVector v = embed(text);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return {std::move(v), elapsed.count()};
}

ChatRequest build_noncontextual_summary_prompt(std::string_view document,
                                               std::uint32_t word_budget) {
  require_text(document, "document");
  ChatRequest r;
  r.messages = {
      msg(Role::system, with_budget(kNoncontextualSystem, word_budget)),
      msg(Role::assistant, kAskDocumentToSummarize),
      msg(Role::user, document),
      msg(Role::assistant, kSummaryLeadIn),
  };
  r.max_output_words = word_budget;
  return r;
}

ChatRequest build_contextual_summary_prompt(std::string_view document, std::string_view question,
                                            std::uint32_t word_budget) {
  require_text(document, "document");
  require_text(question, "question");
  ChatRequest r;
  r.messages = {
      msg(Role::system, with_budget(kContextualSystem, word_budget)),
      msg(Role::assistant, kAskDocumentToSummarize),
      msg(Role::user, document),
      msg(Role::assistant, kAskQuestion),
      msg(Role::user, question),
      msg(Role::assistant, kContextualLeadIn),
  };
  r.max_output_words = word_budget;
  return r;
}

ChatRequest build_answer_prompt(std::string_view reference, std::string_view question) {
  require_text(reference, "reference");
  require_text(question, "question");
  ChatRequest r;
  r.messages = {
      msg(Role::system, kAnswerSystem),
      msg(Role::assistant, kAskDocumentToUse),
      msg(Role::user, reference),
      msg(Role::assistant, kAskQuestion),
      msg(Role::user, question),
      msg(Role::assistant, kAnswerLeadIn),
  };
  return r;
}

PromptKind classify_prompt(const ChatRequest& request) {
  if (request.messages.empty() || request.messages.front().role != Role::system) {
    return PromptKind::unknown;
  }
  const std::string_view system = request.messages.front().content;
  const std::size_t n = request.messages.size();
  if (system == kAnswerSystem && n == 6) return PromptKind::answer;
  // Summary prompts differ from each other only after the budget slot.
  const std::string_view shared = "You are an Expert at Summarizing text content";
  if (!starts_with(system, shared)) return PromptKind::unknown;
  if (n == 4 && request.messages[3].content == kSummaryLeadIn) {
    return PromptKind::noncontextual_summary;
  }
  if (n == 6 && request.messages[5].content == kContextualLeadIn) {
    return PromptKind::contextual_summary;
  }
  return PromptKind::unknown;
}

std::optional<std::uint32_t> prompt_word_budget(const ChatRequest& request) {
  if (request.messages.empty()) return std::nullopt;
  static const std::regex budget_re("detailed ([0-9]+)-word");
  std::smatch m;
  const std::string& system = request.messages.front().content;
  if (!std::regex_search(system, m, budget_re)) return std::nullopt;
  return static_cast<std::uint32_t>(std::stoul(m[1].str()));
}

}  // namespace semsum
