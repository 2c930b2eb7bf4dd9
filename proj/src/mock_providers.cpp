#include "semsum/mock_providers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_set>

#include "semsum/text.hpp"

namespace semsum {
namespace mock {
namespace {

using TokenSet = std::unordered_set<std::string>;

TokenSet token_set(std::string_view s) {
  auto tokens = text::tokenize(s);
  return TokenSet(tokens.begin(), tokens.end());
}

std::size_t overlap(std::string_view sentence, const TokenSet& query) {
  std::size_t n = 0;
  for (const auto& t : token_set(sentence)) n += query.count(t);
  return n;
}

bool ends_clause(std::string_view word) {
  const char c = word.back();
  return c == ',' || c == ';' || c == ':' || c == '.' || c == '!' || c == '?';
}

std::string strip_punct(std::string_view word) {
  std::size_t b = 0;
  std::size_t e = word.size();
  auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  while (b < e && !alnum(word[b])) ++b;
  while (e > b && !alnum(word[e - 1])) --e;
  return std::string(word.substr(b, e - b));
}

}  // namespace

std::string summarize(std::string_view document, std::optional<std::string_view> question,
                      std::uint32_t word_budget) {
  const auto sentences = text::split_sentences(document);
  std::vector<std::size_t> lengths(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) lengths[i] = text::word_count(sentences[i]);

  std::vector<std::size_t> ranked(sentences.size());
  std::iota(ranked.begin(), ranked.end(), 0);
  if (question) {
    const TokenSet q = token_set(*question);
    std::vector<std::size_t> score(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) score[i] = overlap(sentences[i], q);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  }

  std::vector<bool> taken(sentences.size(), false);
  std::size_t total = 0;
  for (std::size_t i : ranked) {
    if (total + lengths[i] <= word_budget) {
      taken[i] = true;
      total += lengths[i];
    }
  }

  // Only long sentences left: fill the budget with a truncated one.
  std::optional<std::pair<std::size_t, std::string>> partial;
  if (2 * total < word_budget) {
    for (std::size_t i : ranked) {
      if (taken[i] || lengths[i] == 0) continue;
      auto words = text::split_words(sentences[i]);
      words.resize(std::min<std::size_t>(words.size(), word_budget - total));
      partial.emplace(i, text::join(words, " "));
      break;
    }
  }

  std::vector<std::string> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (taken[i]) {
      out.push_back(sentences[i]);
    } else if (partial && partial->first == i) {
      out.push_back(partial->second);
    }
  }
  return text::join(out, " ");
}

std::string answer(std::string_view reference, std::string_view question) {
  const TokenSet q = token_set(question);
  const auto sentences = text::split_sentences(reference);

  std::size_t best = 0;
  std::size_t best_score = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const std::size_t s = overlap(sentences[i], q);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  if (best_score == 0) return std::string(kNoAnswer);

  const auto words = text::split_words(sentences[best]);
  std::size_t i = 0;
  while (i < words.size()) {
    bool hit = false;
    for (const auto& t : text::tokenize(words[i])) hit = hit || q.count(t) > 0;
    ++i;
    if (hit) break;
  }

  std::vector<std::string> span;
  for (; i < words.size() && span.size() < 3; ++i) {
    std::string w = strip_punct(words[i]);
    if (!w.empty()) span.push_back(std::move(w));
    if (ends_clause(words[i])) break;
  }
  if (span.empty()) return std::string(kNoAnswer);
  return text::join(span, " ");
}

}  // namespace mock

MockChatProvider::MockChatProvider(MockDelays delays, TokenEstimator tokens)
    : delays_(delays), tokens_(std::move(tokens)) {}

ChatResponse MockChatProvider::chat(const ChatRequest& request) {
  check_request(request);
  const auto& m = request.messages;
  ChatResponse r;
  switch (classify_prompt(request)) {
    case PromptKind::noncontextual_summary:
      r.text = mock::summarize(m[2].content, std::nullopt,
                               prompt_word_budget(request).value_or(200));
      break;
    case PromptKind::contextual_summary:
      r.text = mock::summarize(m[2].content, std::string_view(m[4].content),
                               prompt_word_budget(request).value_or(200));
      break;
    case PromptKind::answer:
      r.text = mock::answer(m[2].content, m[4].content);
      break;
    case PromptKind::unknown:
      throw ProviderProtocolError("mock provider cannot interpret this prompt");
  }
  calls_.fetch_add(1);
  r.input_token_count = tokens_.count(render_prompt(request));
  r.output_token_count = tokens_.count(r.text);
  r.provider_latency = delays_.chat_base_s + delays_.chat_per_100_output_tokens_s *
                                                 static_cast<double>(r.output_token_count) /
                                                 100.0;
  if (delays_.sleep) {
    std::this_thread::sleep_for(std::chrono::duration<double>(r.provider_latency));
  }
  return r;
}

HashEmbeddingProvider::HashEmbeddingProvider(Eigen::Index dim, MockDelays delays)
    : dim_(dim), delays_(delays) {
  if (dim < 1) throw DimensionError("embedding dimension must be >= 1");
}

EmbeddingVector HashEmbeddingProvider::embed(std::string_view s) {
  if (s.empty()) throw EmptyInputError("cannot embed empty text");
  EmbeddingVector v = EmbeddingVector::Zero(dim_);
  for (const auto& token : text::tokenize(s)) {
    v[static_cast<Eigen::Index>(text::fnv1a64(token) % static_cast<std::uint64_t>(dim_))] += 1.0;
  }
  if (is_zero(v)) throw DegenerateVectorError("text has no alphanumeric tokens");
  return normalize(v);
}

TimedEmbedding HashEmbeddingProvider::embed_timed(std::string_view s) {
  TimedEmbedding out{embed(s), delays_.embed_s};
  if (delays_.sleep) std::this_thread::sleep_for(std::chrono::duration<double>(delays_.embed_s));
  return out;
}

std::string HashEmbeddingProvider::name() const {
  return "hash-fnv1a64-d" + std::to_string(dim_);
}

}  // namespace semsum
