#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "semsum/text.hpp"

using namespace semsum;

namespace {

const Document kDoc = make_document(
    "doc", fixture::filler(300) + "Launchcode amber falcon, stored in vault nine. " +
               fixture::filler(300, "pad") + "Backupsite Oslo, near the harbour. ");

std::uint64_t expected_input(const fixture::RecordingChat& c, std::size_t from = 0) {
  std::uint64_t n = 0;
  for (std::size_t i = from; i < c.requests.size(); ++i) n += count_tokens(render_prompt(c.requests[i]));
  return n;
}

std::uint64_t expected_output(const fixture::RecordingChat& c, std::size_t from = 0) {
  std::uint64_t n = 0;
  for (std::size_t i = from; i < c.responses.size(); ++i) n += count_tokens(c.responses[i].text);
  return n;
}

}  // namespace

TEST(Methods, NamesRoundTrip) {
  for (Method m : kAllMethods) EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_THROW(method_from_string("rag"), ConfigError);
}

TEST(Methods, ConfigValidation) {
  MethodConfig c;
  EXPECT_NO_THROW(c.validate());
  c.similarity_threshold = 1.01;
  EXPECT_THROW(c.validate(), ConfigError);
  c.similarity_threshold = 0.5;
  c.summary_word_budget = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

// Every method: trace token counts equal the estimator applied to exactly
// the prompts sent and texts received; latency components add up.
TEST(Pipeline, TokenAccountingIdentity) {
  for (Method m : kAllMethods) {
    fixture::MockStack s;
    MethodConfig c;
    c.method = m;
    MethodRunner runner(c, s.providers);
    for (const char* q : {"What is the launchcode?", "Where is the backupsite?",
                          "What is the launchcode?"}) {
      const std::size_t before = s.chat.requests.size();
      const AnswerTrace t = runner.answer(kDoc, "q", q);
      EXPECT_EQ(t.chat_calls, s.chat.requests.size() - before);
      EXPECT_EQ(t.input_tokens, expected_input(s.chat, before)) << to_string(m);
      EXPECT_EQ(t.output_tokens, expected_output(s.chat, before)) << to_string(m);
      EXPECT_NEAR(t.latency_total, t.latency_llm + t.latency_cache_search + t.latency_encoding,
                  1e-12);
      EXPECT_EQ(t.method, m);
    }
  }
}

TEST(Pipeline, FullDocumentAndNoRetrieval) {
  fixture::MockStack s;
  const auto full = answer_full_document(kDoc, "q1", "What is the launchcode?", s.providers);
  EXPECT_EQ(full.answer_text, "amber falcon");
  EXPECT_EQ(full.chat_calls, 1u);
  EXPECT_FALSE(full.cache_hit);
  EXPECT_EQ(full.reference_text, kDoc.text);

  const auto none = answer_no_retrieval("doc", "q1", "What is the launchcode?", s.providers);
  EXPECT_EQ(none.reference_text, kNoDocumentReference);
  EXPECT_EQ(s.chat.requests.back().messages[2].content, kNoDocumentReference);
  EXPECT_LT(none.input_tokens, full.input_tokens);
}

TEST(Pipeline, NoncontextualSummaryIsReusedPerVersion) {
  fixture::MockStack s;
  SummaryStore store;
  const auto a = answer_noncontextual_summary(kDoc, "q1", "launchcode?", s.providers, store, 50);
  const auto b = answer_noncontextual_summary(kDoc, "q2", "backupsite?", s.providers, store, 50);
  EXPECT_EQ(a.chat_calls, 2u);
  EXPECT_EQ(b.chat_calls, 1u);
  EXPECT_EQ(a.reference_text, b.reference_text);
  EXPECT_EQ(store.size(), 1u);
  Document v2 = kDoc;
  v2.version = 2;
  answer_noncontextual_summary(v2, "q3", "backupsite?", s.providers, store, 50);
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.erase_document("doc"), 2u);
}

TEST(Pipeline, ContextualMissThenHit) {
  fixture::MockStack s;
  SemanticCache cache(s.embed.dim(), CacheConfig{});
  MethodConfig c;
  const auto miss = answer_contextual_cached(kDoc, "q1", "What is the launchcode?", s.providers,
                                             cache, c);
  EXPECT_FALSE(miss.cache_hit);
  EXPECT_EQ(miss.chat_calls, 2u);
  EXPECT_EQ(miss.answer_text, "amber falcon");
  EXPECT_LE(text::word_count(miss.reference_text), 200u);

  const auto hit = answer_contextual_cached(kDoc, "q2", "what is the launchcode", s.providers,
                                            cache, c);
  EXPECT_TRUE(hit.cache_hit);
  EXPECT_EQ(hit.chat_calls, 1u);
  EXPECT_EQ(hit.similarity_of_hit, 1.0);
  EXPECT_EQ(hit.reference_text, miss.reference_text);
  EXPECT_EQ(hit.answer_text, "amber falcon");
  EXPECT_LT(hit.input_tokens, miss.input_tokens);

  const auto other = answer_contextual_cached(kDoc, "q3", "Where is the backupsite?",
                                              s.providers, cache, c);
  EXPECT_FALSE(other.cache_hit);
  EXPECT_EQ(other.answer_text, "Oslo");
}

TEST(Pipeline, ContextualRejectsOlderDocumentVersion) {
  fixture::MockStack s;
  SemanticCache cache(s.embed.dim(), CacheConfig{});
  Document v2 = kDoc;
  v2.version = 2;
  answer_contextual_cached(v2, "q", "launchcode?", s.providers, cache, MethodConfig{});
  EXPECT_THROW(answer_contextual_cached(kDoc, "q", "launchcode?", s.providers, cache,
                                        MethodConfig{}),
               StaleVersionError);
}

TEST(Pipeline, PromptCacheHitsMakeNoChatCall) {
  fixture::MockStack s;
  SemanticCache cache(s.embed.dim(), CacheConfig{});
  const auto miss = answer_prompt_cached(kDoc, "q1", "What is the launchcode?", s.providers,
                                         cache, MethodConfig{});
  const auto hit = answer_prompt_cached(kDoc, "q2", "Where is the backupsite?", s.providers,
                                        cache, MethodConfig{});
  EXPECT_EQ(miss.chat_calls, 1u);
  EXPECT_TRUE(hit.cache_hit);
  EXPECT_EQ(hit.chat_calls, 0u);
  EXPECT_EQ(hit.input_tokens, 0u);
  EXPECT_EQ(hit.answer_text, miss.answer_text);
}

TEST(Pipeline, RepeatedQuestionHitRate) {
  for (std::size_t n : {1u, 2u, 7u, 25u}) {
    fixture::MockStack s;
    MethodRunner runner(MethodConfig{}, s.providers);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      hits += runner.answer(kDoc, "q" + std::to_string(i), "Where is the backupsite?").cache_hit;
    }
    EXPECT_EQ(hits, n - 1);
    EXPECT_EQ(s.chat.requests.size(), n + 1);
  }
}

TEST(Pipeline, RunnersKeepStoresApart) {
  fixture::MockStack s;
  MethodConfig c;
  MethodRunner contextual(c, s.providers);
  c.method = Method::full_prompt_answer_cache;
  MethodRunner prompt(c, s.providers);
  contextual.answer(kDoc, "q", "launchcode?");
  prompt.answer(kDoc, "q", "launchcode?");
  EXPECT_EQ(contextual.summary_cache().size(), 1u);
  EXPECT_EQ(contextual.answer_cache().size(), 0u);
  EXPECT_EQ(prompt.summary_cache().size(), 0u);
  EXPECT_EQ(prompt.answer_cache().size(), 1u);

  EXPECT_EQ(contextual.invalidate_document("doc", 2), 1u);
  EXPECT_EQ(prompt.answer_cache().size(), 1u);
}

TEST(Pipeline, TraceColumnsForEveryMethod) {
  for (Method m : kAllMethods) {
    fixture::MockStack s;
    MethodConfig c;
    c.method = m;
    c.similarity_threshold = 0.7;
    c.summary_word_budget = 120;
    MethodRunner runner(c, s.providers);
    const auto t = runner.answer(kDoc, "qid", "launchcode?");
    EXPECT_EQ(t.question_id, "qid");
    EXPECT_EQ(t.doc_id, "doc");
    EXPECT_EQ(t.threshold, 0.7);
    EXPECT_EQ(t.budget, 120u);
  }
}

TEST(Pipeline, EmptyQuestionRejected) {
  fixture::MockStack s;
  EXPECT_THROW(answer_full_document(kDoc, "q", "", s.providers), EmptyInputError);
}

TEST(ClampSummary, CutsToOneAndAHalfBudget) {
  EXPECT_EQ(clamp_summary("a b c d e f g", 4), "a b c d e f");
  EXPECT_EQ(clamp_summary("a b", 4), "a b");
}

TEST(Pipeline, CacheHitsSaveInputTokensOnLongDocuments) {
  fixture::MockStack s;
  const Document big = make_document("big", fixture::filler(4000) + "Gatecode 77.");
  MethodConfig c;
  MethodRunner cached(c, s.providers);
  c.method = Method::full_document;
  MethodRunner full(c, s.providers);
  std::uint64_t cached_tokens = 0, full_tokens = 0;
  for (int i = 0; i < 5; ++i) {
    cached_tokens += cached.answer(big, "q", "What is the gatecode?").input_tokens;
    full_tokens += full.answer(big, "q", "What is the gatecode?").input_tokens;
  }
  EXPECT_LT(2 * cached_tokens, full_tokens);
}
