#include <gtest/gtest.h>

#include "oracles.hpp"
#include "semsum/error.hpp"
#include "semsum/mock_providers.hpp"
#include "semsum/random.hpp"
#include "semsum/text.hpp"

using namespace semsum;

TEST(HashEmbedding, MatchesIndependentHashing) {
  Rng rng(8);
  const std::vector<std::string> vocab = {"alpha", "Beta", "gamma9", "delta", "x", "42",
                                          "paris", "FRANCE", "tour", "eiffel"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) {
      s += vocab[rng.below(vocab.size())];
      s += rng.chance(0.3) ? ", " : " ";
    }
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.below(80));
    HashEmbeddingProvider p(dim);
    const auto got = p.embed(s);
    const auto want = oracle::hash_embed(s, static_cast<std::size_t>(dim));
    ASSERT_EQ(static_cast<std::size_t>(got.size()), want.size());
    for (Eigen::Index i = 0; i < dim; ++i) EXPECT_NEAR(got[i], want[static_cast<std::size_t>(i)], 1e-12);
  }
}

TEST(HashEmbedding, SharedTokensSimilarity) {
  HashEmbeddingProvider p;
  const auto a = oracle::hash_embed("Paris France", 64);
  const auto b = oracle::hash_embed("Paris", 64);
  EXPECT_NEAR(cosine_similarity(p.embed("Paris France"), p.embed("Paris")), oracle::cosine(a, b),
              1e-9);
  EXPECT_NEAR(cosine_similarity(p.embed("Paris France"), p.embed("Paris")), std::sqrt(0.5), 1e-9);
  EXPECT_EQ(cosine_similarity(p.embed("the Cat sat"), p.embed("the cat, sat!")), 1.0);
}

TEST(HashEmbedding, DisjointVocabulariesScoreLow) {
  HashEmbeddingProvider p;
  const double s = cosine_similarity(p.embed("quantum chromodynamics lattice gauge theory"),
                                     p.embed("medieval tapestry weaving guild records"));
  EXPECT_LT(s, 0.15);
}

TEST(HashEmbedding, Errors) {
  HashEmbeddingProvider p(16);
  EXPECT_THROW(p.embed(""), EmptyInputError);
  EXPECT_THROW(p.embed("?! ..."), DegenerateVectorError);
  EXPECT_THROW(HashEmbeddingProvider(0), DimensionError);
  EXPECT_EQ(p.name(), "hash-fnv1a64-d16");
}

TEST(HashEmbedding, ChargesModeledDelay) {
  MockDelays d;
  d.embed_s = 0.25;
  HashEmbeddingProvider p(16, d);
  EXPECT_EQ(p.embed_timed("word").latency, 0.25);
}

TEST(Text, TokenizeMatchesOracle) {
  for (const char* s : {"", "Hello, World!", "a1-b2_c3", "  MiXeD case\tTabs\n", "ümlaut x"}) {
    EXPECT_EQ(text::tokenize(s), oracle::tokens(s)) << s;
  }
  EXPECT_EQ(text::fnv1a64("hello"), oracle::fnv1a("hello"));
  EXPECT_EQ(text::fnv1a64(""), 14695981039346656037ULL);
}

TEST(Text, Sentences) {
  const auto s = text::split_sentences("One two. Three? Four!\nFive 3.5 six");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], "One two.");
  EXPECT_EQ(s[3], "Five 3.5 six");
  EXPECT_EQ(text::word_count("  a  b\tc\n"), 3u);
}

TEST(MockSummarize, RespectsBudgetAndPrefersRelevantSentences) {
  const std::string doc =
      "Apples grow on trees in orchards. The capital of France is Paris. "
      "Rivers flow to the sea. Paris hosts the Louvre museum.";
  const std::string s = mock::summarize(doc, std::string_view("capital of France"), 8);
  EXPECT_EQ(s, "The capital of France is Paris.");
  const std::string generic = mock::summarize(doc, std::nullopt, 8);
  EXPECT_EQ(generic, "Apples grow on trees in orchards.");
  EXPECT_LE(text::word_count(mock::summarize(doc, std::nullopt, 3)), 3u);
}

TEST(MockAnswer, SpanAfterFirstMatch) {
  const std::string ref = "The capital of France is Paris, a large city.";
  EXPECT_EQ(mock::answer(ref, "capital"), "of France is");
  EXPECT_EQ(mock::answer(ref, "France?"), "is Paris");
  EXPECT_EQ(mock::answer(ref, "volcano"), std::string(mock::kNoAnswer));
}

TEST(MockChat, AccountsTokensAndLatency) {
  MockDelays d;
  MockChatProvider chat(d);
  const auto req = build_answer_prompt("The key is blue.", "What is the key?");
  const auto r = chat.chat(req);
  EXPECT_EQ(r.text, "key is blue");
  EXPECT_EQ(r.input_token_count, (render_prompt(req).size() + 3) / 4);
  EXPECT_EQ(r.output_token_count, 3u);
  EXPECT_DOUBLE_EQ(r.provider_latency, d.chat_base_s + d.chat_per_100_output_tokens_s * 0.03);
  EXPECT_EQ(chat.calls(), 1u);

  ChatRequest odd;
  odd.messages = {{Role::system, "free form"}};
  EXPECT_THROW(chat.chat(odd), ProviderProtocolError);
  EXPECT_THROW(chat.chat(ChatRequest{}), EmptyInputError);
}

TEST(MockChat, Deterministic) {
  MockChatProvider a, b;
  const auto req = build_contextual_summary_prompt(
      "Alpha beta gamma. Delta epsilon zeta. Eta theta iota.", "zeta?", 3);
  EXPECT_EQ(a.chat(req).text, b.chat(req).text);
  EXPECT_EQ(a.chat(req).text, "Delta epsilon zeta.");
}
