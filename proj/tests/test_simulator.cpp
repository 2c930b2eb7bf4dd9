#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "semsum/simulator.hpp"

using namespace semsum;

namespace {

struct Stack {
  MockChatProvider chat;
  HashEmbeddingProvider embed;
};

}  // namespace

TEST(QuestionOrder, IsAPermutationFixedBySeed) {
  const auto s = generate_synthetic_corpus(fixture::small_spec(5));
  const auto a = question_order(s.corpus, 3);
  EXPECT_EQ(a, question_order(s.corpus, 3));
  EXPECT_NE(a, question_order(s.corpus, 4));
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), s.corpus.questions.size());
}

TEST(RunStream, ColdStartMissesAndCurveMatchesAggregate) {
  const auto s = generate_synthetic_corpus(fixture::small_spec(5));
  Stack st;
  std::vector<MethodConfig> configs;
  for (Method m : kAllMethods) configs.push_back(MethodConfig{m, 0.8, 200});
  const auto r = run_stream(s.corpus, configs, st.chat, st.embed);
  ASSERT_TRUE(r.complete);
  ASSERT_EQ(r.reports.size(), configs.size());
  for (const auto& rep : r.reports) {
    ASSERT_EQ(rep.traces.size(), s.corpus.questions.size());
    std::set<std::string> seen;
    for (const auto& t : rep.traces) {
      if (!seen.count(t.doc_id)) {
        EXPECT_FALSE(t.cache_hit) << "cold start must miss";
      }
      seen.insert(t.doc_id);
      EXPECT_TRUE(t.utility.has_value());
    }
    const auto& last = rep.curve.back();
    EXPECT_EQ(last.hit_rate, rep.aggregate.hit_rate);
    EXPECT_EQ(last.mean_utility, rep.aggregate.utility.mean);
    EXPECT_EQ(last.cumulative_input_tokens, rep.aggregate.total_input_tokens);
    EXPECT_EQ(last.mean_latency, rep.aggregate.latency_total.mean);
  }
  EXPECT_DOUBLE_EQ(r.reports[0].aggregate.utility.mean, 1.0);
  EXPECT_EQ(r.reports[0].aggregate.hits, 0u);
}

TEST(RunStream, SameOrderForEveryConfig) {
  const auto s = generate_synthetic_corpus(fixture::small_spec(4));
  Stack st;
  const auto r = run_stream(s.corpus, {MethodConfig{Method::full_document}, MethodConfig{}},
                            st.chat, st.embed);
  for (std::size_t i = 0; i < r.order.size(); ++i) {
    EXPECT_EQ(r.reports[0].traces[i].question_id, r.reports[1].traces[i].question_id);
    EXPECT_EQ(r.reports[0].traces[i].question_id, s.corpus.questions[r.order[i]].question_id);
  }
}

namespace {

class FailingChat : public ChatProvider {
 public:
  explicit FailingChat(int ok) : ok_(ok) {}
  ChatResponse chat(const ChatRequest& r) override {
    if (ok_-- <= 0) throw ProviderUnavailableError("down");
    return inner_.chat(r);
  }
  std::string name() const override { return "failing"; }

 private:
  int ok_;
  MockChatProvider inner_;
};

}  // namespace

TEST(RunStream, ProviderFailureKeepsPartialTraces) {
  const auto s = generate_synthetic_corpus(fixture::small_spec(3));
  FailingChat chat(5);
  HashEmbeddingProvider embed;
  const auto r = run_stream(s.corpus, {MethodConfig{Method::full_document}}, chat, embed);
  EXPECT_FALSE(r.complete);
  EXPECT_NE(r.error.find("down"), std::string::npos);
  ASSERT_EQ(r.reports.size(), 1u);
  EXPECT_EQ(r.reports[0].traces.size(), 5u);
}

TEST(Sweep, OrderAndBudgetIndependentHitRate) {
  const auto s = generate_synthetic_corpus(fixture::small_spec(6));
  Stack st;
  const auto r = run_sweep(s.corpus, {0.6, 0.8}, {100, 200, 400}, st.chat, st.embed);
  ASSERT_EQ(r.reports.size(), 6u);
  EXPECT_EQ(r.reports[0].config.similarity_threshold, 0.6);
  EXPECT_EQ(r.reports[2].config.summary_word_budget, 400u);
  EXPECT_EQ(r.reports[3].config.similarity_threshold, 0.8);
  for (std::size_t i : {1u, 2u}) {
    EXPECT_EQ(r.reports[i].aggregate.hit_rate, r.reports[0].aggregate.hit_rate);
    EXPECT_EQ(r.reports[3 + i].aggregate.hit_rate, r.reports[3].aggregate.hit_rate);
  }
  EXPECT_GE(r.reports[0].aggregate.hit_rate, r.reports[3].aggregate.hit_rate);
  const std::string csv = sweep_to_csv(r.reports, "synthetic");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(DocumentUpdate, InvalidatesEveryRunner) {
  auto s = generate_synthetic_corpus(fixture::small_spec(2));
  Stack st;
  Providers p{st.chat, st.embed};
  MethodRunner contextual(MethodConfig{}, p);
  MethodRunner prompt(MethodConfig{Method::full_prompt_answer_cache}, p);
  const auto& doc = s.corpus.documents[0];
  for (const auto& q : s.corpus.questions) {
    if (q.doc_id != doc.doc_id) continue;
    contextual.answer(doc, q.question_id, q.question_text);
    prompt.answer(doc, q.question_id, q.question_text);
  }
  const std::size_t before = contextual.summary_cache().document_entry_count(doc.doc_id) +
                             prompt.answer_cache().document_entry_count(doc.doc_id);
  ASSERT_GT(before, 0u);
  const std::string id = doc.doc_id;
  const auto u = apply_document_update(s.corpus, id, fixture::filler(1500, "fresh"),
                                       {&contextual, &prompt}, CorpusFilter{800, 0});
  EXPECT_EQ(u.version, 2u);
  EXPECT_EQ(u.removed, before);
  EXPECT_EQ(s.corpus.document(id).version, 2u);
  EXPECT_EQ(contextual.summary_cache().document_version(id), 2u);

  EXPECT_THROW(apply_document_update(s.corpus, id, "", {&contextual}), EmptyInputError);
  EXPECT_THROW(apply_document_update(s.corpus, id, "too short", {&contextual}), IntegrityError);
  EXPECT_THROW(apply_document_update(s.corpus, "nope", fixture::filler(900), {&contextual}),
               UnknownDocumentError);
}
