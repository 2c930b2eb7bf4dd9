#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "semsum/text.hpp"

using namespace semsum;

namespace {

std::string doc_line(const std::string& id, std::size_t words) {
  return R"({"kind":"doc","doc_id":")" + id + R"(","title":"t","text":")" +
         fixture::filler(words) + "\"}\n";
}

std::string question_line(const std::string& qid, const std::string& doc) {
  return R"({"kind":"question","question_id":")" + qid + R"(","doc_id":")" + doc +
         R"(","question_text":"what?","gold_answer":"that"})" + "\n";
}

std::string questions(const std::string& doc, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += question_line(doc + "-q" + std::to_string(i), doc);
  return s;
}

}  // namespace

TEST(LoadCorpus, FiltersShortDocumentsAndThinQuestionSets) {
  std::stringstream in(doc_line("ok", 900) + doc_line("short", 100) + doc_line("thin", 900) +
                       questions("ok", 10) + questions("short", 10) + questions("thin", 9));
  const auto loaded = load_corpus(in);
  ASSERT_EQ(loaded.corpus.documents.size(), 1u);
  EXPECT_EQ(loaded.corpus.documents[0].doc_id, "ok");
  EXPECT_EQ(loaded.corpus.documents[0].word_count, 900u);
  EXPECT_EQ(loaded.corpus.questions.size(), 10u);
  std::set<std::string> rejected;
  for (const auto& r : loaded.rejected) rejected.insert(r.kind + ":" + r.id);
  EXPECT_TRUE(rejected.count("doc:short"));
  EXPECT_TRUE(rejected.count("doc:thin"));
  EXPECT_TRUE(rejected.count("question:thin-q0"));
  EXPECT_THROW(loaded.corpus.document("short"), UnknownDocumentError);
}

TEST(LoadCorpus, CustomFilter) {
  std::stringstream in(doc_line("d", 50) + questions("d", 1));
  const auto loaded = load_corpus(in, CorpusFilter{10, 1});
  EXPECT_EQ(loaded.corpus.documents.size(), 1u);
}

TEST(LoadCorpus, ParseErrorsReportLine) {
  const std::vector<std::pair<std::string, std::size_t>> cases = {
      {doc_line("a", 10) + "{not json\n", 2},
       {doc_line("a", 10) + "\n" + R"({"kind":"doc","title":"x","text":"y"})" + "\n", 3},
       {R"({"kind":"paragraph"})" "\n", 1},
       {doc_line("a", 10) + R"({"kind":"question","question_id":"q","doc_id":"a","question_text":"","gold_answer":"x"})" "\n", 2},
  };
  for (const auto& [text, line] : cases) {
    std::stringstream in(text);
    try {
      load_corpus(in, CorpusFilter{0, 0});
      FAIL() << text;
    } catch (const CorpusParseError& e) {
      EXPECT_EQ(e.line(), line) << e.what();
    }
  }
}

TEST(LoadCorpus, IntegrityErrors) {
  std::stringstream dup(doc_line("a", 10) + doc_line("a", 10));
  EXPECT_THROW(load_corpus(dup), IntegrityError);
  std::stringstream dangling(doc_line("a", 10) + question_line("q", "b"));
  EXPECT_THROW(load_corpus(dangling), IntegrityError);
  std::stringstream dupq(doc_line("a", 10) + question_line("q", "a") + question_line("q", "a"));
  EXPECT_THROW(load_corpus(dupq), IntegrityError);
  EXPECT_THROW(load_corpus(std::filesystem::path("/nonexistent/corpus.jsonl")), IoError);
}

TEST(LoadCorpus, WriteThenLoadRoundTrips) {
  const auto synth = generate_synthetic_corpus(fixture::small_spec(3));
  std::stringstream buf;
  write_corpus(buf, synth.corpus);
  const auto loaded = load_corpus(buf, CorpusFilter{0, 0});
  ASSERT_EQ(loaded.corpus.documents.size(), 3u);
  ASSERT_EQ(loaded.corpus.questions.size(), synth.corpus.questions.size());
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(loaded.corpus.documents[i].text, synth.corpus.documents[i].text);
  }
  EXPECT_EQ(loaded.corpus.questions.back().gold_answer, synth.corpus.questions.back().gold_answer);
}

TEST(Synthetic, DeterministicInSeed) {
  const auto a = generate_synthetic_corpus(fixture::small_spec(4, 9));
  const auto b = generate_synthetic_corpus(fixture::small_spec(4, 9));
  const auto c = generate_synthetic_corpus(fixture::small_spec(4, 10));
  std::stringstream sa, sb, sc;
  write_corpus(sa, a.corpus);
  write_corpus(sb, b.corpus);
  write_corpus(sc, c.corpus);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Synthetic, ShapeFollowsSpec) {
  auto spec = fixture::small_spec(20, 3);
  spec.words_per_doc_mean = 3000;
  spec.words_per_doc_std = 500;
  const auto s = generate_synthetic_corpus(spec);
  ASSERT_EQ(s.corpus.documents.size(), 20u);
  EXPECT_EQ(s.corpus.questions.size(), 20u * 12u);
  double words = 0.0;
  for (const auto& d : s.corpus.documents) words += static_cast<double>(d.word_count);
  EXPECT_NEAR(words / 20.0, 3000.0, 300.0);
  const auto loaded_filter_ok = [&] {
    for (const auto& d : s.corpus.documents) {
      if (d.word_count != text::word_count(d.text)) return false;
    }
    return true;
  }();
  EXPECT_TRUE(loaded_filter_ok);
}

TEST(Synthetic, OriginsMatchTextRelations) {
  auto spec = fixture::small_spec(40, 12);
  spec.duplicate_question_rate = 0.3;
  spec.paraphrase_rate = 0.3;
  const auto s = generate_synthetic_corpus(spec);
  const auto& qs = s.corpus.questions;
  std::size_t dup = 0, para = 0, counted = 0;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    if (i > 0 && qs[i].doc_id != qs[i - 1].doc_id) offset = i;
    const auto& info = s.info[i];
    const auto& src = qs[offset + info.source];
    if (i == offset) {
      EXPECT_EQ(info.origin, QuestionOrigin::fresh);
      continue;
    }
    ++counted;
    switch (info.origin) {
      case QuestionOrigin::fresh:
        EXPECT_EQ(offset + info.source, i);
        break;
      case QuestionOrigin::duplicate:
        ++dup;
        EXPECT_LT(info.source + offset, i);
        EXPECT_EQ(qs[i].question_text, src.question_text);
        EXPECT_EQ(qs[i].gold_answer, src.gold_answer);
        break;
      case QuestionOrigin::paraphrase: {
        ++para;
        EXPECT_LT(info.source + offset, i);
        EXPECT_EQ(s.info[offset + info.source].origin, QuestionOrigin::fresh);
        EXPECT_NE(qs[i].question_text, src.question_text);
        EXPECT_EQ(qs[i].gold_answer, src.gold_answer);
        const auto a = text::split_words(qs[i].question_text);
        const auto b = text::split_words(src.question_text);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
          if (a[k] != b[k]) {
            EXPECT_EQ(question_synonym(b[k]), a[k]);
          }
        }
        break;
      }
    }
  }
  EXPECT_NEAR(static_cast<double>(dup) / static_cast<double>(counted), 0.3, 0.06);
  EXPECT_NEAR(static_cast<double>(para) / static_cast<double>(counted), 0.3, 0.06);
}

// Exact-text twins: every recorded duplicate has an earlier twin, and a
// twin that is not a recorded duplicate can only be a repeated paraphrase.
TEST(Synthetic, DuplicatePairsEnumerate) {
  const auto s = generate_synthetic_corpus(fixture::small_spec(10, 21));
  const auto& qs = s.corpus.questions;
  std::size_t recorded = 0, twinned_duplicates = 0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    bool twin = false;
    for (std::size_t j = 0; j < i; ++j) {
      twin = twin || (qs[j].doc_id == qs[i].doc_id && qs[j].question_text == qs[i].question_text);
    }
    const auto origin = s.info[i].origin;
    recorded += origin == QuestionOrigin::duplicate;
    twinned_duplicates += twin && origin == QuestionOrigin::duplicate;
    if (twin) EXPECT_NE(origin, QuestionOrigin::fresh) << qs[i].question_id;
  }
  EXPECT_GT(recorded, 0u);
  EXPECT_EQ(twinned_duplicates, recorded);
}

TEST(Synthetic, SynonymsChangeTheEmbedding) {
  HashEmbeddingProvider e;
  for (const char* w : {"what", "is", "the", "tell", "me", "describe", "of", "name"}) {
    const auto syn = question_synonym(w);
    ASSERT_FALSE(syn.empty()) << w;
    EXPECT_LT(cosine_similarity(e.embed(w), e.embed(syn)), 0.5) << w;
  }
  EXPECT_TRUE(question_synonym("zebra").empty());
}

TEST(Synthetic, SpecErrors) {
  SyntheticCorpusSpec s;
  s.duplicate_question_rate = 0.7;
  s.paraphrase_rate = 0.4;
  EXPECT_THROW(s.validate(), SpecError);
  s = {};
  s.paraphrase_rate = -0.1;
  EXPECT_THROW(s.validate(), SpecError);
  s = {};
  s.n_docs = 0;
  EXPECT_THROW(generate_synthetic_corpus(s), SpecError);
  s = {};
  s.words_per_doc_mean = 0;
  EXPECT_THROW(s.validate(), SpecError);
}

TEST(Synthetic, FullDocumentAnswersMatchGold) {
  const auto s = generate_synthetic_corpus(fixture::small_spec(3, 4));
  for (const auto& q : s.corpus.questions) {
    const auto& d = s.corpus.document(q.doc_id);
    EXPECT_EQ(mock::answer(d.text, q.question_text), q.gold_answer) << q.question_text;
  }
}
