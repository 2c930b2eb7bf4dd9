#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "semsum/corpus.hpp"
#include "semsum/error.hpp"
#include "semsum/random.hpp"
#include "semsum/text.hpp"

namespace semsum {
namespace {

// Documents use only these function words; questions never do.
constexpr std::array<std::string_view, 10> kDocFunctionWords = {
    "and", "in", "a", "to", "with", "for", "by", "on", "as", "at"};

struct Synonym {
  std::string_view word;
  std::string_view synonym;
};

// Each pair lands in different buckets of the 64-dim hash embedding.
constexpr std::array<Synonym, 8> kSynonyms = {{{"what", "which"},
                                               {"is", "was"},
                                               {"the", "this"},
                                               {"tell", "share"},
                                               {"me", "us"},
                                               {"describe", "explain"},
                                               {"of", "about"},
                                               {"name", "state"}}};

constexpr std::array<std::array<std::string_view, 3>, 4> kLeadIns = {{{"what", "is", "the"},
                                                                      {"tell", "me", "the"},
                                                                      {"describe", "the", ""},
                                                                      {"name", "the", ""}}};

constexpr std::size_t kFillerVocabulary = 40;
constexpr std::size_t kFactTailWords = 3;
constexpr std::int64_t kMinQuestionWords = 6;
constexpr std::int64_t kMaxQuestionWords = 10;

// Pronounceable pseudo-words, unique across the whole corpus.
class WordSource {
 public:
  std::string next() {
    static constexpr std::string_view consonants = "bdfgklmnprstvz";
    static constexpr std::string_view vowels = "aeiou";
    const std::uint64_t syllables = consonants.size() * vowels.size();
    std::uint64_t space = syllables * syllables * syllables;
    std::uint64_t i = counter_++;
    std::size_t length = 3;
    while (i >= space) {
      i -= space;
      space *= syllables;
      ++length;
    }
    // Scatter consecutive indexes across the space; the multiplier is coprime
    // to every power of 70.
    std::uint64_t code = (i * 104729ULL) % space;
    std::string word;
    for (std::size_t s = 0; s < length; ++s) {
      const std::uint64_t syl = code % syllables;
      code /= syllables;
      word.push_back(consonants[syl / vowels.size()]);
      word.push_back(vowels[syl % vowels.size()]);
    }
    return word;
  }

 private:
  std::uint64_t counter_ = 0;
};

struct Section {
  std::string topic;
  std::string key;
  std::vector<std::string> answer;
  std::vector<std::string> details;
  std::vector<std::string> vocabulary;
  std::vector<std::string> lead_in;
};

std::string sentence(std::vector<std::string> words) {
  words.front()[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(words.front()[0])));
  words.back() += ".";
  return text::join(words, " ");
}

std::int64_t clamped_round(double v, std::int64_t lo, std::int64_t hi) {
  return std::clamp<std::int64_t>(std::llround(v), lo, hi);
}

std::string pad2(std::size_t n) { return n < 10 ? "0" + std::to_string(n) : std::to_string(n); }

std::string pad4(std::size_t n) {
  std::string s = std::to_string(n);
  return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

std::vector<std::string> question_words(const Section& s) {
  std::vector<std::string> q = s.lead_in;
  q.push_back(s.key);
  q.insert(q.end(), s.details.begin(), s.details.end());
  q.push_back("of");
  q.push_back(s.topic);
  return q;
}

std::string question_text(const std::vector<std::string>& words) {
  return text::join(words, " ") + "?";
}

}  // namespace

std::string_view question_synonym(std::string_view word) {
  for (const auto& s : kSynonyms) {
    if (s.word == word) return s.synonym;
  }
  return {};
}

void SyntheticCorpusSpec::validate() const {
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(duplicate_question_rate) || !rate_ok(paraphrase_rate)) {
    throw SpecError("duplicate and paraphrase rates must lie in [0, 1]");
  }
  if (duplicate_question_rate + paraphrase_rate > 1.0) {
    throw SpecError("duplicate and paraphrase rates must sum to at most 1");
  }
  if (n_docs < 1) throw SpecError("n_docs must be >= 1");
  if (!(words_per_doc_mean > 0.0) || words_per_doc_std < 0.0) {
    throw SpecError("words per document must have a positive mean and non-negative std");
  }
  if (!(questions_per_doc >= 1.0) || questions_per_doc_std < 0.0) {
    throw SpecError("questions per document must be >= 1 with non-negative std");
  }
  if (question_words_std < 0.0 || answer_words_std < 0.0) {
    throw SpecError("standard deviations must be non-negative");
  }
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  WordSource words;
  SyntheticCorpus out;

  for (std::size_t d = 0; d < spec.n_docs; ++d) {
    const std::string doc_id = "doc-" + pad4(d);
    const auto total_words = static_cast<std::size_t>(clamped_round(
        rng.normal(spec.words_per_doc_mean, spec.words_per_doc_std), 800, INT64_MAX / 2));
    const auto n_sections = static_cast<std::size_t>(
        clamped_round(rng.normal(spec.questions_per_doc, spec.questions_per_doc_std), 1, 1000));

    std::vector<Section> sections(n_sections);
    for (auto& s : sections) {
      s.topic = words.next();
      s.key = words.next();
      const auto answer_len = clamped_round(rng.normal(spec.answer_words_mean,
                                                       spec.answer_words_std), 1, 3);
      for (std::int64_t i = 0; i < answer_len; ++i) s.answer.push_back(words.next());
      for (std::string_view w : kLeadIns[rng.below(kLeadIns.size())]) {
        if (!w.empty()) s.lead_in.emplace_back(w);
      }
      const auto q_len = clamped_round(rng.normal(spec.question_words_mean,
                                                  spec.question_words_std),
                                       kMinQuestionWords, kMaxQuestionWords);
      const auto n_details =
          std::max<std::int64_t>(0, q_len - static_cast<std::int64_t>(s.lead_in.size()) - 3);
      for (std::int64_t i = 0; i < n_details; ++i) s.details.push_back(words.next());
      for (std::size_t i = 0; i < kFillerVocabulary; ++i) s.vocabulary.push_back(words.next());
    }

    // Text: each section is filler sentences around its fact sentence.
    std::vector<std::string> paragraphs;
    for (std::size_t si = 0; si < n_sections; ++si) {
      const Section& s = sections[si];
      const std::size_t target = total_words / n_sections + (si < total_words % n_sections);

      std::vector<std::string> fact = {s.key};
      fact.insert(fact.end(), s.answer.begin(), s.answer.end());
      fact.back() += ",";
      fact.insert(fact.end(), s.details.begin(), s.details.end());
      fact.push_back(s.topic);
      for (std::size_t i = 0; i < kFactTailWords; ++i) {
        fact.push_back(s.vocabulary[rng.below(s.vocabulary.size())]);
      }

      std::vector<std::string> sentences;
      std::size_t used = fact.size();
      while (used < target) {
        const std::size_t len =
            std::min<std::size_t>(static_cast<std::size_t>(rng.between(8, 16)), target - used);
        const std::size_t topic_at = rng.below(len);
        std::vector<std::string> ws;
        for (std::size_t i = 0; i < len; ++i) {
          if (i == topic_at) {
            ws.push_back(s.topic);
          } else if (rng.chance(0.25)) {
            ws.emplace_back(kDocFunctionWords[rng.below(kDocFunctionWords.size())]);
          } else {
            ws.push_back(s.vocabulary[rng.below(s.vocabulary.size())]);
          }
        }
        sentences.push_back(sentence(std::move(ws)));
        used += len;
      }
      const std::size_t fact_at = rng.below(sentences.size() + 1);
      sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(fact_at),
                       sentence(std::move(fact)));
      paragraphs.push_back(text::join(sentences, " "));
    }
    out.corpus.documents.push_back(make_document(
        doc_id, text::join(paragraphs, "\n\n"),
        "Synthetic document " + std::to_string(d) + " on " + sections.front().topic));

    // Question stream for this document.
    std::vector<std::size_t> fresh_order(n_sections);
    for (std::size_t i = 0; i < n_sections; ++i) fresh_order[i] = i;
    rng.shuffle(fresh_order);
    std::size_t next_fresh = 0;

    std::vector<std::vector<std::string>> asked;
    std::vector<std::size_t> fresh_indexes;
    for (std::size_t qi = 0; qi < n_sections; ++qi) {
      SyntheticQuestionInfo info;
      std::vector<std::string> q;
      const double r = rng.uniform();
      if (qi > 0 && r < spec.duplicate_question_rate) {
        info.origin = QuestionOrigin::duplicate;
        info.source = rng.below(qi);
        info.section = out.info[out.info.size() - qi + info.source].section;
        q = asked[info.source];
      } else if (qi > 0 && r < spec.duplicate_question_rate + spec.paraphrase_rate) {
        info.origin = QuestionOrigin::paraphrase;
        info.source = fresh_indexes[rng.below(fresh_indexes.size())];
        info.section = out.info[out.info.size() - qi + info.source].section;
        q = asked[info.source];
        std::vector<std::size_t> swappable;
        for (std::size_t i = 0; i < q.size(); ++i) {
          if (!question_synonym(q[i]).empty()) swappable.push_back(i);
        }
        const auto k = static_cast<std::size_t>(
            rng.between(1, std::max<std::int64_t>(1, static_cast<std::int64_t>(q.size()) / 4)));
        rng.shuffle(swappable);
        for (std::size_t i = 0; i < std::min(k, swappable.size()); ++i) {
          q[swappable[i]] = std::string(question_synonym(q[swappable[i]]));
        }
      } else {
        info.origin = QuestionOrigin::fresh;
        info.source = qi;
        info.section = fresh_order[next_fresh++];
        q = question_words(sections[info.section]);
        fresh_indexes.push_back(qi);
      }

      QuestionRecord rec;
      rec.question_id = doc_id + "-q" + pad2(qi);
      rec.doc_id = doc_id;
      rec.question_text = question_text(q);
      rec.gold_answer = text::join(sections[info.section].answer, " ");
      out.corpus.questions.push_back(std::move(rec));
      out.info.push_back(info);
      asked.push_back(std::move(q));
    }
  }
  return out;
}

}  // namespace semsum
