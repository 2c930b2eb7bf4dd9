#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "semsum/document.hpp"

namespace semsum {

struct Corpus {
  std::vector<Document> documents;
  std::vector<QuestionRecord> questions;

  /// Throws UnknownDocumentError.
  const Document& document(const std::string& doc_id) const;
  Document& document(const std::string& doc_id);
  bool contains(const std::string& doc_id) const;

  /// Question texts grouped by document, in corpus order.
  std::vector<std::vector<std::string>> question_texts_by_document() const;
};

struct CorpusFilter {
  std::size_t min_words = 800;
  std::size_t min_questions = 10;
};

struct Rejection {
  /// "doc" or "question".
  std::string kind;
  std::string id;
  std::string reason;
};

struct LoadedCorpus {
  Corpus corpus;
  std::vector<Rejection> rejected;
};

/// Reads line-delimited JSON records:
///   {"kind":"doc","doc_id":...,"title":...,"text":...[,"version":n]}
///   {"kind":"question","question_id":...,"doc_id":...,"question_text":...,"gold_answer":...}
/// Documents under min_words and documents with fewer than min_questions
/// questions are dropped together with their questions.
/// Throws CorpusParseError (with line number), IntegrityError for
/// duplicate ids or questions naming an absent document, IoError when the
/// file cannot be read.
LoadedCorpus load_corpus(std::istream& in, const CorpusFilter& filter = {});
LoadedCorpus load_corpus(const std::filesystem::path& path, const CorpusFilter& filter = {});

/// Documents first, then questions; one JSON object per line.
void write_corpus(std::ostream& out, const Corpus& corpus);

struct SyntheticCorpusSpec {
  std::size_t n_docs = 134;
  double words_per_doc_mean = 4057.0;
  double words_per_doc_std = 930.0;
  double questions_per_doc = 15.0;
  double questions_per_doc_std = 0.0;
  double question_words_mean = 8.0;
  double question_words_std = 3.0;
  double answer_words_mean = 3.0;
  double answer_words_std = 4.0;
  double duplicate_question_rate = 0.3;
  double paraphrase_rate = 0.3;
  std::uint64_t seed = 7;

  /// Throws SpecError.
  void validate() const;
};

enum class QuestionOrigin : std::uint8_t { fresh, duplicate, paraphrase };

struct SyntheticQuestionInfo {
  QuestionOrigin origin = QuestionOrigin::fresh;
  /// Index within the document's questions of the copied question; the
  /// question's own index for fresh ones.
  std::size_t source = 0;
  /// Section whose fact sentence the question targets.
  std::size_t section = 0;
};

struct SyntheticCorpus {
  Corpus corpus;
  /// Parallel to corpus.questions.
  std::vector<SyntheticQuestionInfo> info;
};

/// Documents of topic sections with disjoint vocabularies. Each section has
/// one fact sentence "<key> <answer words>, <detail words> <topic> ...";
/// fresh questions ask "<lead-in> <key> <detail words> of <topic>" about a
/// section not asked before. Duplicates copy an earlier question of the same
/// document; paraphrases swap lead-in words of an earlier fresh question for
/// synonyms. Deterministic in spec.seed.
SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec);

/// Synonym used by paraphrases, or empty when the word has none.
std::string_view question_synonym(std::string_view word);

}  // namespace semsum
