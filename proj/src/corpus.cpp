#include "semsum/corpus.hpp"

#include <fstream>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "semsum/error.hpp"
#include "semsum/text.hpp"

namespace semsum {
namespace {

using json = nlohmann::ordered_json;

std::string required_string(const json& j, const char* key, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw CorpusParseError(std::string("missing string field \"") + key + "\"", line);
  }
  return it->get<std::string>();
}

}  // namespace

Document make_document(std::string doc_id, std::string text, std::string title,
                       std::uint64_t version) {
  Document d;
  d.doc_id = std::move(doc_id);
  d.version = version;
  d.title = std::move(title);
  d.word_count = text::word_count(text);
  d.text = std::move(text);
  return d;
}

const Document& Corpus::document(const std::string& doc_id) const {
  for (const auto& d : documents) {
    if (d.doc_id == doc_id) return d;
  }
  throw UnknownDocumentError("unknown document: " + doc_id);
}

Document& Corpus::document(const std::string& doc_id) {
  return const_cast<Document&>(std::as_const(*this).document(doc_id));
}

bool Corpus::contains(const std::string& doc_id) const {
  for (const auto& d : documents) {
    if (d.doc_id == doc_id) return true;
  }
  return false;
}

std::vector<std::vector<std::string>> Corpus::question_texts_by_document() const {
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < documents.size(); ++i) slot.emplace(documents[i].doc_id, i);
  std::vector<std::vector<std::string>> out(documents.size());
  for (const auto& q : questions) {
    if (const auto it = slot.find(q.doc_id); it != slot.end()) {
      out[it->second].push_back(q.question_text);
    }
  }
  return out;
}

LoadedCorpus load_corpus(std::istream& in, const CorpusFilter& filter) {
  std::vector<Document> docs;
  std::vector<QuestionRecord> questions;
  std::set<std::string> doc_ids;
  std::set<std::string> question_ids;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw CorpusParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!j.is_object()) throw CorpusParseError("record is not a JSON object", lineno);
    const std::string kind = required_string(j, "kind", lineno);
    if (kind == "doc") {
      std::string id = required_string(j, "doc_id", lineno);
      if (id.empty()) throw CorpusParseError("empty doc_id", lineno);
      std::uint64_t version = 1;
      if (const auto v = j.find("version"); v != j.end()) {
        if (!v->is_number_unsigned()) {
          throw CorpusParseError("version must be a non-negative integer", lineno);
        }
        version = v->get<std::uint64_t>();
      }
      std::string title;
      if (const auto t = j.find("title"); t != j.end()) {
        if (!t->is_string()) throw CorpusParseError("title must be a string", lineno);
        title = t->get<std::string>();
      }
      if (!doc_ids.insert(id).second) throw IntegrityError("duplicate doc_id " + id);
      docs.push_back(make_document(std::move(id), required_string(j, "text", lineno),
                                   std::move(title), version));
    } else if (kind == "question") {
      QuestionRecord q;
      q.question_id = required_string(j, "question_id", lineno);
      q.doc_id = required_string(j, "doc_id", lineno);
      q.question_text = required_string(j, "question_text", lineno);
      q.gold_answer = required_string(j, "gold_answer", lineno);
      if (q.question_id.empty()) throw CorpusParseError("empty question_id", lineno);
      if (text::trim(q.question_text).empty()) {
        throw CorpusParseError("empty question_text", lineno);
      }
      if (text::trim(q.gold_answer).empty()) throw CorpusParseError("empty gold_answer", lineno);
      if (!question_ids.insert(q.question_id).second) {
        throw IntegrityError("duplicate question_id " + q.question_id);
      }
      questions.push_back(std::move(q));
    } else {
      throw CorpusParseError("unknown record kind \"" + kind + "\"", lineno);
    }
  }
  if (in.bad()) throw IoError("read error in corpus stream");

  for (const auto& q : questions) {
    if (!doc_ids.count(q.doc_id)) {
      throw IntegrityError("question " + q.question_id + " refers to missing document " +
                           q.doc_id);
    }
  }

  LoadedCorpus out;
  std::unordered_map<std::string, std::size_t> per_doc;
  for (const auto& q : questions) ++per_doc[q.doc_id];
  std::set<std::string> admitted;
  for (auto& d : docs) {
    if (d.word_count < filter.min_words) {
      out.rejected.push_back({"doc", d.doc_id,
                              std::to_string(d.word_count) + " words, fewer than " +
                                  std::to_string(filter.min_words)});
    } else if (per_doc[d.doc_id] < filter.min_questions) {
      out.rejected.push_back({"doc", d.doc_id,
                              std::to_string(per_doc[d.doc_id]) + " questions, fewer than " +
                                  std::to_string(filter.min_questions)});
    } else {
      admitted.insert(d.doc_id);
      out.corpus.documents.push_back(std::move(d));
    }
  }
  for (auto& q : questions) {
    if (admitted.count(q.doc_id)) {
      out.corpus.questions.push_back(std::move(q));
    } else {
      out.rejected.push_back({"question", q.question_id, "document " + q.doc_id + " rejected"});
    }
  }
  return out;
}

LoadedCorpus load_corpus(const std::filesystem::path& path, const CorpusFilter& filter) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  return load_corpus(in, filter);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& d : corpus.documents) {
    json j = {{"kind", "doc"},
              {"doc_id", d.doc_id},
              {"version", d.version},
              {"title", d.title},
              {"text", d.text}};
    out << j.dump() << '\n';
  }
  for (const auto& q : corpus.questions) {
    json j = {{"kind", "question"},
              {"question_id", q.question_id},
              {"doc_id", q.doc_id},
              {"question_text", q.question_text},
              {"gold_answer", q.gold_answer}};
    out << j.dump() << '\n';
  }
}

}  // namespace semsum
