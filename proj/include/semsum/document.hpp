#pragma once

#include <cstdint>
#include <string>

namespace semsum {

struct Document {
  std::string doc_id;
  std::uint64_t version = 1;
  std::string title;
  std::string text;
  /// Whitespace-token count of text.
  std::size_t word_count = 0;
};

Document make_document(std::string doc_id, std::string text, std::string title = {},
                       std::uint64_t version = 1);

struct QuestionRecord {
  std::string question_id;
  std::string doc_id;
  std::string question_text;
  std::string gold_answer;
};

}  // namespace semsum
