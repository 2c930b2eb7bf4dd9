#pragma once

#include <string>
#include <vector>

#include "semsum/corpus.hpp"
#include "semsum/mock_providers.hpp"
#include "semsum/pipeline.hpp"

namespace fixture {

/// Mock chat that remembers every request it served.
class RecordingChat : public semsum::ChatProvider {
 public:
  explicit RecordingChat(semsum::MockDelays d = {}) : inner_(d) {}

  semsum::ChatResponse chat(const semsum::ChatRequest& r) override {
    requests.push_back(r);
    responses.push_back(inner_.chat(r));
    return responses.back();
  }
  std::string name() const override { return inner_.name(); }

  std::vector<semsum::ChatRequest> requests;
  std::vector<semsum::ChatResponse> responses;

 private:
  semsum::MockChatProvider inner_;
};

struct MockStack {
  RecordingChat chat;
  semsum::HashEmbeddingProvider embed;
  semsum::Providers providers{chat, embed};
};

inline semsum::SyntheticCorpusSpec small_spec(std::size_t docs = 6, std::uint64_t seed = 5) {
  semsum::SyntheticCorpusSpec s;
  s.n_docs = docs;
  s.words_per_doc_mean = 1200;
  s.words_per_doc_std = 200;
  s.questions_per_doc = 12;
  s.seed = seed;
  return s;
}

/// Sentences of numbered filler words, `words` long in total.
inline std::string filler(std::size_t words, const std::string& stem = "word") {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    out += stem + std::to_string(i % 997);
    out += (i % 10 == 9) ? ". " : " ";
  }
  return out;
}

}  // namespace fixture
