#pragma once

#include <string>

#include "semsum/providers.hpp"

namespace semsum {

struct RemoteOptions {
  /// Base URL, e.g. "http://127.0.0.1:8081" or "http://host:8081/prefix".
  std::string endpoint;
  double timeout_s = 30.0;
  int retries = 2;
  /// First retry delay; doubles on every further attempt.
  double backoff_s = 0.25;
  /// Sent as "Authorization: Bearer <token>" when non-empty.
  std::string bearer_token;
};

/// Chat over HTTP: POST {endpoint}/chat {messages, temperature, top_p} -> {text}.
class RemoteChatProvider : public ChatProvider {
 public:
  explicit RemoteChatProvider(RemoteOptions options, TokenEstimator tokens = {});

  ChatResponse chat(const ChatRequest& request) override;
  std::string name() const override { return "remote:" + options_.endpoint; }

 private:
  RemoteOptions options_;
  TokenEstimator tokens_;
};

/// Embeddings over HTTP: POST {endpoint}/embed {text} -> {vector}.
class RemoteEmbeddingProvider : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(RemoteOptions options, Eigen::Index dim);

  EmbeddingVector embed(std::string_view text) override;
  Eigen::Index dim() const override { return dim_; }
  std::string name() const override { return "remote:" + options_.endpoint; }

 private:
  RemoteOptions options_;
  Eigen::Index dim_;
};

}  // namespace semsum
