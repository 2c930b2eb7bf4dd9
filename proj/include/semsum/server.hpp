#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <unordered_map>

#include "semsum/document.hpp"
#include "semsum/mock_providers.hpp"
#include "semsum/pipeline.hpp"
#include "semsum/semcache.hpp"

namespace semsum {

/// Settings of the HTTP service. Keys of the JSON config file match the
/// field names; every key may be overridden by SEMSUM_<KEY in upper case>.
struct ServiceConfig {
  std::string listen_address = "127.0.0.1";
  int port = 8080;

  /// Empty selects the built-in mock providers.
  std::string chat_endpoint;
  std::string embed_endpoint;
  int embed_dim = 64;
  /// Name of the environment variable holding the provider bearer token.
  std::string provider_token_env = "SEMSUM_PROVIDER_TOKEN";
  double provider_timeout_s = 30.0;
  int provider_retries = 2;

  /// Required as "Authorization: Bearer <token>" when non-empty.
  std::string api_token;

  CacheConfig cache{};
  MethodConfig method{};

  std::string snapshot_path;
  /// Seconds between periodic snapshots; 0 disables them.
  double snapshot_interval_s = 0.0;

  void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

/// Reads the optional config file, then applies environment overrides.
/// Throws ConfigError.
ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file,
                                  const EnvLookup& env = process_env);

struct ServiceResponse {
  int status = 200;
  std::string body;
};

/// Request handling independent of the HTTP transport.
class Service {
 public:
  Service(ServiceConfig config, std::unique_ptr<ChatProvider> chat,
          std::unique_ptr<EmbeddingProvider> embed);
  ~Service();

  /// Mock or remote providers as the config selects.
  static std::unique_ptr<Service> from_config(ServiceConfig config, MockDelays delays = {});

  ServiceResponse answer(const std::string& body);
  ServiceResponse put_document(const std::string& doc_id, const std::string& body);
  ServiceResponse cache_stats() const;
  ServiceResponse flush_cache();

  /// Writes the summary cache to snapshot_path, with the document registry
  /// and the answer cache in sidecar files next to it.
  void save_snapshot() const;
  /// Loads what save_snapshot wrote; returns false when no snapshot exists.
  bool load_snapshot();

  /// Periodic snapshots, if configured.
  void start_snapshot_thread();
  void stop_snapshot_thread();

  bool authorized(const std::string& authorization_header) const;
  const ServiceConfig& config() const noexcept { return config_; }
  SemanticCache& summary_cache() noexcept { return summary_cache_; }

 private:
  std::optional<Document> find_document(const std::string& doc_id) const;

  ServiceConfig config_;
  std::unique_ptr<ChatProvider> chat_;
  std::unique_ptr<EmbeddingProvider> embed_;

  mutable std::shared_mutex docs_mutex_;
  std::unordered_map<std::string, Document> docs_;
  SemanticCache summary_cache_;
  SemanticCache answer_cache_;
  SummaryStore summary_store_;

  std::thread snapshot_thread_;
  std::mutex snapshot_mutex_;
  std::condition_variable snapshot_cv_;
  bool stop_snapshots_ = false;
};

/// HTTP/1.1 JSON front end:
///   POST   /v1/answer
///   PUT    /v1/documents/{doc_id}
///   GET    /v1/cache/stats
///   DELETE /v1/cache
/// One JSON log line per request goes to `log`.
class HttpServer {
 public:
  HttpServer(Service& service, std::ostream* log);
  ~HttpServer();

  /// Binds to config().listen_address; port 0 picks a free port. Returns the
  /// bound port. Throws ConfigError when binding fails.
  int bind();
  /// Blocks until stop().
  void serve();
  void start_background();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace semsum
