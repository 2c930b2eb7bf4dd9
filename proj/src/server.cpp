#include "semsum/server.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "semsum/corpus.hpp"
#include "semsum/remote_providers.hpp"
#include "semsum/text.hpp"

namespace semsum {
namespace {

using json = nlohmann::ordered_json;

struct ConfigKey {
  const char* name;
  bool numeric;
  std::function<void(ServiceConfig&, const json&)> apply;
};

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"listen_address", false,
       [](ServiceConfig& c, const json& v) { c.listen_address = v.get<std::string>(); }},
      {"port", true, [](ServiceConfig& c, const json& v) { c.port = v.get<int>(); }},
      {"chat_endpoint", false,
       [](ServiceConfig& c, const json& v) { c.chat_endpoint = v.get<std::string>(); }},
      {"embed_endpoint", false,
       [](ServiceConfig& c, const json& v) { c.embed_endpoint = v.get<std::string>(); }},
      {"embed_dim", true, [](ServiceConfig& c, const json& v) { c.embed_dim = v.get<int>(); }},
      {"provider_token_env", false,
       [](ServiceConfig& c, const json& v) { c.provider_token_env = v.get<std::string>(); }},
      {"provider_timeout_s", true,
       [](ServiceConfig& c, const json& v) { c.provider_timeout_s = v.get<double>(); }},
      {"provider_retries", true,
       [](ServiceConfig& c, const json& v) { c.provider_retries = v.get<int>(); }},
      {"api_token", false,
       [](ServiceConfig& c, const json& v) { c.api_token = v.get<std::string>(); }},
      {"method", false,
       [](ServiceConfig& c, const json& v) {
         c.method.method = method_from_string(v.get<std::string>());
       }},
      {"similarity_threshold", true,
       [](ServiceConfig& c, const json& v) {
         c.method.similarity_threshold = v.get<double>();
         c.cache.similarity_threshold = c.method.similarity_threshold;
       }},
      {"summary_word_budget", true,
       [](ServiceConfig& c, const json& v) { c.method.summary_word_budget = v.get<std::uint32_t>(); }},
      {"cache_capacity", true,
       [](ServiceConfig& c, const json& v) { c.cache.capacity = v.get<std::size_t>(); }},
      {"cache_scope", false,
       [](ServiceConfig& c, const json& v) {
         const auto s = v.get<std::string>();
         if (s == "per_document") {
           c.cache.scope = CacheScope::per_document;
         } else if (s == "global") {
           c.cache.scope = CacheScope::global;
         } else {
           throw ConfigError("cache_scope must be per_document or global");
         }
       }},
      {"snapshot_path", false,
       [](ServiceConfig& c, const json& v) { c.snapshot_path = v.get<std::string>(); }},
      {"snapshot_interval_s", true,
       [](ServiceConfig& c, const json& v) { c.snapshot_interval_s = v.get<double>(); }},
  };
  return keys;
}

void apply_key(ServiceConfig& c, const ConfigKey& key, const json& value, const std::string& from) {
  try {
    key.apply(c, value);
  } catch (const json::exception&) {
    throw ConfigError(from + ": bad value for " + key.name);
  }
}

std::string docs_sidecar(const std::string& snapshot) { return snapshot + ".docs.jsonl"; }
std::string answers_sidecar(const std::string& snapshot) { return snapshot + ".answers"; }

ServiceResponse reply(int status, const json& body) { return {status, body.dump()}; }

ServiceResponse error_reply(int status, const std::string& message, bool retryable = false) {
  json body = {{"error", message}};
  if (status == 502) body["retryable"] = retryable;
  return reply(status, body);
}

json stats_json(const CacheStats& s) {
  return {{"entries", s.entries},     {"lookups", s.lookups},
          {"hits", s.hits},           {"misses", s.misses},
          {"evictions", s.evictions}, {"invalidations", s.invalidations},
          {"inserts", s.inserts},     {"flushes", s.flushes},
          {"flushed", s.flushed},     {"hit_rate", s.hit_rate}};
}

double ms(double seconds) { return seconds * 1000.0; }

}  // namespace

void ServiceConfig::validate() const {
  cache.validate();
  method.validate();
  if (snapshot_interval_s < 0.0) throw ConfigError("snapshot interval must be >= 0");
  if (port < 0 || port > 65535) throw ConfigError("port out of range");
  if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
  if (provider_retries < 0) throw ConfigError("provider_retries must be >= 0");
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file,
                                  const EnvLookup& env) {
  ServiceConfig c;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot open config file " + file->string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config file " + file->string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [name, value] : j.items()) {
      const ConfigKey* key = nullptr;
      for (const auto& k : config_keys()) {
        if (name == k.name) key = &k;
      }
      if (key == nullptr) throw ConfigError("unknown config key: " + name);
      apply_key(c, *key, value, file->string());
    }
  }
  for (const auto& key : config_keys()) {
    std::string var = "SEMSUM_";
    for (const char* p = key.name; *p; ++p) {
      var.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(*p))));
    }
    const auto value = env(var);
    if (!value) continue;
    json v;
    if (key.numeric) {
      try {
        v = json::parse(*value);
      } catch (const json::exception&) {
        throw ConfigError(var + " must be numeric");
      }
      if (!v.is_number()) throw ConfigError(var + " must be numeric");
    } else {
      v = *value;
    }
    apply_key(c, key, v, var);
  }
  c.validate();
  return c;
}

Service::Service(ServiceConfig config, std::unique_ptr<ChatProvider> chat,
                 std::unique_ptr<EmbeddingProvider> embed)
    : config_(std::move(config)),
      chat_(std::move(chat)),
      embed_(std::move(embed)),
      summary_cache_(embed_->dim(), config_.cache),
      answer_cache_(embed_->dim(), config_.cache) {
  config_.validate();
}

Service::~Service() { stop_snapshot_thread(); }

std::unique_ptr<Service> Service::from_config(ServiceConfig config, MockDelays delays) {
  std::unique_ptr<ChatProvider> chat;
  std::unique_ptr<EmbeddingProvider> embed;
  const std::string token = process_env(config.provider_token_env).value_or("");
  auto remote = [&](const std::string& endpoint) {
    RemoteOptions o;
    o.endpoint = endpoint;
    o.timeout_s = config.provider_timeout_s;
    o.retries = config.provider_retries;
    o.bearer_token = token;
    return o;
  };
  if (config.chat_endpoint.empty()) {
    chat = std::make_unique<MockChatProvider>(delays);
  } else {
    chat = std::make_unique<RemoteChatProvider>(remote(config.chat_endpoint));
  }
  if (config.embed_endpoint.empty()) {
    embed = std::make_unique<HashEmbeddingProvider>(config.embed_dim, delays);
  } else {
    embed = std::make_unique<RemoteEmbeddingProvider>(remote(config.embed_endpoint),
                                                      config.embed_dim);
  }
  return std::make_unique<Service>(std::move(config), std::move(chat), std::move(embed));
}

std::optional<Document> Service::find_document(const std::string& doc_id) const {
  std::shared_lock lock(docs_mutex_);
  const auto it = docs_.find(doc_id);
  if (it == docs_.end()) return std::nullopt;
  return it->second;
}

ServiceResponse Service::answer(const std::string& body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception&) {
    return error_reply(400, "request body is not valid JSON");
  }
  if (!req.is_object()) return error_reply(400, "request body must be a JSON object");
  if (!req.contains("doc_id") || !req["doc_id"].is_string()) {
    return error_reply(400, "doc_id (string) is required");
  }
  if (req.contains("question") && !req["question"].is_string()) {
    return error_reply(400, "question must be a string");
  }

  MethodConfig mc = config_.method;
  try {
    if (req.contains("method")) {
      if (!req["method"].is_string()) return error_reply(400, "method must be a string");
      mc.method = method_from_string(req["method"].get<std::string>());
    }
    if (req.contains("threshold")) {
      if (!req["threshold"].is_number()) return error_reply(400, "threshold must be a number");
      mc.similarity_threshold = req["threshold"].get<double>();
    }
    if (req.contains("budget")) {
      if (!req["budget"].is_number_unsigned()) {
        return error_reply(400, "budget must be a positive integer");
      }
      mc.summary_word_budget = req["budget"].get<std::uint32_t>();
    }
    mc.validate();
  } catch (const ConfigError& e) {
    return error_reply(400, e.what());
  }

  const std::string doc_id = req["doc_id"].get<std::string>();
  const std::string question = req.value("question", std::string());
  const std::string question_id = req.value("question_id", std::string());
  const auto doc = find_document(doc_id);
  if (!doc) return error_reply(404, "unknown document: " + doc_id);
  if (text::trim(question).empty()) return error_reply(422, "question must not be empty");

  Providers providers{*chat_, *embed_, LatencyMode::measured};
  AnswerTrace t;
  try {
    switch (mc.method) {
      case Method::full_document:
        t = answer_full_document(*doc, question_id, question, providers);
        break;
      case Method::no_retrieval:
        t = answer_no_retrieval(doc_id, question_id, question, providers);
        break;
      case Method::noncontextual_summary:
        t = answer_noncontextual_summary(*doc, question_id, question, providers, summary_store_,
                                         mc.summary_word_budget);
        break;
      case Method::contextual_summary_cached:
        t = answer_contextual_cached(*doc, question_id, question, providers, summary_cache_, mc);
        break;
      case Method::full_prompt_answer_cache:
        t = answer_prompt_cached(*doc, question_id, question, providers, answer_cache_, mc);
        break;
    }
  } catch (const ProviderUnavailableError& e) {
    return error_reply(502, e.what(), true);
  } catch (const ProviderProtocolError& e) {
    return error_reply(502, e.what(), false);
  } catch (const StaleVersionError& e) {
    return error_reply(409, std::string(e.what()) + "; retry the request");
  } catch (const EmptyInputError& e) {
    return error_reply(422, e.what());
  } catch (const DegenerateVectorError& e) {
    return error_reply(422, e.what());
  }

  json out = {{"question_id", t.question_id},
              {"doc_id", t.doc_id},
              {"method", std::string(to_string(mc.method))},
              {"threshold", mc.similarity_threshold},
              {"budget", mc.summary_word_budget},
              {"answer", t.answer_text},
              {"cache_hit", t.cache_hit},
              {"similarity", nullptr},
              {"tokens_in", t.input_tokens},
              {"tokens_out", t.output_tokens},
              {"latency_ms",
               {{"llm", ms(t.latency_llm)},
                {"cache", ms(t.latency_cache_search)},
                {"encode", ms(t.latency_encoding)},
                {"total", ms(t.latency_total)}}}};
  if (t.similarity_of_hit) out["similarity"] = *t.similarity_of_hit;
  return reply(200, out);
}

ServiceResponse Service::put_document(const std::string& doc_id, const std::string& body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception&) {
    return error_reply(400, "request body is not valid JSON");
  }
  if (doc_id.empty()) return error_reply(400, "doc_id must not be empty");
  if (!req.is_object()) return error_reply(400, "request body must be a JSON object");
  if (req.contains("text") && !req["text"].is_string()) {
    return error_reply(400, "text must be a string");
  }
  if (req.contains("title") && !req["title"].is_string()) {
    return error_reply(400, "title must be a string");
  }
  std::string body_text = req.value("text", std::string());
  if (text::trim(body_text).empty()) return error_reply(422, "text must not be empty");

  std::unique_lock lock(docs_mutex_);
  const auto it = docs_.find(doc_id);
  const std::uint64_t version = it == docs_.end() ? 1 : it->second.version + 1;
  Document doc = make_document(doc_id, std::move(body_text), req.value("title", std::string()),
                               version);
  if (it != docs_.end()) {
    for (SemanticCache* cache : {&summary_cache_, &answer_cache_}) {
      if (cache->document_version(doc_id)) cache->invalidate_document(doc_id, version);
    }
    summary_store_.erase_document(doc_id);
  }
  const json out = {{"doc_id", doc_id}, {"version", version}, {"word_count", doc.word_count}};
  docs_[doc_id] = std::move(doc);
  return reply(200, out);
}

ServiceResponse Service::cache_stats() const { return reply(200, stats_json(summary_cache_.stats())); }

ServiceResponse Service::flush_cache() {
  const std::size_t removed = summary_cache_.flush() + answer_cache_.flush();
  return reply(200, {{"removed", removed}});
}

void Service::save_snapshot() const {
  if (config_.snapshot_path.empty()) return;
  // Updates wait while the registry and the caches are written, so the
  // files agree on document versions.
  std::shared_lock lock(docs_mutex_);
  const std::filesystem::path docs_path = docs_sidecar(config_.snapshot_path);
  const std::filesystem::path tmp = docs_path.string() + ".tmp";
  {
    Corpus registry;
    for (const auto& [id, doc] : docs_) registry.documents.push_back(doc);
    std::sort(registry.documents.begin(), registry.documents.end(),
              [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    write_corpus(out, registry);
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, docs_path);
  summary_cache_.snapshot(std::filesystem::path(config_.snapshot_path));
  answer_cache_.snapshot(std::filesystem::path(answers_sidecar(config_.snapshot_path)));
}

bool Service::load_snapshot() {
  if (config_.snapshot_path.empty() || !std::filesystem::exists(config_.snapshot_path)) {
    return false;
  }
  const CorpusFilter no_filter{0, 0};
  LoadedCorpus registry = load_corpus(std::filesystem::path(docs_sidecar(config_.snapshot_path)),
                                      no_filter);
  SemanticCache summaries = SemanticCache::restore(std::filesystem::path(config_.snapshot_path));
  SemanticCache answers =
      SemanticCache::restore(std::filesystem::path(answers_sidecar(config_.snapshot_path)));
  if (summaries.dim() != embed_->dim() || answers.dim() != embed_->dim()) {
    throw ConfigError("snapshot dimension does not match the embedding provider");
  }
  std::unique_lock lock(docs_mutex_);
  docs_.clear();
  for (auto& d : registry.corpus.documents) docs_.emplace(d.doc_id, std::move(d));
  summary_cache_ = std::move(summaries);
  answer_cache_ = std::move(answers);
  return true;
}

void Service::start_snapshot_thread() {
  if (config_.snapshot_path.empty() || config_.snapshot_interval_s <= 0.0) return;
  if (snapshot_thread_.joinable()) return;
  stop_snapshots_ = false;
  snapshot_thread_ = std::thread([this] {
    const auto interval = std::chrono::duration<double>(config_.snapshot_interval_s);
    std::unique_lock lock(snapshot_mutex_);
    while (!snapshot_cv_.wait_for(lock, interval, [this] { return stop_snapshots_; })) {
      try {
        save_snapshot();
      } catch (const std::exception&) {
        // The next tick tries again; the previous snapshot stays intact.
      }
    }
  });
}

void Service::stop_snapshot_thread() {
  {
    std::lock_guard lock(snapshot_mutex_);
    stop_snapshots_ = true;
  }
  snapshot_cv_.notify_all();
  if (snapshot_thread_.joinable()) snapshot_thread_.join();
}

bool Service::authorized(const std::string& authorization_header) const {
  return config_.api_token.empty() || authorization_header == "Bearer " + config_.api_token;
}

struct HttpServer::Impl {
  Service& service;
  std::ostream* log;
  httplib::Server server;
  std::thread thread;
  std::mutex log_mutex;
  int port = -1;

  Impl(Service& s, std::ostream* l) : service(s), log(l) {}

  void write_log(const httplib::Request& req, int status, double elapsed_ms,
                 const std::string& body) {
    if (log == nullptr) return;
    json line = {{"ts_us", system_now()},
                 {"http_method", req.method},
                 {"path", req.path},
                 {"status", status},
                 {"duration_ms", elapsed_ms}};
    if (req.path == "/v1/answer" && status == 200) {
      const json r = json::parse(body);
      for (const char* k : {"question_id", "doc_id", "method", "threshold", "budget",
                            "cache_hit", "similarity", "tokens_in", "tokens_out", "latency_ms"}) {
        line[k] = r[k];
      }
    }
    std::lock_guard lock(log_mutex);
    *log << line.dump() << '\n';
    log->flush();
  }

  template <typename F>
  httplib::Server::Handler route(F&& f) {
    return [this, f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
      const auto start = std::chrono::steady_clock::now();
      ServiceResponse r;
      if (!service.authorized(req.get_header_value("Authorization"))) {
        r = error_reply(401, "missing or invalid bearer token");
      } else {
        try {
          r = f(req);
        } catch (const std::exception& e) {
          r = error_reply(500, e.what());
        }
      }
      res.status = r.status;
      res.set_content(r.body, "application/json");
      const double elapsed =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
              .count();
      write_log(req, r.status, elapsed, r.body);
    };
  }
};

HttpServer::HttpServer(Service& service, std::ostream* log)
    : impl_(std::make_unique<Impl>(service, log)) {
  Impl& i = *impl_;
  i.server.Post("/v1/answer",
                i.route([&s = service](const httplib::Request& req) { return s.answer(req.body); }));
  i.server.Put(R"(/v1/documents/([^/]+))",
               i.route([&s = service](const httplib::Request& req) {
                 return s.put_document(req.matches[1].str(), req.body);
               }));
  i.server.Get("/v1/cache/stats",
               i.route([&s = service](const httplib::Request&) { return s.cache_stats(); }));
  i.server.Delete("/v1/cache",
                  i.route([&s = service](const httplib::Request&) { return s.flush_cache(); }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  const auto& c = impl_->service.config();
  if (c.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(c.listen_address);
  } else {
    impl_->port = impl_->server.bind_to_port(c.listen_address, c.port) ? c.port : -1;
  }
  if (impl_->port < 0) {
    throw ConfigError("cannot bind " + c.listen_address + ":" + std::to_string(c.port));
  }
  return impl_->port;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::start_background() {
  impl_->thread = std::thread([this] { serve(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace semsum
