#include "semsum/remote_providers.hpp"

#include <chrono>
#include <regex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace semsum {
namespace {

using json = nlohmann::json;

struct ParsedEndpoint {
  std::string origin;
  std::string prefix;
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(endpoint, m, re)) {
    throw ConfigError("provider endpoint must look like http://host:port[/prefix]: " + endpoint);
  }
  std::string prefix = m[2].str();
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {m[1].str(), prefix};
}

json post_json(const RemoteOptions& options, const std::string& route, const json& body) {
  const ParsedEndpoint ep = parse_endpoint(options.endpoint);
  httplib::Client client(ep.origin);
  const auto timeout = std::chrono::duration<double>(options.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!options.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + options.bearer_token);
  }

  const std::string payload = body.dump();
  std::string last_error;
  double backoff = options.backoff_s;
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
    auto res = client.Post(ep.prefix + route, headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ProviderProtocolError(route + " returned HTTP " + std::to_string(res->status));
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw ProviderProtocolError(route + " returned malformed JSON: " + e.what());
    }
  }
  throw ProviderUnavailableError(options.endpoint + route + " unavailable after " +
                                 std::to_string(options.retries + 1) +
                                 " attempts: " + last_error);
}

}  // namespace

RemoteChatProvider::RemoteChatProvider(RemoteOptions options, TokenEstimator tokens)
    : options_(std::move(options)), tokens_(std::move(tokens)) {
  parse_endpoint(options_.endpoint);
}

ChatResponse RemoteChatProvider::chat(const ChatRequest& request) {
  check_request(request);
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  const json body = {
      {"messages", messages}, {"temperature", request.temperature}, {"top_p", request.top_p}};

  const auto start = std::chrono::steady_clock::now();
  const json reply = post_json(options_, "/chat", body);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
    throw ProviderProtocolError("/chat reply lacks a string field \"text\"");
  }
  ChatResponse r;
  r.text = reply["text"].get<std::string>();
  r.input_token_count = tokens_.count(render_prompt(request));
  r.output_token_count = tokens_.count(r.text);
  r.provider_latency = elapsed.count();
  return r;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteOptions options, Eigen::Index dim)
    : options_(std::move(options)), dim_(dim) {
  parse_endpoint(options_.endpoint);
  if (dim < 1) throw DimensionError("embedding dimension must be >= 1");
}

EmbeddingVector RemoteEmbeddingProvider::embed(std::string_view text) {
  if (text.empty()) throw EmptyInputError("cannot embed empty text");
  const json reply = post_json(options_, "/embed", {{"text", std::string(text)}});
  if (!reply.is_object() || !reply.contains("vector") || !reply["vector"].is_array()) {
    throw ProviderProtocolError("/embed reply lacks an array field \"vector\"");
  }
  const auto& values = reply["vector"];
  if (static_cast<Eigen::Index>(values.size()) != dim_) {
    throw ProviderProtocolError("/embed returned " + std::to_string(values.size()) +
                                " values, expected " + std::to_string(dim_));
  }
  EmbeddingVector v(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) {
    if (!values[static_cast<std::size_t>(i)].is_number()) {
      throw ProviderProtocolError("/embed vector holds a non-number");
    }
    v[i] = values[static_cast<std::size_t>(i)].get<double>();
  }
  if (!v.allFinite()) throw ProviderProtocolError("/embed vector holds non-finite values");
  return normalize(v);
}

}  // namespace semsum
