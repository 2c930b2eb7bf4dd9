#include "semsum/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "CLI11.hpp"
#include "json.hpp"
#include "semsum/corpus.hpp"
#include "semsum/metrics.hpp"
#include "semsum/mock_providers.hpp"
#include "semsum/remote_providers.hpp"
#include "semsum/server.hpp"
#include "semsum/simulator.hpp"
#include "semsum/text.hpp"

namespace semsum {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct ProviderFlags {
  std::string chat_endpoint;
  std::string embed_endpoint;
  int embed_dim = 64;
  std::string token_env = "SEMSUM_PROVIDER_TOKEN";
  double chat_delay_ms = 100.0;
  double chat_delay_per_100_tokens_ms = 1.0;
  double embed_delay_ms = 0.1;

  MockDelays delays() const {
    MockDelays d;
    d.chat_base_s = chat_delay_ms / 1000.0;
    d.chat_per_100_output_tokens_s = chat_delay_per_100_tokens_ms / 1000.0;
    d.embed_s = embed_delay_ms / 1000.0;
    return d;
  }
};

struct ProviderSet {
  std::unique_ptr<ChatProvider> chat;
  std::unique_ptr<EmbeddingProvider> embed;
};

ProviderSet make_providers(const ProviderFlags& f) {
  ProviderSet p;
  const std::string token = process_env(f.token_env).value_or("");
  auto remote = [&](const std::string& endpoint) {
    RemoteOptions o;
    o.endpoint = endpoint;
    o.bearer_token = token;
    return o;
  };
  if (f.chat_endpoint.empty()) {
    p.chat = std::make_unique<MockChatProvider>(f.delays());
  } else {
    p.chat = std::make_unique<RemoteChatProvider>(remote(f.chat_endpoint));
  }
  if (f.embed_endpoint.empty()) {
    p.embed = std::make_unique<HashEmbeddingProvider>(f.embed_dim, f.delays());
  } else {
    p.embed = std::make_unique<RemoteEmbeddingProvider>(remote(f.embed_endpoint), f.embed_dim);
  }
  return p;
}

void add_provider_flags(CLI::App& app, ProviderFlags& f) {
  app.add_option("--chat-endpoint", f.chat_endpoint, "Remote chat provider base URL")
      ->envname("SEMSUM_CHAT_ENDPOINT");
  app.add_option("--embed-endpoint", f.embed_endpoint, "Remote embedding provider base URL")
      ->envname("SEMSUM_EMBED_ENDPOINT");
  app.add_option("--embed-dim", f.embed_dim, "Embedding dimension")
      ->envname("SEMSUM_EMBED_DIM")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--provider-token-env", f.token_env,
                 "Environment variable holding the provider bearer token")
      ->capture_default_str();
  app.add_option("--chat-delay-ms", f.chat_delay_ms, "Mock chat latency per call")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--chat-delay-per-100-tokens-ms", f.chat_delay_per_100_tokens_ms,
                 "Mock chat latency per 100 output tokens")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--embed-delay-ms", f.embed_delay_ms, "Mock embedding latency per call")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
}

json provider_flags_json(const ProviderFlags& f, const ProviderSet& p) {
  return {{"chat", p.chat->name()},
          {"embed", p.embed->name()},
          {"utility_embed", p.embed->name()},
          {"token_estimator", TokenEstimator().name()},
          {"chat_endpoint", f.chat_endpoint},
          {"embed_endpoint", f.embed_endpoint},
          {"embed_dim", f.embed_dim},
          {"mock_delays_ms",
           {{"chat", f.chat_delay_ms},
            {"chat_per_100_output_tokens", f.chat_delay_per_100_tokens_ms},
            {"embed", f.embed_delay_ms}}}};
}

struct CorpusFlags {
  std::string path;
  std::size_t min_words = 800;
  std::size_t min_questions = 10;
};

void add_corpus_flags(CLI::App& app, CorpusFlags& f) {
  app.add_option("--corpus", f.path, "Corpus JSONL file")->required();
  app.add_option("--min-words", f.min_words, "Drop documents with fewer words")
      ->capture_default_str();
  app.add_option("--min-questions", f.min_questions, "Drop documents with fewer questions")
      ->capture_default_str();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct LoadedInput {
  LoadedCorpus loaded;
  json meta;
};

LoadedInput load_input(const CorpusFlags& f, std::ostream& err) {
  const std::string bytes = read_file(f.path);
  std::istringstream in(bytes);
  LoadedInput r;
  r.loaded = load_corpus(in, CorpusFilter{f.min_words, f.min_questions});
  for (const auto& rej : r.loaded.rejected) {
    err << "rejected " << rej.kind << ' ' << rej.id << ": " << rej.reason << '\n';
  }
  if (r.loaded.corpus.questions.empty()) {
    throw InsufficientDataError("no questions left after filtering " + f.path);
  }
  r.meta = {{"path", f.path},
            {"fnv1a64", hex64(text::fnv1a64(bytes))},
            {"documents", r.loaded.corpus.documents.size()},
            {"questions", r.loaded.corpus.questions.size()},
            {"rejected", r.loaded.rejected.size()},
            {"min_words", f.min_words},
            {"min_questions", f.min_questions}};
  return r;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw IoError("cannot write " + path.string());
}

json stats_json(const CacheStats& s) {
  return {{"entries", s.entries},     {"lookups", s.lookups},
          {"hits", s.hits},           {"misses", s.misses},
          {"evictions", s.evictions}, {"invalidations", s.invalidations},
          {"inserts", s.inserts},     {"flushes", s.flushes},
          {"flushed", s.flushed},     {"hit_rate", s.hit_rate}};
}

void write_run(const fs::path& dir, const RunResult& result, json meta) {
  fs::create_directories(dir);
  std::vector<AnswerTrace> all;
  std::vector<MethodAggregate> aggregates;
  json stats = json::array();
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& r = result.reports[i];
    all.insert(all.end(), r.traces.begin(), r.traces.end());
    aggregates.push_back(r.aggregate);
    stats.push_back({{"method", std::string(to_string(r.config.method))},
                     {"threshold", r.config.similarity_threshold},
                     {"budget", r.config.summary_word_budget},
                     {"cache", stats_json(result.cache_stats.at(i))}});
  }
  std::ostringstream csv;
  write_traces_csv(csv, all);
  write_text(dir / "traces.csv", csv.str());
  write_text(dir / "aggregate.json", aggregates_to_json(aggregates));
  write_text(dir / "curves.csv", curves_to_csv(result.reports));
  meta["complete"] = result.complete;
  meta["error"] = result.error;
  meta["cache_stats"] = stats;
  write_text(dir / "metadata.json", meta.dump(2) + "\n");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      const std::string t = text::trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const char* what) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) {
    std::istringstream in(item);
    T v{};
    if (!(in >> v) || !in.eof()) throw ConfigError(std::string("bad ") + what + ": " + item);
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string("empty list of ") + what);
  return out;
}

json common_meta(const std::string& command, int argc, const char* const* argv,
                 const SimulationOptions& options) {
  json args = json::array();
  for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
  return {{"tool", "semsum"},
          {"command", command},
          {"argv", args},
          {"order_seed", options.order_seed},
          {"question_order", "global_shuffle"},
          {"latency_mode", "modeled"},
          {"gold_source", options.gold_from_full_document ? "full_document" : "corpus"},
          {"cache_capacity", options.cache.capacity},
          {"cache_scope", options.cache.scope == CacheScope::global ? "global" : "per_document"}};
}

// serve: stop flag raised by SIGINT/SIGTERM.
std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop.store(true); }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic caching of contextual summaries for document QA"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Replay a corpus through answering methods");
  CorpusFlags sim_corpus;
  ProviderFlags sim_providers;
  std::string sim_methods = "full_document,no_retrieval,noncontextual_summary,"
                            "contextual_summary_cached,full_prompt_answer_cache";
  double sim_threshold = 0.8;
  std::uint32_t sim_budget = 200;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  bool sim_gold_full = false;
  std::size_t sim_capacity = CacheConfig{}.capacity;
  add_corpus_flags(*simulate, sim_corpus);
  add_provider_flags(*simulate, sim_providers);
  simulate->add_option("--methods", sim_methods, "Comma-separated method names")
      ->capture_default_str();
  simulate->add_option("--threshold", sim_threshold, "Similarity threshold")
      ->envname("SEMSUM_SIMILARITY_THRESHOLD")
      ->capture_default_str();
  simulate->add_option("--budget", sim_budget, "Summary word budget")
      ->envname("SEMSUM_SUMMARY_WORD_BUDGET")
      ->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Question order seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_flag("--gold-from-full-document", sim_gold_full,
                     "Score against full-document answers instead of gold answers");
  simulate->add_option("--cache-capacity", sim_capacity, "Cache capacity")
      ->envname("SEMSUM_CACHE_CAPACITY")
      ->capture_default_str();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Threshold x budget grid of the cached method");
  CorpusFlags sw_corpus;
  ProviderFlags sw_providers;
  std::string sw_thresholds = "0.6,0.8";
  std::string sw_budgets = "100,200,400";
  std::uint64_t sw_seed = 1;
  std::string sw_out;
  std::size_t sw_capacity = CacheConfig{}.capacity;
  add_corpus_flags(*sweep, sw_corpus);
  add_provider_flags(*sweep, sw_providers);
  sweep->add_option("--thresholds", sw_thresholds, "Comma-separated thresholds")
      ->capture_default_str();
  sweep->add_option("--budgets", sw_budgets, "Comma-separated word budgets")
      ->capture_default_str();
  sweep->add_option("--seed", sw_seed, "Question order seed")->capture_default_str();
  sweep->add_option("--out", sw_out, "Output directory")->required();
  sweep->add_option("--cache-capacity", sw_capacity, "Cache capacity")
      ->envname("SEMSUM_CACHE_CAPACITY")
      ->capture_default_str();

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic corpus");
  SyntheticCorpusSpec spec;
  std::string gen_spec_path;
  std::string gen_out;
  auto* spec_opt = gen->add_option("--spec", gen_spec_path, "JSON file with spec fields");
  std::vector<CLI::Option*> spec_flags = {
      gen->add_option("--docs", spec.n_docs, "Number of documents")->capture_default_str(),
      gen->add_option("--words-mean", spec.words_per_doc_mean)->capture_default_str(),
      gen->add_option("--words-std", spec.words_per_doc_std)->capture_default_str(),
      gen->add_option("--questions-per-doc", spec.questions_per_doc)->capture_default_str(),
      gen->add_option("--questions-std", spec.questions_per_doc_std)->capture_default_str(),
      gen->add_option("--question-words-mean", spec.question_words_mean)->capture_default_str(),
      gen->add_option("--question-words-std", spec.question_words_std)->capture_default_str(),
      gen->add_option("--answer-words-mean", spec.answer_words_mean)->capture_default_str(),
      gen->add_option("--answer-words-std", spec.answer_words_std)->capture_default_str(),
      gen->add_option("--duplicate-rate", spec.duplicate_question_rate)->capture_default_str(),
      gen->add_option("--paraphrase-rate", spec.paraphrase_rate)->capture_default_str(),
      gen->add_option("--seed", spec.seed)->capture_default_str(),
  };
  for (auto* f : spec_flags) spec_opt->excludes(f);
  gen->add_option("--out", gen_out, "Output JSONL path")->required();

  // bucket-analysis
  auto* buckets = app.add_subcommand("bucket-analysis", "Utility of cache hits by similarity");
  std::string ba_run;
  double ba_width = 0.05;
  std::string ba_out;
  buckets->add_option("--run", ba_run, "Run directory holding traces.csv")->required();
  buckets->add_option("--bucket-width", ba_width, "Bucket width")->capture_default_str();
  buckets->add_option("--out", ba_out, "Output CSV (default: standard output)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string sv_config;
  std::optional<int> sv_port;
  serve->add_option("--config", sv_config, "JSON config file");
  serve->add_option("--port", sv_port, "Listen port (overrides config)");

  // snapshot-inspect
  auto* inspect = app.add_subcommand("snapshot-inspect", "Print a cache snapshot's contents");
  std::string si_path;
  inspect->add_option("path", si_path, "Snapshot file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    const int code = app.exit(e, o, err);
    out << o.str();
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*simulate) {
      std::vector<MethodConfig> configs;
      for (const auto& name : split_list(sim_methods)) {
        MethodConfig c{method_from_string(name), sim_threshold, sim_budget};
        c.validate();
        configs.push_back(c);
      }
      if (configs.empty()) throw ConfigError("no methods given");
      SimulationOptions options;
      options.order_seed = sim_seed;
      options.gold_from_full_document = sim_gold_full;
      options.cache.capacity = sim_capacity;
      options.cache.validate();
      const LoadedInput input = load_input(sim_corpus, err);
      ProviderSet providers = make_providers(sim_providers);
      const RunResult result =
          run_stream(input.loaded.corpus, configs, *providers.chat, *providers.embed, options);
      json meta = common_meta("simulate", argc, argv, options);
      meta["corpus"] = input.meta;
      meta["providers"] = provider_flags_json(sim_providers, providers);
      write_run(sim_out, result, meta);
      if (!result.complete) {
        err << "provider failure: " << result.error << '\n';
        return kExitProviderError;
      }
      out << "wrote " << sim_out << '\n';
      return kExitOk;
    }

    if (*sweep) {
      const auto thresholds = parse_list<double>(sw_thresholds, "thresholds");
      const auto budgets = parse_list<std::uint32_t>(sw_budgets, "budgets");
      for (double t : thresholds) {
        for (std::uint32_t b : budgets) MethodConfig{Method::contextual_summary_cached, t, b}.validate();
      }
      SimulationOptions options;
      options.order_seed = sw_seed;
      options.cache.capacity = sw_capacity;
      options.cache.validate();
      const LoadedInput input = load_input(sw_corpus, err);
      ProviderSet providers = make_providers(sw_providers);
      const RunResult result = run_sweep(input.loaded.corpus, thresholds, budgets,
                                         *providers.chat, *providers.embed, options);
      json meta = common_meta("sweep", argc, argv, options);
      meta["corpus"] = input.meta;
      meta["providers"] = provider_flags_json(sw_providers, providers);
      write_run(sw_out, result, meta);
      write_text(fs::path(sw_out) / "sweep.csv",
                 sweep_to_csv(result.reports, fs::path(sw_corpus.path).stem().string()));
      if (!result.complete) {
        err << "provider failure: " << result.error << '\n';
        return kExitProviderError;
      }
      out << "wrote " << sw_out << '\n';
      return kExitOk;
    }

    if (*gen) {
      if (!gen_spec_path.empty()) {
        json j;
        try {
          j = json::parse(read_file(gen_spec_path));
        } catch (const json::exception& e) {
          throw ConfigError(gen_spec_path + ": " + e.what());
        }
        auto num = [&](const char* key, auto& field) {
          if (j.contains(key)) {
            if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be numeric");
            field = j[key].get<std::decay_t<decltype(field)>>();
          }
        };
        for (const auto& [key, value] : j.items()) {
          static const std::set<std::string> known = {
              "n_docs", "words_per_doc_mean", "words_per_doc_std", "questions_per_doc",
              "questions_per_doc_std", "question_words_mean", "question_words_std",
              "answer_words_mean", "answer_words_std", "duplicate_question_rate",
              "paraphrase_rate", "seed"};
          if (!known.count(key)) throw ConfigError("unknown spec field: " + key);
        }
        num("n_docs", spec.n_docs);
        num("words_per_doc_mean", spec.words_per_doc_mean);
        num("words_per_doc_std", spec.words_per_doc_std);
        num("questions_per_doc", spec.questions_per_doc);
        num("questions_per_doc_std", spec.questions_per_doc_std);
        num("question_words_mean", spec.question_words_mean);
        num("question_words_std", spec.question_words_std);
        num("answer_words_mean", spec.answer_words_mean);
        num("answer_words_std", spec.answer_words_std);
        num("duplicate_question_rate", spec.duplicate_question_rate);
        num("paraphrase_rate", spec.paraphrase_rate);
        num("seed", spec.seed);
      }
      spec.validate();
      const SyntheticCorpus corpus = generate_synthetic_corpus(spec);
      std::ostringstream s;
      write_corpus(s, corpus.corpus);
      if (fs::path(gen_out).has_parent_path()) fs::create_directories(fs::path(gen_out).parent_path());
      write_text(gen_out, s.str());
      out << "wrote " << corpus.corpus.documents.size() << " documents and "
          << corpus.corpus.questions.size() << " questions to " << gen_out << '\n';
      return kExitOk;
    }

    if (*buckets) {
      const auto edges = bucket_edges(ba_width);
      std::istringstream in(read_file(fs::path(ba_run) / "traces.csv"));
      const auto traces = read_traces_csv(in);
      std::map<std::tuple<std::string, double, std::uint32_t>, std::vector<AnswerTrace>> groups;
      for (const auto& t : traces) {
        groups[{std::string(to_string(t.method)), t.threshold, t.budget}].push_back(t);
      }
      std::ostringstream csv;
      csv << "method,threshold,budget,bucket_lo,bucket_hi,hits,mean_utility\n";
      std::size_t written = 0;
      for (const auto& [key, group] : groups) {
        const bool any_hit = std::any_of(group.begin(), group.end(),
                                         [](const AnswerTrace& t) { return t.cache_hit; });
        if (!any_hit) continue;
        for (const auto& b : utility_vs_similarity_buckets(group, edges)) {
          csv << std::get<0>(key) << ',' << format_double(std::get<1>(key)) << ','
              << std::get<2>(key) << ',' << format_double(b.lo) << ',' << format_double(b.hi)
              << ',' << b.count << ','
              << (b.mean_utility ? format_double(*b.mean_utility) : "") << '\n';
          ++written;
        }
      }
      if (written == 0) throw InsufficientDataError("no cache hits in " + ba_run);
      if (ba_out.empty()) {
        out << csv.str();
      } else {
        write_text(ba_out, csv.str());
      }
      return kExitOk;
    }

    if (*serve) {
      ServiceConfig config = load_service_config(
          sv_config.empty() ? std::nullopt : std::optional<fs::path>(sv_config));
      if (sv_port) config.port = *sv_port;
      config.validate();
      auto service = Service::from_config(config);
      if (service->load_snapshot()) err << "restored snapshot " << config.snapshot_path << '\n';
      HttpServer server(*service, &err);
      const int port = server.bind();
      err << "listening on " << config.listen_address << ':' << port << '\n';
      g_stop.store(false);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service->start_snapshot_thread();
      server.start_background();
      while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      service->stop_snapshot_thread();
      service->save_snapshot();
      return kExitOk;
    }

    if (*inspect) {
      const SemanticCache cache = SemanticCache::restore(fs::path(si_path));
      json docs = json::array();
      for (const auto& d : cache.documents()) {
        docs.push_back({{"doc_id", d.doc_id}, {"version", d.version}, {"entries", d.entries}});
      }
      json entries = json::array();
      std::uint64_t digest = 14695981039346656037ULL;
      for (const auto& e : cache.entries()) {
        std::string row = std::to_string(e.entry_id) + '\x1f' + e.doc_id + '\x1f' +
                          std::to_string(e.doc_version) + '\x1f' + e.query_text + '\x1f' +
                          e.summary_text;
        digest = text::fnv1a64(hex64(digest) + row);
        entries.push_back({{"entry_id", e.entry_id},
                           {"doc_id", e.doc_id},
                           {"doc_version", e.doc_version},
                           {"query_text", e.query_text},
                           {"summary_words", text::word_count(e.summary_text)},
                           {"summary_word_budget", e.summary_word_budget},
                           {"hit_count", e.hit_count}});
      }
      const auto& c = cache.config();
      const json report = {
          {"dim", cache.dim()},
          {"similarity_threshold", c.similarity_threshold},
          {"capacity", c.capacity},
          {"scope", c.scope == CacheScope::global ? "global" : "per_document"},
          {"stats", stats_json(cache.stats())},
          {"documents", docs},
          {"entry_digest", hex64(digest)},
          {"entries", entries}};
      out << report.dump(2) << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const SpecError& e) {
    err << "spec error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ProviderUnavailableError& e) {
    err << "provider error: " << e.what() << '\n';
    return kExitProviderError;
  } catch (const ProviderProtocolError& e) {
    err << "provider error: " << e.what() << '\n';
    return kExitProviderError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitConfigError;
}

}  // namespace semsum
