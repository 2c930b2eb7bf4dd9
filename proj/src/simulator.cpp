#include "semsum/simulator.hpp"

#include <numeric>
#include <sstream>
#include <unordered_map>

#include "semsum/random.hpp"
#include "semsum/text.hpp"

namespace semsum {

std::vector<std::size_t> question_order(const Corpus& corpus, std::uint64_t seed) {
  std::vector<std::size_t> order(corpus.questions.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  return order;
}

RunResult run_stream(const Corpus& corpus, const std::vector<MethodConfig>& configs,
                     ChatProvider& chat, EmbeddingProvider& embed,
                     const SimulationOptions& options, EmbeddingProvider* utility_embed) {
  if (corpus.questions.empty()) throw InsufficientDataError("corpus has no questions");
  if (configs.empty()) throw ConfigError("no method configurations to run");
  for (const auto& c : configs) c.validate();
  EmbeddingProvider& scorer = utility_embed ? *utility_embed : embed;

  std::unordered_map<std::string, const Document*> docs;
  for (const auto& d : corpus.documents) docs.emplace(d.doc_id, &d);
  for (const auto& q : corpus.questions) {
    if (!docs.count(q.doc_id)) {
      throw IntegrityError("question " + q.question_id + " refers to missing document " +
                           q.doc_id);
    }
  }

  RunResult result;
  result.order = question_order(corpus, options.order_seed);
  Providers providers{chat, embed, options.latency};

  std::vector<std::string> gold(corpus.questions.size());
  try {
    for (std::size_t i = 0; i < corpus.questions.size(); ++i) {
      const auto& q = corpus.questions[i];
      gold[i] = options.gold_from_full_document
                    ? answer_full_document(*docs.at(q.doc_id), q.question_id, q.question_text,
                                           providers)
                          .answer_text
                    : q.gold_answer;
    }
  } catch (const ProviderUnavailableError& e) {
    result.complete = false;
    result.error = e.what();
    return result;
  } catch (const ProviderProtocolError& e) {
    result.complete = false;
    result.error = e.what();
    return result;
  }

  for (const auto& config : configs) {
    MethodRunner runner(config, providers, options.cache);
    std::vector<AnswerTrace> traces;
    traces.reserve(result.order.size());
    try {
      for (std::size_t idx : result.order) {
        const auto& q = corpus.questions[idx];
        AnswerTrace t = runner.answer(*docs.at(q.doc_id), q.question_id, q.question_text);
        t.utility = text::trim(t.answer_text).empty() ? 0.0
                                                      : utility(t.answer_text, gold[idx], scorer);
        traces.push_back(std::move(t));
      }
    } catch (const ProviderUnavailableError& e) {
      result.complete = false;
      result.error = e.what();
    } catch (const ProviderProtocolError& e) {
      result.complete = false;
      result.error = e.what();
    }
    result.reports.push_back(make_report(config, std::move(traces)));
    switch (config.method) {
      case Method::contextual_summary_cached:
        result.cache_stats.push_back(runner.summary_cache().stats());
        break;
      case Method::full_prompt_answer_cache:
        result.cache_stats.push_back(runner.answer_cache().stats());
        break;
      default:
        result.cache_stats.push_back(CacheStats{});
        break;
    }
    if (!result.complete) break;
  }
  return result;
}

RunResult run_sweep(const Corpus& corpus, const std::vector<double>& thresholds,
                    const std::vector<std::uint32_t>& budgets, ChatProvider& chat,
                    EmbeddingProvider& embed, const SimulationOptions& options) {
  if (thresholds.empty() || budgets.empty()) {
    throw ConfigError("sweep needs at least one threshold and one budget");
  }
  std::vector<MethodConfig> configs;
  for (double t : thresholds) {
    for (std::uint32_t b : budgets) {
      configs.push_back({Method::contextual_summary_cached, t, b});
    }
  }
  return run_stream(corpus, configs, chat, embed, options);
}

RunResult threshold_selection_sweep(const Corpus& corpus, const std::vector<double>& thresholds,
                                    const MethodConfig& config, ChatProvider& chat,
                                    EmbeddingProvider& embed,
                                    const SimulationOptions& options) {
  return run_sweep(corpus, thresholds, {config.summary_word_budget}, chat, embed, options);
}

std::string sweep_to_csv(const std::vector<RunReport>& reports, const std::string& corpus_label) {
  std::ostringstream out;
  out << "corpus,threshold,budget,questions,hit_rate,utility_mean,utility_std,"
         "input_tokens_mean,input_tokens_std,output_tokens_mean,output_tokens_std,"
         "latency_total_s_mean,latency_total_s_std\n";
  for (const auto& r : reports) {
    const auto& a = r.aggregate;
    out << corpus_label << ',' << format_double(a.threshold) << ',' << a.budget << ','
        << a.questions << ',' << format_double(a.hit_rate) << ',' << format_double(a.utility.mean)
        << ',' << format_double(a.utility.std) << ',' << format_double(a.input_tokens.mean) << ','
        << format_double(a.input_tokens.std) << ',' << format_double(a.output_tokens.mean) << ','
        << format_double(a.output_tokens.std) << ',' << format_double(a.latency_total.mean)
        << ',' << format_double(a.latency_total.std) << '\n';
  }
  return out.str();
}

UpdateResult apply_document_update(Corpus& corpus, const std::string& doc_id,
                                   std::string new_text, const std::vector<MethodRunner*>& runners,
                                   const CorpusFilter& filter) {
  Document& doc = corpus.document(doc_id);
  if (text::trim(new_text).empty()) throw EmptyInputError("updated text must not be empty");
  const std::size_t words = text::word_count(new_text);
  if (words < filter.min_words) {
    throw IntegrityError("updated text of " + doc_id + " has " + std::to_string(words) +
                         " words, fewer than " + std::to_string(filter.min_words));
  }
  doc.text = std::move(new_text);
  doc.word_count = words;
  ++doc.version;

  UpdateResult r;
  r.version = doc.version;
  r.word_count = words;
  for (MethodRunner* runner : runners) r.removed += runner->invalidate_document(doc_id, doc.version);
  return r;
}

}  // namespace semsum
