#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semsum/pipeline.hpp"
#include "semsum/providers.hpp"

namespace semsum {

/// Cosine similarity of the two texts' embeddings. Throws EmptyInputError on
/// an empty text; a text without any embeddable token scores 0.
double utility(std::string_view answer, std::string_view gold, EmbeddingProvider& embed);

/// Bucket edges 0, w, 2w, ..., 1. The last bucket may be narrower and is
/// closed on the right.
std::vector<double> bucket_edges(double width);
/// Bucket holding `x`; values outside [0, 1] go to the nearest end bucket.
std::size_t bucket_index(const std::vector<double>& edges, double x);

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  /// Sample standard deviation (n - 1); 0 for a single value.
  double std = 0.0;
  /// Percentile-bootstrap 95% interval of the mean.
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// 2.5th and 97.5th percentiles of the values themselves.
  double range_low = 0.0;
  double range_high = 0.0;
};

inline constexpr std::uint64_t kBootstrapSeed = 0x5eed5eedULL;
inline constexpr std::size_t kBootstrapResamples = 1000;

SummaryStats summarize_values(std::vector<double> values, std::uint64_t seed = kBootstrapSeed,
                              std::size_t resamples = kBootstrapResamples);

/// Linear-interpolation quantile of sorted values, q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  /// Scores below 0, which no bucket covers.
  std::size_t below_range = 0;
};

Histogram make_histogram(const std::vector<double>& values, double bucket_width);

struct PairSimilarityReport {
  std::vector<double> scores;
  Histogram histogram;
  SummaryStats stats;
};

/// Scores every unordered pair of questions within each group.
/// Throws InsufficientDataError when no group has two questions.
PairSimilarityReport question_pair_similarity_histogram(
    const std::vector<std::vector<std::string>>& questions_by_doc, EmbeddingProvider& embed,
    double bucket_width = 0.05);

struct UtilityBucket {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  /// Mean over the bucket's hits that carry a utility.
  std::optional<double> mean_utility;
};

/// Groups cache hits by similarity_of_hit. Throws InsufficientDataError when
/// no trace is a hit.
std::vector<UtilityBucket> utility_vs_similarity_buckets(const std::vector<AnswerTrace>& traces,
                                                         const std::vector<double>& edges);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& values);

struct MethodAggregate {
  Method method = Method::full_document;
  double threshold = 0.0;
  std::uint32_t budget = 0;
  std::size_t questions = 0;
  std::size_t hits = 0;
  double hit_rate = 0.0;
  MeanStd utility;
  std::size_t scored = 0;
  MeanStd input_tokens;
  MeanStd output_tokens;
  std::uint64_t total_input_tokens = 0;
  std::uint64_t total_output_tokens = 0;
  MeanStd latency_llm;
  MeanStd latency_cache;
  MeanStd latency_encode;
  MeanStd latency_total;
  double total_latency_llm = 0.0;
  double total_latency = 0.0;
  /// total_latency_llm / total_latency.
  double llm_latency_share = 0.0;
};

/// Running values after the first n traces.
struct CurvePoint {
  std::size_t n = 0;
  double hit_rate = 0.0;
  double mean_utility = 0.0;
  double mean_input_tokens = 0.0;
  double mean_output_tokens = 0.0;
  double mean_latency = 0.0;
  std::uint64_t cumulative_input_tokens = 0;
  std::uint64_t cumulative_output_tokens = 0;
};

/// Traces must share one method configuration.
MethodAggregate aggregate_traces(const std::vector<AnswerTrace>& traces);
std::vector<CurvePoint> cumulative_curve(const std::vector<AnswerTrace>& traces);

struct RunReport {
  MethodConfig config;
  std::vector<AnswerTrace> traces;
  MethodAggregate aggregate;
  std::vector<CurvePoint> curve;
};

RunReport make_report(const MethodConfig& config, std::vector<AnswerTrace> traces);

// Persistence. Doubles are written in shortest round-trip form, so reading a
// CSV back and re-aggregating reproduces the report exactly.

inline constexpr std::string_view kTraceCsvHeader =
    "question_id,doc_id,method,threshold,budget,cache_hit,similarity,input_tokens,"
    "output_tokens,latency_llm_s,latency_cache_s,latency_encode_s,latency_total_s,utility";

void write_traces_csv(std::ostream& out, const std::vector<AnswerTrace>& traces);
/// Throws CorpusParseError (with the line number) on malformed rows.
std::vector<AnswerTrace> read_traces_csv(std::istream& in);

std::string format_double(double v);

std::string aggregates_to_json(const std::vector<MethodAggregate>& aggregates);
std::string curves_to_csv(const std::vector<RunReport>& reports);

}  // namespace semsum
