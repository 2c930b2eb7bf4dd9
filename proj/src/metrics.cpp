#include "semsum/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "semsum/random.hpp"

namespace semsum {

double utility(std::string_view answer, std::string_view gold, EmbeddingProvider& embed) {
  if (answer.empty() || gold.empty()) throw EmptyInputError("utility needs two non-empty texts");
  try {
    return cosine_similarity(embed.embed(answer), embed.embed(gold));
  } catch (const DegenerateVectorError&) {
    return 0.0;
  }
}

std::vector<double> bucket_edges(double width) {
  if (!(width > 0.0 && width <= 1.0)) throw ConfigError("bucket width must lie in (0, 1]");
  const auto n = static_cast<std::size_t>(std::ceil(1.0 / width - 1e-9));
  std::vector<double> edges(n + 1);
  // Widths that divide 1 get edges i / n, free of accumulated rounding.
  const bool even = std::abs(static_cast<double>(n) * width - 1.0) < 1e-9;
  for (std::size_t i = 0; i < n; ++i) {
    edges[i] = even ? static_cast<double>(i) / static_cast<double>(n)
                    : static_cast<double>(i) * width;
  }
  edges[n] = 1.0;
  return edges;
}

std::size_t bucket_index(const std::vector<double>& edges, double x) {
  const std::size_t buckets = edges.size() - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  if (it == edges.begin()) return 0;
  return std::min(static_cast<std::size_t>(it - edges.begin()) - 1, buckets - 1);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InsufficientDataError("quantile of no values");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd r;
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

SummaryStats summarize_values(std::vector<double> values, std::uint64_t seed,
                              std::size_t resamples) {
  if (values.empty()) throw InsufficientDataError("no values to summarize");
  SummaryStats s;
  s.count = values.size();
  const MeanStd ms = mean_std(values);
  s.mean = ms.mean;
  s.std = ms.std;

  Rng rng(seed);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[rng.below(values.size())];
    m = sum / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  s.ci_low = quantile_sorted(means, 0.025);
  s.ci_high = quantile_sorted(means, 0.975);

  std::sort(values.begin(), values.end());
  s.median = quantile_sorted(values, 0.5);
  s.range_low = quantile_sorted(values, 0.025);
  s.range_high = quantile_sorted(values, 0.975);
  return s;
}

Histogram make_histogram(const std::vector<double>& values, double bucket_width) {
  Histogram h;
  h.edges = bucket_edges(bucket_width);
  h.counts.assign(h.edges.size() - 1, 0);
  for (double v : values) {
    if (v < 0.0) {
      ++h.below_range;
    } else {
      ++h.counts[bucket_index(h.edges, v)];
    }
  }
  return h;
}

PairSimilarityReport question_pair_similarity_histogram(
    const std::vector<std::vector<std::string>>& questions_by_doc, EmbeddingProvider& embed,
    double bucket_width) {
  PairSimilarityReport r;
  for (const auto& group : questions_by_doc) {
    std::vector<EmbeddingVector> vecs;
    vecs.reserve(group.size());
    for (const auto& q : group) vecs.push_back(embed.embed(q));
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      for (std::size_t j = i + 1; j < vecs.size(); ++j) {
        r.scores.push_back(cosine_similarity(vecs[i], vecs[j]));
      }
    }
  }
  if (r.scores.empty()) throw InsufficientDataError("no document has two questions");
  r.histogram = make_histogram(r.scores, bucket_width);
  r.stats = summarize_values(r.scores);
  return r;
}

std::vector<UtilityBucket> utility_vs_similarity_buckets(const std::vector<AnswerTrace>& traces,
                                                         const std::vector<double>& edges) {
  if (edges.size() < 2) throw ConfigError("need at least one bucket");
  std::vector<UtilityBucket> buckets(edges.size() - 1);
  std::vector<double> sums(buckets.size(), 0.0);
  std::vector<std::size_t> scored(buckets.size(), 0);
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    buckets[i].lo = edges[i];
    buckets[i].hi = edges[i + 1];
  }
  std::size_t hits = 0;
  for (const auto& t : traces) {
    if (!t.cache_hit || !t.similarity_of_hit) continue;
    ++hits;
    const std::size_t b = bucket_index(edges, *t.similarity_of_hit);
    ++buckets[b].count;
    if (t.utility) {
      sums[b] += *t.utility;
      ++scored[b];
    }
  }
  if (hits == 0) throw InsufficientDataError("no cache hits to bucket");
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (scored[i] > 0) buckets[i].mean_utility = sums[i] / static_cast<double>(scored[i]);
  }
  return buckets;
}

MethodAggregate aggregate_traces(const std::vector<AnswerTrace>& traces) {
  MethodAggregate a;
  if (!traces.empty()) {
    a.method = traces.front().method;
    a.threshold = traces.front().threshold;
    a.budget = traces.front().budget;
  }
  a.questions = traces.size();
  std::vector<double> util, in, out, llm, cache, enc, total;
  for (const auto& t : traces) {
    if (t.cache_hit) ++a.hits;
    if (t.utility) util.push_back(*t.utility);
    in.push_back(static_cast<double>(t.input_tokens));
    out.push_back(static_cast<double>(t.output_tokens));
    llm.push_back(t.latency_llm);
    cache.push_back(t.latency_cache_search);
    enc.push_back(t.latency_encoding);
    total.push_back(t.latency_total);
    a.total_input_tokens += t.input_tokens;
    a.total_output_tokens += t.output_tokens;
    a.total_latency_llm += t.latency_llm;
    a.total_latency += t.latency_total;
  }
  a.hit_rate = a.questions == 0 ? 0.0
                                : static_cast<double>(a.hits) / static_cast<double>(a.questions);
  a.utility = mean_std(util);
  a.scored = util.size();
  a.input_tokens = mean_std(in);
  a.output_tokens = mean_std(out);
  a.latency_llm = mean_std(llm);
  a.latency_cache = mean_std(cache);
  a.latency_encode = mean_std(enc);
  a.latency_total = mean_std(total);
  a.llm_latency_share = a.total_latency > 0.0 ? a.total_latency_llm / a.total_latency : 0.0;
  return a;
}

std::vector<CurvePoint> cumulative_curve(const std::vector<AnswerTrace>& traces) {
  std::vector<CurvePoint> curve;
  curve.reserve(traces.size());
  std::size_t hits = 0;
  std::size_t scored = 0;
  double util = 0.0;
  double in = 0.0;
  double out = 0.0;
  double latency = 0.0;
  std::uint64_t cum_in = 0;
  std::uint64_t cum_out = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    hits += t.cache_hit ? 1 : 0;
    if (t.utility) {
      util += *t.utility;
      ++scored;
    }
    in += static_cast<double>(t.input_tokens);
    out += static_cast<double>(t.output_tokens);
    latency += t.latency_total;
    cum_in += t.input_tokens;
    cum_out += t.output_tokens;

    const auto n = static_cast<double>(i + 1);
    CurvePoint p;
    p.n = i + 1;
    p.hit_rate = static_cast<double>(hits) / n;
    p.mean_utility = scored == 0 ? 0.0 : util / static_cast<double>(scored);
    p.mean_input_tokens = in / n;
    p.mean_output_tokens = out / n;
    p.mean_latency = latency / n;
    p.cumulative_input_tokens = cum_in;
    p.cumulative_output_tokens = cum_out;
    curve.push_back(p);
  }
  return curve;
}

RunReport make_report(const MethodConfig& config, std::vector<AnswerTrace> traces) {
  RunReport r;
  r.config = config;
  r.traces = std::move(traces);
  r.aggregate = aggregate_traces(r.traces);
  r.aggregate.method = config.method;
  r.aggregate.threshold = config.similarity_threshold;
  r.aggregate.budget = config.summary_word_budget;
  r.curve = cumulative_curve(r.traces);
  return r;
}

}  // namespace semsum
