#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "semsum/metrics.hpp"

namespace semsum {
namespace {

using json = nlohmann::ordered_json;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Splits one record; quoted fields may contain separators but not newlines.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw CorpusParseError("unterminated quoted field", lineno);
  fields.push_back(std::move(cur));
  return fields;
}

template <typename T>
T parse_number(const std::string& s, std::size_t lineno, const char* column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw CorpusParseError(std::string("bad value for ") + column + ": '" + s + "'", lineno);
  }
  return v;
}

std::optional<double> parse_optional(const std::string& s, std::size_t lineno,
                                     const char* column) {
  if (s.empty()) return std::nullopt;
  return parse_number<double>(s, lineno, column);
}

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_traces_csv(std::ostream& out, const std::vector<AnswerTrace>& traces) {
  out << kTraceCsvHeader << '\n';
  for (const auto& t : traces) {
    out << csv_field(t.question_id) << ',' << csv_field(t.doc_id) << ',' << to_string(t.method)
        << ',' << format_double(t.threshold) << ',' << t.budget << ','
        << (t.cache_hit ? "true" : "false") << ','
        << (t.similarity_of_hit ? format_double(*t.similarity_of_hit) : "") << ','
        << t.input_tokens << ',' << t.output_tokens << ',' << format_double(t.latency_llm) << ','
        << format_double(t.latency_cache_search) << ',' << format_double(t.latency_encoding)
        << ',' << format_double(t.latency_total) << ','
        << (t.utility ? format_double(*t.utility) : "") << '\n';
  }
}

std::vector<AnswerTrace> read_traces_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw CorpusParseError("missing CSV header", lineno);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceCsvHeader) throw CorpusParseError("unexpected CSV header", lineno);

  std::vector<AnswerTrace> traces;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line, lineno);
    if (f.size() != 14) {
      throw CorpusParseError("expected 14 columns, found " + std::to_string(f.size()), lineno);
    }
    AnswerTrace t;
    t.question_id = f[0];
    t.doc_id = f[1];
    try {
      t.method = method_from_string(f[2]);
    } catch (const ConfigError& e) {
      throw CorpusParseError(e.what(), lineno);
    }
    t.threshold = parse_number<double>(f[3], lineno, "threshold");
    t.budget = parse_number<std::uint32_t>(f[4], lineno, "budget");
    if (f[5] != "true" && f[5] != "false") {
      throw CorpusParseError("cache_hit must be true or false", lineno);
    }
    t.cache_hit = f[5] == "true";
    t.similarity_of_hit = parse_optional(f[6], lineno, "similarity");
    t.input_tokens = parse_number<std::uint64_t>(f[7], lineno, "input_tokens");
    t.output_tokens = parse_number<std::uint64_t>(f[8], lineno, "output_tokens");
    t.latency_llm = parse_number<double>(f[9], lineno, "latency_llm_s");
    t.latency_cache_search = parse_number<double>(f[10], lineno, "latency_cache_s");
    t.latency_encoding = parse_number<double>(f[11], lineno, "latency_encode_s");
    t.latency_total = parse_number<double>(f[12], lineno, "latency_total_s");
    t.utility = parse_optional(f[13], lineno, "utility");
    traces.push_back(std::move(t));
  }
  return traces;
}

std::string aggregates_to_json(const std::vector<MethodAggregate>& aggregates) {
  json rows = json::array();
  for (const auto& a : aggregates) {
    rows.push_back({
        {"method", std::string(to_string(a.method))},
        {"threshold", a.threshold},
        {"budget", a.budget},
        {"questions", a.questions},
        {"hits", a.hits},
        {"hit_rate", a.hit_rate},
        {"utility", mean_std_json(a.utility)},
        {"input_tokens", mean_std_json(a.input_tokens)},
        {"output_tokens", mean_std_json(a.output_tokens)},
        {"total_input_tokens", a.total_input_tokens},
        {"total_output_tokens", a.total_output_tokens},
        {"latency_llm_s", mean_std_json(a.latency_llm)},
        {"latency_cache_s", mean_std_json(a.latency_cache)},
        {"latency_encode_s", mean_std_json(a.latency_encode)},
        {"latency_total_s", mean_std_json(a.latency_total)},
        {"llm_latency_share", a.llm_latency_share},
    });
  }
  return rows.dump(2) + "\n";
}

std::string curves_to_csv(const std::vector<RunReport>& reports) {
  std::ostringstream out;
  out << "method,threshold,budget,n,hit_rate,utility,input_tokens,output_tokens,latency_total_s,"
         "cumulative_input_tokens,cumulative_output_tokens\n";
  for (const auto& r : reports) {
    for (const auto& p : r.curve) {
      out << to_string(r.config.method) << ',' << format_double(r.config.similarity_threshold)
          << ',' << r.config.summary_word_budget << ',' << p.n << ','
          << format_double(p.hit_rate) << ',' << format_double(p.mean_utility) << ','
          << format_double(p.mean_input_tokens) << ',' << format_double(p.mean_output_tokens)
          << ',' << format_double(p.mean_latency) << ',' << p.cumulative_input_tokens << ','
          << p.cumulative_output_tokens << '\n';
    }
  }
  return out.str();
}

}  // namespace semsum
