#include "nsbundle/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace nsbundle {

using Eigen::Index;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Termination parse_termination(const std::string& s) {
  for (Termination t : {Termination::Running, Termination::GapReached, Termination::DeltaClosed,
                        Termination::ZeroSubgradient, Termination::MaxSteps, Termination::Failed})
    if (s == to_string(t)) return t;
  throw Error(ErrorCode::Io, "parse_csv: unknown termination '" + s + "'");
}

// %.17g round-trips every double.
std::string exact(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sci(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2E", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      any = true;
    } else if (c == '\n') {
      fields.push_back(std::move(cur));
      records.push_back(std::move(fields));
      fields.clear();
      cur.clear();
      any = false;
    } else if (c != '\r') {
      cur += c;
      any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::Io, "parse_csv: unterminated quote");
  if (any) {
    fields.push_back(std::move(cur));
    records.push_back(std::move(fields));
  }
  return records;
}

const char* const kCsvHeader = "problem_id,problem,algorithm,k_steps,oracle_calls,final_gap,termination,error";

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const ResultRow& r : rows) {
    out += std::to_string(r.problem_id) + ',' + csv_field(r.problem) + ',' + r.algorithm + ',' +
           (r.k_steps ? std::to_string(*r.k_steps) : std::string()) + ',' + std::to_string(r.oracle_calls) + ',' +
           exact(r.final_gap) + ',' + to_string(r.termination) + ',' + csv_field(r.error) + '\n';
  }
  return out;
}

std::string to_json(const std::vector<ResultRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    arr.push_back({
        {"problem_id", r.problem_id},
        {"problem", r.problem},
        {"algorithm", r.algorithm},
        {"k_steps", r.k_steps ? nlohmann::json(*r.k_steps) : nlohmann::json(nullptr)},
        {"oracle_calls", r.oracle_calls},
        {"final_gap", std::isfinite(r.final_gap) ? nlohmann::json(r.final_gap) : nlohmann::json(nullptr)},
        {"termination", to_string(r.termination)},
        {"error", r.error},
        {"wall_seconds", r.wall_seconds},
    });
  }
  return arr.dump(2) + "\n";
}

std::string to_markdown(const std::vector<ResultRow>& rows) {
  std::vector<std::string> order;
  for (const ResultRow& r : rows)
    if (std::find(order.begin(), order.end(), r.algorithm) == order.end()) order.push_back(r.algorithm);
  std::ostringstream os;
  for (std::size_t a = 0; a < order.size(); ++a) {
    if (a > 0) os << '\n';
    os << "### " << order[a] << "\n\n";
    os << "| # | Problem | #k | #fg | f - f* | Termination |\n";
    os << "|---:|:---|---:|---:|---:|:---|\n";
    for (const ResultRow& r : rows) {
      if (r.algorithm != order[a]) continue;
      std::string term = to_string(r.termination);
      if (r.failed() && !r.error.empty()) term += ": " + r.error;
      std::replace(term.begin(), term.end(), '|', '/');
      os << "| " << r.problem_id << " | " << r.problem << " | " << (r.k_steps ? std::to_string(*r.k_steps) : "")
         << " | " << r.oracle_calls << " | " << sci(r.final_gap) << " | " << term << " |\n";
    }
  }
  return os.str();
}

}  // namespace

ReportFormat parse_report_format(const std::string& s) {
  const std::string l = lower(s);
  if (l == "csv") return ReportFormat::Csv;
  if (l == "json") return ReportFormat::Json;
  if (l == "md" || l == "markdown") return ReportFormat::Markdown;
  throw Error(ErrorCode::InvalidArgument, "unknown report format '" + s + "'");
}

void SuiteConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, "SuiteConfig: " + m); };
  if (algorithms.empty()) fail("no algorithms selected");
  if (problems.empty()) fail("no problems selected");
  for (int id : problems) problem_by_id(id);
  for (const auto& [id, v] : f_inf_overrides) {
    problem_by_id(id);
    if (!std::isfinite(v)) fail("f_inf override must be finite");
  }
  if (f_inf && !std::isfinite(*f_inf)) fail("f_inf must be finite");
  if (parallelism < 1) fail("parallelism must be at least 1");
  SolverConfig probe = base;
  probe.f_inf = 0.0;
  probe.validate();
}

SuiteConfig default_suite() {
  SuiteConfig c;
  c.algorithms = {Algorithm::FPCPA, Algorithm::FLA, Algorithm::FDSA, Algorithm::CPBA};
  for (const auto& p : list_problems()) c.problems.push_back(p.id);
  return c;
}

bool operator==(const ResultRow& a, const ResultRow& b) {
  const bool gap_eq = (std::isnan(a.final_gap) && std::isnan(b.final_gap)) || a.final_gap == b.final_gap;
  return a.problem_id == b.problem_id && a.problem == b.problem && a.algorithm == b.algorithm &&
         a.k_steps == b.k_steps && a.oracle_calls == b.oracle_calls && gap_eq && a.termination == b.termination &&
         a.error == b.error;
}

std::string variant_name(Algorithm algorithm, BetaMode beta) {
  if (algorithm == Algorithm::CPBA) return "CPBA";
  return std::string(to_string(algorithm)) + (beta == BetaMode::Guler ? "2" : "1");
}

ResultRow make_row(const ProblemSpec& problem, const RunResult& result) {
  ResultRow row;
  row.problem_id = problem.id;
  row.problem = problem.name;
  row.algorithm = variant_name(result.config.algorithm, result.config.beta_mode);
  if (result.config.algorithm == Algorithm::CPBA) row.k_steps = result.state.k;
  row.oracle_calls = result.state.oracle_calls;
  row.final_gap = result.final_gap();
  row.termination = result.termination;
  row.error = result.error;
  row.wall_seconds = result.wall_seconds;
  return row;
}

std::vector<ResultRow> run_suite(const SuiteConfig& config) {
  config.validate();
  if (config.trace_dir) std::filesystem::create_directories(*config.trace_dir);

  struct Job {
    Algorithm algorithm;
    const ProblemSpec* problem;
  };
  std::vector<Job> jobs;
  for (Algorithm a : config.algorithms)
    for (int id : config.problems) jobs.push_back({a, &problem_by_id(id)});

  std::vector<ResultRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const ProblemSpec& p = *jobs[i].problem;
      SolverConfig c = config.base;
      c.algorithm = jobs[i].algorithm;
      c.known_fstar = p.optimal_value;
      c.f_inf = p.f_inf_default;
      if (config.f_inf) c.f_inf = *config.f_inf;
      if (auto it = config.f_inf_overrides.find(p.id); it != config.f_inf_overrides.end()) c.f_inf = it->second;
      const RunResult result = run(c, p);
      rows[i] = make_row(p, result);
      if (config.trace_dir) {
        const auto path = *config.trace_dir / (rows[i].algorithm + "_" + std::to_string(p.id) + ".jsonl");
        std::ofstream out(path, std::ios::binary);
        out << trace_jsonl(result);
        if (!out) {
          rows[i].termination = Termination::Failed;
          rows[i].error = "cannot write trace " + path.string();
        }
      }
    }
  };

  const int workers = std::min<int>(config.parallelism, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::string format_report(const std::vector<ResultRow>& rows, ReportFormat format) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "report: no rows");
  switch (format) {
    case ReportFormat::Csv: return to_csv(rows);
    case ReportFormat::Json: return to_json(rows);
    case ReportFormat::Markdown: return to_markdown(rows);
  }
  return {};
}

void emit_report(const std::vector<ResultRow>& rows, ReportFormat format, const std::filesystem::path& path) {
  const std::string text = format_report(rows, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  auto records = split_csv(text);
  if (records.empty()) throw Error(ErrorCode::Io, "parse_csv: empty input");
  std::string header;
  for (std::size_t i = 0; i < records[0].size(); ++i) header += (i ? "," : "") + records[0][i];
  if (header != kCsvHeader) throw Error(ErrorCode::Io, "parse_csv: unexpected header '" + header + "'");

  auto integer = [](const std::string& s) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw Error(ErrorCode::Io, "parse_csv: bad integer '" + s + "'");
    return v;
  };

  std::vector<ResultRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != 8) throw Error(ErrorCode::Io, "parse_csv: line " + std::to_string(i + 1) + " has wrong field count");
    ResultRow r;
    r.problem_id = static_cast<int>(integer(f[0]));
    r.problem = f[1];
    r.algorithm = f[2];
    if (!f[3].empty()) r.k_steps = integer(f[3]);
    r.oracle_calls = integer(f[4]);
    char* end = nullptr;
    r.final_gap = std::strtod(f[5].c_str(), &end);
    if (f[5].empty() || *end != '\0') throw Error(ErrorCode::Io, "parse_csv: bad number '" + f[5] + "'");
    r.termination = parse_termination(f[6]);
    r.error = f[7];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<PropertyCheck> run_property_suites(int points, std::uint64_t seed, double tolerance) {
  if (points < 1) throw Error(ErrorCode::InvalidArgument, "property suites: points must be positive");
  std::vector<PropertyCheck> checks;
  for (const ProblemSpec& p : list_problems()) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(p.id));
    const double radius = 1.0 + p.start_point.lpNorm<Eigen::Infinity>();
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto sample = [&] {
      Vector x(p.dimension);
      for (Index i = 0; i < x.size(); ++i) x[i] = p.start_point[i] + radius * unit(rng);
      return x;
    };

    PropertyCheck sub{"subgradient inequality", p.id, true, -kInf};
    for (int s = 0; s < points; ++s) {
      const Vector x = sample(), z = sample();
      const OracleResponse fx = evaluate(p, x), fz = evaluate(p, z);
      const double scale = 1.0 + std::abs(fx.value) + std::abs(fz.value);
      const double violation = (fx.value + fx.subgradient.dot(z - x) - fz.value) / scale;
      sub.worst = std::max(sub.worst, violation);
    }
    sub.passed = sub.worst <= tolerance;
    checks.push_back(sub);

    // A bundle from a short run, checked at its own points and at samples.
    SolverConfig c;
    c.algorithm = Algorithm::FPCPA;
    c.f_inf = p.f_inf_default;
    c.max_steps = 50;
    const RunResult r = run(c, p);
    PropertyCheck model{"lower model", p.id, r.termination != Termination::Failed, -kInf};
    auto probe = [&](const Vector& x) {
      const double f = evaluate(p, x).value;
      model.worst = std::max(model.worst, (model_eval(r.state.bundle, x).value - f) / (1.0 + std::abs(f)));
    };
    for (const Cut& cut : r.state.bundle) probe(cut.point);
    for (int s = 0; s < points; ++s) probe(sample());
    model.passed = model.passed && model.worst <= tolerance;
    checks.push_back(model);
  }
  return checks;
}

}  // namespace nsbundle
