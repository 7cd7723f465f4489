#include "dockhand/bench/bench.hpp"

#include <algorithm>
#include <charconv>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "dockhand/core/validation.hpp"

namespace dockhand::bench {

using nlohmann::json;

double nearest_rank_percentile(std::span<const double> samples, double p) {
  if (samples.empty()) throw std::invalid_argument("percentile of an empty sample set");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("percentile must be in (0, 1]");
  std::vector<double> sorted(samples.begin(), samples.end());
  // p * n can land just above an integer (0.07 * 100 == 7.000000000000001)
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

LevelStats summarize(int level, std::vector<double> samples, int failures, double wall_seconds) {
  LevelStats s;
  s.level = level;
  s.failures = failures;
  s.repetitions = static_cast<int>(samples.size()) + failures;
  if (samples.empty())
    throw BenchError(BenchError::Code::all_requests_failed,
                     "all " + std::to_string(failures) + " requests failed at level " + std::to_string(level));
  s.p50_ms = nearest_rank_percentile(samples, 0.50);
  s.p95_ms = nearest_rank_percentile(samples, 0.95);
  s.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  s.throughput_rps = wall_seconds > 0 ? static_cast<double>(samples.size()) / wall_seconds : 0.0;
  s.samples = std::move(samples);
  return s;
}

BenchReport run_bench(const BenchConfig& config, transport::Transport& transport) {
  if (config.repetitions <= 0) throw BenchError(BenchError::Code::invalid_config, "repetitions must be positive");
  if (config.warmup < 0) throw BenchError(BenchError::Code::invalid_config, "warmup must be non-negative");
  if (config.concurrency_levels.empty() ||
      std::any_of(config.concurrency_levels.begin(), config.concurrency_levels.end(), [](int l) { return l < 1; }))
    throw BenchError(BenchError::Code::invalid_config, "concurrency levels must be >= 1");
  auto verdict = core::validate_command(config.command);
  if (!verdict)
    throw BenchError(BenchError::Code::invalid_config,
                     "command rejected: " + std::string(core::to_string(verdict.reason())));
  const auto request = core::request_from(verdict, config.timeout_ms);

  auto status = transport.probe(config.endpoint, config.credentials);
  if (!status.reachable) throw BenchError(BenchError::Code::target_unreachable, "target unreachable: " + status.detail);

  if (config.warmup > 0) {
    try {
      auto session = transport.connect(config.endpoint, config.credentials);
      for (int i = 0; i < config.warmup; ++i) {
        try {
          session->exec(request);
        } catch (const transport::TransportError&) {
        }
      }
      session->close();
    } catch (const transport::TransportError&) {
    }
  }

  BenchReport report;
  for (int level : config.concurrency_levels) {
    const int workers = std::min(level, config.repetitions);
    std::atomic<int> next{0};
    std::vector<std::vector<double>> per_worker_samples(static_cast<std::size_t>(workers));
    std::vector<int> per_worker_failures(static_cast<std::size_t>(workers), 0);

    auto worker = [&](std::size_t w) {
      std::unique_ptr<transport::Session> session;
      while (next.fetch_add(1) < config.repetitions) {
        auto started = std::chrono::steady_clock::now();
        try {
          if (!session) session = transport.connect(config.endpoint, config.credentials);
          session->exec(request);
          per_worker_samples[w].push_back(
              std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count());
        } catch (const transport::TransportError&) {
          ++per_worker_failures[w];
          if (session) session->close();
          session.reset();
        }
      }
      if (session) session->close();
    };

    auto started = std::chrono::steady_clock::now();
    {
      std::vector<std::jthread> threads;
      for (int w = 0; w < workers; ++w) threads.emplace_back(worker, static_cast<std::size_t>(w));
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    std::vector<double> samples;
    int failures = 0;
    for (int w = 0; w < workers; ++w) {
      auto& s = per_worker_samples[static_cast<std::size_t>(w)];
      samples.insert(samples.end(), s.begin(), s.end());
      failures += per_worker_failures[static_cast<std::size_t>(w)];
    }
    report.levels.push_back(summarize(level, std::move(samples), failures, wall));
  }
  return report;
}

std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::a: return "a";
    case Winner::b: return "b";
    case Winner::tie: return "tie";
  }
  return "tie";
}

std::vector<ComparisonRow> compare(const BenchReport& a, const BenchReport& b) {
  std::vector<ComparisonRow> rows;
  for (const auto& la : a.levels) {
    auto it = std::find_if(b.levels.begin(), b.levels.end(), [&](const LevelStats& lb) { return lb.level == la.level; });
    if (it == b.levels.end()) continue;
    const auto& lb = *it;
    ComparisonRow row;
    row.level = la.level;
    row.delta_p50_ms = la.p50_ms - lb.p50_ms;
    row.delta_p95_ms = la.p95_ms - lb.p95_ms;
    row.delta_throughput_rps = la.throughput_rps - lb.throughput_rps;
    if (la.p50_ms != lb.p50_ms) row.latency_winner = la.p50_ms < lb.p50_ms ? Winner::a : Winner::b;
    else if (la.p95_ms != lb.p95_ms) row.latency_winner = la.p95_ms < lb.p95_ms ? Winner::a : Winner::b;
    if (la.throughput_rps != lb.throughput_rps)
      row.throughput_winner = la.throughput_rps > lb.throughput_rps ? Winner::a : Winner::b;
    rows.push_back(row);
  }
  return rows;
}

namespace {

void check_emittable(const BenchReport& report) {
  if (report.levels.empty()) throw BenchError(BenchError::Code::empty_report, "report has no levels");
  for (const auto& l : report.levels)
    if (l.samples.empty())
      throw BenchError(BenchError::Code::empty_report, "level " + std::to_string(l.level) + " has no samples");
}

// Shortest text that parses back to the same double.
std::string number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

std::string emit(const BenchReport& report, Format format) {
  check_emittable(report);
  if (format == Format::csv) {
    std::string out = "level,p50_ms,p95_ms,mean_ms,throughput_rps,failures\n";
    for (const auto& l : report.levels)
      out += std::to_string(l.level) + "," + number(l.p50_ms) + "," + number(l.p95_ms) + "," + number(l.mean_ms) +
             "," + number(l.throughput_rps) + "," + std::to_string(l.failures) + "\n";
    return out;
  }
  json levels = json::array();
  for (const auto& l : report.levels)
    levels.push_back({{"level", l.level},
                      {"repetitions", l.repetitions},
                      {"samples", l.samples},
                      {"failures", l.failures},
                      {"p50_ms", l.p50_ms},
                      {"p95_ms", l.p95_ms},
                      {"mean_ms", l.mean_ms},
                      {"throughput_rps", l.throughput_rps}});
  return json{{"levels", levels}}.dump(2) + "\n";
}

BenchReport parse_report_json(std::string_view text) {
  try {
    auto doc = json::parse(text);
    BenchReport r;
    for (const auto& l : doc.at("levels")) {
      LevelStats s;
      s.level = l.at("level").get<int>();
      s.repetitions = l.at("repetitions").get<int>();
      s.samples = l.at("samples").get<std::vector<double>>();
      s.failures = l.at("failures").get<int>();
      s.p50_ms = l.at("p50_ms").get<double>();
      s.p95_ms = l.at("p95_ms").get<double>();
      s.mean_ms = l.at("mean_ms").get<double>();
      s.throughput_rps = l.at("throughput_rps").get<double>();
      r.levels.push_back(std::move(s));
    }
    return r;
  } catch (const json::exception& e) {
    throw BenchError(BenchError::Code::malformed_report, e.what());
  }
}

std::string emit_comparison(const std::vector<ComparisonRow>& rows) {
  std::string out = "level,delta_p50_ms,delta_p95_ms,delta_throughput_rps,latency_winner,throughput_winner\n";
  for (const auto& r : rows)
    out += std::to_string(r.level) + "," + number(r.delta_p50_ms) + "," + number(r.delta_p95_ms) + "," +
           number(r.delta_throughput_rps) + "," + std::string(to_string(r.latency_winner)) + "," +
           std::string(to_string(r.throughput_winner)) + "\n";
  return out;
}

}  // namespace dockhand::bench
