#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dockhand/core/types.hpp"
#include "dockhand/transport/transport.hpp"

namespace dockhand::bench {

struct BenchConfig {
  transport::Endpoint endpoint;
  core::Credentials credentials;
  std::string command;
  int repetitions = 10;
  std::vector<int> concurrency_levels{1};
  int warmup = 3;
  std::int64_t timeout_ms = core::kDefaultExecTimeoutMs;
};

struct LevelStats {
  int level = 1;
  int repetitions = 0;
  std::vector<double> samples;  // latency_ms of successful execs, in completion order
  int failures = 0;
  double p50_ms = 0;
  double p95_ms = 0;
  double mean_ms = 0;
  double throughput_rps = 0;

  bool operator==(const LevelStats&) const = default;
};

struct BenchReport {
  std::vector<LevelStats> levels;

  bool operator==(const BenchReport&) const = default;
};

class BenchError : public std::runtime_error {
 public:
  enum class Code { invalid_config, target_unreachable, all_requests_failed, empty_report, malformed_report };

  BenchError(Code code, const std::string& detail) : std::runtime_error(detail), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Nearest-rank percentile: the ceil(p * n)-th smallest sample (1-based),
/// no interpolation. p in (0, 1]; samples need not be sorted.
double nearest_rank_percentile(std::span<const double> samples, double p);

/// Builds the statistics for one level. Throws all_requests_failed when no
/// sample succeeded.
LevelStats summarize(int level, std::vector<double> samples, int failures, double wall_seconds);

/// Probes the target, runs warmup execs (discarded), then for each level runs
/// `repetitions` execs with at most `level` in flight, one session per worker.
BenchReport run_bench(const BenchConfig& config, transport::Transport& transport);

enum class Winner { a, b, tie };

std::string_view to_string(Winner w);

struct ComparisonRow {
  int level = 0;
  double delta_p50_ms = 0;  // a - b
  double delta_p95_ms = 0;
  double delta_throughput_rps = 0;
  Winner latency_winner = Winner::tie;     // lower p50, then lower p95
  Winner throughput_winner = Winner::tie;  // higher throughput
};

/// Rows for the levels present in both reports.
std::vector<ComparisonRow> compare(const BenchReport& a, const BenchReport& b);

enum class Format { json, csv };

/// CSV header: level,p50_ms,p95_ms,mean_ms,throughput_rps,failures.
/// Throws empty_report when the report or any level has no samples.
std::string emit(const BenchReport& report, Format format);

/// Inverse of emit(report, Format::json).
BenchReport parse_report_json(std::string_view text);

std::string emit_comparison(const std::vector<ComparisonRow>& rows);

}  // namespace dockhand::bench
