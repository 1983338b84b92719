#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "renewal/diagnostics.hpp"
#include "renewal/errors.hpp"
#include "renewal/parallel.hpp"
#include "renewal/process.hpp"
#include "renewal/rng.hpp"
#include "renewal/statistics.hpp"
#include "renewal/trace_io.hpp"

namespace renewal {

struct EnsembleConfig {
  std::uint64_t master_seed = 0;
  std::uint64_t replicas = 1;
  /// Template for every replica; its seed is replaced by mix_seed(master_seed, i).
  RunConfig run;
  /// 0 picks one worker per hardware thread. Results do not depend on it.
  unsigned workers = 0;
  PathStatisticsOptions path_options;

  void validate() const {
    if (replicas < 1) throw std::invalid_argument("ensemble needs at least one replica");
    run.validate();
  }
};

/// (P - n ln n - n ln ln n) / n
inline double z_statistic(std::uint64_t p, std::uint64_t n) {
  if (n < 3) throw std::invalid_argument("z_statistic: n must be >= 3");
  const double x = static_cast<double>(n);
  const double log_n = std::log(x);
  return (static_cast<double>(p) - x * log_n - x * std::log(log_n)) / x;
}

/// Cross-replica arrays at one checkpoint, ordered by replica index.
struct CheckpointSamples {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> p;
  std::vector<double> lambda;
  std::vector<double> s;
  /// P_n / (n ln n)
  std::vector<double> ratio;
  std::vector<double> z;

  friend bool operator==(const CheckpointSamples&, const CheckpointSamples&) = default;
};

struct EnsembleResult {
  /// Checkpoints with n >= 3 reached by every replica, ascending.
  std::vector<CheckpointSamples> per_checkpoint;
  std::vector<std::uint64_t> replica_seeds;
  std::vector<Trace> traces;
  std::vector<PathSummary> paths;

  const CheckpointSamples& at(std::uint64_t n) const {
    const auto it = std::find_if(per_checkpoint.begin(), per_checkpoint.end(),
                                 [n](const CheckpointSamples& c) { return c.n == n; });
    if (it == per_checkpoint.end()) throw std::out_of_range("checkpoint n=" + std::to_string(n) + " not in ensemble");
    return *it;
  }
};

inline bool operator==(const EnsembleResult& a, const EnsembleResult& b) {
  return a.per_checkpoint == b.per_checkpoint && a.replica_seeds == b.replica_seeds && a.traces == b.traces &&
         a.paths == b.paths;
}

inline EnsembleResult run_ensemble(const EnsembleConfig& config) {
  config.validate();
  EnsembleResult result;
  result.replica_seeds.resize(config.replicas);
  result.traces.resize(config.replicas);
  result.paths.resize(config.replicas);
  for (std::uint64_t i = 0; i < config.replicas; ++i) result.replica_seeds[i] = mix_seed(config.master_seed, i);

  parallel_for(config.replicas, config.workers, [&](std::size_t i) {
    RunConfig run = config.run;
    run.seed = result.replica_seeds[i];
    PathStatistics stats(config.path_options);
    try {
      result.traces[i] = simulate(run, stats);
    } catch (const NumericFailure& failure) {
      throw NumericFailure("replica " + std::to_string(i) + ": " + failure.what());
    }
    result.paths[i] = stats.summary();
  });

  // checkpoints common to all replicas
  std::vector<std::uint64_t> common;
  for (const auto& row : result.traces.front().rows) {
    if (row.n >= 3) common.push_back(row.n);
  }
  for (std::size_t i = 1; i < result.traces.size(); ++i) {
    std::vector<std::uint64_t> ns;
    for (const auto& row : result.traces[i].rows) ns.push_back(row.n);
    std::vector<std::uint64_t> kept;
    std::set_intersection(common.begin(), common.end(), ns.begin(), ns.end(), std::back_inserter(kept));
    common = std::move(kept);
  }

  for (const auto n : common) {
    CheckpointSamples samples;
    samples.n = n;
    for (const auto& trace : result.traces) {
      const auto row = std::lower_bound(trace.rows.begin(), trace.rows.end(), n,
                                        [](const TraceRow& r, std::uint64_t v) { return r.n < v; });
      samples.p.push_back(row->p);
      samples.lambda.push_back(row->lambda);
      samples.s.push_back(row->s);
      samples.ratio.push_back(layer_ratio(n, row->p));
      samples.z.push_back(z_statistic(row->p, n));
    }
    result.per_checkpoint.push_back(std::move(samples));
  }
  return result;
}

struct SummaryRow {
  std::uint64_t n;
  double mean_p;
  double mean_ratio;
  double var_ratio;
  double q05;
  double q50;
  double q95;
  double mean_z;
  double var_z;
};

inline SummaryRow summarize(const CheckpointSamples& samples) {
  std::vector<double> p(samples.p.begin(), samples.p.end());
  return {samples.n,
          mean(p),
          mean(samples.ratio),
          variance(samples.ratio),
          quantile(samples.ratio, 0.05),
          quantile(samples.ratio, 0.50),
          quantile(samples.ratio, 0.95),
          mean(samples.z),
          variance(samples.z)};
}

inline constexpr std::string_view kSummaryHeader = "n,mean_P,mean_ratio,var_ratio,q05,q50,q95,mean_Z,var_Z";

inline void write_summary_csv(std::ostream& out, const EnsembleResult& result) {
  out << kSummaryHeader << '\n';
  for (const auto& samples : result.per_checkpoint) {
    const auto row = summarize(samples);
    out << row.n << ',' << format_real(row.mean_p) << ',' << format_real(row.mean_ratio) << ','
        << format_real(row.var_ratio) << ',' << format_real(row.q05) << ',' << format_real(row.q50) << ','
        << format_real(row.q95) << ',' << format_real(row.mean_z) << ',' << format_real(row.var_z) << '\n';
  }
}

/// One row per sample: z_(i) and F = i / N.
inline void write_zcdf_csv(std::ostream& out, const EmpiricalCDF& cdf) {
  out << "z,F\n";
  const auto& z = cdf.sorted_samples();
  const double total = static_cast<double>(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out << format_real(z[i]) << ',' << format_real(static_cast<double>(i + 1) / total) << '\n';
  }
}

struct ConjectureReport {
  std::uint64_t n;
  EmpiricalCDF cdf;
  /// KS distance between the Z laws at the two largest checkpoints.
  std::optional<double> stability_ks;
  std::uint64_t stability_n_lo = 0;
  std::uint64_t stability_n_hi = 0;
};

inline ConjectureReport conjecture_cdf(const EnsembleResult& result, std::uint64_t n) {
  ConjectureReport report{n, EmpiricalCDF(result.at(n).z), std::nullopt};
  const auto& grid = result.per_checkpoint;
  if (grid.size() >= 2) {
    const auto& hi = grid[grid.size() - 1];
    const auto& lo = grid[grid.size() - 2];
    report.stability_ks = ks_distance(EmpiricalCDF(lo.z), EmpiricalCDF(hi.z));
    report.stability_n_lo = lo.n;
    report.stability_n_hi = hi.n;
  }
  return report;
}

}  // namespace renewal
