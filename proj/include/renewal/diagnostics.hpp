#pragma once

// Statistics computed from traces: slow variation of lambda, Karamata ratios,
// the concentration of P_n around 2 + sum_{k<n} 1/lambda_k, gap ratios,
// layer upcrossings of P_n / (n ln n), stochastic domination and the
// truncated-geometric identities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "renewal/compensated_sum.hpp"
#include "renewal/errors.hpp"
#include "renewal/parallel.hpp"
#include "renewal/process.hpp"
#include "renewal/rng.hpp"
#include "renewal/statistics.hpp"

namespace renewal {

struct SeriesPoint {
  double x;
  double y;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

using Series = std::vector<SeriesPoint>;

/// Counts completed passages of a ratio path from <= 1 + a to > 1 + 2a.
class UpcrossingCounter {
public:
  UpcrossingCounter(double a, std::uint64_t n_min) : a_(a), n_min_(n_min) {
    if (!(a > 0.0)) throw std::invalid_argument("upcrossings: a must be > 0");
    if (n_min < 3) throw std::invalid_argument("upcrossings: n_min must be >= 3");
  }

  void observe(std::uint64_t n, double ratio) {
    if (n < n_min_) return;
    observe(ratio);
  }

  void observe(double ratio) {
    if (ratio <= 1.0 + a_) {
      armed_ = true;
    } else if (armed_ && ratio > 1.0 + 2.0 * a_) {
      ++count_;
      armed_ = false;
    }
  }

  std::uint64_t count() const { return count_; }
  double a() const { return a_; }
  std::uint64_t n_min() const { return n_min_; }

private:
  double a_;
  std::uint64_t n_min_;
  bool armed_ = false;
  std::uint64_t count_ = 0;
};

/// Upcrossings of an arbitrary ratio path (no index filter).
inline std::uint64_t count_upcrossings(std::span<const double> ratios, double a) {
  UpcrossingCounter counter(a, 3);
  for (const double r : ratios) counter.observe(r);
  return counter.count();
}

inline double layer_ratio(std::uint64_t n, std::uint64_t p) {
  const double x = static_cast<double>(n);
  return static_cast<double>(p) / (x * std::log(x));
}

/// gap / ln^2 of the generator the gap starts from.
inline double gap_ratio_value(std::uint64_t gap, std::uint64_t p_left) {
  const double l = std::log(static_cast<double>(p_left));
  return static_cast<double>(gap) / (l * l);
}

struct PathStatisticsOptions {
  /// Gaps are scored only when their left index is at least this large.
  std::uint64_t gap_min_n = 10;
  double layer_a = 0.5;
  std::uint64_t layer_n_min = 1000;

  friend bool operator==(const PathStatisticsOptions&, const PathStatisticsOptions&) = default;
};

/// What a step-level pass over a path leaves behind; also the content of the
/// simulate sidecar file.
struct PathSummary {
  PathStatisticsOptions options;
  /// (n, sum_{k<=n} 1/lambda_k^2) at every checkpoint
  Series square_sums;
  double max_gap_ratio = 0.0;
  std::uint64_t max_gap_n = 0;
  std::uint64_t upcrossings = 0;

  friend bool operator==(const PathSummary&, const PathSummary&) = default;
};

/// Step-level sink for quantities that need every step, not just checkpoints.
class PathStatistics {
public:
  explicit PathStatistics(PathStatisticsOptions options = {})
      : upcrossings_(options.layer_a, options.layer_n_min) {
    summary_.options = options;
  }

  void on_step(const GeneratorState& state, std::uint64_t gap) {
    const double inv_lambda = std::exp(-state.log_lambda());
    square_sum_ += inv_lambda * inv_lambda;
    if (gap > 0 && state.n - 1 >= summary_.options.gap_min_n) {
      const double ratio = gap_ratio_value(gap, state.p_current - gap);
      if (ratio > summary_.max_gap_ratio) {
        summary_.max_gap_ratio = ratio;
        summary_.max_gap_n = state.n - 1;
      }
    }
    if (state.n >= 3) {
      upcrossings_.observe(state.n, layer_ratio(state.n, state.p_current));
      summary_.upcrossings = upcrossings_.count();
    }
  }

  void on_checkpoint(const TraceRow& row) {
    summary_.square_sums.push_back({static_cast<double>(row.n), square_sum_.value()});
  }

  const PathSummary& summary() const { return summary_; }

private:
  CompensatedSum<double> square_sum_;
  UpcrossingCounter upcrossings_;
  PathSummary summary_;
};

// ---------------------------------------------------------------------------
// Trace series

/// Pairs each checkpoint x with the checkpoint nearest (in log scale) to
/// ceil(x t) and reports lambda there over lambda(x). Targets outside the
/// trace's index range are skipped.
inline Series sv_ratio(const Trace& trace, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("sv_ratio: t must be > 0");
  Series series;
  const auto& rows = trace.rows;
  if (rows.empty()) return series;
  for (const auto& row : rows) {
    const double target = std::ceil(static_cast<double>(row.n) * t);
    if (target < static_cast<double>(rows.front().n) || target > static_cast<double>(rows.back().n)) continue;
    const auto upper = std::lower_bound(rows.begin(), rows.end(), target,
                                        [](const TraceRow& r, double v) { return static_cast<double>(r.n) < v; });
    auto nearest = upper;
    if (upper != rows.begin()) {
      const auto lower = std::prev(upper);
      if (upper == rows.end() ||
          std::log(target / static_cast<double>(lower->n)) <= std::log(static_cast<double>(upper->n) / target)) {
        nearest = lower;
      }
    }
    series.push_back({static_cast<double>(row.n), std::exp(nearest->log_lambda - row.log_lambda)});
  }
  return series;
}

/// (n, S_n lambda_n / n)
inline Series karamata_ratio(const Trace& trace) {
  Series series;
  series.reserve(trace.rows.size());
  for (const auto& row : trace.rows) {
    series.push_back({static_cast<double>(row.n), row.s * row.lambda / static_cast<double>(row.n)});
  }
  return series;
}

/// Estimates sum_{k<=n} 1/lambda_k^2 at each checkpoint from the S column
/// alone: each segment contributes (dS)^2 / dn, which is exact where the
/// segment has one step and a tight lower bound where lambda barely moves.
inline Series reconstruct_square_sums(const Trace& trace) {
  Series series;
  CompensatedSum<double> acc;
  std::uint64_t prev_n = 0;
  double prev_s = 0.0;
  for (const auto& row : trace.rows) {
    const double dn = static_cast<double>(row.n - prev_n);
    const double ds = row.s - prev_s;
    acc += ds * ds / dn;
    series.push_back({static_cast<double>(row.n), acc.value()});
    prev_n = row.n;
    prev_s = row.s;
  }
  return series;
}

/// (n, Q_n lambda_n^2 / n) with Q_n = sum 1/lambda_k^2 taken from `square_sums`
/// (one entry per row).
inline Series karamata_sq_ratio(const Trace& trace, const Series& square_sums) {
  if (square_sums.size() != trace.rows.size()) {
    throw std::invalid_argument("karamata_sq_ratio: square sums do not match the trace rows");
  }
  Series series;
  series.reserve(trace.rows.size());
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const auto& row = trace.rows[i];
    series.push_back({static_cast<double>(row.n),
                      square_sums[i].y * row.lambda * row.lambda / static_cast<double>(row.n)});
  }
  return series;
}

/// (n, n^-alpha / lambda_n)
inline Series poly_decay(const Trace& trace, double alpha_exp) {
  if (!(alpha_exp > 0.0)) throw std::invalid_argument("poly_decay: exponent must be > 0");
  Series series;
  series.reserve(trace.rows.size());
  for (const auto& row : trace.rows) {
    series.push_back({static_cast<double>(row.n),
                      std::exp(-alpha_exp * std::log(static_cast<double>(row.n)) - row.log_lambda)});
  }
  return series;
}

struct ConcentrationPoint {
  std::uint64_t n;
  /// |P_n - 2 - sum_{k<n} 1/lambda_k|
  double raw;
  /// n^(alpha/2)
  double envelope;
  /// raw * lambda_n / sqrt(n)
  double normalized;

  friend bool operator==(const ConcentrationPoint&, const ConcentrationPoint&) = default;
};

inline std::vector<ConcentrationPoint> concentration(const Trace& trace, double alpha_exp) {
  if (!(alpha_exp > 1.0 && alpha_exp < 2.0)) throw std::invalid_argument("concentration: exponent must lie in (1, 2)");
  std::vector<ConcentrationPoint> series;
  series.reserve(trace.rows.size());
  for (const auto& row : trace.rows) {
    const double n = static_cast<double>(row.n);
    const double inv_lambda = std::exp(-row.log_lambda);
    const double preceding = row.s - inv_lambda;
    const double raw = std::abs(static_cast<double>(row.p) - 2.0 - preceding);
    series.push_back({row.n, raw, std::pow(n, alpha_exp / 2.0), raw * row.lambda / std::sqrt(n)});
  }
  return series;
}

struct GapRatios {
  /// (left index, gap / ln^2 P_left) for every row that carries a gap
  Series series;
  double checkpoint_max = 0.0;
};

inline GapRatios gap_ratio(const Trace& trace, std::uint64_t min_left_n = 1) {
  GapRatios result;
  for (const auto& row : trace.rows) {
    if (row.gap == 0 || row.gap >= row.p) continue;
    const std::uint64_t left = row.n - 1;
    const double ratio = gap_ratio_value(row.gap, row.p - row.gap);
    result.series.push_back({static_cast<double>(left), ratio});
    if (left >= min_left_n) result.checkpoint_max = std::max(result.checkpoint_max, ratio);
  }
  return result;
}

/// Upcrossings of P_n / (n ln n) over the trace checkpoints with n >= n_min.
inline std::uint64_t upcrossings(const Trace& trace, double a, std::uint64_t n_min) {
  UpcrossingCounter counter(a, n_min);
  for (const auto& row : trace.rows) {
    if (row.n >= 3) counter.observe(row.n, layer_ratio(row.n, row.p));
  }
  return counter.count();
}

/// Smallest checkpoint n0 with P_n > C n at every checkpoint n >= n0.
inline std::optional<std::uint64_t> linear_growth_margin(const Trace& trace, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("linear_growth_margin: C must be > 0");
  std::optional<std::uint64_t> first;
  for (auto it = trace.rows.rbegin(); it != trace.rows.rend(); ++it) {
    if (!(static_cast<double>(it->p) > c * static_cast<double>(it->n))) break;
    first = it->n;
  }
  return first;
}

// ---------------------------------------------------------------------------
// Truncated geometric identities

struct TruncationMismatch {
  double exact;
  double bound;
};

/// P(G(p) > beta ln(k) / p) = (1-p)^(beta ln(k) / p), bounded by k^-beta.
inline TruncationMismatch truncation_mismatch(double p, std::uint64_t k, double beta) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("truncation_mismatch: p must lie in (0, 1)");
  if (k < 2) throw std::invalid_argument("truncation_mismatch: k must be >= 2");
  if (!(beta > 1.0)) throw std::invalid_argument("truncation_mismatch: beta must be > 1");
  const double log_k = std::log(static_cast<double>(k));
  return {std::exp(beta * log_k / p * std::log1p(-p)), std::exp(-beta * log_k)};
}

/// E[G] - E[G 1{G <= T}] = (1-p)^floor(T) (1/p + floor(T)) for G ~ Geometric(p) on {1, 2, ...}.
inline double truncated_mean_deficit(double p, double threshold) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("truncated_mean_deficit: p must lie in (0, 1)");
  if (!(threshold >= 1.0)) throw std::invalid_argument("truncated_mean_deficit: threshold must be >= 1");
  const double m = std::floor(threshold);
  return std::exp(m * std::log1p(-p)) * (1.0 / p + m);
}

// ---------------------------------------------------------------------------
// Stochastic domination

/// max_x (S_dominated(x) - S_dominating(x)), clamped at zero, over the merged
/// jump set; S = 1 - F is the empirical survival function.
inline double max_survival_excess(const EmpiricalCDF& dominated, const EmpiricalCDF& dominating) {
  const auto& xs = dominated.sorted_samples();
  const auto& ys = dominating.sorted_samples();
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double worst = 0.0;
  while (i < xs.size() || j < ys.size()) {
    const double x = (j == ys.size() || (i < xs.size() && xs[i] <= ys[j])) ? xs[i] : ys[j];
    while (i < xs.size() && xs[i] <= x) ++i;
    while (j < ys.size() && ys[j] <= x) ++j;
    // S_dominated - S_dominating = F_dominating - F_dominated
    worst = std::max(worst, static_cast<double>(j) / ny - static_cast<double>(i) / nx);
  }
  return worst;
}

struct DominationConfig {
  std::uint64_t prefix_len = 5;
  double p = 0.3;
  std::uint64_t horizon = 100;
  std::uint64_t replicas = 10'000;
  std::uint64_t seed = 0;
  std::uint64_t max_attempts = 1'000'000;
  unsigned workers = 1;
};

struct DominationResult {
  EmpiricalCDF cdf_process;
  EmpiricalCDF cdf_iid;
  double max_violation;
  std::uint64_t process_samples;
  std::uint64_t iid_samples;
  std::uint64_t rejected_attempts;
};

/// Process paths conditioned on lambda_m <= p (by rejection) versus iid
/// Geometric(p) sums: both record the sum of `horizon` consecutive gaps.
/// Replica r draws from mix_seed(seed, r) for the process and from
/// mix_seed(~seed, r) for the iid side.
inline DominationResult domination_experiment(const DominationConfig& config) {
  if (config.prefix_len < 1) throw std::invalid_argument("domination: prefix length must be >= 1");
  if (!(config.p > 0.0 && config.p <= 1.0)) throw std::invalid_argument("domination: p must lie in (0, 1]");
  if (config.horizon < 1 || config.replicas < 1) throw std::invalid_argument("domination: empty experiment");

  std::vector<double> process_sums(config.replicas);
  std::vector<double> iid_sums(config.replicas);
  std::vector<std::uint64_t> rejections(config.replicas, 0);
  const double log_p = std::log(config.p);

  parallel_for(config.replicas, config.workers, [&](std::size_t r) {
    Stream stream(mix_seed(config.seed, r));
    GeneratorState state;
    std::uint64_t attempts = 0;
    for (;;) {
      if (attempts++ >= config.max_attempts) {
        throw ConditioningUnreachable("domination: lambda_" + std::to_string(config.prefix_len) +
                                      " <= p not reached within " + std::to_string(config.max_attempts) +
                                      " attempts");
      }
      state = new_state({2});
      while (state.n < config.prefix_len) step_geometric(state, stream);
      if (state.log_lambda() <= log_p) break;
    }
    rejections[r] = attempts - 1;
    const std::uint64_t start = state.p_current;
    for (std::uint64_t i = 0; i < config.horizon; ++i) step_geometric(state, stream);
    process_sums[r] = static_cast<double>(state.p_current - start);

    Stream iid_stream(mix_seed(~config.seed, r));
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < config.horizon; ++i) {
      total = checked_add(total, sample_geometric(config.p, iid_stream.next_uniform()));
    }
    iid_sums[r] = static_cast<double>(total);
  });

  EmpiricalCDF process_cdf(std::move(process_sums));
  EmpiricalCDF iid_cdf(std::move(iid_sums));
  const double violation = max_survival_excess(iid_cdf, process_cdf);
  std::uint64_t rejected = 0;
  for (const auto count : rejections) rejected += count;
  return {std::move(process_cdf), std::move(iid_cdf), violation, config.replicas, config.replicas, rejected};
}

// ---------------------------------------------------------------------------
// Report

struct SvSeries {
  double t;
  Series series;
};

struct GapReport {
  Series series;
  double checkpoint_max = 0.0;
  /// over every step with left index >= min_left_n; absent without path statistics
  std::optional<double> path_max;
  std::uint64_t min_left_n = 0;
};

struct UpcrossingReport {
  double a;
  std::uint64_t n_min;
  std::uint64_t checkpoint_count;
  std::optional<std::uint64_t> path_count;
};

struct DiagnosticsReport {
  std::vector<SvSeries> sv_ratios;
  Series karamata;
  Series karamata_sq;
  /// "path" when sum 1/lambda^2 was accumulated during simulation, else "reconstructed"
  std::string karamata_sq_source;
  double concentration_alpha = 1.2;
  std::vector<ConcentrationPoint> concentration;
  GapReport gaps;
  std::vector<UpcrossingReport> upcrossings;
  double poly_decay_alpha = 0.5;
  Series poly_decay;
  std::optional<DominationResult> domination;
};

struct DiagnosticsOptions {
  std::vector<double> sv_t{2.0, 10.0};
  double alpha_exp = 1.2;
  double poly_alpha = 0.5;
  double layer_a = 0.5;
  std::uint64_t layer_n_min = 1000;
  std::uint64_t gap_min_n = PathStatisticsOptions{}.gap_min_n;
};

inline DiagnosticsReport diagnose(const Trace& trace, const DiagnosticsOptions& options,
                                  const PathSummary* path = nullptr) {
  DiagnosticsReport report;
  for (const double t : options.sv_t) report.sv_ratios.push_back({t, sv_ratio(trace, t)});
  report.karamata = karamata_ratio(trace);
  if (path != nullptr && path->square_sums.size() == trace.rows.size()) {
    report.karamata_sq = karamata_sq_ratio(trace, path->square_sums);
    report.karamata_sq_source = "path";
  } else {
    report.karamata_sq = karamata_sq_ratio(trace, reconstruct_square_sums(trace));
    report.karamata_sq_source = "reconstructed";
  }
  report.concentration_alpha = options.alpha_exp;
  report.concentration = concentration(trace, options.alpha_exp);

  const auto gaps = gap_ratio(trace, options.gap_min_n);
  report.gaps.series = gaps.series;
  report.gaps.checkpoint_max = gaps.checkpoint_max;
  report.gaps.min_left_n = options.gap_min_n;
  if (path != nullptr) {
    report.gaps.path_max = path->max_gap_ratio;
    report.gaps.min_left_n = path->options.gap_min_n;
  }

  UpcrossingReport layers{options.layer_a, options.layer_n_min,
                          upcrossings(trace, options.layer_a, options.layer_n_min), std::nullopt};
  if (path != nullptr && path->options.layer_a == options.layer_a &&
      path->options.layer_n_min == options.layer_n_min) {
    layers.path_count = path->upcrossings;
  }
  report.upcrossings.push_back(layers);

  report.poly_decay_alpha = options.poly_alpha;
  report.poly_decay = poly_decay(trace, options.poly_alpha);
  return report;
}

/// Acceptance thresholds a single long trace must satisfy.
struct DiagnosticThresholds {
  double sv_t = 2.0;
  double sv_x_min = 1e3;
  double sv_band_coefficient = 3.0;
  double karamata_n_min = 1e4;
  double karamata_n_max = 1e6;
  double karamata_lo = 0.85;
  double karamata_hi = 1.0;
  double final_concentration_max = 5.0;
  double gap_ratio_max = 3.0;
  std::uint64_t max_upcrossings = 0;
};

/// Human-readable list of violated thresholds; empty when all hold.
inline std::vector<std::string> threshold_violations(const DiagnosticsReport& report,
                                                     const DiagnosticThresholds& limits = {}) {
  std::vector<std::string> violations;
  for (const auto& sv : report.sv_ratios) {
    if (sv.t != limits.sv_t) continue;
    for (const auto& [x, ratio] : sv.series) {
      if (x < limits.sv_x_min) continue;
      const double lo = 1.0 - limits.sv_band_coefficient / std::log(x);
      if (!(ratio >= lo && ratio <= 1.0)) {
        violations.push_back("sv_ratio(t=" + std::to_string(sv.t) + ") at x=" + std::to_string(x) + " is " +
                             std::to_string(ratio));
      }
    }
  }
  for (const auto& [n, ratio] : report.karamata) {
    if (n < limits.karamata_n_min || n > limits.karamata_n_max) continue;
    if (!(ratio >= limits.karamata_lo && ratio <= limits.karamata_hi)) {
      violations.push_back("karamata at n=" + std::to_string(n) + " is " + std::to_string(ratio));
    }
  }
  for (const auto& point : report.concentration) {
    if (!std::isfinite(point.normalized) || point.normalized < 0.0) {
      violations.push_back("concentration at n=" + std::to_string(point.n) + " is not finite");
    }
  }
  if (!report.concentration.empty() &&
      !(report.concentration.back().normalized < limits.final_concentration_max)) {
    violations.push_back("final normalized concentration " + std::to_string(report.concentration.back().normalized));
  }
  const double gap_max = report.gaps.path_max.value_or(report.gaps.checkpoint_max);
  if (!(gap_max <= limits.gap_ratio_max)) violations.push_back("max gap ratio " + std::to_string(gap_max));
  for (const auto& layer : report.upcrossings) {
    const auto count = layer.path_count.value_or(layer.checkpoint_count);
    if (count > limits.max_upcrossings) {
      violations.push_back("upcrossings(a=" + std::to_string(layer.a) + ") = " + std::to_string(count));
    }
  }
  return violations;
}

}  // namespace renewal
