#pragma once

// The renewal covering process. Generator P_{n+1} = P_n + G(lambda_n) with
// lambda_n = prod_{k<=n} (1 - P_k^-alpha); the geometric increment is
// conditionally independent given P_1..P_n.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "renewal/compensated_sum.hpp"
#include "renewal/errors.hpp"
#include "renewal/rng.hpp"

namespace renewal {

struct GeneratorState {
  std::uint64_t n = 0;
  std::uint64_t p_current = 0;
  CompensatedSum<double> log_lambda_acc;
  /// S_n = sum_{k=1..n} 1 / lambda_k
  CompensatedSum<double> s_acc;
  double alpha = 1.0;

  double log_lambda() const { return log_lambda_acc.value(); }
  double lambda() const { return std::exp(log_lambda()); }
  double s_sum() const { return s_acc.value(); }

  friend bool operator==(const GeneratorState&, const GeneratorState&) = default;
};

/// log(1 - p^-alpha), the per-generator factor of log(lambda).
inline double log_survival_factor(std::uint64_t p, double alpha) {
  const double x = static_cast<double>(p);
  const double hit = alpha == 1.0 ? 1.0 / x : std::pow(x, -alpha);
  return std::log1p(-hit);
}

inline double log_lambda_increment(double log_lambda, std::uint64_t p_new, double alpha) {
  if (p_new < 2) throw std::invalid_argument("log_lambda_increment: generator must be >= 2");
  if (!(alpha > 0.0)) throw std::invalid_argument("log_lambda_increment: alpha must be > 0");
  return log_lambda + log_survival_factor(p_new, alpha);
}

/// Appends a generator to the state: updates log(lambda) and then S with the
/// new lambda, so that S_n always sums 1/lambda_1..1/lambda_n.
inline void push_generator(GeneratorState& state, std::uint64_t p_new) {
  state.log_lambda_acc += log_survival_factor(p_new, state.alpha);
  state.s_acc += std::exp(-state.log_lambda());
  state.p_current = p_new;
  ++state.n;
}

inline void validate_prefix(std::span<const std::uint64_t> prefix) {
  if (prefix.empty()) throw std::invalid_argument("prefix must not be empty");
  if (prefix.front() != 2) throw std::invalid_argument("prefix must start at 2");
  for (std::size_t i = 1; i < prefix.size(); ++i) {
    if (prefix[i] <= prefix[i - 1]) {
      throw std::invalid_argument("prefix must be strictly increasing (position " +
                                  std::to_string(i + 1) + ")");
    }
  }
}

inline GeneratorState new_state(std::span<const std::uint64_t> prefix, double alpha = 1.0) {
  validate_prefix(prefix);
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  GeneratorState state;
  state.alpha = alpha;
  for (const auto p : prefix) push_generator(state, p);
  return state;
}

inline GeneratorState new_state(std::initializer_list<std::uint64_t> prefix, double alpha = 1.0) {
  return new_state(std::span<const std::uint64_t>(prefix.begin(), prefix.size()), alpha);
}

/// Drift oracle: re-sums log(1 - P^-alpha) over the whole generator list.
inline double recompute_log_lambda(std::span<const std::uint64_t> generators, double alpha = 1.0) {
  validate_prefix(generators);
  CompensatedSum<double> acc;
  for (const auto p : generators) acc += log_survival_factor(p, alpha);
  return acc.value();
}

/// Inverse-CDF geometric sampler on {1, 2, ...}: P(k) = (1-p)^(k-1) p.
inline std::uint64_t sample_geometric(double p, double u) {
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("sample_geometric: p must lie in (0, 1]");
  if (!(u >= 0.0)) throw std::invalid_argument("sample_geometric: u must lie in [0, 1)");
  if (u >= 1.0) u = std::nextafter(1.0, 0.0);
  const double failures = std::floor(std::log1p(-u) / std::log1p(-p));
  if (!(failures < 0x1.0p63)) throw NumericFailure("sample_geometric: variate exceeds 64-bit range");
  return 1 + static_cast<std::uint64_t>(failures);
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a) {
    throw NumericFailure("generator value overflows 64-bit range");
  }
  return a + b;
}

/// One step of the geometric recursion; returns the gap.
template <UniformSource Source>
std::uint64_t step_geometric(GeneratorState& state, Source& source) {
  const std::uint64_t gap = sample_geometric(state.lambda(), source.next_uniform());
  push_generator(state, checked_add(state.p_current, gap));
  return gap;
}

struct SiteStep {
  std::uint64_t gap = 0;
  std::uint64_t sites_scanned = 0;
};

/// Bernoulli-site construction. Scans p_current+1, p_current+2, ...; at each
/// site draws Bernoulli(P_j^-alpha) for the generators in order, stopping at
/// the first hit. The first site with no hit becomes the next generator, which
/// is appended to `generators`.
template <UniformSource Source>
SiteStep step_site(GeneratorState& state, std::vector<std::uint64_t>& generators, Source& source) {
  if (generators.empty() || generators.back() != state.p_current || generators.size() != state.n) {
    throw std::invalid_argument("step_site: generator list does not match state");
  }
  std::vector<double> hit(generators.size());
  for (std::size_t j = 0; j < generators.size(); ++j) {
    const double x = static_cast<double>(generators[j]);
    hit[j] = state.alpha == 1.0 ? 1.0 / x : std::pow(x, -state.alpha);
  }
  SiteStep result;
  std::uint64_t site = state.p_current;
  for (;;) {
    site = checked_add(site, 1);
    ++result.sites_scanned;
    bool covered = false;
    for (const double q : hit) {
      if (source.next_uniform() < q) {
        covered = true;
        break;
      }
    }
    if (!covered) break;
  }
  result.gap = site - state.p_current;
  push_generator(state, site);
  generators.push_back(site);
  return result;
}

/// Survival probability of a single unexamined site: prod (1 - P_j^-alpha).
inline double site_survival_probability(std::span<const std::uint64_t> generators, double alpha = 1.0) {
  double product = 1.0;
  for (const auto p : generators) {
    product *= alpha == 1.0 ? 1.0 - 1.0 / static_cast<double>(p)
                            : 1.0 - std::pow(static_cast<double>(p), -alpha);
  }
  return product;
}

enum class HorizonKind { by_index, by_value };
enum class Mode { geometric, site };

inline const double kDefaultCheckpointRatio = std::pow(10.0, 1.0 / 8.0);

struct RunConfig {
  std::uint64_t seed = 0;
  HorizonKind horizon_kind = HorizonKind::by_index;
  std::uint64_t horizon = 1;
  Mode mode = Mode::geometric;
  double alpha = 1.0;
  double checkpoint_ratio = kDefaultCheckpointRatio;
  std::vector<std::uint64_t> prefix{2};
  /// Site mode is O(n) per site; runs beyond this many generators are refused.
  std::uint64_t site_mode_cap = 10'000;

  void validate() const {
    if (!(checkpoint_ratio > 1.0)) throw std::invalid_argument("checkpoint ratio must be > 1");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
    validate_prefix(prefix);
    if (horizon_kind == HorizonKind::by_index && horizon < prefix.size()) {
      throw std::invalid_argument("index horizon is shorter than the prefix");
    }
    if (mode == Mode::site) {
      if (horizon_kind == HorizonKind::by_index && horizon > site_mode_cap) {
        throw CapacityError("site mode is limited to n <= " + std::to_string(site_mode_cap));
      }
      if (prefix.size() > site_mode_cap) throw CapacityError("prefix exceeds the site-mode cap");
    }
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct TraceRow {
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  /// P_n - P_{n-1}; zero on the first row.
  std::uint64_t gap = 0;
  double lambda = 0.0;
  double log_lambda = 0.0;
  double s = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

inline TraceRow make_row(const GeneratorState& state, std::uint64_t gap) {
  return {state.n, state.p_current, gap, state.lambda(), state.log_lambda(), state.s_sum()};
}

struct Trace {
  std::vector<TraceRow> rows;
  std::vector<std::uint64_t> prefix;
  RunConfig config;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Geometric checkpoint grid n_j = round(r^j), deduplicated.
class CheckpointGrid {
public:
  explicit CheckpointGrid(double ratio) : ratio_(ratio) {
    if (!(ratio > 1.0)) throw std::invalid_argument("checkpoint ratio must be > 1");
  }

  std::uint64_t next() const { return next_; }

  /// True when n lies on the grid; call with non-decreasing n.
  bool hit(std::uint64_t n) {
    if (n < next_) return false;
    const bool on_grid = n == next_;
    while (next_ <= n) {
      ++exponent_;
      next_ = static_cast<std::uint64_t>(std::llround(std::pow(ratio_, static_cast<double>(exponent_))));
    }
    return on_grid;
  }

private:
  double ratio_;
  std::uint64_t exponent_ = 0;
  std::uint64_t next_ = 1;
};

/// Default sink: ignores everything.
struct NullSink {};

template <typename Sink>
void notify_step(Sink& sink, const GeneratorState& state, std::uint64_t gap) {
  if constexpr (requires { sink.on_step(state, gap); }) sink.on_step(state, gap);
}

template <typename Sink>
void notify_checkpoint(Sink& sink, const TraceRow& row) {
  if constexpr (requires { sink.on_checkpoint(row); }) sink.on_checkpoint(row);
}

namespace detail {

inline bool horizon_reached(const GeneratorState& state, const RunConfig& config) {
  return config.horizon_kind == HorizonKind::by_index ? state.n >= config.horizon
                                                      : state.p_current >= config.horizon;
}

template <typename Sink>
void record(Trace& trace, CheckpointGrid& grid, const GeneratorState& state, std::uint64_t gap,
            bool final_step, Sink& sink) {
  if (grid.hit(state.n) || final_step) {
    trace.rows.push_back(make_row(state, gap));
    notify_checkpoint(sink, trace.rows.back());
  }
}

}  // namespace detail

/// Runs the geometric recursion from an existing state until the horizon.
/// Rows are emitted on the checkpoint grid for every state after `state`,
/// and always at the final step.
template <UniformSource Source, typename Sink = NullSink>
Trace advance(GeneratorState& state, const RunConfig& config, Source& source, Sink&& sink = {}) {
  config.validate();
  if (config.mode != Mode::geometric) {
    throw std::invalid_argument("advance from a bare state supports geometric mode only");
  }
  Trace trace;
  trace.config = config;
  CheckpointGrid grid(config.checkpoint_ratio);
  grid.hit(state.n);
  while (!detail::horizon_reached(state, config)) {
    const std::uint64_t gap = step_geometric(state, source);
    notify_step(sink, state, gap);
    detail::record(trace, grid, state, gap, detail::horizon_reached(state, config), sink);
  }
  return trace;
}

/// Full run from the configured prefix: replays the forced prefix, then steps
/// with the configured construction until the horizon.
template <UniformSource Source, typename Sink = NullSink>
Trace simulate(const RunConfig& config, Source& source, Sink&& sink = {}) {
  config.validate();
  Trace trace;
  trace.config = config;
  trace.prefix = config.prefix;
  CheckpointGrid grid(config.checkpoint_ratio);

  GeneratorState state;
  state.alpha = config.alpha;
  std::uint64_t previous = 0;
  for (const auto p : config.prefix) {
    push_generator(state, p);
    const std::uint64_t gap = previous == 0 ? 0 : p - previous;
    previous = p;
    notify_step(sink, state, gap);
    const bool done = state.n == config.prefix.size() && detail::horizon_reached(state, config);
    detail::record(trace, grid, state, gap, done, sink);
  }
  if (detail::horizon_reached(state, config)) return trace;

  std::vector<std::uint64_t> generators;
  if (config.mode == Mode::site) generators = config.prefix;
  while (!detail::horizon_reached(state, config)) {
    std::uint64_t gap = 0;
    if (config.mode == Mode::geometric) {
      gap = step_geometric(state, source);
    } else {
      if (state.n >= config.site_mode_cap) {
        throw CapacityError("site mode is limited to n <= " + std::to_string(config.site_mode_cap));
      }
      gap = step_site(state, generators, source).gap;
    }
    notify_step(sink, state, gap);
    detail::record(trace, grid, state, gap, detail::horizon_reached(state, config), sink);
  }
  return trace;
}

/// Seeds the pinned stream from config.seed.
template <typename Sink = NullSink>
Trace simulate(const RunConfig& config, Sink&& sink = {}) {
  Stream stream(config.seed);
  return simulate(config, stream, std::forward<Sink>(sink));
}

}  // namespace renewal
