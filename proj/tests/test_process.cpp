#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "oracles.hpp"
#include "renewal/diagnostics.hpp"
#include "renewal/process.hpp"
#include "renewal/statistics.hpp"

namespace renewal {
namespace {

using testing::ScriptedUniforms;

double chi_square_critical_99(int dof) {
  return boost::math::quantile(boost::math::chi_squared(dof), 0.99);
}

/// Geometric(p) pmf on 1..bins-1, last bin the tail {>= bins}. Callers pick
/// `bins` so every bin expects at least 5 counts; sparser bins inflate the
/// statistic well past its chi-square law.
std::vector<double> geometric_pmf(double p, int bins) {
  std::vector<double> pmf;
  for (int k = 1; k < bins; ++k) pmf.push_back(std::pow(1.0 - p, k - 1) * p);
  pmf.push_back(std::pow(1.0 - p, bins - 1));
  return pmf;
}

TEST(CompensatedSum, RecoversLowOrderBits) {
  CompensatedSum<double> acc;
  acc += 1.0;
  for (int i = 0; i < 10'000; ++i) acc += 1e-16;
  acc += -1.0;
  EXPECT_NEAR(acc.value(), 1e-12, 1e-24);
}

TEST(NewState, SinglePrefix) {
  const auto state = new_state({2});
  EXPECT_EQ(state.n, 1u);
  EXPECT_EQ(state.p_current, 2u);
  EXPECT_DOUBLE_EQ(state.log_lambda(), std::log(0.5));
  EXPECT_DOUBLE_EQ(state.s_sum(), 2.0);
}

TEST(NewState, LongerPrefixes) {
  EXPECT_NEAR(new_state({2, 3}).lambda(), 1.0 / 3.0, 1e-15);
  const auto state = new_state({2, 3, 5});
  EXPECT_NEAR(state.lambda(), 4.0 / 15.0, 1e-15);
  EXPECT_NEAR(state.log_lambda(), -1.32176, 1e-5);
  EXPECT_NEAR(state.s_sum(), 2.0 + 3.0 + 15.0 / 4.0, 1e-13);
  EXPECT_EQ(state.p_current, 5u);
}

TEST(NewState, RejectsBadPrefixes) {
  EXPECT_THROW(new_state({3, 5}), std::invalid_argument);
  EXPECT_THROW(new_state({2, 2}), std::invalid_argument);
  EXPECT_THROW(new_state({2, 7, 5}), std::invalid_argument);
  EXPECT_THROW(new_state(std::span<const std::uint64_t>{}), std::invalid_argument);
}

TEST(SampleGeometric, Examples) {
  EXPECT_EQ(sample_geometric(0.5, 0.3), 1u);
  EXPECT_EQ(sample_geometric(0.5, 0.6), 2u);
  EXPECT_EQ(sample_geometric(1.0, 0.0), 1u);
  EXPECT_EQ(sample_geometric(1.0, 0.999), 1u);
}

TEST(SampleGeometric, ClampsUnitVariateAndRejectsBadParameter) {
  const auto at_one = sample_geometric(0.5, 1.0);
  EXPECT_EQ(at_one, sample_geometric(0.5, std::nextafter(1.0, 0.0)));
  EXPECT_GE(at_one, 53u);
  EXPECT_LE(at_one, 54u);
  EXPECT_THROW(sample_geometric(0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(sample_geometric(1.5, 0.5), std::invalid_argument);
  EXPECT_THROW(sample_geometric(-0.1, 0.5), std::invalid_argument);
}

TEST(SampleGeometric, TinyParameterStaysIn64Bits) {
  EXPECT_THROW(sample_geometric(1e-300, 0.999), NumericFailure);
  EXPECT_GT(sample_geometric(1e-12, 0.999), 1'000'000'000'000u);
}

// Sample mean within 4 sigma / sqrt(N) of 1/p.
TEST(SampleGeometric, EmpiricalMeanMatches) {
  constexpr int kSamples = 1'000'000;
  for (const double p : {0.5, 0.1, 1e-3}) {
    Stream stream(17);
    CompensatedSum<double> total;
    for (int i = 0; i < kSamples; ++i) total += static_cast<double>(sample_geometric(p, stream.next_uniform()));
    const double sigma = std::sqrt((1.0 - p) / (p * p));
    EXPECT_LE(std::abs(total.value() / kSamples - 1.0 / p), 4.0 * sigma / std::sqrt(kSamples)) << "p=" << p;
  }
}

TEST(SampleGeometric, PmfChiSquare) {
  Stream stream(3);
  std::vector<std::uint64_t> counts(14, 0);
  for (int i = 0; i < 100'000; ++i) {
    const auto k = sample_geometric(0.5, stream.next_uniform());
    ++counts[std::min<std::uint64_t>(k, 14) - 1];
  }
  EXPECT_LT(chi_square(counts, geometric_pmf(0.5, 14)), chi_square_critical_99(13));
}

TEST(LogLambdaIncrement, Examples) {
  EXPECT_NEAR(log_lambda_increment(std::log(0.5), 3, 1.0), std::log(1.0 / 3.0), 1e-15);
  EXPECT_NEAR(log_lambda_increment(std::log(1.0 / 3.0), 3, 1.0), -1.504077, 1e-6);
  EXPECT_DOUBLE_EQ(log_lambda_increment(0.0, 2, 1.0), std::log(0.5));
  EXPECT_NEAR(log_lambda_increment(std::log(4.0 / 15.0), 7, 1.0), -1.47591, 1e-5);
  EXPECT_NEAR(log_lambda_increment(0.0, 2, 2.0), std::log(0.75), 1e-15);
  EXPECT_THROW(log_lambda_increment(0.0, 1, 1.0), std::invalid_argument);
  EXPECT_THROW(log_lambda_increment(0.0, 2, 0.0), std::invalid_argument);
}

TEST(RecomputeLogLambda, Examples) {
  const std::vector<std::uint64_t> three{2, 3, 5};
  EXPECT_NEAR(recompute_log_lambda(three), -1.32176, 1e-5);
  const std::vector<std::uint64_t> one{2};
  EXPECT_DOUBLE_EQ(recompute_log_lambda(one), std::log(0.5));
}

struct GeneratorRecorder {
  std::vector<std::uint64_t> generators;
  void on_step(const GeneratorState& state, std::uint64_t) { generators.push_back(state.p_current); }
};

TEST(RecomputeLogLambda, IncrementalAccumulatorDoesNotDrift) {
  RunConfig config;
  config.seed = 11;
  config.horizon = 100'000;
  GeneratorRecorder recorder;
  const auto trace = simulate(config, recorder);
  ASSERT_EQ(recorder.generators.size(), 100'000u);
  const double incremental = trace.rows.back().log_lambda;
  const double recomputed = recompute_log_lambda(recorder.generators);
  EXPECT_LE(std::abs(incremental - recomputed), 1e-12 * std::abs(recomputed));

  long double naive = 0.0L;
  for (const auto p : recorder.generators) naive += std::log1p(-1.0L / static_cast<long double>(p));
  EXPECT_LE(std::abs(incremental - static_cast<double>(naive)), 1e-12 * std::abs(recomputed));
}

TEST(StepGeometric, ScriptedVariates) {
  {
    auto state = new_state({2});
    ScriptedUniforms u({0.6});
    EXPECT_EQ(step_geometric(state, u), 2u);
    EXPECT_EQ(state.p_current, 4u);
    EXPECT_EQ(state.n, 2u);
    EXPECT_NEAR(state.lambda(), 0.5 * 0.75, 1e-15);
    EXPECT_NEAR(state.s_sum(), 2.0 + 1.0 / 0.375, 1e-13);
  }
  {
    auto state = new_state({2});
    ScriptedUniforms u({0.3});
    EXPECT_EQ(step_geometric(state, u), 1u);
    EXPECT_EQ(state.p_current, 3u);
  }
}

TEST(StepGeometric, OverflowIsNumericFailure) {
  auto state = new_state({2, std::numeric_limits<std::uint64_t>::max()});
  ScriptedUniforms u({0.0});
  EXPECT_THROW(step_geometric(state, u), NumericFailure);
}

TEST(StepSite, ScriptedScan) {
  auto state = new_state({2});
  std::vector<std::uint64_t> generators{2};
  // site 3 hit, site 4 hit, site 5 free
  ScriptedUniforms u({0.1, 0.2, 0.9});
  const auto step = step_site(state, generators, u);
  EXPECT_EQ(state.p_current, 5u);
  EXPECT_EQ(step.gap, 3u);
  EXPECT_EQ(step.sites_scanned, 3u);
  EXPECT_EQ(generators.back(), 5u);
  EXPECT_EQ(u.consumed(), 3u);
}

TEST(StepSite, StopsDrawingAtFirstHit) {
  auto state = new_state({2, 3});
  std::vector<std::uint64_t> generators{2, 3};
  // site 4: first generator hits (one draw); site 5: both miss (two draws)
  ScriptedUniforms u({0.4, 0.7, 0.5});
  const auto step = step_site(state, generators, u);
  EXPECT_EQ(state.p_current, 5u);
  EXPECT_EQ(step.sites_scanned, 2u);
  EXPECT_EQ(u.consumed(), 3u);
}

TEST(StepSite, SurvivalProbability) {
  const std::vector<std::uint64_t> generators{2, 3, 5};
  EXPECT_NEAR(site_survival_probability(generators), 4.0 / 15.0, 1e-15);
  EXPECT_NEAR(site_survival_probability(generators), new_state({2, 3, 5}).lambda(), 1e-15);
}

TEST(StepSite, GapDistributionIsGeometricHalf) {
  Stream stream(5);
  std::vector<std::uint64_t> counts(14, 0);
  for (int i = 0; i < 100'000; ++i) {
    auto state = new_state({2});
    std::vector<std::uint64_t> generators{2};
    const auto gap = step_site(state, generators, stream).gap;
    ++counts[std::min<std::uint64_t>(gap, 14) - 1];
  }
  EXPECT_LT(chi_square(counts, geometric_pmf(0.5, 14)), chi_square_critical_99(13));
}

TEST(CheckpointGrid, DefaultGridHitsDecades) {
  CheckpointGrid grid(kDefaultCheckpointRatio);
  std::vector<std::uint64_t> hits;
  for (std::uint64_t n = 1; n <= 1'000'000; ++n) {
    if (grid.hit(n)) hits.push_back(n);
  }
  for (const std::uint64_t decade : {1ull, 10ull, 100ull, 1000ull, 10000ull, 100000ull, 1000000ull}) {
    EXPECT_TRUE(std::binary_search(hits.begin(), hits.end(), decade)) << decade;
  }
  EXPECT_EQ(hits[0], 1u);
  EXPECT_EQ(hits[1], 2u);
  EXPECT_TRUE(std::adjacent_find(hits.begin(), hits.end()) == hits.end());
}

TEST(Simulate, DeterministicForSeed) {
  RunConfig config;
  config.seed = 42;
  config.horizon = 20'000;
  EXPECT_EQ(simulate(config), simulate(config));
  RunConfig other = config;
  other.seed = 43;
  EXPECT_NE(simulate(config).rows.back(), simulate(other).rows.back());
}

TEST(Simulate, SingleRowForUnitHorizon) {
  RunConfig config;
  config.horizon = 1;
  const auto trace = simulate(config);
  ASSERT_EQ(trace.rows.size(), 1u);
  EXPECT_EQ(trace.rows[0].n, 1u);
  EXPECT_EQ(trace.rows[0].p, 2u);
  EXPECT_EQ(trace.rows[0].gap, 0u);
}

TEST(Simulate, StopsByValue) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RunConfig config;
    config.seed = seed;
    config.horizon_kind = HorizonKind::by_value;
    config.horizon = 10;
    config.checkpoint_ratio = 1.0001;  // every index is a checkpoint
    const auto trace = simulate(config);
    ASSERT_GE(trace.rows.size(), 2u);
    EXPECT_GE(trace.rows.back().p, 10u);
    EXPECT_LT(trace.rows[trace.rows.size() - 2].p, 10u);
  }
}

TEST(Simulate, PrefixRowsAreReplayed) {
  RunConfig config;
  config.prefix = {2, 3, 5};
  config.horizon = 3;
  const auto trace = simulate(config);
  ASSERT_EQ(trace.rows.size(), 3u);
  EXPECT_EQ(trace.rows[2].p, 5u);
  EXPECT_EQ(trace.rows[2].gap, 2u);
  EXPECT_NEAR(trace.rows[2].lambda, 4.0 / 15.0, 1e-15);
  EXPECT_EQ(trace.prefix, config.prefix);
}

TEST(Simulate, ConfigValidation) {
  RunConfig config;
  config.checkpoint_ratio = 1.0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = {};
  config.horizon = 0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = {};
  config.prefix = {2, 3, 5};
  config.horizon = 2;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = {};
  config.mode = Mode::site;
  config.horizon = 100'000;
  EXPECT_THROW(config.validate(), CapacityError);
}

TEST(Simulate, SiteModeByValueHitsCap) {
  RunConfig config;
  config.mode = Mode::site;
  config.site_mode_cap = 50;
  config.horizon_kind = HorizonKind::by_value;
  config.horizon = 1'000'000;
  EXPECT_THROW(simulate(config), CapacityError);
}

TEST(Simulate, SiteModeProducesValidTrace) {
  RunConfig config;
  config.seed = 8;
  config.mode = Mode::site;
  config.horizon = 2'000;
  const auto trace = simulate(config);
  EXPECT_EQ(trace.rows.back().n, 2'000u);
  for (std::size_t i = 1; i < trace.rows.size(); ++i) EXPECT_GT(trace.rows[i].p, trace.rows[i - 1].p);
}

TEST(Advance, ContinuesFromState) {
  auto state = new_state({2, 3, 5});
  RunConfig config;
  config.horizon = 500;
  Stream stream(1);
  const auto trace = advance(state, config, stream);
  EXPECT_EQ(state.n, 500u);
  EXPECT_EQ(trace.rows.back().n, 500u);
  EXPECT_EQ(trace.rows.back().p, state.p_current);
  EXPECT_GT(trace.rows.front().n, 3u);
}

TEST(Simulate, GeneralizedExponent) {
  RunConfig config;
  config.seed = 4;
  config.alpha = 2.0;
  config.horizon = 1000;
  const auto trace = simulate(config);
  // with alpha = 2 the survival product converges, so lambda stays bounded away from 0
  EXPECT_GT(trace.rows.back().lambda, 0.5 * 0.6);
  for (std::size_t i = 1; i < trace.rows.size(); ++i) EXPECT_LT(trace.rows[i].lambda, trace.rows[i - 1].lambda);
}

// Strict monotonicity and parameter range across seeds.
TEST(Simulate, MonotoneAndInRange) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    RunConfig config;
    config.seed = seed;
    config.horizon = 5'000;
    config.checkpoint_ratio = 1.0001;
    const auto trace = simulate(config);
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
      const auto& row = trace.rows[i];
      EXPECT_GT(row.lambda, 0.0);
      EXPECT_LE(row.lambda, 0.5);
      EXPECT_NEAR(row.lambda, std::exp(row.log_lambda), 1e-15);
      if (i > 0) {
        EXPECT_GT(row.p, trace.rows[i - 1].p);
        EXPECT_LT(row.lambda, trace.rows[i - 1].lambda);
        EXPECT_NEAR(row.s - trace.rows[i - 1].s, 1.0 / row.lambda, 1e-9 * row.s);
        EXPECT_EQ(row.p - trace.rows[i - 1].p, row.gap);
      }
    }
  }
}

// Finite-horizon surrogates for lambda_n -> 0 and P_n / n -> infinity.
TEST(Simulate, LambdaTrendAndSuperLinearGrowth) {
  RunConfig config;
  config.seed = 2718;
  config.horizon = 1'000'000;
  const auto trace = simulate(config);
  const auto& last = trace.rows.back();
  for (std::size_t i = 0; i + 1 < trace.rows.size(); ++i) EXPECT_LT(last.lambda, trace.rows[i].lambda);
  EXPECT_LT(last.lambda, 0.1);
  for (const double c : {1.0, 2.0, 4.0}) {
    const auto margin = linear_growth_margin(trace, c);
    ASSERT_TRUE(margin.has_value()) << "C=" << c;
    EXPECT_LT(*margin, last.n);
  }
  EXPECT_EQ(linear_growth_margin(trace, 1.0), std::optional<std::uint64_t>(1));
}

}  // namespace
}  // namespace renewal
