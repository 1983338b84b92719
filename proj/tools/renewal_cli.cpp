// Command-line front end: simulate | ensemble | diagnose | primes | li |
// conjecture | domination.
//
// Exit codes: 0 ok, 1 usage or parse error, 2 numeric failure, 3 assertion.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "renewal/renewal.hpp"
#include "renewal/report_json.hpp"

namespace {

using namespace renewal;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitAssertion = 3;

/// JSON config files: top-level objects name subcommands, leaves are option values.
class JsonConfig : public CLI::Config {
public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config file: ") + e.what());
    }
    return flatten(j, "", {});
  }

private:
  static std::string scalar(const nlohmann::json& value, const std::string& name) {
    if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number()) return value.dump();
    throw CLI::ConversionError("config file: unsupported value for " + name);
  }

  std::vector<CLI::ConfigItem> flatten(const nlohmann::json& j, const std::string& name,
                                       std::vector<std::string> parents) const {
    std::vector<CLI::ConfigItem> items;
    if (j.is_object()) {
      if (!name.empty()) parents.push_back(name);
      for (auto it = j.begin(); it != j.end(); ++it) {
        auto sub = flatten(*it, it.key(), parents);
        items.insert(items.end(), sub.begin(), sub.end());
      }
      return items;
    }
    if (name.empty()) throw CLI::ConversionError("config file must contain a JSON object");
    CLI::ConfigItem item;
    item.name = name;
    item.parents = parents;
    if (j.is_array()) {
      for (const auto& element : j) item.inputs.push_back(scalar(element, name));
    } else {
      item.inputs.push_back(scalar(j, name));
    }
    items.push_back(std::move(item));
    return items;
  }
};

struct RunFlags {
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> steps;
  std::optional<std::uint64_t> until_value;
  std::string mode = "geometric";
  double alpha = 1.0;
  std::vector<std::uint64_t> prefix{2};
  double checkpoint_ratio = kDefaultCheckpointRatio;

  void attach(CLI::App& app, bool seed_required) {
    auto* seed_opt = app.add_option("--seed", seed, "Seed (the only source of randomness)");
    if (seed_required) seed_opt->required();
    auto* steps_opt = app.add_option("--steps", steps, "Horizon by index: stop at n = N");
    auto* value_opt = app.add_option("--until-value", until_value, "Horizon by value: stop once P >= V");
    steps_opt->excludes(value_opt);
    app.add_option("--mode", mode, "Construction")->check(CLI::IsMember({"geometric", "site"}));
    app.add_option("--alpha", alpha, "Exponent of the generalized process")->check(CLI::PositiveNumber);
    app.add_option("--prefix", prefix, "Forced initial generators, starting at 2")->delimiter(',');
    app.add_option("--checkpoint-ratio", checkpoint_ratio, "Geometric checkpoint grid ratio (> 1)");
  }

  RunConfig to_config() const {
    if (steps.has_value() == until_value.has_value()) {
      throw std::invalid_argument("exactly one of --steps or --until-value is required");
    }
    RunConfig config;
    config.seed = seed;
    config.horizon_kind = steps ? HorizonKind::by_index : HorizonKind::by_value;
    config.horizon = steps ? *steps : *until_value;
    config.mode = mode == "site" ? Mode::site : Mode::geometric;
    config.alpha = alpha;
    config.checkpoint_ratio = checkpoint_ratio;
    config.prefix = prefix;
    config.validate();
    return config;
  }
};

struct PathFlags {
  PathStatisticsOptions options;

  void attach(CLI::App& app) {
    app.add_option("--gap-min-n", options.gap_min_n, "Smallest left index scored by the gap ratio");
    app.add_option("--layer-a", options.layer_a, "Layer spacing a for upcrossings")->check(CLI::PositiveNumber);
    app.add_option("--layer-n-min", options.layer_n_min, "Smallest n observed by the upcrossing counter");
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file " + path);
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file " + path);
  return in;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

struct SimulateCommand {
  RunFlags run;
  PathFlags path;
  std::string out;
  std::string stats;

  void attach(CLI::App& app) {
    run.attach(app, true);
    path.attach(app);
    app.add_option("--out", out, "Trace CSV path")->required();
    app.add_option("--stats", stats, "Optional JSON sidecar with step-level path statistics");
  }

  int execute() const {
    const RunConfig config = run.to_config();
    PathStatistics sink(path.options);
    const Trace trace = simulate(config, sink);
    {
      auto file = open_output(out);
      write_trace_csv(file, trace);
    }
    if (!stats.empty()) write_json(stats, path_summary_json(sink.summary()));
    const auto& last = trace.rows.back();
    std::cout << "n=" << last.n << " P=" << last.p << " lambda=" << format_real(last.lambda) << '\n';
    return kExitOk;
  }
};

struct DiagnoseCommand {
  std::string trace_path;
  std::string stats;
  std::string report;
  DiagnosticsOptions options;
  bool enforce = false;

  void attach(CLI::App& app) {
    app.add_option("--trace", trace_path, "Trace CSV")->required();
    app.add_option("--stats", stats, "Path-statistics sidecar written by simulate --stats");
    app.add_option("--report", report, "Output JSON report")->required();
    app.add_option("--alpha-exp", options.alpha_exp, "Envelope exponent in (1, 2)");
    app.add_option("--poly-alpha", options.poly_alpha, "Exponent for the polynomial-decay series");
    app.add_option("--layer-a", options.layer_a, "Layer spacing a for upcrossings");
    app.add_option("--layer-n-min", options.layer_n_min, "Smallest n for upcrossings");
    app.add_option("--gap-min-n", options.gap_min_n, "Smallest left index for the checkpoint gap maximum");
    app.add_option("--sv-t", options.sv_t, "Scale factors t for lambda(xt)/lambda(x)")->delimiter(',');
    app.add_flag("--assert", enforce, "Exit 3 if any acceptance threshold is violated");
  }

  int execute() const {
    Trace trace;
    {
      auto in = open_input(trace_path);
      trace = read_trace_csv(in);
    }
    std::optional<PathSummary> path;
    if (!stats.empty()) {
      auto in = open_input(stats);
      path = path_summary_from_json(nlohmann::json::parse(in));
    }
    const auto result = diagnose(trace, options, path ? &*path : nullptr);
    write_json(report, report_json(result));
    if (enforce) {
      const auto violations = threshold_violations(result);
      for (const auto& v : violations) std::cerr << "threshold violated: " << v << '\n';
      if (!violations.empty()) return kExitAssertion;
    }
    return kExitOk;
  }
};

struct EnsembleFlags {
  RunFlags run;
  PathFlags path;
  std::uint64_t replicas = 1;
  unsigned workers = 0;

  void attach(CLI::App& app) {
    run.attach(app, true);
    path.attach(app);
    app.add_option("--replicas", replicas, "Number of replicas")->check(CLI::PositiveNumber);
    app.add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
  }

  EnsembleConfig to_config() const {
    EnsembleConfig config;
    config.run = run.to_config();
    config.master_seed = run.seed;
    config.replicas = replicas;
    config.workers = workers;
    config.path_options = path.options;
    return config;
  }
};

struct EnsembleCommand {
  EnsembleFlags flags;
  std::string out_dir;
  bool keep_traces = false;
  std::vector<std::uint64_t> zcdf_at;

  void attach(CLI::App& app) {
    flags.attach(app);
    app.add_option("--out-dir", out_dir, "Output directory")->required();
    app.add_flag("--keep-traces", keep_traces, "Also write trace_<i>.csv per replica");
    app.add_option("--zcdf-at", zcdf_at, "Checkpoints for zcdf_<n>.csv (default: two largest)")->delimiter(',');
  }

  int execute() const {
    const auto result = run_ensemble(flags.to_config());
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    {
      auto out = open_output((dir / "summary.csv").string());
      write_summary_csv(out, result);
    }
    std::vector<std::uint64_t> targets = zcdf_at;
    if (targets.empty()) {
      const auto& grid = result.per_checkpoint;
      for (std::size_t i = grid.size() >= 2 ? grid.size() - 2 : 0; i < grid.size(); ++i) targets.push_back(grid[i].n);
    }
    for (const auto n : targets) {
      auto out = open_output((dir / ("zcdf_" + std::to_string(n) + ".csv")).string());
      write_zcdf_csv(out, EmpiricalCDF(result.at(n).z));
    }
    if (keep_traces) {
      for (std::size_t i = 0; i < result.traces.size(); ++i) {
        auto out = open_output((dir / ("trace_" + std::to_string(i) + ".csv")).string());
        write_trace_csv(out, result.traces[i]);
      }
    }
    std::cout << "replicas=" << flags.replicas << " checkpoints=" << result.per_checkpoint.size() << '\n';
    return kExitOk;
  }
};

struct ConjectureCommand {
  EnsembleFlags flags;
  std::optional<std::uint64_t> at;
  std::string out;

  void attach(CLI::App& app) {
    flags.attach(app);
    app.add_option("--at", at, "Checkpoint n for the Z law (default: largest)");
    app.add_option("--out", out, "Output z,F CSV")->required();
  }

  int execute() const {
    const auto result = run_ensemble(flags.to_config());
    if (result.per_checkpoint.empty()) throw std::invalid_argument("horizon too short: no checkpoint with n >= 3");
    const std::uint64_t n = at ? *at : result.per_checkpoint.back().n;
    const auto report = conjecture_cdf(result, n);
    {
      auto file = open_output(out);
      write_zcdf_csv(file, report.cdf);
    }
    std::cout << "n=" << n << " samples=" << report.cdf.size()
              << " mean_Z=" << format_real(mean(result.at(n).z));
    if (report.stability_ks) {
      std::cout << " ks(" << report.stability_n_lo << "," << report.stability_n_hi
                << ")=" << format_real(*report.stability_ks);
    }
    std::cout << '\n';
    return kExitOk;
  }
};

struct PrimesCommand {
  std::optional<std::uint64_t> max;
  bool check_dusart = false;
  std::string trace_path;
  std::string out;

  void attach(CLI::App& app) {
    app.add_option("--max", max, "Sieve limit");
    app.add_flag("--check-dusart", check_dusart, "Check the two-sided n-th prime bounds for 7 <= n <= pi(max)");
    app.add_option("--trace", trace_path, "Trace CSV to compare against p_n");
    app.add_option("--out", out, "Comparison CSV n,P,p_n,ratio (default stdout)");
  }

  int execute() const {
    std::optional<Trace> trace;
    if (!trace_path.empty()) {
      auto in = open_input(trace_path);
      trace = read_trace_csv(in);
    }
    std::uint64_t limit = 100;
    if (max) {
      limit = *max;
    } else if (trace) {
      limit = sieve_limit_for(trace->rows.back().n);
    }
    const PrimeTable table(limit);
    if (check_dusart) {
      const auto count = table.size();
      const auto violations = count >= 7 ? dusart_rosser_violations(table, 7, count) : std::vector<std::uint64_t>{};
      std::cout << violations.size() << " violations";
      if (count >= 7) std::cout << " (7 <= n <= " << count << ")";
      std::cout << '\n';
      for (const auto n : violations) std::cout << "violation at n=" << n << '\n';
    }
    if (trace) {
      const auto series = compare_to_primes(*trace, table);
      std::ofstream file;
      if (!out.empty()) file = open_output(out);
      std::ostream& sink = out.empty() ? std::cout : file;
      sink << "n,P,p_n,ratio\n";
      for (const auto& row : series) {
        sink << row.n << ',' << row.p_generator << ',' << row.p_prime << ',' << format_real(row.ratio) << '\n';
      }
    }
    if (!check_dusart && !trace) std::cout << "pi(" << limit << ")=" << table.size() << '\n';
    return kExitOk;
  }
};

struct LiCommand {
  std::vector<double> eval;
  std::vector<double> inv;
  bool soldner = false;

  void attach(CLI::App& app) {
    app.add_option("--eval", eval, "Print li(x)")->delimiter(',');
    app.add_option("--inv", inv, "Print li^-1(y) on (1, inf)")->delimiter(',');
    app.add_flag("--soldner", soldner, "Print the Ramanujan-Soldner constant");
  }

  int execute() const {
    if (eval.empty() && inv.empty() && !soldner) throw std::invalid_argument("li: nothing requested");
    for (const double x : eval) std::cout << format_real(special::li(x)) << '\n';
    for (const double y : inv) std::cout << format_real(special::li_inv(y)) << '\n';
    if (soldner) std::cout << format_real(special::soldner()) << '\n';
    return kExitOk;
  }
};

struct DominationCommand {
  DominationConfig config;
  std::string out;
  bool enforce = false;

  void attach(CLI::App& app) {
    app.add_option("--seed", config.seed, "Seed")->required();
    app.add_option("--prefix-len", config.prefix_len, "Conditioning index m");
    app.add_option("--p", config.p, "Threshold p for lambda_m <= p");
    app.add_option("--horizon", config.horizon, "Number of summed gaps");
    app.add_option("--replicas", config.replicas, "Samples per side");
    app.add_option("--max-attempts", config.max_attempts, "Rejection-sampling attempt cap per replica");
    app.add_option("--workers", config.workers, "Worker threads (0 = hardware concurrency)");
    app.add_option("--out", out, "Output JSON");
    app.add_flag("--assert", enforce, "Exit 3 if max_violation exceeds 1.63/sqrt(R)");
  }

  int execute() const {
    const auto result = domination_experiment(config);
    if (!out.empty()) write_json(out, domination_json(result));
    const double band = 1.63 / std::sqrt(static_cast<double>(config.replicas));
    std::cout << "max_violation=" << format_real(result.max_violation) << " band=" << format_real(band) << '\n';
    if (enforce && result.max_violation > band) return kExitAssertion;
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renewal covering of the natural numbers: simulation and diagnostics"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config; explicit flags take precedence");
  app.require_subcommand(1);

  SimulateCommand simulate_cmd;
  EnsembleCommand ensemble_cmd;
  DiagnoseCommand diagnose_cmd;
  PrimesCommand primes_cmd;
  LiCommand li_cmd;
  ConjectureCommand conjecture_cmd;
  DominationCommand domination_cmd;

  auto* simulate_app = app.add_subcommand("simulate", "Simulate one path and write its trace");
  simulate_cmd.attach(*simulate_app);
  auto* ensemble_app = app.add_subcommand("ensemble", "Run independent replicas");
  ensemble_cmd.attach(*ensemble_app);
  auto* diagnose_app = app.add_subcommand("diagnose", "Compute the diagnostics report of a trace");
  diagnose_cmd.attach(*diagnose_app);
  auto* primes_app = app.add_subcommand("primes", "Sieve, n-th prime bounds and trace comparison");
  primes_cmd.attach(*primes_app);
  auto* li_app = app.add_subcommand("li", "Logarithmic integral and its inverse");
  li_cmd.attach(*li_app);
  auto* conjecture_app = app.add_subcommand("conjecture", "Empirical law of (P_n - n ln n - n ln ln n)/n");
  conjecture_cmd.attach(*conjecture_app);
  auto* domination_app = app.add_subcommand("domination", "Stochastic domination experiment");
  domination_cmd.attach(*domination_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate_app) return simulate_cmd.execute();
    if (*ensemble_app) return ensemble_cmd.execute();
    if (*diagnose_app) return diagnose_cmd.execute();
    if (*primes_app) return primes_cmd.execute();
    if (*li_app) return li_cmd.execute();
    if (*conjecture_app) return conjecture_cmd.execute();
    if (*domination_app) return domination_cmd.execute();
  } catch (const ConditioningUnreachable& e) {
    std::cerr << "conditioning unreachable: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
