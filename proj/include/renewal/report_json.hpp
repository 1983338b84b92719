#pragma once

// JSON forms of the diagnostics report, the domination result and the
// path-statistics sidecar.

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "renewal/diagnostics.hpp"

namespace renewal {

inline nlohmann::json series_json(const Series& series) {
  auto out = nlohmann::json::array();
  for (const auto& [x, y] : series) out.push_back({x, y});
  return out;
}

inline Series series_from_json(const nlohmann::json& j) {
  Series series;
  for (const auto& point : j) series.push_back({point.at(0).get<double>(), point.at(1).get<double>()});
  return series;
}

inline nlohmann::json domination_json(const DominationResult& result) {
  return {{"max_violation", result.max_violation},
          {"process_samples", result.process_samples},
          {"iid_samples", result.iid_samples},
          {"rejected_attempts", result.rejected_attempts},
          {"process_sorted", result.cdf_process.sorted_samples()},
          {"iid_sorted", result.cdf_iid.sorted_samples()}};
}

/// Every series field is always present; `domination` is an empty array
/// unless the report carries an experiment.
inline nlohmann::json report_json(const DiagnosticsReport& report) {
  nlohmann::json j;
  j["sv_ratios"] = nlohmann::json::array();
  for (const auto& sv : report.sv_ratios) j["sv_ratios"].push_back({{"t", sv.t}, {"series", series_json(sv.series)}});
  j["karamata"] = series_json(report.karamata);
  j["karamata_sq"] = series_json(report.karamata_sq);
  j["karamata_sq_source"] = report.karamata_sq_source;
  j["concentration_alpha"] = report.concentration_alpha;
  j["concentration"] = nlohmann::json::array();
  for (const auto& c : report.concentration) {
    j["concentration"].push_back({{"n", c.n}, {"raw", c.raw}, {"envelope", c.envelope}, {"normalized", c.normalized}});
  }
  j["gaps"] = {{"series", series_json(report.gaps.series)},
               {"checkpoint_max", report.gaps.checkpoint_max},
               {"min_left_n", report.gaps.min_left_n},
               {"path_max", report.gaps.path_max ? nlohmann::json(*report.gaps.path_max) : nlohmann::json(nullptr)}};
  j["upcrossings"] = nlohmann::json::array();
  for (const auto& u : report.upcrossings) {
    j["upcrossings"].push_back(
        {{"a", u.a},
         {"n_min", u.n_min},
         {"checkpoint_count", u.checkpoint_count},
         {"path_count", u.path_count ? nlohmann::json(*u.path_count) : nlohmann::json(nullptr)}});
  }
  j["poly_decay_alpha"] = report.poly_decay_alpha;
  j["poly_decay"] = series_json(report.poly_decay);
  j["domination"] = report.domination ? nlohmann::json::array({domination_json(*report.domination)})
                                      : nlohmann::json::array();
  return j;
}

inline nlohmann::json path_summary_json(const PathSummary& summary) {
  return {{"gap_min_n", summary.options.gap_min_n},
          {"layer_a", summary.options.layer_a},
          {"layer_n_min", summary.options.layer_n_min},
          {"square_sums", series_json(summary.square_sums)},
          {"max_gap_ratio", summary.max_gap_ratio},
          {"max_gap_n", summary.max_gap_n},
          {"upcrossings", summary.upcrossings}};
}

inline PathSummary path_summary_from_json(const nlohmann::json& j) {
  PathSummary summary;
  summary.options.gap_min_n = j.at("gap_min_n").get<std::uint64_t>();
  summary.options.layer_a = j.at("layer_a").get<double>();
  summary.options.layer_n_min = j.at("layer_n_min").get<std::uint64_t>();
  summary.square_sums = series_from_json(j.at("square_sums"));
  summary.max_gap_ratio = j.at("max_gap_ratio").get<double>();
  summary.max_gap_n = j.at("max_gap_n").get<std::uint64_t>();
  summary.upcrossings = j.at("upcrossings").get<std::uint64_t>();
  return summary;
}

}  // namespace renewal
