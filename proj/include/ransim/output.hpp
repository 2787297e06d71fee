#pragma once

// Artifact writers: trace.csv, summary.json and the figure-data CSVs.
//
// trace.csv columns, in order:
//   slot, phase, victim_action, jam_action, feasible, nack_count,
//   reward, reward_sla_aware, reward_sla_unaware,
//   then for every slice <s>: <s>_active, <s>_weight, <s>_scheduled,
//   <s>_jammed, <s>_success, <s>_rate, <s>_served_ratio, <s>_avg_rate,
//   <s>_sla_ok
// Reals are printed with six decimals; flags as 0/1.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ransim/config.hpp"
#include "ransim/experiment.hpp"

namespace ransim {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void write_trace_csv(const ExperimentConfig& cfg, const MetricsTrace& trace, std::ostream& os) {
  const auto& slices = cfg.cell.slices;
  os << "slot,phase,victim_action,jam_action,feasible,nack_count,reward,reward_sla_aware,reward_sla_unaware";
  for (const auto& s : slices)
    for (const char* col : {"active", "weight", "scheduled", "jammed", "success", "rate", "served_ratio",
                            "avg_rate", "sla_ok"})
      os << ',' << s.name << '_' << col;
  os << '\n';
  for (const auto& r : trace.rows) {
    const auto& o = r.outcome;
    os << r.slot << ',' << trace.phase_names[r.phase] << ',' << r.victim_action << ',' << r.jam_action.bits() << ','
       << (o.feasible_action ? 1 : 0) << ',' << o.nack_count << ',' << fixed6(r.reward) << ','
       << fixed6(r.reward_sla_aware) << ',' << fixed6(r.reward_sla_unaware);
    for (std::size_t k = 0; k < slices.size(); ++k) {
      os << ',' << o.activity.test(k) << ',' << fixed6(r.weights[k]) << ',' << o.scheduled.test(k) << ','
         << o.jammed.test(k) << ',' << o.success.test(k) << ',' << fixed6(o.rates[k]) << ','
         << fixed6(r.sla.served_ratio[k]) << ',' << fixed6(r.sla.avg_rate[k]) << ',' << r.sla.sla_ok.test(k);
    }
    os << '\n';
  }
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

/// summary.json schema:
///   seed, config_hash (hex string), code_version, slices[],
///   phases[]: {name, first_row, slots, mean_reward, mean_reward_sla_unaware,
///              violation_rate[], steady_violation_rate[], jam_fraction[], budget_violations}
///   clean_level[], recovery_time[] (slots or null), recovered[], final_reward,
///   attacker: {train_slots, num_actions, eval_mean_nacks, random_mean_nacks,
///              eval_jam_fraction[], victim_unchanged} or null,
///   baseline: {attack_mean_reward, final_reward} or null
inline nlohmann::json summary_json(const Summary& s) {
  using nlohmann::json;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(s.config_hash));
  json j;
  j["seed"] = s.seed;
  j["config_hash"] = hash;
  j["code_version"] = s.code_version;
  j["slices"] = s.slice_names;
  j["phases"] = json::array();
  for (const auto& p : s.phases) {
    json pj;
    pj["name"] = p.name;
    pj["first_row"] = p.first_row;
    pj["slots"] = p.rows;
    pj["mean_reward"] = p.mean_reward;
    pj["mean_reward_sla_unaware"] = p.mean_reward_sla_unaware;
    pj["violation_rate"] = json::array();
    pj["steady_violation_rate"] = json::array();
    for (std::size_t k = 0; k < p.violation_rate.size(); ++k) {
      pj["violation_rate"].push_back(optional_json(p.violation_rate[k]));
      pj["steady_violation_rate"].push_back(optional_json(p.steady_violation_rate[k]));
    }
    pj["jam_fraction"] = p.jam_fraction;
    pj["budget_violations"] = p.budget_violations;
    j["phases"].push_back(pj);
  }
  j["clean_level"] = s.clean_level;
  j["recovery_time"] = json::array();
  for (const auto& t : s.recovery_time) j["recovery_time"].push_back(t ? json(*t) : json(nullptr));
  j["recovered"] = s.recovered;
  j["final_reward"] = s.final_reward;
  if (s.attacker) {
    const auto& a = *s.attacker;
    j["attacker"] = {{"train_slots", a.train_slots},
                     {"num_actions", a.num_actions},
                     {"eval_mean_nacks", a.eval_mean_nacks},
                     {"random_mean_nacks", a.random_mean_nacks},
                     {"eval_jam_fraction", a.eval_jam_fraction},
                     {"victim_unchanged", a.victim_unchanged}};
  } else {
    j["attacker"] = nullptr;
  }
  if (s.baseline)
    j["baseline"] = {{"attack_mean_reward", s.baseline->attack_mean_reward},
                     {"final_reward", s.baseline->final_reward}};
  else
    j["baseline"] = nullptr;
  return j;
}

namespace output_detail {

inline std::ofstream open(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return os;
}

inline void close(std::ofstream& os, const std::filesystem::path& path) {
  os.close();
  if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace output_detail

/// Writes trace.csv, summary.json, fig1_violations.csv, fig2_recovery.csv and
/// fig3_reward.csv into `dir` (created if missing).
inline void emit_outputs(const ExperimentConfig& cfg, const RunResult& result, const std::filesystem::path& dir) {
  using output_detail::close;
  using output_detail::open;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto& slices = cfg.cell.slices;
  const std::size_t K = slices.size();
  const Summary& s = result.summary;

  {
    const auto path = dir / "trace.csv";
    auto os = open(path);
    write_trace_csv(cfg, result.trace, os);
    close(os, path);
  }
  {
    const auto path = dir / "summary.json";
    auto os = open(path);
    os << summary_json(s).dump(2) << '\n';
    close(os, path);
  }
  {
    // Steady-state violation rate per slice and phase.
    const auto path = dir / "fig1_violations.csv";
    auto os = open(path);
    os << "slice";
    for (const auto& p : s.phases) os << ',' << p.name;
    os << '\n';
    for (std::size_t k = 0; k < K; ++k) {
      os << slices[k].name;
      for (const auto& p : s.phases) {
        os << ',';
        if (p.steady_violation_rate[k]) os << fixed6(*p.steady_violation_rate[k]);
      }
      os << '\n';
    }
    close(os, path);
  }
  {
    // Windowed violation rate through the attack and recovery phases;
    // offset counts slots relative to the end of the attack.
    const auto path = dir / "fig2_recovery.csv";
    auto os = open(path);
    os << "slot,offset,phase";
    for (const auto& sl : slices) os << ',' << sl.name << "_violation";
    os << '\n';
    std::vector<std::vector<double>> windowed;
    for (std::size_t k = 0; k < K; ++k)
      windowed.push_back(moving_average(violation_series(result.trace, k), cfg.harness.ma_span));
    const auto attack = result.trace.rows_of(kPhaseAttack);
    const auto recovery = result.trace.rows_of(kPhaseRecovery);
    if (recovery) {
      const std::size_t first = attack ? attack->first : recovery->first;
      for (std::size_t i = first; i < recovery->second; ++i) {
        const auto offset = static_cast<long long>(i) - static_cast<long long>(recovery->first);
        os << result.trace.rows[i].slot << ',' << offset << ',' << result.trace.phase_names[result.trace.rows[i].phase];
        for (std::size_t k = 0; k < K; ++k) os << ',' << fixed6(windowed[k][i]);
        os << '\n';
      }
    }
    close(os, path);
  }
  {
    // Moving-average reward: the run itself, its SLA-unaware valuation and
    // the paired no-attack baseline.
    const auto path = dir / "fig3_reward.csv";
    auto os = open(path);
    os << "slot,phase,reward_ma,reward_sla_unaware_ma,clean_baseline_ma\n";
    const auto ma = moving_average(reward_series(result.trace), cfg.harness.ma_span);
    const auto ma_unaware = moving_average(reward_series(result.trace, true), cfg.harness.ma_span);
    std::vector<double> ma_base;
    if (result.baseline_trace) ma_base = moving_average(reward_series(*result.baseline_trace), cfg.harness.ma_span);
    for (std::size_t i = 0; i < result.trace.rows.size(); ++i) {
      os << result.trace.rows[i].slot << ',' << result.trace.phase_names[result.trace.rows[i].phase] << ','
         << fixed6(ma[i]) << ',' << fixed6(ma_unaware[i]) << ',';
      if (i < ma_base.size()) os << fixed6(ma_base[i]);
      os << '\n';
    }
    close(os, path);
  }
}

}  // namespace ransim
