#pragma once

// Experiment configuration and its flat `dotted.key = value` text format.
//
//   # comment
//   cell.total_rbs = 11
//   slices.arrival_prob = 0.6, 0.4, 0.3
//   slices.weight = 0.6, 0.2..0.8, 0.3     # fixed or uniform lo..hi
//   phase.attack.slots = 30000
//
// Every key is optional; missing keys keep their defaults. Unknown or
// repeated keys are rejected.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "ransim/adversary.hpp"
#include "ransim/ddqn.hpp"
#include "ransim/sla_metrics.hpp"
#include "ransim/slicing_env.hpp"

namespace ransim {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PhaseConfig {
  std::string name;
  std::uint64_t slots = 0;
  bool attacker_active = false;
  bool victim_learning = true;
};

struct SlaConfig {
  std::size_t window_len = 20;
  double lambda = 2.0;
  RewardMode reward_mode = RewardMode::kSlaAware;
};

struct HarnessConfig {
  double steady_state_fraction = 0.2;  // tail share of a phase used for steady-state rates
  std::size_t ma_span = 500;           // moving-average span for reward and violation curves
  double recovery_margin = 0.05;       // tolerated excess over the clean violation level
  std::size_t final_reward_slots = 2000;
  bool paired_baseline = true;         // also run the no-attack continuation
};

inline constexpr const char* kPhaseClean = "clean";
inline constexpr const char* kPhaseAttackerPrep = "attacker_prep";
inline constexpr const char* kPhaseAttack = "attack";
inline constexpr const char* kPhaseRecovery = "recovery";

inline AgentHyperparams default_victim_hyperparams() {
  AgentHyperparams hp;
  hp.learning_rate = 0.003;
  hp.epsilon_end = 0.01;
  return hp;
}

inline AttackerConfig default_attacker_config() {
  AttackerConfig cfg;
  cfg.hyperparams.learning_rate = 0.01;
  return cfg;
}

struct ExperimentConfig {
  CellConfig cell = default_cell();
  SlaConfig sla;
  AgentHyperparams victim = default_victim_hyperparams();
  AttackerConfig attacker = default_attacker_config();
  // Fixed order: clean, attacker_prep, attack, recovery.
  std::vector<PhaseConfig> phases = {
      {kPhaseClean, 30000, false, true},
      {kPhaseAttackerPrep, 20000, false, false},
      {kPhaseAttack, 30000, true, true},
      {kPhaseRecovery, 30000, false, true},
  };
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  HarnessConfig harness;

  const PhaseConfig& phase(std::string_view name) const {
    for (const auto& p : phases)
      if (p.name == name) return p;
    throw std::out_of_range("no phase named '" + std::string(name) + "'");
  }
  PhaseConfig& phase(std::string_view name) {
    return const_cast<PhaseConfig&>(std::as_const(*this).phase(name));
  }

  /// Names of logged phases in which the jammer transmits.
  std::vector<std::string> attacker_enabled_phases() const {
    std::vector<std::string> out;
    for (const auto& p : phases)
      if (p.attacker_active && p.name != kPhaseAttackerPrep) out.push_back(p.name);
    return out;
  }

  /// Epsilon decay defaults to half of each agent's first training phase.
  AgentHyperparams resolved_victim() const {
    AgentHyperparams hp = victim;
    if (hp.epsilon_decay_slots == 0) hp.epsilon_decay_slots = phase(kPhaseClean).slots / 2;
    return hp;
  }
  AgentHyperparams resolved_attacker() const {
    AgentHyperparams hp = attacker.hyperparams;
    if (hp.epsilon_decay_slots == 0) hp.epsilon_decay_slots = phase(kPhaseAttackerPrep).slots / 2;
    return hp;
  }

  void validate() const {
    try {
      cell.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("slices/cell: ") + e.what());
    }
    if (sla.window_len == 0) throw ConfigError("sla.window: must be positive");
    if (!(sla.lambda >= 0.0) || !std::isfinite(sla.lambda)) throw ConfigError("sla.lambda: must be >= 0");
    try {
      victim.validate("victim");
      attacker.hyperparams.validate("attacker");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (attacker.jam_budget < 0) throw ConfigError("attacker.jam_budget: must be >= 0");
    for (const auto& p : phases) {
      const bool may_be_empty = p.name == kPhaseAttack || p.name == kPhaseAttackerPrep;
      if (p.slots == 0 && !may_be_empty)
        throw ConfigError("phase." + p.name + ".slots: must be > 0");
    }
    const auto& h = harness;
    if (!(h.steady_state_fraction > 0.0 && h.steady_state_fraction <= 1.0))
      throw ConfigError("harness.steady_state_fraction: must lie in (0,1]");
    if (h.ma_span == 0) throw ConfigError("harness.ma_span: must be positive");
    if (!(h.recovery_margin >= 0.0)) throw ConfigError("harness.recovery_margin: must be >= 0");
    if (h.final_reward_slots == 0) throw ConfigError("harness.final_reward_slots: must be positive");
  }

  /// Non-fatal observations about the configuration.
  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    int min_demand = cell.slices.empty() ? 0 : cell.slices.front().rb_demand;
    for (const auto& s : cell.slices) min_demand = std::min(min_demand, s.rb_demand);
    if (attacker.jam_budget < min_demand)
      out.push_back("attacker.jam_budget is below every slice's RB demand; the jammer cannot jam anything");
    return out;
  }
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(value);
  while (std::getline(is, item, ',')) out.push_back(trim(item));
  if (out.size() == 1 && out.front().empty()) out.clear();
  return out;
}

[[noreturn]] inline void bad(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

inline double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad(key, "expected a number, got '" + text + "'");
  return v;
}

template <typename Int>
inline Int parse_int(const std::string& key, const std::string& text) {
  Int v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) bad(key, "expected an integer, got '" + text + "'");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "on" || text == "1") return true;
  if (text == "false" || text == "off" || text == "0") return false;
  bad(key, "expected true/false, got '" + text + "'");
}

inline WeightLaw parse_weight(const std::string& key, const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) return WeightLaw::fixed(parse_double(key, text));
  return WeightLaw::uniform(parse_double(key, trim(text.substr(0, dots))),
                            parse_double(key, trim(text.substr(dots + 2))));
}

inline std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T, typename Fn>
inline std::string join(const std::vector<T>& items, Fn&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += fmt(items[i]);
  }
  return out;
}

inline std::string fmt_weight(const WeightLaw& w) {
  return w.is_fixed() ? fmt_double(w.lo) : fmt_double(w.lo) + ".." + fmt_double(w.hi);
}

/// Binding between one agent's hyperparameters and its `<prefix>.*` keys.
inline void agent_keys(const std::string& prefix, AgentHyperparams& hp,
                       std::map<std::string, std::function<void(const std::string&)>>& setters,
                       std::vector<std::pair<std::string, std::function<std::string()>>>& getters) {
  auto num = [&](const std::string& name, double& field) {
    const std::string key = prefix + "." + name;
    setters[key] = [key, f = &field](const std::string& v) { *f = parse_double(key, v); };
    getters.emplace_back(key, [f = &field] { return fmt_double(*f); });
  };
  auto u64 = [&](const std::string& name, std::uint64_t& field) {
    const std::string key = prefix + "." + name;
    setters[key] = [key, f = &field](const std::string& v) { *f = parse_int<std::uint64_t>(key, v); };
    getters.emplace_back(key, [f = &field] { return std::to_string(*f); });
  };
  auto size = [&](const std::string& name, std::size_t& field) {
    const std::string key = prefix + "." + name;
    setters[key] = [key, f = &field](const std::string& v) { *f = parse_int<std::size_t>(key, v); };
    getters.emplace_back(key, [f = &field] { return std::to_string(*f); });
  };
  num("learning_rate", hp.learning_rate);
  num("gamma", hp.gamma);
  num("epsilon_start", hp.epsilon_start);
  num("epsilon_end", hp.epsilon_end);
  u64("epsilon_decay_slots", hp.epsilon_decay_slots);
  size("batch_size", hp.batch_size);
  size("buffer_capacity", hp.buffer_capacity);
  size("learn_start", hp.learn_start);
  u64("target_sync_slots", hp.target_sync_slots);
  const std::string hidden_key = prefix + ".hidden";
  setters[hidden_key] = [hidden_key, h = &hp](const std::string& v) {
    h->hidden.clear();
    for (const auto& item : split_list(v)) h->hidden.push_back(parse_int<std::size_t>(hidden_key, item));
  };
  getters.emplace_back(hidden_key, [h = &hp] {
    return join(h->hidden, [](std::size_t h) { return std::to_string(h); });
  });
}

/// Per-slice columns kept as parallel lists while parsing.
struct SliceTable {
  std::vector<std::string> names;
  std::vector<double> arrival_prob;
  std::vector<int> rb_demand;
  std::optional<std::vector<double>> min_rate;
  double min_rate_fraction = 0.8;
  std::vector<double> min_served_ratio;
  std::vector<WeightLaw> weight;
  std::vector<double> snr_db;

  static SliceTable from(const CellConfig& cell) {
    SliceTable t;
    std::vector<double> rates;
    for (const auto& s : cell.slices) {
      t.names.push_back(s.name);
      t.arrival_prob.push_back(s.arrival_prob);
      t.rb_demand.push_back(s.rb_demand);
      rates.push_back(s.min_rate);
      t.min_served_ratio.push_back(s.min_served_ratio);
      t.weight.push_back(s.weight);
      t.snr_db.push_back(s.snr_db);
    }
    t.min_rate = rates;
    return t;
  }

  void apply(CellConfig& cell) const {
    const std::size_t K = names.size();
    auto check = [&](const char* key, std::size_t n) {
      if (n != K)
        throw ConfigError(std::string(key) + ": expected " + std::to_string(K) +
                          " entries (one per slice in slices.names), got " + std::to_string(n));
    };
    check("slices.arrival_prob", arrival_prob.size());
    check("slices.rb_demand", rb_demand.size());
    if (min_rate) check("slices.min_rate", min_rate->size());
    check("slices.min_served_ratio", min_served_ratio.size());
    check("slices.weight", weight.size());
    check("slices.snr_db", snr_db.size());
    cell.slices.clear();
    for (std::size_t k = 0; k < K; ++k) {
      SliceConfig s;
      s.name = names[k];
      s.arrival_prob = arrival_prob[k];
      s.rb_demand = rb_demand[k];
      s.min_rate = min_rate ? (*min_rate)[k] : min_rate_fraction * cell.rate_constant * rb_demand[k];
      s.min_served_ratio = min_served_ratio[k];
      s.weight = weight[k];
      s.snr_db = snr_db[k];
      cell.slices.push_back(s);
    }
  }
};

inline std::string fmt_reward_mode(RewardMode m) {
  return m == RewardMode::kSlaAware ? "sla_aware" : "sla_unaware";
}

/// Key registry over a config (and the slice table that feeds its cell).
struct Registry {
  std::map<std::string, std::function<void(const std::string&)>> setters;
  std::vector<std::pair<std::string, std::function<std::string()>>> getters;

  Registry(ExperimentConfig& cfg, SliceTable& slices) {
    auto& s = setters;
    auto& g = getters;
    s["seed"] = [&](const std::string& v) { cfg.seed = parse_int<std::uint64_t>("seed", v); };
    g.emplace_back("seed", [&] { return std::to_string(cfg.seed); });
    s["output_dir"] = [&](const std::string& v) { cfg.output_dir = v; };
    g.emplace_back("output_dir", [&] { return cfg.output_dir; });

    s["cell.total_rbs"] = [&](const std::string& v) { cfg.cell.total_rbs = parse_int<int>("cell.total_rbs", v); };
    g.emplace_back("cell.total_rbs", [&] { return std::to_string(cfg.cell.total_rbs); });
    s["cell.rate_constant"] = [&](const std::string& v) {
      cfg.cell.rate_constant = parse_double("cell.rate_constant", v);
    };
    g.emplace_back("cell.rate_constant", [&] { return fmt_double(cfg.cell.rate_constant); });

    s["slices.names"] = [&](const std::string& v) { slices.names = split_list(v); };
    g.emplace_back("slices.names", [&] { return join(slices.names, [](const std::string& n) { return n; }); });
    list_of_doubles("slices.arrival_prob", slices.arrival_prob);
    s["slices.rb_demand"] = [&](const std::string& v) {
      slices.rb_demand.clear();
      for (const auto& item : split_list(v)) slices.rb_demand.push_back(parse_int<int>("slices.rb_demand", item));
    };
    g.emplace_back("slices.rb_demand", [&] {
      return join(slices.rb_demand, [](int d) { return std::to_string(d); });
    });
    s["slices.min_rate"] = [&](const std::string& v) {
      std::vector<double> rates;
      for (const auto& item : split_list(v)) rates.push_back(parse_double("slices.min_rate", item));
      slices.min_rate = rates;
    };
    g.emplace_back("slices.min_rate", [&] { return join(*slices.min_rate, fmt_double); });
    s["slices.min_rate_fraction"] = [&](const std::string& v) {
      slices.min_rate_fraction = parse_double("slices.min_rate_fraction", v);
    };
    list_of_doubles("slices.min_served_ratio", slices.min_served_ratio);
    s["slices.weight"] = [&](const std::string& v) {
      slices.weight.clear();
      for (const auto& item : split_list(v)) slices.weight.push_back(parse_weight("slices.weight", item));
    };
    g.emplace_back("slices.weight", [&] { return join(slices.weight, fmt_weight); });
    list_of_doubles("slices.snr_db", slices.snr_db);

    s["sla.window"] = [&](const std::string& v) { cfg.sla.window_len = parse_int<std::size_t>("sla.window", v); };
    g.emplace_back("sla.window", [&] { return std::to_string(cfg.sla.window_len); });
    s["sla.lambda"] = [&](const std::string& v) { cfg.sla.lambda = parse_double("sla.lambda", v); };
    g.emplace_back("sla.lambda", [&] { return fmt_double(cfg.sla.lambda); });
    s["sla.reward_mode"] = [&](const std::string& v) {
      if (v == "sla_aware")
        cfg.sla.reward_mode = RewardMode::kSlaAware;
      else if (v == "sla_unaware")
        cfg.sla.reward_mode = RewardMode::kSlaUnaware;
      else
        bad("sla.reward_mode", "expected sla_aware or sla_unaware, got '" + v + "'");
    };
    g.emplace_back("sla.reward_mode", [&] { return fmt_reward_mode(cfg.sla.reward_mode); });

    agent_keys("victim", cfg.victim, setters, getters);
    s["attacker.jam_budget"] = [&](const std::string& v) {
      cfg.attacker.jam_budget = parse_int<int>("attacker.jam_budget", v);
    };
    g.emplace_back("attacker.jam_budget", [&] { return std::to_string(cfg.attacker.jam_budget); });
    agent_keys("attacker", cfg.attacker.hyperparams, setters, getters);

    for (auto& p : cfg.phases) {
      const std::string base = "phase." + p.name;
      s[base + ".slots"] = [pp = &p, base](const std::string& v) { pp->slots = parse_int<std::uint64_t>(base + ".slots", v); };
      g.emplace_back(base + ".slots", [pp = &p] { return std::to_string(pp->slots); });
      if (p.name == kPhaseAttackerPrep) continue;  // fixed semantics: victim frozen, jammer training
      s[base + ".attacker_active"] = [pp = &p, base](const std::string& v) {
        pp->attacker_active = parse_bool(base + ".attacker_active", v);
      };
      g.emplace_back(base + ".attacker_active", [pp = &p] { return std::string(pp->attacker_active ? "true" : "false"); });
      s[base + ".victim_learning"] = [pp = &p, base](const std::string& v) {
        pp->victim_learning = parse_bool(base + ".victim_learning", v);
      };
      g.emplace_back(base + ".victim_learning", [pp = &p] { return std::string(pp->victim_learning ? "true" : "false"); });
    }

    HarnessConfig* hc = &cfg.harness;
    s["harness.steady_state_fraction"] = [hc](const std::string& v) {
      hc->steady_state_fraction = parse_double("harness.steady_state_fraction", v);
    };
    g.emplace_back("harness.steady_state_fraction", [hc] { return fmt_double(hc->steady_state_fraction); });
    s["harness.ma_span"] = [hc](const std::string& v) { hc->ma_span = parse_int<std::size_t>("harness.ma_span", v); };
    g.emplace_back("harness.ma_span", [hc] { return std::to_string(hc->ma_span); });
    s["harness.recovery_margin"] = [hc](const std::string& v) {
      hc->recovery_margin = parse_double("harness.recovery_margin", v);
    };
    g.emplace_back("harness.recovery_margin", [hc] { return fmt_double(hc->recovery_margin); });
    s["harness.final_reward_slots"] = [hc](const std::string& v) {
      hc->final_reward_slots = parse_int<std::size_t>("harness.final_reward_slots", v);
    };
    g.emplace_back("harness.final_reward_slots", [hc] { return std::to_string(hc->final_reward_slots); });
    s["harness.paired_baseline"] = [hc](const std::string& v) {
      hc->paired_baseline = parse_bool("harness.paired_baseline", v);
    };
    g.emplace_back("harness.paired_baseline", [hc] { return std::string(hc->paired_baseline ? "true" : "false"); });
  }

 private:
  void list_of_doubles(const std::string& key, std::vector<double>& field) {
    setters[key] = [key, f = &field](const std::string& v) {
      f->clear();
      for (const auto& item : split_list(v)) f->push_back(parse_double(key, item));
    };
    getters.emplace_back(key, [f = &field] { return join(*f, fmt_double); });
  }
};

}  // namespace config_detail

/// Parses configuration text on top of the default experiment.
inline ExperimentConfig parse_config(std::string_view text) {
  using namespace config_detail;
  ExperimentConfig cfg;
  SliceTable slices = SliceTable::from(cfg.cell);
  slices.min_rate.reset();  // derived from min_rate_fraction unless given
  Registry reg(cfg, slices);

  std::map<std::string, std::string> seen;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    auto it = reg.setters.find(key);
    if (it == reg.setters.end()) throw ConfigError(key + ": unknown key (line " + std::to_string(lineno) + ")");
    if (!seen.emplace(key, value).second) throw ConfigError(key + ": repeated key");
    it->second(value);
  }
  slices.apply(cfg.cell);
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

/// Canonical text form; parse_config(render_config(c)) reproduces c.
inline std::string render_config(const ExperimentConfig& cfg_in) {
  using namespace config_detail;
  ExperimentConfig cfg = cfg_in;
  SliceTable slices = SliceTable::from(cfg.cell);
  Registry reg(cfg, slices);
  std::string out;
  for (const auto& [key, get] : reg.getters) out += key + " = " + get() + "\n";
  return out;
}

/// Hash of the canonical rendering, ignoring where outputs are written.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.output_dir.clear();
  return fnv1a(render_config(c));
}

}  // namespace ransim
