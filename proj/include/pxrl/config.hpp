#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pxrl/agents.hpp"
#include "pxrl/errors.hpp"
#include "pxrl/exploration.hpp"

namespace pxrl {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream stream(s);
  std::string item;
  while (std::getline(stream, item, sep)) parts.push_back(trim(item));
  return parts;
}

// Flat key-value store behind the experiment config file format:
// one `key = value` per line, '#' comments, dotted keys namespaced as
// env.* / agent.* / explore.* / run.*. Unknown keys are rejected so typos
// fail before any run starts.
class Config {
 public:
  static Config from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    Config cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(line_no) + ": expected `key = value`");
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
  }

  static Config from_pairs(const std::vector<std::string>& pairs) {
    Config cfg;
    for (const auto& pair : pairs) {
      const auto eq = pair.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key=value, got: " + pair);
      cfg.set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) {
    if (key.empty()) throw ConfigError("empty config key");
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required config key: " + key);
    return it->second;
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const std::int64_t v = std::stoll(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + " is not an integer: " + it->second);
    }
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + " is not a number: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config key " + key + " is not a boolean: " + it->second);
  }

  std::vector<std::int64_t> get_int_list(const std::string& key,
                                         const std::vector<std::int64_t>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::int64_t> out;
    for (const auto& part : split(it->second, ',')) {
      if (part.empty()) continue;
      try {
        out.push_back(std::stoll(part));
      } catch (const std::exception&) {
        throw ConfigError("config key " + key + " has a non-integer entry: " + part);
      }
    }
    return out;
  }

  // overlay: other's keys win
  void merge(const Config& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Every key the experiment config understands.
inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "env.id",
      "run.name", "run.total_steps", "run.seeds", "run.eval_interval", "run.out",
      "agent.kind", "agent.hidden", "agent.gamma", "agent.horizon", "agent.step_size",
      "agent.n_actors", "agent.value_coeff", "agent.entropy_coeff", "agent.anneal",
      "agent.lambda", "agent.epochs", "agent.minibatches", "agent.clip",
      "explore.kind", "explore.probability", "explore.beta", "explore.bonus_max",
      "explore.schedule", "explore.eta_max", "explore.apply_probability", "explore.sigma",
      "explore.decay_c", "explore.encoder", "explore.hidden", "explore.step_size",
      "explore.count_paper_denominator",
  };
  return keys;
}

struct ExperimentConfig {
  std::string env_id;
  std::string name;
  AgentSettings agent;
  ExplorationConfig explore;
  std::int64_t total_steps = 200000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::int64_t eval_interval = 0;
  std::string out_dir = "runs/out";

  void validate() const {
    if (env_id.empty()) throw ConfigError("env.id is required");
    if (seeds.empty()) throw ConfigError("run.seeds must not be empty");
    std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
    if (distinct.size() != seeds.size()) throw ConfigError("run.seeds must be distinct");
    if (total_steps < agent.horizon())
      throw ConfigError("run.total_steps must be at least one horizon (" +
                        std::to_string(agent.horizon()) + ")");
    agent.validate();
    explore.validate();
  }
};

inline ExperimentConfig experiment_from_config(const Config& cfg) {
  for (const auto& [key, value] : cfg.values()) {
    if (!known_config_keys().count(key)) throw ConfigError("unknown config key: " + key);
  }

  ExperimentConfig exp;
  exp.env_id = cfg.require_string("env.id");
  exp.total_steps = cfg.get_int("run.total_steps", exp.total_steps);
  exp.eval_interval = cfg.get_int("run.eval_interval", exp.eval_interval);
  exp.out_dir = cfg.get_string("run.out", exp.out_dir);
  {
    std::vector<std::int64_t> fallback(exp.seeds.begin(), exp.seeds.end());
    const auto raw = cfg.get_int_list("run.seeds", fallback);
    exp.seeds.assign(raw.begin(), raw.end());
  }

  exp.agent.kind = agent_kind_from_string(cfg.get_string("agent.kind", "ppo"));
  {
    const std::string fallback = exp.agent.kind == AgentKind::kA2c ? "128,128" : "64,64";
    exp.agent.hidden.clear();
    for (const auto& part : split(cfg.get_string("agent.hidden", fallback), ',')) {
      if (part.empty()) continue;
      exp.agent.hidden.push_back(static_cast<int>(std::stoll(part)));
    }
  }
  auto& ppo = exp.agent.ppo;
  auto& a2c = exp.agent.a2c;
  if (exp.agent.kind == AgentKind::kPpo) {
    ppo.gamma = cfg.get_double("agent.gamma", ppo.gamma);
    ppo.horizon = static_cast<int>(cfg.get_int("agent.horizon", ppo.horizon));
    ppo.step_size = cfg.get_double("agent.step_size", ppo.step_size);
    ppo.n_actors = static_cast<int>(cfg.get_int("agent.n_actors", ppo.n_actors));
    ppo.value_coeff = cfg.get_double("agent.value_coeff", ppo.value_coeff);
    ppo.entropy_coeff = cfg.get_double("agent.entropy_coeff", ppo.entropy_coeff);
    ppo.anneal = cfg.get_bool("agent.anneal", ppo.anneal);
    ppo.lambda = cfg.get_double("agent.lambda", ppo.lambda);
    ppo.epochs = static_cast<int>(cfg.get_int("agent.epochs", ppo.epochs));
    ppo.minibatches = static_cast<int>(cfg.get_int("agent.minibatches", ppo.minibatches));
    ppo.clip = cfg.get_double("agent.clip", ppo.clip);
  } else {
    a2c.gamma = cfg.get_double("agent.gamma", a2c.gamma);
    a2c.horizon = static_cast<int>(cfg.get_int("agent.horizon", a2c.horizon));
    a2c.step_size = cfg.get_double("agent.step_size", a2c.step_size);
    a2c.n_actors = static_cast<int>(cfg.get_int("agent.n_actors", a2c.n_actors));
    a2c.value_coeff = cfg.get_double("agent.value_coeff", a2c.value_coeff);
    a2c.entropy_coeff = cfg.get_double("agent.entropy_coeff", a2c.entropy_coeff);
    a2c.anneal = cfg.get_bool("agent.anneal", a2c.anneal);
  }

  exp.explore.kind = explore_kind_from_string(cfg.get_string("explore.kind", "none"));
  exp.explore.reward.probability = cfg.get_double("explore.probability", exp.explore.reward.probability);
  exp.explore.reward.beta = cfg.get_double("explore.beta", exp.explore.reward.beta);
  exp.explore.reward.bonus_max = cfg.get_double("explore.bonus_max", exp.explore.reward.bonus_max);
  {
    const std::string schedule = cfg.get_string("explore.schedule", "constant");
    if (schedule == "constant") {
      exp.explore.reward.schedule = BetaSchedule::kConstant;
    } else if (schedule == "linear-decay") {
      exp.explore.reward.schedule = BetaSchedule::kLinearDecayToZero;
    } else {
      throw ConfigError("explore.schedule must be constant or linear-decay, got " + schedule);
    }
  }
  exp.explore.shape.eta_max = cfg.get_double("explore.eta_max", exp.explore.shape.eta_max);
  exp.explore.shape.apply_probability =
      cfg.get_double("explore.apply_probability", exp.explore.shape.apply_probability);
  exp.explore.sigma = cfg.get_double("explore.sigma", exp.explore.sigma);
  exp.explore.novelty.decay_c = cfg.get_double("explore.decay_c", exp.explore.novelty.decay_c);
  {
    const std::string encoder = cfg.get_string("explore.encoder", "identity");
    if (encoder == "identity") {
      exp.explore.novelty.encoder = StateEncoder::kIdentity;
    } else if (encoder == "random-network") {
      exp.explore.novelty.encoder = StateEncoder::kRandomNetwork;
    } else {
      throw ConfigError("explore.encoder must be identity or random-network, got " + encoder);
    }
  }
  exp.explore.novelty.hidden_size =
      static_cast<int>(cfg.get_int("explore.hidden", exp.explore.novelty.hidden_size));
  exp.explore.novelty.step_size = cfg.get_double("explore.step_size", exp.explore.novelty.step_size);
  exp.explore.count_paper_denominator =
      cfg.get_bool("explore.count_paper_denominator", exp.explore.count_paper_denominator);

  exp.name = cfg.get_string("run.name", to_string(exp.explore.kind));
  exp.validate();
  return exp;
}

// Canonical textual echo of a resolved experiment, used for the manifest and
// its content hash. Keys are emitted in sorted order.
inline Config experiment_to_config(const ExperimentConfig& exp) {
  Config cfg;
  cfg.set("env.id", exp.env_id);
  cfg.set("run.name", exp.name);
  cfg.set("run.total_steps", std::to_string(exp.total_steps));
  {
    std::string seeds;
    for (std::size_t i = 0; i < exp.seeds.size(); ++i)
      seeds += (i ? "," : "") + std::to_string(exp.seeds[i]);
    cfg.set("run.seeds", seeds);
  }
  cfg.set("run.eval_interval", std::to_string(exp.eval_interval));
  cfg.set("run.out", exp.out_dir);

  auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  cfg.set("agent.kind", exp.agent.kind == AgentKind::kPpo ? "ppo" : "a2c");
  {
    std::string hidden;
    for (std::size_t i = 0; i < exp.agent.hidden.size(); ++i)
      hidden += (i ? "," : "") + std::to_string(exp.agent.hidden[i]);
    cfg.set("agent.hidden", hidden);
  }
  if (exp.agent.kind == AgentKind::kPpo) {
    const auto& ppo = exp.agent.ppo;
    cfg.set("agent.gamma", fmt(ppo.gamma));
    cfg.set("agent.horizon", std::to_string(ppo.horizon));
    cfg.set("agent.step_size", fmt(ppo.step_size));
    cfg.set("agent.n_actors", std::to_string(ppo.n_actors));
    cfg.set("agent.value_coeff", fmt(ppo.value_coeff));
    cfg.set("agent.entropy_coeff", fmt(ppo.entropy_coeff));
    cfg.set("agent.anneal", ppo.anneal ? "true" : "false");
    cfg.set("agent.lambda", fmt(ppo.lambda));
    cfg.set("agent.epochs", std::to_string(ppo.epochs));
    cfg.set("agent.minibatches", std::to_string(ppo.minibatches));
    cfg.set("agent.clip", fmt(ppo.clip));
  } else {
    const auto& a2c = exp.agent.a2c;
    cfg.set("agent.gamma", fmt(a2c.gamma));
    cfg.set("agent.horizon", std::to_string(a2c.horizon));
    cfg.set("agent.step_size", fmt(a2c.step_size));
    cfg.set("agent.n_actors", std::to_string(a2c.n_actors));
    cfg.set("agent.value_coeff", fmt(a2c.value_coeff));
    cfg.set("agent.entropy_coeff", fmt(a2c.entropy_coeff));
    cfg.set("agent.anneal", a2c.anneal ? "true" : "false");
  }

  cfg.set("explore.kind", to_string(exp.explore.kind));
  cfg.set("explore.probability", fmt(exp.explore.reward.probability));
  cfg.set("explore.beta", fmt(exp.explore.reward.beta));
  cfg.set("explore.bonus_max", fmt(exp.explore.reward.bonus_max));
  cfg.set("explore.schedule",
          exp.explore.reward.schedule == BetaSchedule::kConstant ? "constant" : "linear-decay");
  cfg.set("explore.eta_max", fmt(exp.explore.shape.eta_max));
  cfg.set("explore.apply_probability", fmt(exp.explore.shape.apply_probability));
  cfg.set("explore.sigma", fmt(exp.explore.sigma));
  cfg.set("explore.decay_c", fmt(exp.explore.novelty.decay_c));
  cfg.set("explore.encoder",
          exp.explore.novelty.encoder == StateEncoder::kIdentity ? "identity" : "random-network");
  cfg.set("explore.hidden", std::to_string(exp.explore.novelty.hidden_size));
  cfg.set("explore.step_size", fmt(exp.explore.novelty.step_size));
  cfg.set("explore.count_paper_denominator",
          exp.explore.count_paper_denominator ? "true" : "false");
  return cfg;
}

inline std::string config_text(const Config& cfg) {
  std::string text;
  for (const auto& [k, v] : cfg.values()) text += k + " = " + v + "\n";
  return text;
}

// FNV-1a 64 content hash of the canonical config text.
inline std::string config_hash(const Config& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : config_text(cfg)) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pxrl
