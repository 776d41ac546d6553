#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "qrg/error.hpp"

namespace qrg::cli {

using nlohmann::json;

namespace {

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_parameter, std::string("config key '") + key + "': " + e.what());
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment", "base_family", "cycle_len", "degree", "n_list", "seeds", "master_seed", "eps",
      "laziness", "t_cap", "write_profiles", "spectral_floor", "R", "replicas", "steps", "tail_buffer",
      "step_method", "depth", "trials", "trace_dump", "K", "A", "B", "t", "t_scale", "runs", "lookahead",
      "level_budget", "max_root_tries", "sandwich_instances", "decomposition_instances",
      "max_decomposition_n", "tol", "extra_kernels", "out"};
  return keys;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  require(j.is_object(), Errc::invalid_parameter, "config must be a JSON object");
  for (const auto& [k, v] : j.items())
    require(known_keys().count(k) > 0, Errc::invalid_parameter, "unknown config key '" + k + "'");
  ExperimentConfig c;
  take(j, "experiment", c.experiment);
  take(j, "base_family", c.base.family);
  take(j, "cycle_len", c.base.cycle_len);
  take(j, "degree", c.base.degree);
  take(j, "n_list", c.n_list);
  take(j, "seeds", c.seeds);
  take(j, "master_seed", c.master);
  take(j, "eps", c.eps);
  take(j, "laziness", c.laziness);
  take(j, "t_cap", c.t_cap);
  take(j, "write_profiles", c.write_profiles);
  take(j, "spectral_floor", c.spectral_floor);
  take(j, "R", c.R);
  take(j, "replicas", c.replicas);
  take(j, "steps", c.steps);
  take(j, "tail_buffer", c.tail_buffer);
  take(j, "step_method", c.step_method);
  take(j, "depth", c.depth);
  take(j, "trials", c.trials);
  take(j, "trace_dump", c.trace_dump);
  take(j, "K", c.K);
  if (j.contains("A")) {
    if (j["A"].is_null()) c.A.reset();
    else {
      double a = 0;
      take(j, "A", a);
      c.A = a;
    }
  }
  take(j, "B", c.B);
  if (j.contains("t")) {
    if (j["t"].is_null()) c.t.reset();
    else {
      int t = 0;
      take(j, "t", t);
      c.t = t;
    }
  }
  take(j, "t_scale", c.t_scale);
  take(j, "runs", c.runs);
  take(j, "lookahead", c.lookahead);
  take(j, "level_budget", c.level_budget);
  take(j, "max_root_tries", c.max_root_tries);
  take(j, "sandwich_instances", c.sandwich_instances);
  take(j, "decomposition_instances", c.decomposition_instances);
  take(j, "max_decomposition_n", c.max_decomposition_n);
  take(j, "tol", c.tol);
  take(j, "extra_kernels", c.extra_kernels);
  take(j, "out", c.out);
  validate(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["base_family"] = c.base.family;
  j["cycle_len"] = c.base.cycle_len;
  j["degree"] = c.base.degree;
  j["n_list"] = c.n_list;
  j["seeds"] = c.seeds;
  j["master_seed"] = c.master;
  j["eps"] = c.eps;
  j["laziness"] = c.laziness;
  j["t_cap"] = c.t_cap;
  j["write_profiles"] = c.write_profiles;
  j["spectral_floor"] = c.spectral_floor;
  j["R"] = c.R;
  j["replicas"] = c.replicas;
  j["steps"] = c.steps;
  j["tail_buffer"] = c.tail_buffer;
  j["step_method"] = c.step_method;
  j["depth"] = c.depth;
  j["trials"] = c.trials;
  j["trace_dump"] = c.trace_dump;
  j["K"] = c.K;
  j["A"] = c.A ? json(*c.A) : json(nullptr);
  j["B"] = c.B;
  j["t"] = c.t ? json(*c.t) : json(nullptr);
  j["t_scale"] = c.t_scale;
  j["runs"] = c.runs;
  j["lookahead"] = c.lookahead;
  j["level_budget"] = c.level_budget;
  j["max_root_tries"] = c.max_root_tries;
  j["sandwich_instances"] = c.sandwich_instances;
  j["decomposition_instances"] = c.decomposition_instances;
  j["max_decomposition_n"] = c.max_decomposition_n;
  j["tol"] = c.tol;
  j["extra_kernels"] = c.extra_kernels;
  j["out"] = c.out;
  return j;
}

void validate(const ExperimentConfig& c) {
  static const std::set<std::string> families{"triangle", "cycle", "torus", "regular", "clique_tailed"};
  auto check = [](bool ok, const std::string& msg) { require(ok, Errc::invalid_parameter, msg); };
  check(families.count(c.base.family) > 0, "unknown base_family '" + c.base.family + "'");
  check(c.base.cycle_len >= 3, "cycle_len must be >= 3");
  check(c.base.degree >= 1, "degree must be >= 1");
  check(!c.n_list.empty(), "n_list is empty");
  for (int n : c.n_list) check(n >= 2, "n_list entries must be >= 2");
  check(c.seeds >= 1, "seeds must be >= 1");
  check(!c.eps.empty(), "eps is empty");
  for (double e : c.eps) check(e > 0 && e < 1, "eps values must lie in (0,1)");
  check(c.laziness >= 0 && c.laziness < 1, "laziness must lie in [0,1)");
  check(c.t_cap >= 1, "t_cap must be >= 1");
  check(c.R >= 1, "R must be >= 1");
  check(c.replicas >= 1 && c.steps >= 1, "replicas and steps must be >= 1");
  check(c.tail_buffer >= 0, "tail_buffer must be >= 0");
  check(c.step_method == "exact" || c.step_method == "mc", "step_method must be 'exact' or 'mc'");
  check(c.depth >= 1, "depth must be >= 1");
  check(c.trials >= 1, "trials must be >= 1");
  check(c.K >= 0, "K must be >= 0");
  check(!c.A || *c.A >= 0, "A must be >= 0 or null");
  check(!c.t || *c.t >= 0, "t must be >= 0 or null");
  check(c.t_scale > 0, "t_scale must be positive");
  check(c.runs >= 1, "runs must be >= 1");
  check(c.lookahead >= 1, "lookahead must be >= 1");
  check(c.level_budget >= 1, "level_budget must be >= 1");
  check(c.max_root_tries >= 1, "max_root_tries must be >= 1");
  check(c.sandwich_instances >= 0 && c.decomposition_instances >= 0, "instance counts must be >= 0");
  check(c.max_decomposition_n >= 12, "max_decomposition_n must be >= 12");
  check(c.tol >= 0, "tol must be >= 0");
  for (const auto& m : c.extra_kernels) {
    check(!m.empty(), "extra kernel is empty");
    for (const auto& row : m) check(row.size() == m.size(), "extra kernel must be square");
  }
  check(!c.out.empty(), "out must not be empty");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::invalid_parameter, "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_parameter, std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

namespace {

// the output directory does not change what is computed
nlohmann::json hashed_view(const ExperimentConfig& c) {
  auto j = config_to_json(c);
  j.erase("out");
  return j;
}

}  // namespace

std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(name_hash(hashed_view(c).dump())));
  return buf;
}

}  // namespace qrg::cli
