#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrg/experiments.hpp"

namespace qrg::cli {

struct ExperimentConfig {
  std::string experiment;  // informational; the subcommand decides what runs
  BaseSpec base;
  std::vector<int> n_list{48, 96, 192, 384, 768};
  int seeds = 10;  // replicas per n
  std::uint64_t master = kDefaultSeed;

  // mixing / spectral
  std::vector<double> eps{0.1, 0.25, 0.75, 0.9};
  double laziness = 0.0;
  int t_cap = 5000;
  bool write_profiles = false;
  double spectral_floor = 0.01;

  // quasi tree and entropy
  int R = 2;
  int replicas = 100;
  int steps = 20000;
  int tail_buffer = kDefaultTailBuffer;
  std::string step_method = "exact";  // exact | mc
  int depth = 8;
  int trials = 10000;
  bool trace_dump = false;  // replica 0 walk as t,ball,local,level,crossed_lr

  // coupling
  int K = 3;
  std::optional<double> A = kDefaultA;
  double B = 0.0;
  std::optional<int> t;  // unset: entropic prediction
  double t_scale = 1.0;
  int runs = 200;
  int lookahead = 10;
  long long level_budget = 1000000;
  int max_root_tries = 1000;

  // verify
  int sandwich_instances = 50;
  int decomposition_instances = 50;
  int max_decomposition_n = 200;
  double tol = 1e-9;
  std::vector<std::vector<std::vector<double>>> extra_kernels;

  std::string out = "out";
};

// Throws Error(invalid_parameter) on unknown keys, wrong types or out-of-range values.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);
std::string config_hash(const ExperimentConfig& c);

}  // namespace qrg::cli
