#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrg/coupling.hpp"
#include "qrg/graph.hpp"
#include "qrg/lerw.hpp"
#include "qrg/markov.hpp"
#include "qrg/matching.hpp"

namespace qrg {

// Base graph families by name: triangle, cycle, torus, regular, clique_tailed.
struct BaseSpec {
  std::string family = "triangle";
  int cycle_len = 12;  // cycle: component length
  int degree = 3;      // regular, clique_tailed
};

// n is the vertex count of the base graph, except clique_tailed where it is the size of
// the regular part (the graph has n + degree vertices).
Graph make_base(const BaseSpec& spec, int n, Rng& rng);

struct MixSettings {
  std::vector<double> eps{0.1, 0.25, 0.75, 0.9};
  double laziness = 0.0;
  int t_cap = 5000;
  bool parallel = true;
};

struct MixInstance {
  int n = 0;
  int replica = 0;
  std::uint64_t seed = 0;  // matching stream seed
  double laziness = 0;
  bool connected = true;
  bool switched_lazy = false;  // bipartite G*, rerun with laziness 1/2
  MixingProfile profile;
};

MixInstance run_mix_instance(const BaseSpec& base, int n, int replica, std::uint64_t master,
                             const MixSettings& s);

struct SpectralRow {
  int n = 0;
  int replica = 0;
  SpectralReport report;
  bool connected = true;
};

SpectralRow run_spectral_instance(const BaseSpec& base, int n, int replica, std::uint64_t master,
                                  double laziness = 0.0);

struct EntropySettings {
  int R = 1;
  int replicas = 100;
  int steps = 20000;
  int tail_buffer = kDefaultTailBuffer;
  StepParams step{StepMethod::exact_truncated, 8, 0};
};

struct EntropyRun {
  std::vector<BlockRow> rows;
  long long confirmed_blocks = 0;
  long long unconfirmed_blocks = 0;
};

// Walks on independent quasi trees over a fixed base graph; replica i uses tree and walk
// streams derived from (master, i).
EntropyRun run_entropy(const Graph& base, const EntropySettings& s, std::uint64_t master);

struct CoupleSettings {
  int n = 30000;
  int R = 1;
  int runs = 200;
  CoupleParams params;
  int max_root_tries = 1000;
};

struct CoupleRow {
  int run = 0;
  std::uint64_t seed = 0;
  int n = 0;
  CouplingReport report;
};

std::vector<CoupleRow> run_couple(const BaseSpec& base, const CoupleSettings& s, std::uint64_t master);

struct VerifyReport {
  int sandwich_instances = 0;
  int cheeger_violations = 0;
  int smallest_violations = 0;
  int decomposition_instances = 0;
  int decomposition_violations = 0;
  double min_decomposition_ratio = 1e300;  // gamma / (gamma_hat * gamma_star)
  int block_instances = 0;
  int block_violations = 0;
  std::vector<std::string> failures;
  bool pass() const {
    return cheeger_violations == 0 && smallest_violations == 0 && decomposition_violations == 0 &&
           block_violations == 0;
  }
};

struct VerifySettings {
  int sandwich_instances = 50;
  int decomposition_instances = 50;
  int max_decomposition_n = 200;
  double tol = 1e-9;
};

VerifyReport run_verify(const VerifySettings& s, std::uint64_t master);

}  // namespace qrg
