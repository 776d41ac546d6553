#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrg/graph.hpp"
#include "qrg/matching.hpp"
#include "qrg/rng.hpp"

namespace qrg {

// Row-stochastic matrix in CSR form. The transpose is kept alongside for
// distribution updates mu' = mu P, which gather over in-neighbors.
struct TransitionKernel {
  int n = 0;
  double laziness = 0.0;
  std::vector<int> row_ptr{0};
  std::vector<int> col;
  std::vector<double> val;
  std::vector<int> t_row_ptr{0};
  std::vector<int> t_col;
  std::vector<double> t_val;

  double at(int i, int j) const;
  Eigen::MatrixXd dense() const;
  double max_row_error() const;  // max |row sum - 1|

  static TransitionKernel from_dense(const Eigen::MatrixXd& p, double laziness = 0.0);
  static TransitionKernel from_triplets(int n, std::vector<std::tuple<int, int, double>> entries,
                                        double laziness = 0.0);
};

TransitionKernel srw_kernel(const Graph& g, double laziness = 0.0);

// Degree-biased distribution; checks pi P = pi.
std::vector<double> stationary(const TransitionKernel& k, const Graph& g);

bool is_reversible(const TransitionKernel& k, std::span<const double> pi, double tol = 1e-12);

double tv_distance(std::span<const double> mu, std::span<const double> nu);

enum class StartMode { exact_all_starts, sampled_starts };

struct MixingOptions {
  std::vector<double> eps{0.25};
  int t_cap = 5000;
  std::optional<StartMode> mode;  // unset: exact up to kExactStartCap states
  int sampled_starts = 64;
  std::uint64_t seed = kDefaultSeed;
  bool parallel = true;
};

inline constexpr int kExactStartCap = 2048;

struct MixingProfile {
  std::vector<double> d;  // d[t], worst start TV at time t
  std::vector<double> eps;
  std::vector<std::optional<int>> tmix;  // per eps; nullopt = unresolved
  StartMode start_mode = StartMode::exact_all_starts;
  int start_count = 0;
  bool lower_bound = false;  // sampled starts only bound d(t) from below
  bool converged = false;

  /// Smallest t with d(t) <= eps within the recorded range.
  std::optional<int> tmix_at(double e) const;
  /// t_mix(e) - t_mix(1-e)
  std::optional<int> window(double e) const;
};

MixingProfile mixing_profile(const TransitionKernel& k, std::span<const double> pi,
                             const MixingOptions& opt);

struct SpectralReport {
  double lambda2 = 0;
  double lambda_min = 0;
  double gap_abs = 0;
  double gap_rel = 0;  // 1 - lambda2
  enum class Method { dense, iterative } method = Method::dense;
  bool converged = true;
};

inline constexpr int kDenseCap = 4096;

std::vector<double> eigenvalues(const TransitionKernel& k, std::span<const double> pi);
SpectralReport spectral_report(const TransitionKernel& k, std::span<const double> pi,
                               int dense_cap = kDenseCap);

struct CheegerResult {
  double phi_star = 0;
  double zeta_star = 0;
  std::uint32_t phi_set = 0;
  std::uint32_t zeta_set = 0;
  std::uint32_t zeta_a = 0;  // B = zeta_set & ~zeta_a
};

inline constexpr int kCheegerCap = 16;

CheegerResult cheeger_bruteforce(const TransitionKernel& k, std::span<const double> pi);

struct BlockChain {
  TransitionKernel kernel;
  std::vector<double> pi;
};

BlockChain block_chain(const TransitionKernel& k, std::span<const double> pi, const Partition& p);
BlockChain matching_block_multigraph(const Partition& p, const PerfectMatching& m);

struct RestrictedChain {
  TransitionKernel kernel;
  std::vector<double> pi;  // pi restricted to the block, renormalized
  bool gap_defined = true;  // false for a single state
};

RestrictedChain restricted_kernel(const TransitionKernel& k, std::span<const double> pi,
                                  const std::vector<int>& block);

struct DecompositionCheck {
  double gamma = 0;      // 1 - lambda2(P)
  double gamma_hat = 0;  // block chain
  double gamma_star = 0; // min over restricted chains
  bool holds(double tol) const { return gamma + tol >= gamma_hat * gamma_star; }
};

DecompositionCheck decomposition_check(const TransitionKernel& k, std::span<const double> pi,
                                       const Partition& p);

}  // namespace qrg
