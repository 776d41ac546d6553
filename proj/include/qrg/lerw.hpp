#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "qrg/quasitree.hpp"
#include "qrg/stats.hpp"

namespace qrg {

// ---- regeneration -------------------------------------------------------

// A long-range edge of the tree is named by the ball it leads into.
struct RegenBlock {
  int sigma = 0;     // crossing time
  int phi = 0;       // level after crossing
  int edge_ball = 0; // child ball of the crossed edge
  bool confirmed = false;
};

inline constexpr int kDefaultTailBuffer = 200;

std::vector<RegenBlock> detect_regenerations(const WalkTrace& trace, int tail_buffer = kDefaultTailBuffer);

struct LerwPath {
  std::vector<int> edges;  // child ball ids, levels 1, 2, ...
};

LerwPath loop_erase(const WalkTrace& trace, int horizon);

// ---- loop-erased step probabilities --------------------------------------

// A ball that may or may not be materialized; unmaterialized children are derived from keys.
struct BallRef {
  int center = 0;
  std::uint64_t key = 0;
  int id = -1;
};

BallRef ball_ref(const QuasiTree& t, int id);
BallRef child_ref(const QuasiTree& t, const BallRef& b, int local);

struct BallSolve {
  std::vector<double> q;  // last-exit law over local vertices (q[0] = 0)
  double ret = 0;         // probability of leaving through the parent edge
};

// One ball with child subtrees summarized by their return probabilities.
BallSolve solve_ball(const RootedBall& shape, bool has_parent, std::span<const double> child_ret);

// Return probabilities keyed by (ball key, center, remaining depth).
class ReturnCache {
 public:
  double* find(std::uint64_t key, int center, int depth);
  void put(std::uint64_t key, int center, int depth, double v);
  void clear() { map_.clear(); }
  std::size_t size() const { return map_.size(); }

 private:
  struct Hash {
    std::size_t operator()(const std::tuple<std::uint64_t, int, int>& k) const;
  };
  std::unordered_map<std::tuple<std::uint64_t, int, int>, double, Hash> map_;
};

// Probability that a walk entering b through its parent edge ever returns across it,
// with absorption `depth` levels below b (depth >= 1).
double return_prob(const QuasiTree& t, const BallRef& b, int depth, ReturnCache* cache = nullptr);

// Last-exit law of a walk on the subtree below b, started at b's center, absorbed
// `depth` levels below b.
std::vector<double> exit_distribution_exact(const QuasiTree& t, const BallRef& b, int depth,
                                            ReturnCache* cache = nullptr);

struct ExitEstimate {
  std::vector<double> p;
  std::vector<double> se;
  int trials = 0;
};

ExitEstimate exit_distribution_mc(QuasiTree& t, int ball, int depth, int trials, Rng& rng);

enum class StepMethod { exact_truncated, monte_carlo };

struct StepParams {
  StepMethod method = StepMethod::exact_truncated;
  int depth = 6;        // absorbing depth below the ball
  int trials = 10000;   // monte carlo only
};

inline constexpr int kDefaultEscapeDepth = 20;

struct StepProb {
  double p = 0;
  double se = 0;
  bool wide_ci = false;
};

StepProb lerw_step_prob(QuasiTree& t, int ball, int target_local, const StepParams& params, Rng& rng,
                        ReturnCache* cache = nullptr);

// W over a LERW prefix: -sum log of step probabilities.
double path_weight_W(QuasiTree& t, const LerwPath& path, const StepParams& params, Rng& rng,
                     ReturnCache* cache = nullptr);

struct WtildeValue {
  double value = 0;
  double se = 0;
  bool lower_bound_only = false;  // zero observed hits; value is -log(1/trials)
};

// Exact first-passage weight of the edge into `edge_ball`: product of last-exit factors,
// each absorbed at the edge's level (or `lookahead` levels below the factor's ball).
WtildeValue wtilde_exact(const QuasiTree& t, int edge_ball, int lookahead = 64, ReturnCache* cache = nullptr);

WtildeValue first_hit_weight_Wtilde(QuasiTree& t, int edge_ball, int trials, Rng& rng);

bool truncation_event(const WtildeValue& w, int level, double n, double A, int K);

// ---- entropy ---------------------------------------------------------------

struct BlockRow {
  int replica = 0;
  int block_index = 0;  // k >= 2
  int sigma_gap = 0;
  int phi_gap = 0;
  double Y = 0;
};

// Rows for confirmed blocks k >= 2 of one trace.
std::vector<BlockRow> block_rows(QuasiTree& t, const std::vector<RegenBlock>& blocks, int replica,
                                 const StepParams& params, Rng& rng, ReturnCache* cache = nullptr);

struct EntropyEstimate {
  double h_hat = 0;
  double nu_hat = 0;
  double gamma_hat = 0;
  double mean_phi_gap = 0;
  double mean_sigma_gap = 0;
  double time_factor = 0;  // 1/(nu h) = mean sigma gap / mean Y
  Interval h_ci, nu_ci, gamma_ci, time_factor_ci;
  int blocks_used = 0;
  double var_ratio_100 = std::numeric_limits<double>::quiet_NaN();
  double var_ratio_400 = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;  // every Y was zero
};

inline constexpr int kMinBlocks = 100;

struct SpeedEstimate {
  double nu_hat = 0;
  Interval ci;
};

SpeedEstimate estimate_speed(std::span<const BlockRow> rows, std::uint64_t seed = kDefaultSeed,
                             int bootstrap = 200);
EntropyEstimate estimate_entropy(std::span<const BlockRow> rows, std::uint64_t seed = kDefaultSeed,
                                 int bootstrap = 200);

struct EntropicTime {
  double value = 0;
  Interval ci;
};

EntropicTime entropic_time(double n, const EntropyEstimate& est);

}  // namespace qrg
