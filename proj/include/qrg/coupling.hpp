#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qrg/lerw.hpp"
#include "qrg/matching.hpp"
#include "qrg/quasitree.hpp"

namespace qrg {

// Long-range ball B*_K(x) in G*: alternating R-balls of the base graph and matching hops.
// The root center's own matching edge is not followed, since the root of a quasi tree
// has no long-range edge.
struct LrNode {
  int center = 0;
  int parent = -1;        // node index
  int attach_vertex = -1; // vertex of the parent ball matched to `center`
  int level = 0;
};

struct LrBall {
  int center = 0;
  int K = 0;
  int R = 0;
  std::vector<LrNode> nodes;       // BFS order, level by level
  std::vector<int> level_start;    // nodes[level_start[i]..level_start[i+1]) are at level i
  int overlaps = 0;                // revealed balls intersecting earlier ones (or unmatched exits)
  std::size_t revealed_vertices = 0;
};

LrBall lr_ball(const StarGraph& g, const BallAtlas& atlas, int x, int K);
bool is_k_root(const StarGraph& g, const BallAtlas& atlas, int x, int K);

struct HittingResult {
  std::vector<std::optional<int>> times;  // per start, nullopt if not hit within horizon
  int max_time = 0;
  double hit_fraction = 0;
};

HittingResult k_root_hitting(const StarGraph& g, const BallAtlas& atlas, int K, const std::vector<int>& starts,
                             int horizon, Rng& rng);

enum class FailCause { none, truncated_edge, ball_boundary, wrong_branch, matching_coupling_failed, overlap };

const char* cause_name(FailCause c);

struct CoupleParams {
  int t = 0;
  int K = 4;
  std::optional<double> A = 1.0;  // nullopt disables the entropy truncation
  int lookahead = 10;             // depth cap for the first-passage weights
  long long level_budget = 1000000;
};

inline constexpr double kDefaultA = 1.0;

struct CouplingReport {
  bool success = false;
  FailCause cause = FailCause::none;
  int steps_coupled = 0;
  long long explored_vertices = 0;
  long long lr_edges_revealed = 0;  // non-truncated at reveal time
  int bad_count = 0;
  int levels_explored = 0;
  bool budget_exceeded = false;
  int z = -1;      // G* vertex of the level ceil(K/2) center the walk descends from
  int start = -1;  // G* vertex the walks start at
  std::vector<int> graph_path;   // the walk mapped to G*
  std::vector<int> tree_degree;  // tree degree at each step of the walk
};

// Exploration of G* below a K-root, coupled with a quasi tree rooted at x0.
class Explorer {
 public:
  Explorer(const StarGraph& g, std::shared_ptr<const BallAtlas> atlas, int x0, const CoupleParams& p,
           std::uint64_t seed);

  const QuasiTree& tree() const { return tree_; }
  int half_level() const { return (params_.K + 1) / 2; }
  // tree ball ids of the level-ceil(K/2) balls, in BFS order
  const std::vector<int>& z_balls() const { return z_balls_; }
  std::vector<int> level_k_descendants(int z_ball) const;

  // Exploration for V_z; revealed and selected sets accumulate across calls.
  void explore(int z_ball, Rng& rng);
  // Graph vertices touched (revealed or found overlapping) by explorations so far.
  bool touched(int v) const { return touched_.count(v) > 0; }
  bool any_touched(const std::vector<int>& balls) const;

  // Coupled walk from a tree vertex in a level-K ball below z_ball.
  CouplingReport walk(int z_ball, TreeVertex start, Rng& rng) const;

  long long explored_vertices() const { return explored_; }
  long long lr_edges_revealed() const { return edges_revealed_; }
  int levels_explored() const { return levels_; }
  bool budget_exceeded() const { return budget_exceeded_; }

 private:
  void select(int v);
  void reveal(int tree_ball);

  const StarGraph& g_;
  std::shared_ptr<const BallAtlas> atlas_;
  CoupleParams params_;
  QuasiTree tree_;
  std::vector<int> z_balls_;
  std::vector<FailCause> trunc_;  // per tree ball: why its incoming edge is truncated
  std::vector<char> active_;      // per tree ball: explored on the graph side
  std::unordered_map<int, int> revealed_;  // graph vertex -> tree ball that revealed it
  std::unordered_set<int> touched_;
  std::unordered_set<int> selected_;
  std::vector<int> selected_list_;
  long long explored_ = 0;
  long long edges_revealed_ = 0;
  int levels_ = 0;
  bool budget_exceeded_ = false;

  friend CouplingReport explore_and_couple(const StarGraph&, std::shared_ptr<const BallAtlas>, int,
                                           const CoupleParams&, Rng&);
};

CouplingReport explore_and_couple(const StarGraph& g, std::shared_ptr<const BallAtlas> atlas, int x0,
                                  const CoupleParams& p, Rng& rng);

int measure_bad_fraction(const StarGraph& g, std::shared_ptr<const BallAtlas> atlas, int x0,
                         const CoupleParams& p, Rng& rng);

// Replays a coupled walk on G*: consecutive vertices adjacent, degrees equal to the tree's.
bool verify_coupled_prefix(const StarGraph& g, const CouplingReport& r);

// max over vertices x of the empirical P(X_{tau_level} = x) for walks from the root.
double level_hit_max_frequency(QuasiTree& t, int level, int walks, Rng& rng);

}  // namespace qrg
