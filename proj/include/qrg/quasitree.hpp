#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "qrg/graph.hpp"
#include "qrg/rng.hpp"

namespace qrg {

// All R-balls of a base graph, computed once and shared by every tree built on it.
class BallAtlas {
 public:
  static std::shared_ptr<const BallAtlas> make(const Graph& g, int radius);

  const Graph& base() const { return base_; }
  int radius() const { return radius_; }
  const RootedBall& at(int center) const { return balls_[center]; }
  int max_ball_size() const { return max_size_; }

 private:
  Graph base_;
  int radius_ = 0;
  int max_size_ = 0;
  std::vector<RootedBall> balls_;
};

struct TreeVertex {
  int ball = 0;
  int local = 0;
  bool operator==(const TreeVertex&) const = default;
};

struct BallInstance {
  int center = 0;           // base vertex the ball was sampled around
  std::uint64_t key = 0;    // children are derived from (key, local vertex)
  int parent = -1;          // parent ball id, -1 for the root
  int parent_local = -1;    // attaching vertex in the parent ball
  int level = 0;
  std::vector<int> children;  // per local vertex, -1 until materialized
};

// Lazily materialized quasi tree. Ball 0 is the root; ball ids follow materialization
// order, but the sampled tree depends only on the seed because every child is keyed by
// its parent's key and attaching vertex.
class QuasiTree {
 public:
  QuasiTree(std::shared_ptr<const BallAtlas> atlas, std::uint64_t seed,
            std::optional<int> root_center = std::nullopt);

  const BallAtlas& atlas() const { return *atlas_; }
  const RootedBall& shape(int ball) const { return atlas_->at(balls_[ball].center); }
  const BallInstance& ball(int id) const { return balls_[id]; }
  int ball_count() const { return static_cast<int>(balls_.size()); }
  TreeVertex root() const { return {0, 0}; }

  int child(int ball, int local);
  int peek_child(int ball, int local) const { return balls_[ball].children[local]; }
  /// Attach an explicit child center, overriding the keyed sample. Used by the coupling.
  int attach_child(int ball, int local, int center);

  int degree(TreeVertex v) const;
  int level(TreeVertex v) const { return balls_[v.ball].level; }
  std::vector<TreeVertex> neighbors(TreeVertex v);
  TreeVertex step(TreeVertex v, Rng& rng);
  bool is_center(TreeVertex v) const { return v.local == 0; }
  // p(x): for x outside the root ball, the parent-side endpoint of its ball's long-range edge
  TreeVertex parent_vertex(TreeVertex v) const;

  // Drop every ball materialized after the checkpoint. Children of surviving balls that
  // pointed at dropped balls are reset; rematerializing them reproduces the same balls
  // unless they were attached by override.
  std::size_t checkpoint() const { return balls_.size(); }
  void rollback(std::size_t mark);

  std::uint64_t child_key(std::uint64_t parent_key, int local) const;
  int child_center(std::uint64_t key) const;

 private:
  int add_ball(int center, std::uint64_t key, int parent, int parent_local);

  std::shared_ptr<const BallAtlas> atlas_;
  std::vector<BallInstance> balls_;
};

struct Crossing {
  int time;  // the walk is at `to` at this time
  TreeVertex from;
  TreeVertex to;
  int level_after;
};

struct WalkTrace {
  std::vector<TreeVertex> steps;
  std::vector<int> levels;
  std::vector<Crossing> lr_crossings;

  int length() const { return static_cast<int>(steps.size()) - 1; }
};

WalkTrace run_walk(QuasiTree& t, TreeVertex start, int steps, Rng& rng);

// Debug dump, one `t,ball,local,level,crossed_lr` row per step.
void write_trace(std::ostream& os, const WalkTrace& trace);

struct EscapeEstimate {
  double p = 0;
  double se = 0;
  int trials = 0;
  bool defined = false;
};

// Fraction of walks from x that reach `depth` levels below x before returning to x or p(x).
EscapeEstimate estimate_escape_prob(QuasiTree& t, TreeVertex x, int depth, int trials, Rng& rng);

}  // namespace qrg
