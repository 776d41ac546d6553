#include "qrg/quasitree.hpp"

#include <cmath>
#include <ostream>

#include "qrg/error.hpp"

namespace qrg {

std::shared_ptr<const BallAtlas> BallAtlas::make(const Graph& g, int radius) {
  require(radius >= 1, Errc::invalid_parameter, "ball radius must be >= 1");
  for (int s : component_sizes(g))
    require(s >= 2, Errc::invalid_input, "base graph has an isolated vertex");
  auto a = std::make_shared<BallAtlas>();
  a->base_ = g;
  a->radius_ = radius;
  a->balls_.reserve(g.n());
  for (int v = 0; v < g.n(); ++v) {
    a->balls_.push_back(ball(g, v, radius));
    a->max_size_ = std::max(a->max_size_, a->balls_.back().size());
  }
  return a;
}

QuasiTree::QuasiTree(std::shared_ptr<const BallAtlas> atlas, std::uint64_t seed,
                     std::optional<int> root_center)
    : atlas_(std::move(atlas)) {
  const std::uint64_t key = mix_keys(seed, 0x524F4F54);
  int c = root_center ? *root_center : child_center(key);
  require(c >= 0 && c < atlas_->base().n(), Errc::invalid_parameter, "root center out of range");
  add_ball(c, key, -1, -1);
}

std::uint64_t QuasiTree::child_key(std::uint64_t parent_key, int local) const {
  return mix_keys(parent_key, static_cast<std::uint64_t>(local) + 1);
}

int QuasiTree::child_center(std::uint64_t key) const {
  // one splitmix draw mapped to [0, n) by multiply-shift; seeding a full engine here
  // dominated the cost of the exact step solves
  const auto x = static_cast<unsigned __int128>(splitmix64(key));
  return static_cast<int>((x * static_cast<unsigned>(atlas_->base().n())) >> 64);
}

int QuasiTree::add_ball(int center, std::uint64_t key, int parent, int parent_local) {
  BallInstance b;
  b.center = center;
  b.key = key;
  b.parent = parent;
  b.parent_local = parent_local;
  b.level = parent < 0 ? 0 : balls_[parent].level + 1;
  b.children.assign(atlas_->at(center).size(), -1);
  balls_.push_back(std::move(b));
  const int id = static_cast<int>(balls_.size()) - 1;
  if (parent >= 0) balls_[parent].children[parent_local] = id;
  return id;
}

int QuasiTree::child(int ball, int local) {
  int c = balls_[ball].children[local];
  if (c >= 0) return c;
  require(local != 0, Errc::invalid_input, "ball centers have no children");
  std::uint64_t key = child_key(balls_[ball].key, local);
  return add_ball(child_center(key), key, ball, local);
}

int QuasiTree::attach_child(int ball, int local, int center) {
  require(local != 0, Errc::invalid_input, "ball centers have no children");
  require(balls_[ball].children[local] < 0, Errc::invalid_input, "child already attached");
  return add_ball(center, child_key(balls_[ball].key, local), ball, local);
}

int QuasiTree::degree(TreeVertex v) const {
  const int d = shape(v.ball).local_degree[v.local];
  if (v.local != 0) return d + 1;
  return d + (balls_[v.ball].parent >= 0 ? 1 : 0);
}

std::vector<TreeVertex> QuasiTree::neighbors(TreeVertex v) {
  std::vector<TreeVertex> out;
  for (auto [w, m] : shape(v.ball).adj[v.local])
    for (int k = 0; k < m; ++k) out.push_back({v.ball, w});
  if (v.local != 0)
    out.push_back({child(v.ball, v.local), 0});
  else if (balls_[v.ball].parent >= 0)
    out.push_back({balls_[v.ball].parent, balls_[v.ball].parent_local});
  return out;
}

TreeVertex QuasiTree::step(TreeVertex v, Rng& rng) {
  const RootedBall& s = shape(v.ball);
  int r = static_cast<int>(uniform_below(rng, degree(v)));
  for (auto [w, m] : s.adj[v.local]) {
    if (r < m) return {v.ball, w};
    r -= m;
  }
  if (v.local != 0) return {child(v.ball, v.local), 0};
  return {balls_[v.ball].parent, balls_[v.ball].parent_local};
}

TreeVertex QuasiTree::parent_vertex(TreeVertex v) const {
  const auto& b = balls_[v.ball];
  if (b.parent < 0) return root();
  return {b.parent, b.parent_local};
}

void QuasiTree::rollback(std::size_t mark) {
  require(mark >= 1 && mark <= balls_.size(), Errc::invalid_parameter, "bad checkpoint");
  for (std::size_t id = mark; id < balls_.size(); ++id) {
    const auto& b = balls_[id];
    if (b.parent >= 0 && static_cast<std::size_t>(b.parent) < mark)
      balls_[b.parent].children[b.parent_local] = -1;
  }
  balls_.resize(mark);
}

WalkTrace run_walk(QuasiTree& t, TreeVertex start, int steps, Rng& rng) {
  require(steps >= 0, Errc::invalid_parameter, "negative step count");
  WalkTrace tr;
  tr.steps.reserve(steps + 1);
  tr.levels.reserve(steps + 1);
  tr.steps.push_back(start);
  tr.levels.push_back(t.level(start));
  TreeVertex cur = start;
  for (int s = 1; s <= steps; ++s) {
    TreeVertex next = t.step(cur, rng);
    if (next.ball != cur.ball) tr.lr_crossings.push_back({s, cur, next, t.level(next)});
    cur = next;
    tr.steps.push_back(cur);
    tr.levels.push_back(t.level(cur));
  }
  return tr;
}

void write_trace(std::ostream& os, const WalkTrace& trace) {
  os << "t,ball,local,level,crossed_lr\n";
  std::size_t next = 0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    bool crossed = next < trace.lr_crossings.size() && trace.lr_crossings[next].time == static_cast<int>(i);
    if (crossed) ++next;
    os << i << "," << trace.steps[i].ball << "," << trace.steps[i].local << "," << trace.levels[i] << ","
       << (crossed ? 1 : 0) << "\n";
  }
}

EscapeEstimate estimate_escape_prob(QuasiTree& t, TreeVertex x, int depth, int trials, Rng& rng) {
  EscapeEstimate est;
  est.trials = trials;
  if (depth < 2 || trials <= 0) return est;
  const TreeVertex px = t.parent_vertex(x);
  const int target = t.level(x) + depth;
  const auto mark = t.checkpoint();
  int hits = 0;
  for (int i = 0; i < trials; ++i) {
    TreeVertex cur = x;
    while (true) {
      cur = t.step(cur, rng);
      if (cur == x || cur == px) break;
      if (t.level(cur) >= target) {
        ++hits;
        break;
      }
    }
    t.rollback(mark);
  }
  est.defined = true;
  est.p = static_cast<double>(hits) / trials;
  est.se = std::sqrt(est.p * (1 - est.p) / trials);
  return est;
}

}  // namespace qrg
