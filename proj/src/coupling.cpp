#include "qrg/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qrg/error.hpp"

namespace qrg {

const char* cause_name(FailCause c) {
  switch (c) {
    case FailCause::none: return "none";
    case FailCause::truncated_edge: return "truncated-edge";
    case FailCause::ball_boundary: return "ball-boundary";
    case FailCause::wrong_branch: return "wrong-branch";
    case FailCause::matching_coupling_failed: return "matching-coupling-failed";
    case FailCause::overlap: return "overlap";
  }
  return "unknown";
}

namespace {

LrBall build_lr_ball(const StarGraph& g, const BallAtlas& atlas, int x, int K, bool stop_at_overlap) {
  require(x >= 0 && x < g.n(), Errc::invalid_parameter, "vertex out of range");
  require(K >= 0, Errc::invalid_parameter, "K must be >= 0");
  require(atlas.base().n() == g.n(), Errc::invalid_input, "atlas does not match the graph");
  LrBall lb;
  lb.center = x;
  lb.K = K;
  lb.R = atlas.radius();
  std::unordered_set<int> revealed;
  const std::size_t limit = static_cast<std::size_t>(g.n()) / 2;
  lb.nodes.push_back({x, -1, -1, 0});
  const RootedBall& root = atlas.at(x);
  revealed.insert(root.vertices.begin(), root.vertices.end());
  lb.level_start = {0, 1};
  for (int level = 0; level < K; ++level) {
    // the guard is checked per level so that small graphs still report their overlaps
    if (level > 0 && revealed.size() > limit)
      throw Error(Errc::ball_too_large, "long-range ball exceeds n/2 vertices");
    const int begin = lb.level_start[level], end = lb.level_start[level + 1];
    for (int i = begin; i < end; ++i) {
      const RootedBall& shape = atlas.at(lb.nodes[i].center);
      for (int u = 1; u < shape.size(); ++u) {
        const int p = g.matching.partner[shape.vertices[u]];
        bool hit = p < 0;  // no long-range edge where the tree has one
        if (!hit) {
          const RootedBall& nb = atlas.at(p);
          hit = std::any_of(nb.vertices.begin(), nb.vertices.end(), [&](int v) { return revealed.count(v) > 0; });
          if (!hit) {
            lb.nodes.push_back({p, i, shape.vertices[u], level + 1});
            revealed.insert(nb.vertices.begin(), nb.vertices.end());
          }
        }
        if (hit) {
          ++lb.overlaps;
          if (stop_at_overlap) {
            lb.revealed_vertices = revealed.size();
            return lb;
          }
        }
      }
    }
    lb.level_start.push_back(static_cast<int>(lb.nodes.size()));
  }
  lb.revealed_vertices = revealed.size();
  return lb;
}

}  // namespace

LrBall lr_ball(const StarGraph& g, const BallAtlas& atlas, int x, int K) {
  return build_lr_ball(g, atlas, x, K, false);
}

bool is_k_root(const StarGraph& g, const BallAtlas& atlas, int x, int K) {
  return build_lr_ball(g, atlas, x, K, true).overlaps == 0;
}

HittingResult k_root_hitting(const StarGraph& g, const BallAtlas& atlas, int K, const std::vector<int>& starts,
                             int horizon, Rng& rng) {
  require(horizon >= 1, Errc::invalid_parameter, "horizon must be >= 1");
  std::vector<signed char> cache(g.n(), -1);
  auto root = [&](int v) {
    if (cache[v] < 0) cache[v] = is_k_root(g, atlas, v, K) ? 1 : 0;
    return cache[v] == 1;
  };
  HittingResult r;
  int hit = 0;
  for (int s : starts) {
    int v = s;
    std::optional<int> time;
    for (int step = 0; step <= horizon; ++step) {
      if (root(v)) {
        time = step;
        break;
      }
      v = g.combined.slot(v, static_cast<int>(uniform_below(rng, g.combined.degree(v))));
    }
    if (time) {
      ++hit;
      r.max_time = std::max(r.max_time, *time);
    }
    r.times.push_back(time);
  }
  r.hit_fraction = starts.empty() ? 0.0 : static_cast<double>(hit) / starts.size();
  return r;
}

Explorer::Explorer(const StarGraph& g, std::shared_ptr<const BallAtlas> atlas, int x0, const CoupleParams& p,
                   std::uint64_t seed)
    : g_(g), atlas_(atlas), params_(p), tree_(atlas, seed, x0) {
  require(p.K >= 0 && p.t >= 0, Errc::invalid_parameter, "K and t must be non-negative");
  LrBall lb = lr_ball(g, *atlas, x0, p.K);
  require(lb.overlaps == 0, Errc::invalid_input, "start vertex is not a K-root");
  // first K levels of the tree follow G*
  std::vector<int> tree_id(lb.nodes.size(), 0);
  for (std::size_t i = 1; i < lb.nodes.size(); ++i) {
    const auto& nd = lb.nodes[i];
    const int parent = tree_id[nd.parent];
    const int local = tree_.shape(parent).local_index(nd.attach_vertex);
    tree_id[i] = tree_.attach_child(parent, local, nd.center);
    select(nd.attach_vertex);
    select(nd.center);
  }
  trunc_.assign(tree_.ball_count(), FailCause::none);
  active_.assign(tree_.ball_count(), 0);
  for (int b = 0; b < tree_.ball_count(); ++b) {
    for (int v : tree_.shape(b).vertices) revealed_[v] = b;
    if (tree_.ball(b).level == half_level()) z_balls_.push_back(b);
  }
}

void Explorer::select(int v) {
  if (selected_.insert(v).second) selected_list_.push_back(v);
}

void Explorer::reveal(int tree_ball) {
  for (int v : tree_.shape(tree_ball).vertices) {
    revealed_[v] = tree_ball;
    touched_.insert(v);
  }
}

std::vector<int> Explorer::level_k_descendants(int z_ball) const {
  std::vector<int> out;
  std::vector<int> stack{z_ball};
  while (!stack.empty()) {
    int b = stack.back();
    stack.pop_back();
    if (tree_.ball(b).level == params_.K) {
      out.push_back(b);
      continue;
    }
    for (int c : tree_.ball(b).children)
      if (c >= 0 && tree_.ball(c).level <= params_.K) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Explorer::any_touched(const std::vector<int>& balls) const {
  for (int b : balls)
    for (int v : tree_.shape(b).vertices)
      if (touched_.count(v)) return true;
  return false;
}

void Explorer::explore(int z_ball, Rng& rng) {
  auto grow = [&] {
    trunc_.resize(tree_.ball_count(), FailCause::none);
    active_.resize(tree_.ball_count(), 0);
  };
  const int n = g_.n();
  std::vector<int> frontier = level_k_descendants(z_ball);
  for (int b : frontier) active_[b] = 1;
  ReturnCache cache;
  for (int step = 0; step < params_.t && !frontier.empty(); ++step) {
    std::vector<int> next;
    long long level_vertices = 0;
    for (int b : frontier) {
      if (!active_[b]) continue;  // truncated retroactively by an overlap
      const int size = tree_.shape(b).size();
      for (int u = 1; u < size; ++u) {
        if (tree_.peek_child(b, u) >= 0) continue;  // already revealed
        const int gv = tree_.shape(b).vertices[u];
        const int p = g_.matching.partner[gv];
        if (p < 0) {
          // no matching edge in G*; the tree side still has one
          int c = tree_.child(b, u);
          grow();
          trunc_[c] = FailCause::matching_coupling_failed;
          continue;
        }
        // reverse optimal coupling: the tree endpoint equals p unless the used mass is hit
        const std::size_t m = selected_list_.size();
        const bool fail = m > 0 && uniform_below(rng, n) < m;
        const int tree_end = fail ? selected_list_[uniform_below(rng, m)] : p;
        select(gv);
        select(p);
        const int c = tree_.attach_child(b, u, tree_end);
        grow();
        if (fail) {
          trunc_[c] = FailCause::matching_coupling_failed;
          touched_.insert(p);
          continue;
        }
        const RootedBall& nb = tree_.shape(c);
        std::vector<int> hit_balls;
        for (int v : nb.vertices) {
          auto it = revealed_.find(v);
          if (it != revealed_.end()) hit_balls.push_back(it->second);
        }
        if (!hit_balls.empty()) {
          trunc_[c] = FailCause::overlap;
          for (int v : nb.vertices) touched_.insert(v);
          for (int q : hit_balls)
            if (q != 0) {
              if (trunc_[q] == FailCause::none) trunc_[q] = FailCause::overlap;
              active_[q] = 0;
            }
          continue;
        }
        reveal(c);
        active_[c] = 1;
        explored_ += nb.size();
        level_vertices += nb.size();
        ++edges_revealed_;
        next.push_back(c);
      }
    }
    if (params_.A) {
      cache.clear();
      for (int c : next) {
        if (!active_[c]) continue;
        WtildeValue w = wtilde_exact(tree_, c, params_.lookahead, &cache);
        if (truncation_event(w, tree_.ball(c).level, n, *params_.A, params_.K)) {
          trunc_[c] = FailCause::truncated_edge;
          active_[c] = 0;
        }
      }
    }
    frontier.clear();
    for (int c : next)
      if (active_[c]) frontier.push_back(c);
    ++levels_;
    if (level_vertices > params_.level_budget) {
      budget_exceeded_ = true;
      break;
    }
  }
}

CouplingReport Explorer::walk(int z_ball, TreeVertex start, Rng& rng) const {
  CouplingReport r;
  r.z = tree_.ball(z_ball).center;
  r.start = tree_.shape(start.ball).vertices[start.local];
  const int half = half_level();
  TreeVertex cur = start;
  auto check = [&](TreeVertex v) {
    const RootedBall& s = tree_.shape(v.ball);
    if (s.on_boundary[v.local]) return FailCause::ball_boundary;
    if (params_.K > 0 && tree_.level(v) == half && !(v.ball == z_ball && v.local == 0))
      return FailCause::wrong_branch;
    return FailCause::none;
  };
  for (int s = 0;; ++s) {
    r.graph_path.push_back(tree_.shape(cur.ball).vertices[cur.local]);
    r.tree_degree.push_back(tree_.degree(cur));
    if (FailCause c = check(cur); c != FailCause::none) {
      r.cause = c;
      return r;
    }
    if (s == params_.t) break;
    const RootedBall& shape = tree_.shape(cur.ball);
    int k = static_cast<int>(uniform_below(rng, tree_.degree(cur)));
    TreeVertex next{-1, -1};
    for (auto [w, m] : shape.adj[cur.local]) {
      if (k < m) {
        next = {cur.ball, w};
        break;
      }
      k -= m;
    }
    if (next.ball < 0) {
      // long-range move
      int crossed;  // ball whose incoming edge is crossed
      if (cur.local != 0) {
        const int c = tree_.peek_child(cur.ball, cur.local);
        if (c < 0) {
          r.cause = FailCause::truncated_edge;  // beyond the explored levels
          return r;
        }
        crossed = c;
        next = {c, 0};
      } else {
        crossed = cur.ball;
        next = {tree_.ball(cur.ball).parent, tree_.ball(cur.ball).parent_local};
      }
      if (crossed < static_cast<int>(trunc_.size()) && trunc_[crossed] != FailCause::none) {
        r.cause = trunc_[crossed];
        return r;
      }
    }
    cur = next;
    r.steps_coupled = s + 1;
  }
  r.success = true;
  return r;
}

CouplingReport explore_and_couple(const StarGraph& g, std::shared_ptr<const BallAtlas> atlas, int x0,
                                  const CoupleParams& p, Rng& rng) {
  Explorer ex(g, atlas, x0, p, rng());
  const auto& zs = ex.z_balls();
  require(!zs.empty(), Errc::invalid_input, "no balls at half depth");
  const int z = zs[uniform_below(rng, zs.size())];
  std::vector<TreeVertex> starts;
  for (int b : ex.level_k_descendants(z))
    for (int u = 0; u < ex.tree().shape(b).size(); ++u) starts.push_back({b, u});
  const TreeVertex x = starts[uniform_below(rng, starts.size())];
  if (p.t > 0) ex.explore(z, rng);
  CouplingReport r = ex.walk(z, x, rng);
  r.explored_vertices = ex.explored_vertices();
  r.lr_edges_revealed = ex.lr_edges_revealed();
  r.levels_explored = ex.levels_explored();
  r.budget_exceeded = ex.budget_exceeded();
  return r;
}

int measure_bad_fraction(const StarGraph& g, std::shared_ptr<const BallAtlas> atlas, int x0,
                         const CoupleParams& p, Rng& rng) {
  Explorer ex(g, atlas, x0, p, rng());
  int bad = 0;
  for (int z : ex.z_balls()) {
    if (ex.any_touched(ex.level_k_descendants(z))) ++bad;
    ex.explore(z, rng);
  }
  return bad;
}

bool verify_coupled_prefix(const StarGraph& g, const CouplingReport& r) {
  const auto& path = r.graph_path;
  for (std::size_t i = 0; i < path.size(); ++i) {
    // only steps the walks took together are checked
    if (i > static_cast<std::size_t>(r.steps_coupled)) break;
    if (g.combined.degree(path[i]) != r.tree_degree[i] && i < static_cast<std::size_t>(r.steps_coupled))
      return false;
    if (i > 0 && g.combined.multiplicity(path[i - 1], path[i]) == 0) return false;
  }
  return true;
}

double level_hit_max_frequency(QuasiTree& t, int level, int walks, Rng& rng) {
  require(walks > 0, Errc::invalid_parameter, "walks must be positive");
  std::map<std::uint64_t, int> hits;
  const auto mark = t.checkpoint();
  for (int i = 0; i < walks; ++i) {
    TreeVertex cur = t.root();
    while (t.level(cur) < level) cur = t.step(cur, rng);
    ++hits[t.ball(cur.ball).key];
    t.rollback(mark);
  }
  int best = 0;
  for (const auto& [k, c] : hits) best = std::max(best, c);
  return static_cast<double>(best) / walks;
}

}  // namespace qrg
