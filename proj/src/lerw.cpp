#include "qrg/lerw.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/Dense>

#include "qrg/error.hpp"

namespace qrg {

std::vector<RegenBlock> detect_regenerations(const WalkTrace& trace, int tail_buffer) {
  // count crossings per edge (named by its child ball)
  std::unordered_map<int, int> count;
  for (const auto& c : trace.lr_crossings) {
    int child = c.level_after > trace.levels[c.time - 1] ? c.to.ball : c.from.ball;
    ++count[child];
  }
  const int cutoff = trace.length() - tail_buffer;
  std::vector<RegenBlock> out;
  for (const auto& c : trace.lr_crossings) {
    if (c.level_after <= trace.levels[c.time - 1]) continue;  // upward
    if (count[c.to.ball] != 1) continue;
    out.push_back({c.time, c.level_after, c.to.ball, c.time <= cutoff});
  }
  return out;
}

LerwPath loop_erase(const WalkTrace& trace, int horizon) {
  const int last = std::min(horizon, trace.length());
  auto id = [](TreeVertex v) {
    return (static_cast<std::uint64_t>(v.ball) << 32) | static_cast<std::uint32_t>(v.local);
  };
  std::vector<TreeVertex> stack;
  std::unordered_map<std::uint64_t, std::size_t> pos;
  for (int s = 0; s <= last; ++s) {
    const TreeVertex v = trace.steps[s];
    auto it = pos.find(id(v));
    if (it != pos.end()) {
      for (std::size_t k = it->second + 1; k < stack.size(); ++k) pos.erase(id(stack[k]));
      stack.resize(it->second + 1);
      continue;
    }
    pos[id(v)] = stack.size();
    stack.push_back(v);
  }
  LerwPath p;
  for (std::size_t k = 1; k < stack.size(); ++k)
    if (stack[k].ball != stack[k - 1].ball) p.edges.push_back(stack[k].ball);
  return p;
}

BallRef ball_ref(const QuasiTree& t, int id) {
  const auto& b = t.ball(id);
  return {b.center, b.key, id};
}

BallRef child_ref(const QuasiTree& t, const BallRef& b, int local) {
  if (b.id >= 0) {
    int c = t.peek_child(b.id, local);
    if (c >= 0) return ball_ref(t, c);
  }
  std::uint64_t key = t.child_key(b.key, local);
  return {t.child_center(key), key, -1};
}

namespace {

template <class Mat, class Vec>
BallSolve solve_ball_impl(const RootedBall& shape, bool has_parent, std::span<const double> child_ret) {
  const int m = shape.size();
  Mat a = Mat::Identity(m, m);  // (I - Q)
  double deg[64];
  std::vector<double> deg_big;
  double* d = deg;
  if (m > 64) {
    deg_big.resize(m);
    d = deg_big.data();
  }
  for (int u = 0; u < m; ++u) {
    d[u] = shape.local_degree[u] + (u != 0 ? 1 : (has_parent ? 1 : 0));
    for (auto [w, mult] : shape.adj[u]) a(u, w) -= mult / d[u];
    if (u != 0) a(u, u) -= child_ret[u] / d[u];
  }
  Vec e0 = Vec::Zero(m);
  e0[0] = 1.0;
  // Green function row from the center: g^T (I - Q) = e0^T
  Vec g = a.transpose().partialPivLu().solve(e0);
  BallSolve s;
  s.q.assign(m, 0.0);
  for (int u = 1; u < m; ++u) s.q[u] = g[u] * (1.0 - child_ret[u]) / d[u];
  s.ret = has_parent ? g[0] / d[0] : 0.0;
  return s;
}

}  // namespace

BallSolve solve_ball(const RootedBall& shape, bool has_parent, std::span<const double> child_ret) {
  // small balls stay on the stack
  using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 16, 16>;
  using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 16, 1>;
  if (shape.size() <= 16) return solve_ball_impl<Small, SmallVec>(shape, has_parent, child_ret);
  return solve_ball_impl<Eigen::MatrixXd, Eigen::VectorXd>(shape, has_parent, child_ret);
}

std::size_t ReturnCache::Hash::operator()(const std::tuple<std::uint64_t, int, int>& k) const {
  return static_cast<std::size_t>(
      mix_keys(std::get<0>(k), (static_cast<std::uint64_t>(std::get<1>(k)) << 16) ^ std::get<2>(k)));
}

double* ReturnCache::find(std::uint64_t key, int center, int depth) {
  auto it = map_.find({key, center, depth});
  return it == map_.end() ? nullptr : &it->second;
}

void ReturnCache::put(std::uint64_t key, int center, int depth, double v) {
  map_[{key, center, depth}] = v;
}

namespace {

std::vector<double> child_returns(const QuasiTree& t, const BallRef& b, int depth, ReturnCache* cache) {
  const RootedBall& shape = t.atlas().at(b.center);
  std::vector<double> r(shape.size(), 0.0);
  if (depth <= 1) return r;  // children sit on the absorbing level
  for (int u = 1; u < shape.size(); ++u) r[u] = return_prob(t, child_ref(t, b, u), depth - 1, cache);
  return r;
}

}  // namespace

double return_prob(const QuasiTree& t, const BallRef& b, int depth, ReturnCache* cache) {
  require(depth >= 1, Errc::invalid_parameter, "depth must be >= 1");
  if (cache)
    if (double* hit = cache->find(b.key, b.center, depth)) return *hit;
  auto r = child_returns(t, b, depth, cache);
  double v = solve_ball(t.atlas().at(b.center), true, r).ret;
  if (cache) cache->put(b.key, b.center, depth, v);
  return v;
}

std::vector<double> exit_distribution_exact(const QuasiTree& t, const BallRef& b, int depth, ReturnCache* cache) {
  require(depth >= 1, Errc::invalid_parameter, "depth must be >= 1");
  auto r = child_returns(t, b, depth, cache);
  return solve_ball(t.atlas().at(b.center), false, r).q;
}

ExitEstimate exit_distribution_mc(QuasiTree& t, int ball, int depth, int trials, Rng& rng) {
  require(depth >= 1, Errc::invalid_parameter, "depth must be >= 1");
  const RootedBall& shape = t.shape(ball);
  ExitEstimate est;
  est.trials = trials;
  std::vector<long long> hits(shape.size(), 0);
  const int target = t.ball(ball).level + depth;
  const auto mark = t.checkpoint();
  for (int i = 0; i < trials; ++i) {
    TreeVertex cur{ball, 0};
    int last_exit = -1;
    while (t.level(cur) < target) {
      TreeVertex next;
      if (cur.ball == ball && cur.local == 0) {
        // the subtree walk has no edge above its root
        int r = static_cast<int>(uniform_below(rng, shape.local_degree[0]));
        for (auto [w, m] : shape.adj[0]) {
          if (r < m) {
            next = {ball, w};
            break;
          }
          r -= m;
        }
      } else {
        next = t.step(cur, rng);
      }
      if (cur.ball == ball && next.ball != ball) last_exit = cur.local;
      cur = next;
    }
    ++hits[last_exit];
    t.rollback(mark);
  }
  est.p.resize(shape.size());
  est.se.resize(shape.size());
  for (int u = 0; u < shape.size(); ++u) {
    est.p[u] = trials > 0 ? static_cast<double>(hits[u]) / trials : 0.0;
    est.se[u] = trials > 0 ? std::sqrt(est.p[u] * (1 - est.p[u]) / trials) : 0.0;
  }
  return est;
}

StepProb lerw_step_prob(QuasiTree& t, int ball, int target_local, const StepParams& params, Rng& rng,
                        ReturnCache* cache) {
  require(target_local > 0 && target_local < t.shape(ball).size(), Errc::invalid_parameter,
          "target must be a non-center vertex of the ball");
  StepProb sp;
  if (t.shape(ball).size() == 2) {
    sp.p = 1.0;  // only one way out
    return sp;
  }
  if (params.method == StepMethod::exact_truncated) {
    sp.p = exit_distribution_exact(t, ball_ref(t, ball), params.depth, cache)[target_local];
    sp.wide_ci = params.depth < 2;
  } else {
    auto est = exit_distribution_mc(t, ball, params.depth, params.trials, rng);
    sp.p = est.p[target_local];
    sp.se = est.se[target_local];
    sp.wide_ci = params.trials < 1000 || params.depth < 2;
  }
  return sp;
}

double path_weight_W(QuasiTree& t, const LerwPath& path, const StepParams& params, Rng& rng,
                     ReturnCache* cache) {
  double w = 0.0;
  for (int e : path.edges) {
    const auto& b = t.ball(e);
    w -= std::log(lerw_step_prob(t, b.parent, b.parent_local, params, rng, cache).p);
  }
  return w;
}

WtildeValue wtilde_exact(const QuasiTree& t, int edge_ball, int lookahead, ReturnCache* cache) {
  require(t.ball(edge_ball).parent >= 0, Errc::invalid_parameter, "the root ball has no incoming edge");
  const int level = t.ball(edge_ball).level;
  WtildeValue w;
  for (int c = edge_ball; t.ball(c).parent >= 0; c = t.ball(c).parent) {
    const auto& cb = t.ball(c);
    const int p = cb.parent;
    const int depth = std::min(level - t.ball(p).level, lookahead);
    w.value -= std::log(exit_distribution_exact(t, ball_ref(t, p), depth, cache)[cb.parent_local]);
  }
  return w;
}

WtildeValue first_hit_weight_Wtilde(QuasiTree& t, int edge_ball, int trials, Rng& rng) {
  require(trials > 0, Errc::invalid_parameter, "trials must be positive");
  const int level = t.ball(edge_ball).level;
  require(level >= 1, Errc::invalid_parameter, "the root ball has no incoming edge");
  const auto mark = t.checkpoint();
  long long hits = 0;
  for (int i = 0; i < trials; ++i) {
    TreeVertex cur = t.root();
    while (t.level(cur) < level) cur = t.step(cur, rng);
    if (cur.ball == edge_ball) ++hits;
    t.rollback(mark);
  }
  WtildeValue w;
  if (hits == 0) {
    w.value = std::log(static_cast<double>(trials));
    w.lower_bound_only = true;
    return w;
  }
  const double p = static_cast<double>(hits) / trials;
  w.value = -std::log(p);
  w.se = std::sqrt((1 - p) / (p * trials));  // delta method
  return w;
}

bool truncation_event(const WtildeValue& w, int level, double n, double A, int K) {
  if (level < K) return false;
  if (w.lower_bound_only || std::isinf(w.value)) return true;
  const double ln = std::log(n);
  return w.value > ln - A * std::sqrt(ln);
}

std::vector<BlockRow> block_rows(QuasiTree& t, const std::vector<RegenBlock>& blocks, int replica,
                                 const StepParams& params, Rng& rng, ReturnCache* cache) {
  std::vector<BlockRow> rows;
  int prev = -1;
  int k = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!blocks[i].confirmed) break;
    ++k;
    if (prev >= 0) {
      const auto& a = blocks[prev];
      const auto& b = blocks[i];
      // path of balls from a's ball down to b's ball
      double y = 0.0;
      for (int c = b.edge_ball; c != a.edge_ball; c = t.ball(c).parent) {
        const auto& cb = t.ball(c);
        y -= std::log(lerw_step_prob(t, cb.parent, cb.parent_local, params, rng, cache).p);
      }
      rows.push_back({replica, k, b.sigma - a.sigma, b.phi - a.phi, y});
    }
    prev = static_cast<int>(i);
  }
  return rows;
}

namespace {

double block_sum_variance_ratio(std::span<const BlockRow> rows, std::size_t k) {
  if (rows.size() < 2 * k) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> sums;
  for (std::size_t start = 0; start + k <= rows.size(); start += k) {
    double s = 0.0;
    for (std::size_t i = start; i < start + k; ++i) s += rows[i].Y;
    sums.push_back(s);
  }
  return variance(sums) / static_cast<double>(k);
}

template <class F>
double ratio_of_means(std::span<const BlockRow> rows, std::span<const std::size_t> idx, F num, F den) {
  double a = 0, b = 0;
  for (auto i : idx) {
    a += num(rows[i]);
    b += den(rows[i]);
  }
  return a / b;
}

}  // namespace

SpeedEstimate estimate_speed(std::span<const BlockRow> rows, std::uint64_t seed, int bootstrap) {
  require(static_cast<int>(rows.size()) >= kMinBlocks, Errc::insufficient_data,
          "need at least 100 regeneration gaps");
  using Fn = double (*)(const BlockRow&);
  Fn phi = [](const BlockRow& r) { return static_cast<double>(r.phi_gap); };
  Fn sig = [](const BlockRow& r) { return static_cast<double>(r.sigma_gap); };
  std::vector<std::size_t> all(rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  SpeedEstimate s;
  s.nu_hat = ratio_of_means(rows, std::span<const std::size_t>(all), phi, sig);
  s.ci = bootstrap_ci(rows.size(), bootstrap, seed,
                      [&](std::span<const std::size_t> idx) { return ratio_of_means(rows, idx, phi, sig); });
  return s;
}

EntropyEstimate estimate_entropy(std::span<const BlockRow> rows, std::uint64_t seed, int bootstrap) {
  require(static_cast<int>(rows.size()) >= kMinBlocks, Errc::insufficient_data,
          "need at least 100 confirmed blocks");
  using Fn = double (*)(const BlockRow&);
  Fn phi = [](const BlockRow& r) { return static_cast<double>(r.phi_gap); };
  Fn sig = [](const BlockRow& r) { return static_cast<double>(r.sigma_gap); };
  Fn y = [](const BlockRow& r) { return r.Y; };
  Fn one = [](const BlockRow&) { return 1.0; };

  std::vector<std::size_t> all(rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::span<const std::size_t> idx(all);

  EntropyEstimate e;
  e.blocks_used = static_cast<int>(rows.size());
  e.mean_phi_gap = ratio_of_means(rows, idx, phi, one);
  e.mean_sigma_gap = ratio_of_means(rows, idx, sig, one);
  e.gamma_hat = ratio_of_means(rows, idx, y, one);
  e.nu_hat = e.mean_phi_gap / e.mean_sigma_gap;
  e.h_hat = e.gamma_hat / e.mean_phi_gap;
  e.degenerate = e.gamma_hat <= 0.0;
  e.time_factor = e.degenerate ? std::numeric_limits<double>::infinity() : e.mean_sigma_gap / e.gamma_hat;

  auto boot = [&](Fn num, Fn den, std::uint64_t salt) {
    return bootstrap_ci(rows.size(), bootstrap, mix_keys(seed, salt),
                        [&](std::span<const std::size_t> ix) { return ratio_of_means(rows, ix, num, den); });
  };
  e.nu_ci = boot(phi, sig, 1);
  e.h_ci = boot(y, phi, 2);
  e.gamma_ci = boot(y, one, 3);
  if (!e.degenerate) e.time_factor_ci = boot(sig, y, 4);
  e.var_ratio_100 = block_sum_variance_ratio(rows, 100);
  e.var_ratio_400 = block_sum_variance_ratio(rows, 400);
  return e;
}

EntropicTime entropic_time(double n, const EntropyEstimate& est) {
  const double ln = std::log(n);
  EntropicTime t;
  t.value = ln / (est.nu_hat * est.h_hat);
  // the interval combines the two marginal intervals, so it widens with either of them
  t.ci = {ln / (est.nu_ci.hi * est.h_ci.hi), ln / (est.nu_ci.lo * est.h_ci.lo)};
  return t;
}

}  // namespace qrg
