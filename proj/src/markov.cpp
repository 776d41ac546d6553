#include "qrg/markov.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "qrg/error.hpp"
#include "qrg/kernels.hpp"

namespace qrg {

double TransitionKernel::at(int i, int j) const {
  for (int e = row_ptr[i]; e < row_ptr[i + 1]; ++e)
    if (col[e] == j) return val[e];
  return 0.0;
}

Eigen::MatrixXd TransitionKernel::dense() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int e = row_ptr[i]; e < row_ptr[i + 1]; ++e) p(i, col[e]) += val[e];
  return p;
}

double TransitionKernel::max_row_error() const {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int e = row_ptr[i]; e < row_ptr[i + 1]; ++e) s += val[e];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

TransitionKernel TransitionKernel::from_triplets(int n, std::vector<std::tuple<int, int, double>> entries,
                                                 double laziness) {
  std::sort(entries.begin(), entries.end());
  TransitionKernel k;
  k.n = n;
  k.laziness = laziness;
  k.row_ptr.assign(n + 1, 0);
  // merge duplicates
  std::vector<std::tuple<int, int, double>> merged;
  for (const auto& t : entries) {
    require(std::get<0>(t) >= 0 && std::get<0>(t) < n && std::get<1>(t) >= 0 && std::get<1>(t) < n,
            Errc::invalid_input, "kernel index out of range");
    require(std::get<2>(t) >= 0.0, Errc::invalid_input, "negative transition probability");
    if (!merged.empty() && std::get<0>(merged.back()) == std::get<0>(t) &&
        std::get<1>(merged.back()) == std::get<1>(t))
      std::get<2>(merged.back()) += std::get<2>(t);
    else
      merged.push_back(t);
  }
  for (const auto& [i, j, v] : merged) {
    k.col.push_back(j);
    k.val.push_back(v);
    ++k.row_ptr[i + 1];
  }
  for (int i = 0; i < n; ++i) k.row_ptr[i + 1] += k.row_ptr[i];

  k.t_row_ptr.assign(n + 1, 0);
  for (int j : k.col) ++k.t_row_ptr[j + 1];
  for (int i = 0; i < n; ++i) k.t_row_ptr[i + 1] += k.t_row_ptr[i];
  k.t_col.resize(k.col.size());
  k.t_val.resize(k.val.size());
  std::vector<int> fill(k.t_row_ptr.begin(), k.t_row_ptr.end() - 1);
  for (int i = 0; i < n; ++i)
    for (int e = k.row_ptr[i]; e < k.row_ptr[i + 1]; ++e) {
      int slot = fill[k.col[e]]++;
      k.t_col[slot] = i;
      k.t_val[slot] = k.val[e];
    }
  return k;
}

TransitionKernel TransitionKernel::from_dense(const Eigen::MatrixXd& p, double laziness) {
  require(p.rows() == p.cols(), Errc::invalid_input, "kernel must be square");
  std::vector<std::tuple<int, int, double>> t;
  for (int i = 0; i < p.rows(); ++i)
    for (int j = 0; j < p.cols(); ++j)
      if (p(i, j) != 0.0) t.emplace_back(i, j, p(i, j));
  return from_triplets(static_cast<int>(p.rows()), std::move(t), laziness);
}

TransitionKernel srw_kernel(const Graph& g, double laziness) {
  require(g.n() > 0, Errc::invalid_input, "empty graph");
  require(laziness >= 0.0 && laziness < 1.0, Errc::invalid_parameter, "laziness must be in [0,1)");
  std::vector<std::tuple<int, int, double>> t;
  for (int x = 0; x < g.n(); ++x) {
    require(g.degree(x) > 0, Errc::invalid_input, "isolated vertex");
    const double inv = (1.0 - laziness) / g.degree(x);
    for (const auto& nb : g.neighbors(x)) t.emplace_back(x, nb.vertex, inv * nb.mult);
    if (laziness > 0.0) t.emplace_back(x, x, laziness);
  }
  return TransitionKernel::from_triplets(g.n(), std::move(t), laziness);
}

std::vector<double> stationary(const TransitionKernel& k, const Graph& g) {
  require(k.n == g.n(), Errc::invalid_input, "kernel/graph size mismatch");
  require(is_connected(g), Errc::invalid_input, "graph is disconnected");
  std::vector<double> pi(g.n());
  const double total = static_cast<double>(g.total_degree());
  for (int v = 0; v < g.n(); ++v) pi[v] = g.degree(v) / total;
  std::vector<double> next(g.n());
  evolve_batch_serial(k, pi, next, 1);
  for (int v = 0; v < g.n(); ++v)
    require(std::abs(next[v] - pi[v]) <= 1e-12, Errc::invalid_input, "pi P != pi");
  return pi;
}

bool is_reversible(const TransitionKernel& k, std::span<const double> pi, double tol) {
  for (int x = 0; x < k.n; ++x)
    for (int e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
      int y = k.col[e];
      if (std::abs(pi[x] * k.val[e] - pi[y] * k.at(y, x)) > tol) return false;
    }
  return true;
}

double tv_distance(std::span<const double> mu, std::span<const double> nu) {
  require(mu.size() == nu.size(), Errc::invalid_input, "distribution size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += std::abs(mu[i] - nu[i]);
  return 0.5 * s;
}

std::optional<int> MixingProfile::tmix_at(double e) const {
  for (std::size_t t = 0; t < d.size(); ++t)
    if (d[t] <= e) return static_cast<int>(t);
  return std::nullopt;
}

std::optional<int> MixingProfile::window(double e) const {
  auto a = tmix_at(e), b = tmix_at(1.0 - e);
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

namespace {

bool irreducible(const TransitionKernel& k) {
  // strongly connected: forward and backward reachability from 0
  auto reach = [&](const std::vector<int>& ptr, const std::vector<int>& col) {
    std::vector<char> seen(k.n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int e = ptr[u]; e < ptr[u + 1]; ++e)
        if (!seen[col[e]]) {
          seen[col[e]] = 1;
          ++count;
          stack.push_back(col[e]);
        }
    }
    return count == k.n;
  };
  return reach(k.row_ptr, k.col) && reach(k.t_row_ptr, k.t_col);
}

bool periodic2(const TransitionKernel& k) {
  for (int x = 0; x < k.n; ++x)
    if (k.at(x, x) > 0.0) return false;
  std::vector<int> color(k.n, -1);
  color[0] = 0;
  std::vector<int> queue{0};
  for (std::size_t h = 0; h < queue.size(); ++h) {
    int u = queue[h];
    for (int e = k.row_ptr[u]; e < k.row_ptr[u + 1]; ++e) {
      int v = k.col[e];
      if (color[v] < 0) {
        color[v] = 1 - color[u];
        queue.push_back(v);
      } else if (color[v] == color[u]) {
        return false;
      }
    }
  }
  return true;
}

struct RunResult {
  std::vector<double> d;
  int worst_start = 0;
};

RunResult run_starts(const TransitionKernel& k, std::span<const double> pi, const std::vector<int>& starts,
                     double stop_below, int t_cap, bool parallel) {
  const std::size_t n = k.n;
  const int m = static_cast<int>(starts.size());
  std::vector<double> cur(m * n, 0.0), next(m * n, 0.0), tv(m);
  for (int i = 0; i < m; ++i) cur[i * n + starts[i]] = 1.0;
  RunResult r;
  auto record = [&]() {
    if (parallel)
      batch_tv_parallel(cur, pi, m, tv);
    else
      batch_tv_serial(cur, pi, m, tv);
    // fixed-order reduction by start index
    int arg = 0;
    for (int i = 1; i < m; ++i)
      if (tv[i] > tv[arg]) arg = i;
    r.d.push_back(tv[arg]);
    r.worst_start = starts[arg];
  };
  record();
  for (int t = 1; t <= t_cap && r.d.back() >= stop_below; ++t) {
    if (parallel)
      evolve_batch_parallel(k, cur, next, m);
    else
      evolve_batch_serial(k, cur, next, m);
    std::swap(cur, next);
    record();
  }
  return r;
}

}  // namespace

MixingProfile mixing_profile(const TransitionKernel& k, std::span<const double> pi,
                             const MixingOptions& opt) {
  require(opt.t_cap >= 1, Errc::invalid_parameter, "t_cap must be >= 1");
  require(!opt.eps.empty(), Errc::invalid_parameter, "empty eps list");
  require(static_cast<int>(pi.size()) == k.n, Errc::invalid_input, "pi size mismatch");
  MixingProfile prof;
  prof.eps = opt.eps;
  prof.start_mode = opt.mode.value_or(k.n <= kExactStartCap ? StartMode::exact_all_starts
                                                            : StartMode::sampled_starts);
  const double stop_below = *std::min_element(opt.eps.begin(), opt.eps.end()) / 2.0;

  std::vector<int> starts;
  if (prof.start_mode == StartMode::exact_all_starts) {
    starts.resize(k.n);
    std::iota(starts.begin(), starts.end(), 0);
  } else {
    prof.lower_bound = true;
    Rng rng = make_rng(opt.seed, "starts");
    std::vector<int> all(k.n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    starts.assign(all.begin(), all.begin() + std::min(opt.sampled_starts, k.n));
  }
  prof.start_count = static_cast<int>(starts.size());

  if (!irreducible(k) || periodic2(k)) {
    // never converges; report d(0) only
    double worst = 0.0;
    for (int x : starts) worst = std::max(worst, 1.0 - pi[x]);
    prof.d.push_back(worst);
    prof.tmix.assign(opt.eps.size(), std::nullopt);
    return prof;
  }

  RunResult r = run_starts(k, pi, starts, stop_below, opt.t_cap, opt.parallel);
  if (prof.start_mode == StartMode::sampled_starts) {
    // greedy refinement: also start from the neighbors of the worst sampled start
    std::set<int> have(starts.begin(), starts.end());
    for (int e = k.row_ptr[r.worst_start]; e < k.row_ptr[r.worst_start + 1]; ++e)
      if (have.insert(k.col[e]).second) starts.push_back(k.col[e]);
    if (static_cast<int>(starts.size()) > prof.start_count) {
      prof.start_count = static_cast<int>(starts.size());
      r = run_starts(k, pi, starts, stop_below, opt.t_cap, opt.parallel);
    }
  }
  prof.d = std::move(r.d);
  prof.converged = prof.d.back() < stop_below;
  for (double e : opt.eps) prof.tmix.push_back(prof.tmix_at(e));
  return prof;
}

namespace {

Eigen::MatrixXd symmetrized(const TransitionKernel& k, std::span<const double> pi) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k.n, k.n);
  for (int x = 0; x < k.n; ++x)
    for (int e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
      s(x, k.col[e]) += std::sqrt(pi[x] / pi[k.col[e]]) * k.val[e];
  // remove rounding asymmetry
  return 0.5 * (s + s.transpose());
}

void require_reversible(const TransitionKernel& k, std::span<const double> pi) {
  require(static_cast<int>(pi.size()) == k.n, Errc::invalid_input, "pi size mismatch");
  require(is_reversible(k, pi, 1e-10), Errc::invalid_input, "kernel is not reversible w.r.t. pi");
}

// Top eigenvalue of (I + sign*S)/2 orthogonal to sqrt(pi), by power iteration.
std::pair<double, bool> deflated_power(const TransitionKernel& k, std::span<const double> pi, double sign) {
  const int n = k.n;
  Eigen::VectorXd root(n), v(n), w(n);
  for (int i = 0; i < n; ++i) root[i] = std::sqrt(pi[i]);
  Rng rng(12345);
  for (int i = 0; i < n; ++i) v[i] = uniform01(rng) - 0.5;
  double prev = 0.0;
  for (int it = 0; it < 100000; ++it) {
    v -= root.dot(v) * root;
    v.normalize();
    for (int x = 0; x < n; ++x) {
      double s = 0.0;
      for (int e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
        s += std::sqrt(pi[x] / pi[k.col[e]]) * k.val[e] * v[k.col[e]];
      w[x] = 0.5 * (v[x] + sign * s);
    }
    double rq = v.dot(w);
    v = w;
    if (it > 10 && std::abs(rq - prev) < 1e-9) return {rq, true};
    prev = rq;
  }
  return {prev, false};
}

}  // namespace

std::vector<double> eigenvalues(const TransitionKernel& k, std::span<const double> pi) {
  require_reversible(k, pi);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(k, pi), Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + k.n);
  return ev;  // ascending
}

SpectralReport spectral_report(const TransitionKernel& k, std::span<const double> pi, int dense_cap) {
  require(k.n >= 2, Errc::invalid_input, "spectral report needs at least 2 states");
  SpectralReport r;
  if (k.n <= dense_cap) {
    auto ev = eigenvalues(k, pi);
    r.lambda_min = ev.front();
    r.lambda2 = ev[ev.size() - 2];
    r.method = SpectralReport::Method::dense;
  } else {
    require_reversible(k, pi);
    auto [top, ok1] = deflated_power(k, pi, +1.0);
    auto [bot, ok2] = deflated_power(k, pi, -1.0);
    r.lambda2 = 2.0 * top - 1.0;
    r.lambda_min = 1.0 - 2.0 * bot;
    r.method = SpectralReport::Method::iterative;
    r.converged = ok1 && ok2;
  }
  r.gap_abs = 1.0 - std::max(std::abs(r.lambda2), std::abs(r.lambda_min));
  r.gap_rel = 1.0 - r.lambda2;
  return r;
}

CheegerResult cheeger_bruteforce(const TransitionKernel& k, std::span<const double> pi) {
  require(k.n <= kCheegerCap, Errc::size_limit, "brute force limited to 16 states");
  require(k.n >= 1, Errc::invalid_input, "empty kernel");
  const int n = k.n;
  const std::uint32_t full = (1u << n) - 1;
  Eigen::MatrixXd p = k.dense();
  // q[S] = Q(S,S), m[S] = pi(S)
  std::vector<double> q(full + 1, 0.0), mass(full + 1, 0.0);
  for (std::uint32_t s = 1; s <= full; ++s) {
    int x = std::countr_zero(s);
    std::uint32_t rest = s & (s - 1);
    double add = pi[x] * p(x, x);
    for (std::uint32_t r = rest; r; r &= r - 1) {
      int y = std::countr_zero(r);
      add += pi[x] * p(x, y) + pi[y] * p(y, x);
    }
    q[s] = q[rest] + add;
    mass[s] = mass[rest] + pi[x];
  }
  CheegerResult res;
  res.phi_star = std::numeric_limits<double>::infinity();
  res.zeta_star = std::numeric_limits<double>::infinity();
  for (std::uint32_t s = 1; s <= full; ++s) {
    const double flow_out = mass[s] - q[s];
    if (mass[s] <= 0.5 + 1e-12 && s != full) {
      double phi = flow_out / mass[s];
      if (phi < res.phi_star) {
        res.phi_star = phi;
        res.phi_set = s;
      }
    }
    // A ranges over submasks of S (both orders visited; harmless)
    for (std::uint32_t a = s;; a = (a - 1) & s) {
      double z = (q[a] + q[s & ~a] + flow_out) / mass[s];
      if (z < res.zeta_star) {
        res.zeta_star = z;
        res.zeta_set = s;
        res.zeta_a = a;
      }
      if (a == 0) break;
    }
  }
  return res;
}

BlockChain block_chain(const TransitionKernel& k, std::span<const double> pi, const Partition& p) {
  require(static_cast<int>(p.block_of.size()) == k.n, Errc::invalid_input, "partition does not cover states");
  for (int b : p.block_of) require(b >= 0 && b < p.size(), Errc::invalid_input, "state without block");
  const int m = p.size();
  BlockChain bc;
  bc.pi.assign(m, 0.0);
  for (int x = 0; x < k.n; ++x) bc.pi[p.block_of[x]] += pi[x];
  std::vector<std::tuple<int, int, double>> t;
  for (int x = 0; x < k.n; ++x) {
    const int i = p.block_of[x];
    for (int e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
      t.emplace_back(i, p.block_of[k.col[e]], pi[x] / bc.pi[i] * k.val[e]);
  }
  bc.kernel = TransitionKernel::from_triplets(m, std::move(t));
  return bc;
}

BlockChain matching_block_multigraph(const Partition& p, const PerfectMatching& m) {
  require(static_cast<int>(p.block_of.size()) == m.n(), Errc::invalid_input, "partition does not cover matching");
  const int blocks = p.size();
  std::vector<std::tuple<int, int, double>> t;
  for (auto [u, v] : m.pairs) {
    int i = p.block_of[u], j = p.block_of[v];
    // each matched pair is one edge of H; a loop contributes 2 to its block's degree
    t.emplace_back(i, j, 1.0 / p.blocks[i].size());
    t.emplace_back(j, i, 1.0 / p.blocks[j].size());
  }
  if (m.unmatched) {
    int i = p.block_of[*m.unmatched];
    t.emplace_back(i, i, 1.0 / p.blocks[i].size());
  }
  BlockChain bc;
  bc.kernel = TransitionKernel::from_triplets(blocks, std::move(t));
  bc.pi.resize(blocks);
  for (int i = 0; i < blocks; ++i) bc.pi[i] = static_cast<double>(p.blocks[i].size()) / m.n();
  return bc;
}

RestrictedChain restricted_kernel(const TransitionKernel& k, std::span<const double> pi,
                                  const std::vector<int>& block) {
  require(!block.empty(), Errc::invalid_parameter, "empty block");
  std::vector<int> local(k.n, -1);
  for (int i = 0; i < static_cast<int>(block.size()); ++i) local[block[i]] = i;
  const int m = static_cast<int>(block.size());
  std::vector<std::tuple<int, int, double>> t;
  RestrictedChain rc;
  rc.pi.resize(m);
  double mass = 0.0;
  for (int i = 0; i < m; ++i) {
    int x = block[i];
    double leave = 0.0;
    for (int e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
      int y = local[k.col[e]];
      if (y >= 0 && y != i) {
        t.emplace_back(i, y, k.val[e]);
        leave += k.val[e];
      }
    }
    t.emplace_back(i, i, 1.0 - leave);
    rc.pi[i] = pi[x];
    mass += pi[x];
  }
  for (double& v : rc.pi) v /= mass;
  rc.kernel = TransitionKernel::from_triplets(m, std::move(t));
  rc.gap_defined = m >= 2;
  return rc;
}

DecompositionCheck decomposition_check(const TransitionKernel& k, std::span<const double> pi,
                                       const Partition& p) {
  DecompositionCheck c;
  c.gamma = spectral_report(k, pi).gap_rel;
  auto bc = block_chain(k, pi, p);
  c.gamma_hat = bc.kernel.n >= 2 ? spectral_report(bc.kernel, bc.pi).gap_rel : 1.0;
  c.gamma_star = std::numeric_limits<double>::infinity();
  for (const auto& b : p.blocks) {
    auto rc = restricted_kernel(k, pi, b);
    if (!rc.gap_defined) continue;
    c.gamma_star = std::min(c.gamma_star, spectral_report(rc.kernel, rc.pi).gap_rel);
  }
  if (!std::isfinite(c.gamma_star)) c.gamma_star = 1.0;
  return c;
}

}  // namespace qrg
