#include "qrg/experiments.hpp"

#include <cmath>
#include <sstream>

#include "qrg/error.hpp"

namespace qrg {

Graph make_base(const BaseSpec& spec, int n, Rng& rng) {
  const auto& f = spec.family;
  if (f == "triangle") {
    require(n % 3 == 0, Errc::invalid_parameter, "triangle family needs n divisible by 3");
    return make_triangle_union(n / 3);
  }
  if (f == "cycle") {
    require(n % spec.cycle_len == 0, Errc::invalid_parameter, "cycle family needs n divisible by cycle_len");
    return make_cycle_union(n / spec.cycle_len, spec.cycle_len);
  }
  if (f == "torus") {
    const int w = static_cast<int>(std::lround(std::sqrt(n)));
    require(w * w == n, Errc::invalid_parameter, "torus family needs a square n");
    return make_torus(w, w);
  }
  if (f == "regular") return make_random_regular(n, spec.degree, rng);
  if (f == "clique_tailed") return make_clique_tailed(n, spec.degree, rng);
  throw Error(Errc::invalid_parameter, "unknown base family: " + f);
}

namespace {

std::vector<double> degree_pi(const Graph& g) {
  std::vector<double> pi(g.n());
  for (int v = 0; v < g.n(); ++v) pi[v] = static_cast<double>(g.degree(v)) / g.total_degree();
  return pi;
}

}  // namespace

MixInstance run_mix_instance(const BaseSpec& base, int n, int replica, std::uint64_t master,
                             const MixSettings& s) {
  MixInstance mi;
  mi.n = n;
  mi.replica = replica;
  Rng grng = make_rng(master, "graph", {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(replica)});
  Graph g = make_base(base, n, grng);
  mi.seed = stream_seed(master, "matching", {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(replica)});
  Rng mrng(mi.seed);
  StarGraph star = sample_star(g, mrng);
  mi.connected = is_connected(star.combined);
  mi.laziness = s.laziness;
  if (mi.laziness == 0.0 && is_bipartite(star.combined)) {
    mi.laziness = 0.5;
    mi.switched_lazy = true;
  }
  TransitionKernel k = srw_kernel(star.combined, mi.laziness);
  auto pi = degree_pi(star.combined);
  MixingOptions opt;
  opt.eps = s.eps;
  opt.t_cap = s.t_cap;
  opt.parallel = s.parallel;
  opt.seed = mi.seed;
  mi.profile = mixing_profile(k, pi, opt);
  return mi;
}

SpectralRow run_spectral_instance(const BaseSpec& base, int n, int replica, std::uint64_t master,
                                  double laziness) {
  SpectralRow row;
  row.n = n;
  row.replica = replica;
  Rng grng = make_rng(master, "graph", {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(replica)});
  Graph g = make_base(base, n, grng);
  Rng mrng = make_rng(master, "matching", {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(replica)});
  StarGraph star = sample_star(g, mrng);
  row.connected = is_connected(star.combined);
  TransitionKernel k = srw_kernel(star.combined, laziness);
  row.report = spectral_report(k, degree_pi(star.combined));
  return row;
}

EntropyRun run_entropy(const Graph& base, const EntropySettings& s, std::uint64_t master) {
  auto atlas = BallAtlas::make(base, s.R);
  // replicas own their trees and caches; results are merged in replica order
  std::vector<EntropyRun> parts(s.replicas);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < s.replicas; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    QuasiTree t(atlas, stream_seed(master, "tree", {idx}));
    Rng wrng = make_rng(master, "walk", {idx});
    WalkTrace tr = run_walk(t, t.root(), s.steps, wrng);
    auto blocks = detect_regenerations(tr, s.tail_buffer);
    for (const auto& b : blocks) (b.confirmed ? parts[i].confirmed_blocks : parts[i].unconfirmed_blocks)++;
    ReturnCache cache;
    Rng srng = make_rng(master, "step", {idx});
    parts[i].rows = block_rows(t, blocks, i, s.step, srng, &cache);
  }
  EntropyRun run;
  for (auto& p : parts) {
    run.rows.insert(run.rows.end(), p.rows.begin(), p.rows.end());
    run.confirmed_blocks += p.confirmed_blocks;
    run.unconfirmed_blocks += p.unconfirmed_blocks;
  }
  return run;
}

std::vector<CoupleRow> run_couple(const BaseSpec& base, const CoupleSettings& s, std::uint64_t master) {
  Rng grng = make_rng(master, "graph", {static_cast<std::uint64_t>(s.n)});
  Graph g = make_base(base, s.n, grng);
  auto atlas = BallAtlas::make(g, s.R);
  std::vector<CoupleRow> rows(s.runs);
  std::vector<std::string> errors(s.runs);
#pragma omp parallel for schedule(dynamic)
  for (int run = 0; run < s.runs; ++run) {
    const auto idx = static_cast<std::uint64_t>(run);
    CoupleRow& row = rows[run];
    row.run = run;
    row.n = s.n;
    row.seed = stream_seed(master, "matching", {idx});
    Rng mrng(row.seed);
    StarGraph star = sample_star(g, mrng);
    Rng wrng = make_rng(master, "walk", {idx});
    try {
      int x0 = -1;
      for (int attempt = 0; attempt < s.max_root_tries && x0 < 0; ++attempt) {
        int v = static_cast<int>(uniform_below(wrng, g.n()));
        if (is_k_root(star, *atlas, v, s.params.K)) x0 = v;
      }
      if (x0 < 0) {
        errors[run] = "no K-root found in run " + std::to_string(run);
        continue;
      }
      row.report = explore_and_couple(star, atlas, x0, s.params, wrng);
      Rng brng = make_rng(master, "bad", {idx});
      row.report.bad_count = measure_bad_fraction(star, atlas, x0, s.params, brng);
    } catch (const std::exception& e) {
      errors[run] = e.what();
    }
  }
  for (const auto& e : errors) require(e.empty(), Errc::sampling_failure, e);
  return rows;
}

VerifyReport run_verify(const VerifySettings& s, std::uint64_t master) {
  VerifyReport rep;
  const double tol = s.tol;

  // eigenvalue sandwiches by exhaustive enumeration
  for (int i = 0; i < s.sandwich_instances; ++i) {
    Rng rng = make_rng(master, "verify-sandwich", {static_cast<std::uint64_t>(i)});
    Graph g;
    switch (i % 3) {
      case 0: g = make_triangle_union(2 + static_cast<int>(uniform_below(rng, 3))); break;
      case 1: g = make_cycle(5 + static_cast<int>(uniform_below(rng, 8))); break;
      default: g = make_cycle_union(2, 4 + static_cast<int>(uniform_below(rng, 3))); break;
    }
    StarGraph star = sample_star(g, rng);
    TransitionKernel k = srw_kernel(star.combined);
    auto pi = degree_pi(star.combined);
    auto ev = eigenvalues(k, pi);
    const double l2 = ev[ev.size() - 2], lmin = ev.front();
    auto c = cheeger_bruteforce(k, pi);
    ++rep.sandwich_instances;
    const double phi = c.phi_star, zeta = c.zeta_star;
    if (!(1 - std::sqrt(std::max(0.0, 1 - phi * phi)) <= 1 - l2 + tol && 1 - l2 <= 2 * phi + tol)) {
      ++rep.cheeger_violations;
      std::ostringstream os;
      os << "cheeger instance " << i << " n=" << g.n() << " phi=" << phi << " lambda2=" << l2;
      rep.failures.push_back(os.str());
    }
    if (!(1 - std::sqrt(std::max(0.0, 1 - zeta * zeta)) <= 1 + lmin + tol && 1 + lmin <= 4 * zeta + tol)) {
      ++rep.smallest_violations;
      std::ostringstream os;
      os << "smallest-eigenvalue instance " << i << " n=" << g.n() << " zeta=" << zeta << " lambda_min=" << lmin;
      rep.failures.push_back(os.str());
    }
  }

  // decomposition bound and block-chain comparison on greedy partitions
  // disconnected draws are skipped, so draw until enough connected instances are in
  for (int i = 0; rep.decomposition_instances < s.decomposition_instances && i < 10 * s.decomposition_instances; ++i) {
    Rng rng = make_rng(master, "verify-decomposition", {static_cast<std::uint64_t>(i)});
    Graph g;
    const int cap = s.max_decomposition_n;
    switch (i % 3) {
      case 0: g = make_triangle_union(4 + static_cast<int>(uniform_below(rng, cap / 3 - 3))); break;
      case 1: g = make_cycle_union(1 + static_cast<int>(uniform_below(rng, cap / 12)), 12); break;
      default: {
        const int w = 3 + static_cast<int>(uniform_below(rng, 4));
        g = make_torus(w, w + static_cast<int>(uniform_below(rng, 3)));
        break;
      }
    }
    StarGraph star = sample_star(g, rng);
    if (!is_connected(star.combined)) continue;
    TransitionKernel k = srw_kernel(star.combined);
    auto pi = degree_pi(star.combined);
    Partition part = greedy_partition(g, 3);
    auto d = decomposition_check(k, pi, part);
    ++rep.decomposition_instances;
    const double ratio = d.gamma / (d.gamma_hat * d.gamma_star);
    rep.min_decomposition_ratio = std::min(rep.min_decomposition_ratio, ratio);
    if (!d.holds(tol)) {
      ++rep.decomposition_violations;
      std::ostringstream os;
      os << "decomposition instance " << i << " n=" << g.n() << " gamma=" << d.gamma
         << " gamma_hat=" << d.gamma_hat << " gamma_star=" << d.gamma_star;
      rep.failures.push_back(os.str());
    }

    auto phat = block_chain(k, pi, part);
    auto kk = matching_block_multigraph(part, star.matching);
    const double scale = 1.0 / (g.max_degree() + 1);
    bool ok = true;
    for (int a = 0; a < part.size(); ++a) {
      if (phat.pi[a] + tol < scale * kk.pi[a]) ok = false;
      for (int b = 0; b < part.size(); ++b)
        if (a != b && phat.kernel.at(a, b) + tol < scale * kk.kernel.at(a, b)) ok = false;
    }
    ++rep.block_instances;
    if (!ok) {
      ++rep.block_violations;
      rep.failures.push_back("block comparison instance " + std::to_string(i));
    }
  }
  return rep;
}

}  // namespace qrg
