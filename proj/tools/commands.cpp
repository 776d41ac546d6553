#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "qrg/error.hpp"

namespace qrg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef QRG_VERSION
#define QRG_VERSION "unknown"
#endif

namespace {

std::ostream& log_of(const RunOptions& o) { return o.log ? *o.log : std::cerr; }

std::uint64_t u64(long long x) { return static_cast<std::uint64_t>(x); }

// Written when a run starts and rewritten when it ends.
class Manifest {
 public:
  Manifest(const ExperimentConfig& c, std::string command)
      : dir_(c.out), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
    j_["command"] = std::move(command);
    j_["config"] = config_to_json(c);
    j_["config_hash"] = config_hash(c);
    j_["code_version"] = QRG_VERSION;
    j_["master_seed"] = c.master;
    j_["status"] = "running";
    j_["seeds"] = json::array();
    j_["rows"] = json::object();
    write();
  }

  void seed(json entry) { j_["seeds"].push_back(std::move(entry)); }
  void rows(const std::string& file, long long count) { j_["rows"][file] = count; }

  void finalize(int code) {
    const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    j_["wall_clock_seconds"] = dt;
    j_["exit_code"] = code;
    j_["status"] = code == kPass ? "pass" : code == kCheckFailed ? "check-failed" : "unresolved";
    write();
  }

 private:
  void write() const {
    std::ofstream(fs::path(dir_) / "manifest.json") << j_.dump(2) << "\n";
  }

  std::string dir_;
  std::chrono::steady_clock::time_point start_;
  json j_;
};

std::ofstream open_csv(const ExperimentConfig& c, const std::string& name, const char* header) {
  std::ofstream f(fs::path(c.out) / name);
  require(f.good(), Errc::invalid_parameter, "cannot write " + name);
  f << std::setprecision(12) << header << "\n";
  return f;
}

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : "NA"; }

StarGraph instance_star(const ExperimentConfig& c, int n, int replica) {
  Rng grng = make_rng(c.master, "graph", {u64(n), u64(replica)});
  Graph g = make_base(c.base, n, grng);
  Rng mrng = make_rng(c.master, "matching", {u64(n), u64(replica)});
  return sample_star(g, mrng);
}

void dump_instance(const ExperimentConfig& c, const std::string& stem, const StarGraph& s) {
  std::ofstream(fs::path(c.out) / (stem + ".edges")) << [&] {
    std::ostringstream os;
    write_edge_list(os, s.combined);
    return os.str();
  }();
  std::ofstream mf(fs::path(c.out) / (stem + ".matching"));
  write_matching(mf, s.matching);
}

StepParams step_params(const ExperimentConfig& c) {
  StepParams p;
  p.method = c.step_method == "mc" ? StepMethod::monte_carlo : StepMethod::exact_truncated;
  p.depth = c.depth;
  p.trials = c.trials;
  return p;
}

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

}  // namespace

int cmd_generate(const ExperimentConfig& c, const RunOptions& o) {
  Manifest man(c, "generate");
  long long files = 0;
  for (int n : c.n_list)
    for (int r = 0; r < c.seeds; ++r) {
      StarGraph s = instance_star(c, n, r);
      man.seed({{"n", n}, {"replica", r}, {"graph", stream_seed(c.master, "graph", {u64(n), u64(r)})},
                {"matching", stream_seed(c.master, "matching", {u64(n), u64(r)})}});
      dump_instance(c, "gstar_n" + std::to_string(n) + "_r" + std::to_string(r), s);
      files += 2;
      if (o.summary) {
        auto sizes = component_sizes(s.base);
        log_of(o) << "n=" << n << " replica=" << r << " base components=" << sizes.size()
                  << " max_degree=" << s.combined.max_degree()
                  << " connected=" << (is_connected(s.combined) ? "yes" : "no") << "\n";
      }
    }
  man.rows("files", files);
  man.finalize(kPass);
  return kPass;
}

int cmd_mix(const ExperimentConfig& c, const RunOptions& o) {
  Manifest man(c, "mix");
  MixSettings s;
  s.eps = c.eps;
  s.laziness = c.laziness;
  s.t_cap = c.t_cap;
  auto csv = open_csv(c, "mix.csv", "n,seed,eps,tmix,window");
  if (c.write_profiles) fs::create_directories(fs::path(c.out) / "profiles");
  long long rows = 0;
  bool unresolved = false;
  // per n: t_mix(1/4) and rho per replica
  std::map<int, std::vector<double>> quarter, rho;
  for (int n : c.n_list)
    for (int r = 0; r < c.seeds; ++r) {
      MixInstance mi = run_mix_instance(c.base, n, r, c.master, s);
      man.seed({{"n", n}, {"replica", r}, {"matching", mi.seed}});
      if (mi.switched_lazy)
        log_of(o) << "warning: n=" << n << " replica=" << r << " G* is bipartite, using laziness 1/2\n";
      if (!mi.connected) log_of(o) << "warning: n=" << n << " replica=" << r << " G* is disconnected\n";
      for (std::size_t i = 0; i < c.eps.size(); ++i) {
        const auto tm = mi.profile.tmix[i];
        unresolved = unresolved || !tm;
        csv << n << "," << mi.seed << "," << c.eps[i] << "," << opt_int(tm) << ","
            << (c.eps[i] < 0.5 ? opt_int(mi.profile.window(c.eps[i])) : "NA") << "\n";
        ++rows;
      }
      if (c.write_profiles) {
        auto pf = open_csv(c, "profiles/n" + std::to_string(n) + "_r" + std::to_string(r) + ".csv", "t,d");
        for (std::size_t t = 0; t < mi.profile.d.size(); ++t) pf << t << "," << mi.profile.d[t] << "\n";
      }
      if (auto q = mi.profile.tmix_at(0.25)) {
        quarter[n].push_back(*q);
        auto a = mi.profile.tmix_at(0.1), b = mi.profile.tmix_at(0.9);
        if (a && b) rho[n].push_back(static_cast<double>(*a - *b) / *q);
      }
    }
  man.rows("mix.csv", rows);

  int code = unresolved ? kUnresolved : kPass;
  std::vector<double> xs, ys;
  for (auto& [n, v] : quarter) {
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(mean(v));
  }
  if (xs.size() >= 2) {
    LinearFit f = linear_fit(xs, ys);
    const bool ok = f.slope > 0;
    if (!ok && code == kPass) code = kCheckFailed;
    if (o.summary) {
      log_of(o) << "fit tmix(1/4) ~ log n: slope=" << f.slope << " intercept=" << f.intercept
                << " r2=" << f.r2 << "\n";
      log_of(o) << (ok ? "PASS" : "FAIL") << " slope positive\n";
    }
  }
  if (o.summary) {
    for (auto& [n, v] : rho) log_of(o) << "n=" << n << " mean rho=" << mean(v) << " (" << v.size() << " seeds)\n";
    if (unresolved) log_of(o) << "UNRESOLVED some t_mix values exceed t_cap\n";
  }
  man.finalize(code);
  return code;
}

int cmd_spectral(const ExperimentConfig& c, const RunOptions& o) {
  Manifest man(c, "spectral");
  auto csv = open_csv(c, "spectral.csv", "n,seed,lambda2,lambda_min,gap_abs");
  std::vector<std::pair<int, int>> jobs;
  for (int n : c.n_list)
    for (int r = 0; r < c.seeds; ++r) jobs.emplace_back(n, r);
  std::vector<SpectralRow> out(jobs.size());
  std::vector<std::string> errors(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      out[i] = run_spectral_instance(c.base, jobs[i].first, jobs[i].second, c.master, c.laziness);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) require(e.empty(), Errc::invalid_input, e);

  double min_rel = 1e300, min_low = 1e300;
  bool unresolved = false;
  int violations = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto [n, r] = jobs[i];
    const auto seed = stream_seed(c.master, "matching", {u64(n), u64(r)});
    man.seed({{"n", n}, {"replica", r}, {"matching", seed}});
    const auto& rep = out[i].report;
    csv << n << "," << seed << "," << rep.lambda2 << "," << rep.lambda_min << "," << rep.gap_abs << "\n";
    unresolved = unresolved || !rep.converged;
    min_rel = std::min(min_rel, 1 - rep.lambda2);
    min_low = std::min(min_low, 1 + rep.lambda_min);
    if (1 - rep.lambda2 < c.spectral_floor || 1 + rep.lambda_min < c.spectral_floor) {
      ++violations;
      const std::string stem = "certificate_n" + std::to_string(n) + "_r" + std::to_string(r);
      dump_instance(c, stem, instance_star(c, n, r));
      log_of(o) << "spectral floor violated at n=" << n << " replica=" << r << ", instance written to " << stem
                << ".*\n";
    }
  }
  man.rows("spectral.csv", static_cast<long long>(jobs.size()));
  if (o.summary) {
    log_of(o) << "min(1-lambda2)=" << min_rel << " min(1+lambda_min)=" << min_low << " floor=" << c.spectral_floor
              << "\n";
    log_of(o) << (violations == 0 ? "PASS" : "FAIL") << " spectral floor (" << violations << " violations)\n";
  }
  const int code = unresolved ? kUnresolved : violations ? kCheckFailed : kPass;
  man.finalize(code);
  return code;
}

namespace {

struct EntropyOutcome {
  EntropyRun run;
  std::optional<EntropyEstimate> est;
  std::string problem;
};

EntropyOutcome entropy_for(const ExperimentConfig& c, int n) {
  Rng grng = make_rng(c.master, "graph", {u64(n)});
  Graph g = make_base(c.base, n, grng);
  EntropySettings s;
  s.R = c.R;
  s.replicas = c.replicas;
  s.steps = c.steps;
  s.tail_buffer = c.tail_buffer;
  s.step = step_params(c);
  EntropyOutcome out;
  out.run = run_entropy(g, s, c.master);
  if (c.trace_dump) {
    // replays replica 0 with the same streams as run_entropy
    QuasiTree t(BallAtlas::make(g, c.R), stream_seed(c.master, "tree", {0}));
    Rng wrng = make_rng(c.master, "walk", {0});
    std::ofstream f(fs::path(c.out) / "trace_r0.csv");
    write_trace(f, run_walk(t, t.root(), c.steps, wrng));
  }
  try {
    out.est = estimate_entropy(out.run.rows, c.master);
    if (out.est->degenerate) out.problem = "every block weight is zero";
  } catch (const Error& e) {
    if (e.code() != Errc::insufficient_data) throw;
    out.problem = e.what();
  }
  return out;
}

}  // namespace

int cmd_entropy(const ExperimentConfig& c, const RunOptions& o) {
  Manifest man(c, "entropy");
  for (int i = 0; i < c.replicas; ++i)
    man.seed({{"replica", i},
              {"tree", stream_seed(c.master, "tree", {u64(i)})},
              {"walk", stream_seed(c.master, "walk", {u64(i)})}});
  const int n = c.n_list.front();
  EntropyOutcome e = entropy_for(c, n);
  {
    auto csv = open_csv(c, "blocks.csv", "replica,block_index,sigma_gap,phi_gap,Y");
    for (const auto& r : e.run.rows)
      csv << r.replica << "," << r.block_index << "," << r.sigma_gap << "," << r.phi_gap << "," << r.Y << "\n";
  }
  man.rows("blocks.csv", static_cast<long long>(e.run.rows.size()));

  json j;
  j["base_n"] = n;
  j["confirmed_blocks"] = e.run.confirmed_blocks;
  j["unconfirmed_blocks"] = e.run.unconfirmed_blocks;
  j["insufficient"] = !e.problem.empty();
  if (!e.problem.empty()) j["problem"] = e.problem;
  if (e.est) {
    const auto& x = *e.est;
    j["h_hat"] = x.h_hat;
    j["nu_hat"] = x.nu_hat;
    j["gamma_hat"] = x.gamma_hat;
    j["h_ci"] = interval_json(x.h_ci);
    j["nu_ci"] = interval_json(x.nu_ci);
    j["gamma_ci"] = interval_json(x.gamma_ci);
    j["mean_sigma_gap"] = x.mean_sigma_gap;
    j["mean_phi_gap"] = x.mean_phi_gap;
    j["time_factor"] = x.time_factor;
    j["time_factor_ci"] = interval_json(x.time_factor_ci);
    j["blocks_used"] = x.blocks_used;
    j["var_ratio_100"] = std::isnan(x.var_ratio_100) ? json(nullptr) : json(x.var_ratio_100);
    j["var_ratio_400"] = std::isnan(x.var_ratio_400) ? json(nullptr) : json(x.var_ratio_400);
    if (e.problem.empty()) {
      j["entropic_time"] = json::array();
      for (int m : c.n_list) {
        auto t = entropic_time(m, x);
        j["entropic_time"].push_back({{"n", m}, {"t", t.value}, {"ci", interval_json(t.ci)},
                                      {"B_correction", c.B * std::sqrt(std::log(static_cast<double>(m)))}});
      }
    }
  }
  std::ofstream(fs::path(c.out) / "entropy.json") << j.dump(2) << "\n";

  if (o.summary) {
    if (e.est)
      log_of(o) << "h_hat=" << e.est->h_hat << " nu_hat=" << e.est->nu_hat << " blocks=" << e.est->blocks_used
                << "\n";
    log_of(o) << (e.problem.empty() ? "PASS" : "UNRESOLVED") << " entropy estimate"
              << (e.problem.empty() ? "" : ": " + e.problem) << "\n";
  }
  const int code = e.problem.empty() ? kPass : kUnresolved;
  man.finalize(code);
  return code;
}

int cmd_couple(const ExperimentConfig& c, const RunOptions& o) {
  Manifest man(c, "couple");
  const int n = c.n_list.front();
  const double logn = std::log(static_cast<double>(n));
  int t = 0;
  json tinfo;
  if (c.t) {
    t = static_cast<int>(std::lround(*c.t * c.t_scale));
    tinfo["source"] = "config";
  } else {
    EntropyOutcome e = entropy_for(c, n);
    if (!e.problem.empty()) {
      log_of(o) << "cannot predict t: " << e.problem << "\n";
      man.finalize(kUnresolved);
      return kUnresolved;
    }
    const double pred = entropic_time(n, *e.est).value - c.B * std::sqrt(logn);
    t = std::max(0, static_cast<int>(std::lround(pred * c.t_scale)));
    tinfo["source"] = "entropic";
    tinfo["prediction"] = pred;
    tinfo["h_hat"] = e.est->h_hat;
    tinfo["nu_hat"] = e.est->nu_hat;
  }
  tinfo["t"] = t;

  CoupleSettings s;
  s.n = n;
  s.R = c.R;
  s.runs = c.runs;
  s.max_root_tries = c.max_root_tries;
  s.params.t = t;
  s.params.K = c.K;
  s.params.A = c.A;
  s.params.lookahead = c.lookahead;
  s.params.level_budget = c.level_budget;
  auto rows = run_couple(c.base, s, c.master);

  auto csv = open_csv(c, "couple.csv", "seed,n,K,R,t,outcome,cause,steps_coupled,explored,bad_count");
  std::map<std::string, int> causes;
  int successes = 0;
  for (const auto& r : rows) {
    man.seed({{"run", r.run}, {"matching", r.seed}});
    const auto& rep = r.report;
    csv << r.seed << "," << r.n << "," << c.K << "," << c.R << "," << t << ","
        << (rep.success ? "success" : "fail") << "," << (rep.success ? "" : cause_name(rep.cause)) << ","
        << rep.steps_coupled << "," << rep.explored_vertices << "," << rep.bad_count << "\n";
    if (rep.success) ++successes;
    else ++causes[cause_name(rep.cause)];
  }
  man.rows("couple.csv", static_cast<long long>(rows.size()));
  const double rate = static_cast<double>(successes) / rows.size();
  json sj;
  sj["t"] = tinfo;
  sj["runs"] = rows.size();
  sj["successes"] = successes;
  sj["success_rate"] = rate;
  sj["causes"] = causes;
  std::ofstream(fs::path(c.out) / "couple_summary.json") << sj.dump(2) << "\n";
  if (o.summary) {
    log_of(o) << "t=" << t << " success_rate=" << rate << " (" << successes << "/" << rows.size() << ")\n";
    for (auto& [k, v] : causes) log_of(o) << "  " << k << ": " << v << "\n";
  }
  man.finalize(kPass);
  return kPass;
}

namespace {

// Left Perron vector of a dense stochastic matrix.
std::vector<double> perron(const Eigen::MatrixXd& p) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(p.transpose());
  int best = 0;
  for (int i = 1; i < p.rows(); ++i)
    if (std::abs(es.eigenvalues()[i] - 1.0) < std::abs(es.eigenvalues()[best] - 1.0)) best = i;
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  v /= v.sum();
  return {v.data(), v.data() + v.size()};
}

}  // namespace

int cmd_verify(const ExperimentConfig& c, const RunOptions& o) {
  Manifest man(c, "verify");
  VerifySettings s;
  s.sandwich_instances = c.sandwich_instances;
  s.decomposition_instances = c.decomposition_instances;
  s.max_decomposition_n = c.max_decomposition_n;
  s.tol = c.tol;
  VerifyReport rep = run_verify(s, c.master);

  // user kernels go through the same reversibility gate as everything else
  int extra = 0, extra_fail = 0;
  for (const auto& m : c.extra_kernels) {
    const int k = static_cast<int>(m.size());
    Eigen::MatrixXd p(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) p(i, j) = m[i][j];
    TransitionKernel kern = TransitionKernel::from_dense(p);
    require(kern.max_row_error() < 1e-9, Errc::invalid_input, "extra kernel is not stochastic");
    auto pi = perron(p);
    auto ev = eigenvalues(kern, pi);
    auto ch = cheeger_bruteforce(kern, pi);
    const double l2 = ev[ev.size() - 2], lmin = ev.front();
    const double phi = ch.phi_star, zeta = ch.zeta_star;
    const bool ok = 1 - std::sqrt(std::max(0.0, 1 - phi * phi)) <= 1 - l2 + c.tol && 1 - l2 <= 2 * phi + c.tol &&
                    1 - std::sqrt(std::max(0.0, 1 - zeta * zeta)) <= 1 + lmin + c.tol &&
                    1 + lmin <= 4 * zeta + c.tol;
    ++extra;
    if (!ok) ++extra_fail;
  }

  json j;
  j["sandwich_instances"] = rep.sandwich_instances;
  j["cheeger_violations"] = rep.cheeger_violations;
  j["smallest_eigenvalue_violations"] = rep.smallest_violations;
  j["decomposition_instances"] = rep.decomposition_instances;
  j["decomposition_violations"] = rep.decomposition_violations;
  j["min_decomposition_ratio"] = rep.min_decomposition_ratio;
  j["block_instances"] = rep.block_instances;
  j["block_violations"] = rep.block_violations;
  j["extra_kernels"] = extra;
  j["extra_kernel_violations"] = extra_fail;
  j["failures"] = rep.failures;
  const bool pass = rep.pass() && extra_fail == 0;
  j["pass"] = pass;
  std::ofstream(fs::path(c.out) / "verify.json") << j.dump(2) << "\n";
  man.rows("verify.json", rep.sandwich_instances + rep.decomposition_instances + rep.block_instances + extra);

  if (o.summary) {
    auto line = [&](bool ok, const std::string& what) { log_of(o) << (ok ? "PASS " : "FAIL ") << what << "\n"; };
    line(rep.cheeger_violations == 0, "cheeger sandwich (" + std::to_string(rep.sandwich_instances) + " instances)");
    line(rep.smallest_violations == 0, "smallest eigenvalue sandwich");
    line(rep.decomposition_violations == 0,
         "decomposition bound (" + std::to_string(rep.decomposition_instances) + " instances)");
    line(rep.block_violations == 0, "block chain comparison (" + std::to_string(rep.block_instances) + " instances)");
    if (extra) line(extra_fail == 0, "extra kernels (" + std::to_string(extra) + ")");
  }
  const int code = pass ? kPass : kCheckFailed;
  man.finalize(code);
  return code;
}

int dispatch(const std::string& command, const ExperimentConfig& c, const RunOptions& o) {
  try {
    if (command == "generate") return cmd_generate(c, o);
    if (command == "mix") return cmd_mix(c, o);
    if (command == "spectral") return cmd_spectral(c, o);
    if (command == "entropy") return cmd_entropy(c, o);
    if (command == "couple") return cmd_couple(c, o);
    if (command == "verify") return cmd_verify(c, o);
    log_of(o) << "unknown command " << command << "\n";
    return kInvalidConfig;
  } catch (const Error& e) {
    log_of(o) << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::insufficient_data:
      case Errc::sampling_failure: return kUnresolved;
      default: return kInvalidConfig;
    }
  }
}

}  // namespace qrg::cli
