#include "qrg/graph.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "qrg/error.hpp"

namespace qrg {

int Graph::multiplicity(int u, int v) const {
  int m = 0;
  for (const auto& nb : neighbors(u))
    if (nb.vertex == v) m += nb.mult;
  return m;
}

int Graph::multiplicity(int u, int v, EdgeLabel label) const {
  for (const auto& nb : neighbors(u))
    if (nb.vertex == v && nb.label == label) return nb.mult;
  return 0;
}

int Graph::base_degree(int v) const {
  int d = 0;
  for (const auto& nb : neighbors(v))
    if (nb.label == EdgeLabel::base) d += nb.mult;
  return d;
}

bool Graph::is_symmetric() const {
  for (int u = 0; u < n_; ++u)
    for (const auto& nb : neighbors(u))
      if (multiplicity(nb.vertex, u, nb.label) != nb.mult) return false;
  return true;
}

GraphBuilder::GraphBuilder(int n) : n_(n) {
  require(n >= 0, Errc::invalid_parameter, "negative vertex count");
}

void GraphBuilder::add_edge(int u, int v, EdgeLabel label, int mult) {
  require(u >= 0 && u < n_ && v >= 0 && v < n_, Errc::invalid_input, "edge endpoint out of range");
  require(u != v, Errc::invalid_input, "self-loop");
  require(mult >= 1, Errc::invalid_input, "non-positive multiplicity");
  edges_.push_back({u, v, label, mult});
}

Graph GraphBuilder::build() const {
  // (u, v, label) -> multiplicity, both directions
  std::vector<std::map<std::pair<int, EdgeLabel>, int>> acc(n_);
  for (const auto& e : edges_) {
    acc[e.u][{e.v, e.label}] += e.mult;
    acc[e.v][{e.u, e.label}] += e.mult;
  }
  Graph g;
  g.n_ = n_;
  g.offset_.assign(1, 0);
  g.slot_offset_.assign(1, 0);
  g.degree_.assign(n_, 0);
  for (int u = 0; u < n_; ++u) {
    for (const auto& [key, m] : acc[u]) {
      g.adj_.push_back({key.first, m, key.second});
      g.degree_[u] += m;
      for (int i = 0; i < m; ++i) g.slots_.push_back(key.first);
    }
    g.offset_.push_back(static_cast<int>(g.adj_.size()));
    g.slot_offset_.push_back(static_cast<int>(g.slots_.size()));
    g.max_degree_ = std::max(g.max_degree_, g.degree_[u]);
    g.edge_count_ += g.degree_[u];
  }
  g.edge_count_ /= 2;
  return g;
}

Graph make_cycle(int n) {
  require(n >= 3, Errc::invalid_parameter, "cycle needs n >= 3");
  GraphBuilder b(n);
  for (int i = 0; i < n; ++i) b.add_edge(i, (i + 1) % n);
  return b.build();
}

Graph make_cycle_union(int k, int len) {
  require(k >= 1, Errc::invalid_parameter, "need at least one component");
  require(len >= 3, Errc::invalid_parameter, "cycle needs length >= 3");
  GraphBuilder b(k * len);
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < len; ++i) b.add_edge(c * len + i, c * len + (i + 1) % len);
  return b.build();
}

Graph make_triangle_union(int k) { return make_cycle_union(k, 3); }

Graph make_torus(int w, int h) {
  require(w >= 3 && h >= 3, Errc::invalid_parameter, "torus needs w,h >= 3");
  GraphBuilder b(w * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int v = y * w + x;
      b.add_edge(v, y * w + (x + 1) % w);
      b.add_edge(v, ((y + 1) % h) * w + x);
    }
  return b.build();
}

namespace {

bool try_pairing(int n, int d, Rng& rng, std::vector<std::pair<int, int>>& out) {
  std::vector<int> stubs(static_cast<std::size_t>(n) * d);
  for (int v = 0; v < n; ++v)
    for (int j = 0; j < d; ++j) stubs[v * d + j] = v;
  std::shuffle(stubs.begin(), stubs.end(), rng);
  std::set<std::pair<int, int>> seen;
  out.clear();
  for (std::size_t i = 0; i < stubs.size(); i += 2) {
    int u = std::min(stubs[i], stubs[i + 1]), v = std::max(stubs[i], stubs[i + 1]);
    if (u == v || !seen.insert({u, v}).second) return false;
    out.emplace_back(u, v);
  }
  return true;
}

// Sequential pairing, each step uniform over the pairs that keep the graph simple;
// restart when stuck.
bool try_sequential(int n, int d, Rng& rng, std::vector<std::pair<int, int>>& out) {
  std::vector<int> free;
  for (int v = 0; v < n; ++v)
    for (int j = 0; j < d; ++j) free.push_back(v);
  std::set<std::pair<int, int>> seen;
  out.clear();
  auto ok = [&](int a, int b) {
    return a != b && !seen.count({std::min(a, b), std::max(a, b)});
  };
  while (!free.empty()) {
    const std::size_t m = free.size();
    std::size_t i = 0, j = 0;
    bool found = false;
    for (int attempt = 0; attempt < 64 && !found; ++attempt) {
      i = uniform_below(rng, m);
      j = uniform_below(rng, m - 1);
      if (j >= i) ++j;
      found = ok(free[i], free[j]);
    }
    if (!found) {
      std::vector<std::pair<std::size_t, std::size_t>> valid;
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
          if (ok(free[a], free[b])) valid.emplace_back(a, b);
      if (valid.empty()) return false;
      std::tie(i, j) = valid[uniform_below(rng, valid.size())];
    }
    int u = free[i], v = free[j];
    seen.insert({std::min(u, v), std::max(u, v)});
    out.emplace_back(u, v);
    if (i < j) std::swap(i, j);
    free[i] = free.back();
    free.pop_back();
    free[j] = free.back();
    free.pop_back();
  }
  return true;
}

}  // namespace

Graph make_random_regular(int n, int d, Rng& rng) {
  require(d >= 3, Errc::invalid_parameter, "degree must be >= 3");
  require(n > d, Errc::invalid_parameter, "need n > d");
  require((static_cast<long long>(n) * d) % 2 == 0, Errc::invalid_parameter, "n*d must be even");
  // Plain rejection accepts with probability ~exp(-(d^2-1)/4); beyond d = 4 that is too rare
  // for the budget, so larger degrees use the sequential variant.
  std::vector<std::pair<int, int>> pairs;
  bool ok = false;
  for (int attempt = 0; attempt < kPairingBudget && !ok; ++attempt)
    ok = d <= 4 ? try_pairing(n, d, rng, pairs) : try_sequential(n, d, rng, pairs);
  require(ok, Errc::sampling_failure, "pairing rejection budget exceeded");
  GraphBuilder b(n);
  for (auto [u, v] : pairs) b.add_edge(u, v);
  return b.build();
}

Graph make_clique_tailed(int n, int d, Rng& rng) {
  Graph reg = make_random_regular(n, d, rng);
  GraphBuilder b(n + d);
  for (int u = 0; u < n; ++u)
    for (const auto& nb : reg.neighbors(u))
      if (u < nb.vertex) b.add_edge(u, nb.vertex);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) b.add_edge(n + i, n + j);
  b.add_edge(n, 0);
  return b.build();
}

std::vector<int> component_ids(const Graph& g, int* count) {
  std::vector<int> comp(g.n(), -1);
  int c = 0;
  std::vector<int> stack;
  for (int s = 0; s < g.n(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const auto& nb : g.neighbors(u))
        if (comp[nb.vertex] < 0) {
          comp[nb.vertex] = c;
          stack.push_back(nb.vertex);
        }
    }
    ++c;
  }
  if (count) *count = c;
  return comp;
}

std::vector<int> component_sizes(const Graph& g) {
  int c = 0;
  auto comp = component_ids(g, &c);
  std::vector<int> sizes(c, 0);
  for (int x : comp) ++sizes[x];
  return sizes;
}

bool is_connected(const Graph& g) {
  int c = 0;
  component_ids(g, &c);
  return c <= 1;
}

bool is_bipartite(const Graph& g) {
  std::vector<int> color(g.n(), -1);
  std::vector<int> queue;
  for (int s = 0; s < g.n(); ++s) {
    if (color[s] >= 0) continue;
    color[s] = 0;
    queue.assign(1, s);
    for (std::size_t h = 0; h < queue.size(); ++h) {
      int u = queue[h];
      for (const auto& nb : g.neighbors(u)) {
        if (color[nb.vertex] < 0) {
          color[nb.vertex] = 1 - color[u];
          queue.push_back(nb.vertex);
        } else if (color[nb.vertex] == color[u]) {
          return false;
        }
      }
    }
  }
  return true;
}

ValidationReport validate_base(const Graph& g, int delta_max, int l_min) {
  ValidationReport r;
  r.component_sizes = component_sizes(g);
  r.max_degree = g.max_degree();
  r.degree_ok = r.max_degree <= delta_max;
  r.components_ok = std::all_of(r.component_sizes.begin(), r.component_sizes.end(),
                                [&](int s) { return s >= l_min; });
  r.pass = r.degree_ok && r.components_ok;
  return r;
}

int RootedBall::local_index(int global) const {
  for (int i = 0; i < size(); ++i)
    if (vertices[i] == global) return i;
  return -1;
}

RootedBall ball(const Graph& g, int v, int r) {
  require(v >= 0 && v < g.n(), Errc::invalid_parameter, "ball center out of range");
  require(r >= 0, Errc::invalid_parameter, "negative radius");
  RootedBall b;
  b.center = v;
  b.radius = r;
  std::map<int, int> local;
  b.vertices.push_back(v);
  b.dist.push_back(0);
  local[v] = 0;
  for (std::size_t h = 0; h < b.vertices.size(); ++h) {
    int u = b.vertices[h];
    if (b.dist[h] == r) continue;
    for (const auto& nb : g.neighbors(u)) {
      if (nb.label != EdgeLabel::base || local.count(nb.vertex)) continue;
      local[nb.vertex] = b.size();
      b.vertices.push_back(nb.vertex);
      b.dist.push_back(b.dist[h] + 1);
    }
  }
  b.adj.resize(b.size());
  b.local_degree.assign(b.size(), 0);
  b.on_boundary.assign(b.size(), false);
  for (int i = 0; i < b.size(); ++i) {
    for (const auto& nb : g.neighbors(b.vertices[i])) {
      if (nb.label != EdgeLabel::base) continue;
      auto it = local.find(nb.vertex);
      if (it == local.end()) {
        b.on_boundary[i] = true;
        continue;
      }
      b.adj[i].emplace_back(it->second, nb.mult);
      b.local_degree[i] += nb.mult;
    }
  }
  return b;
}

bool induces_connected(const Graph& g, const std::vector<int>& set) {
  if (set.empty()) return false;
  std::set<int> in(set.begin(), set.end());
  std::set<int> seen{set.front()};
  std::vector<int> stack{set.front()};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (const auto& nb : g.neighbors(u))
      if (in.count(nb.vertex) && seen.insert(nb.vertex).second) stack.push_back(nb.vertex);
  }
  return seen.size() == in.size();
}

Partition singleton_partition(int n) {
  Partition p;
  p.block_of.resize(n);
  for (int v = 0; v < n; ++v) {
    p.blocks.push_back({v});
    p.block_of[v] = v;
  }
  return p;
}

Partition greedy_partition(const Graph& g, int l) {
  require(l >= 1, Errc::invalid_parameter, "block size must be >= 1");
  for (int s : component_sizes(g))
    require(s >= l, Errc::invalid_input, "component smaller than block size");

  const int n = g.n();
  std::vector<char> remaining(n, 1);
  Partition p;
  p.block_of.assign(n, -1);

  auto sorted_neighbors = [&](int u) {
    std::vector<int> out;
    for (const auto& nb : g.neighbors(u)) out.push_back(nb.vertex);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  for (int seed = 0; seed < n; ++seed) {
    if (!remaining[seed]) continue;
    // A: BFS from the smallest remaining id, neighbors in increasing id order
    std::vector<int> a{seed};
    std::vector<char> in_a(n, 0);
    in_a[seed] = 1;
    for (std::size_t h = 0; h < a.size() && static_cast<int>(a.size()) < l; ++h)
      for (int w : sorted_neighbors(a[h])) {
        if (static_cast<int>(a.size()) >= l) break;
        if (remaining[w] && !in_a[w]) {
          in_a[w] = 1;
          a.push_back(w);
        }
      }
    for (int v : a) remaining[v] = 0;

    // absorb components of B \ A smaller than l
    std::vector<int> block = a;
    std::vector<char> seen(n, 0);
    for (int v : a)
      for (int w : sorted_neighbors(v)) {
        if (!remaining[w] || seen[w]) continue;
        std::vector<int> comp{w};
        seen[w] = 1;
        for (std::size_t h = 0; h < comp.size(); ++h)
          for (int x : sorted_neighbors(comp[h]))
            if (remaining[x] && !seen[x]) {
              seen[x] = 1;
              comp.push_back(x);
            }
        if (static_cast<int>(comp.size()) < l) {
          for (int x : comp) remaining[x] = 0;
          block.insert(block.end(), comp.begin(), comp.end());
        }
      }
    std::sort(block.begin(), block.end());
    for (int v : block) p.block_of[v] = p.size();
    p.blocks.push_back(std::move(block));
  }
  return p;
}

void write_edge_list(std::ostream& os, const Graph& g) {
  os << "n=" << g.n() << '\n';
  for (int u = 0; u < g.n(); ++u)
    for (const auto& nb : g.neighbors(u)) {
      if (nb.vertex < u) continue;
      for (int k = 0; k < nb.mult; ++k)
        os << u << ' ' << nb.vertex << ' ' << (nb.label == EdgeLabel::base ? "base" : "lr") << '\n';
    }
}

Graph read_edge_list(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), Errc::invalid_input, "empty edge list");
  require(line.rfind("n=", 0) == 0, Errc::invalid_input, "missing n= header");
  int n = 0;
  try {
    n = std::stoi(line.substr(2));
  } catch (const std::exception&) {
    throw Error(Errc::invalid_input, "bad n= header");
  }
  GraphBuilder b(n);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int u, v;
    std::string label;
    require(static_cast<bool>(ls >> u >> v >> label), Errc::invalid_input, "bad edge line: " + line);
    require(label == "base" || label == "lr", Errc::invalid_input, "bad edge label: " + label);
    b.add_edge(u, v, label == "base" ? EdgeLabel::base : EdgeLabel::longrange);
  }
  return b.build();
}

}  // namespace qrg
