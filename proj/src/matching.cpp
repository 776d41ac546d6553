#include "qrg/matching.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "qrg/error.hpp"

namespace qrg {

PerfectMatching matching_from_pairs(int n, const std::vector<std::pair<int, int>>& pairs) {
  PerfectMatching m;
  m.partner.assign(n, -1);
  for (auto [u, v] : pairs) {
    require(u >= 0 && u < n && v >= 0 && v < n && u != v, Errc::invalid_input, "bad matching pair");
    require(m.partner[u] < 0 && m.partner[v] < 0, Errc::invalid_input, "vertex matched twice");
    m.partner[u] = v;
    m.partner[v] = u;
    m.pairs.emplace_back(std::min(u, v), std::max(u, v));
  }
  int free = 0;
  for (int v = 0; v < n; ++v)
    if (m.partner[v] < 0) {
      ++free;
      m.unmatched = v;
    }
  require(free == n % 2, Errc::invalid_input, "matching does not cover the vertex set");
  if (free == 0) m.unmatched.reset();
  return m;
}

PerfectMatching sample_perfect_matching(int n, Rng& rng) {
  require(n >= 2, Errc::invalid_parameter, "matching needs n >= 2");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i + 1 < n; i += 2) pairs.emplace_back(perm[i], perm[i + 1]);
  return matching_from_pairs(n, pairs);
}

StarGraph build_star(const Graph& g, const PerfectMatching& m) {
  require(m.n() == g.n(), Errc::invalid_input, "matching does not cover the graph");
  GraphBuilder b(g.n());
  for (int u = 0; u < g.n(); ++u)
    for (const auto& nb : g.neighbors(u))
      if (u < nb.vertex) b.add_edge(u, nb.vertex, nb.label, nb.mult);
  for (auto [u, v] : m.pairs) b.add_edge(u, v, EdgeLabel::longrange);
  return StarGraph{g, m, b.build()};
}

StarGraph sample_star(const Graph& g, Rng& rng) {
  return build_star(g, sample_perfect_matching(g.n(), rng));
}

void write_matching(std::ostream& os, const PerfectMatching& m) {
  for (auto [u, v] : m.pairs) os << u << ' ' << v << '\n';
  if (m.unmatched) os << "unmatched " << *m.unmatched << '\n';
}

PerfectMatching read_matching(std::istream& is, int n) {
  std::vector<std::pair<int, int>> pairs;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.rfind("unmatched", 0) == 0) continue;
    std::istringstream ls(line);
    int u, v;
    require(static_cast<bool>(ls >> u >> v), Errc::invalid_input, "bad matching line: " + line);
    pairs.emplace_back(u, v);
  }
  return matching_from_pairs(n, pairs);
}

}  // namespace qrg
