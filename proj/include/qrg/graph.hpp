#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qrg/rng.hpp"

namespace qrg {

enum class EdgeLabel : std::uint8_t { base, longrange };

struct Neighbor {
  int vertex;
  int mult;
  EdgeLabel label;
};

// Immutable undirected multigraph in CSR form. A pair (u,v) may appear once per label,
// with multiplicity; degrees count multiplicity.
class Graph {
 public:
  Graph() = default;

  int n() const { return n_; }
  std::span<const Neighbor> neighbors(int v) const {
    return {adj_.data() + offset_[v], adj_.data() + offset_[v + 1]};
  }
  int degree(int v) const { return degree_[v]; }
  int max_degree() const { return max_degree_; }
  // Edge count with multiplicity.
  long long edge_count() const { return edge_count_; }
  long long total_degree() const { return 2 * edge_count_; }

  /// Neighbors repeated by multiplicity; slot(v, i) for i < degree(v) is a uniform step.
  int slot(int v, int i) const { return slots_[slot_offset_[v] + i]; }
  std::span<const int> slots(int v) const {
    return {slots_.data() + slot_offset_[v], slots_.data() + slot_offset_[v + 1]};
  }

  int multiplicity(int u, int v) const;
  int multiplicity(int u, int v, EdgeLabel label) const;
  int base_degree(int v) const;

  bool is_symmetric() const;

 private:
  friend class GraphBuilder;
  int n_ = 0;
  int max_degree_ = 0;
  long long edge_count_ = 0;
  std::vector<int> offset_{0};
  std::vector<Neighbor> adj_;
  std::vector<int> degree_;
  std::vector<int> slot_offset_{0};
  std::vector<int> slots_;
};

class GraphBuilder {
 public:
  explicit GraphBuilder(int n);
  void add_edge(int u, int v, EdgeLabel label = EdgeLabel::base, int mult = 1);
  Graph build() const;
  int n() const { return n_; }

 private:
  struct Entry {
    int u, v;
    EdgeLabel label;
    int mult;
  };
  int n_;
  std::vector<Entry> edges_;
};

Graph make_cycle(int n);
Graph make_cycle_union(int k, int len);
Graph make_triangle_union(int k);
Graph make_torus(int w, int h);
Graph make_random_regular(int n, int d, Rng& rng);
// Random d-regular graph on 0..n-1, a d-clique on n..n+d-1, bridge n -- 0.
Graph make_clique_tailed(int n, int d, Rng& rng);

inline constexpr int kPairingBudget = 1000;

std::vector<int> component_ids(const Graph& g, int* count = nullptr);
std::vector<int> component_sizes(const Graph& g);
bool is_connected(const Graph& g);
bool is_bipartite(const Graph& g);

struct ValidationReport {
  std::vector<int> component_sizes;
  int max_degree = 0;
  bool degree_ok = true;
  bool components_ok = true;
  bool pass = true;
};

ValidationReport validate_base(const Graph& g, int delta_max, int l_min);

// Closed R-ball in the metric of base-labeled edges, BFS order, center first.
struct RootedBall {
  int center = -1;
  int radius = 0;
  std::vector<int> vertices;
  std::vector<int> dist;
  // local adjacency: (local index, multiplicity), induced base edges only
  std::vector<std::vector<std::pair<int, int>>> adj;
  std::vector<int> local_degree;
  // true if the vertex has a base neighbor outside the ball
  std::vector<bool> on_boundary;

  int size() const { return static_cast<int>(vertices.size()); }
  int local_index(int global) const;  // -1 if absent
  bool contains(int global) const { return local_index(global) >= 0; }
};

RootedBall ball(const Graph& g, int v, int r);

struct Partition {
  std::vector<std::vector<int>> blocks;
  std::vector<int> block_of;
  int size() const { return static_cast<int>(blocks.size()); }
};

Partition greedy_partition(const Graph& g, int l);
Partition singleton_partition(int n);
bool induces_connected(const Graph& g, const std::vector<int>& set);

void write_edge_list(std::ostream& os, const Graph& g);
Graph read_edge_list(std::istream& is);

}  // namespace qrg
