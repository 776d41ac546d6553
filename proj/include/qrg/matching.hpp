#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "qrg/graph.hpp"
#include "qrg/rng.hpp"

namespace qrg {

struct PerfectMatching {
  std::vector<std::pair<int, int>> pairs;  // u < v
  std::optional<int> unmatched;
  std::vector<int> partner;  // -1 for the unmatched vertex

  int n() const { return static_cast<int>(partner.size()); }
};

PerfectMatching sample_perfect_matching(int n, Rng& rng);
PerfectMatching matching_from_pairs(int n, const std::vector<std::pair<int, int>>& pairs);

struct StarGraph {
  Graph base;
  PerfectMatching matching;
  Graph combined;

  int n() const { return combined.n(); }
};

StarGraph build_star(const Graph& g, const PerfectMatching& m);
StarGraph sample_star(const Graph& g, Rng& rng);

void write_matching(std::ostream& os, const PerfectMatching& m);
PerfectMatching read_matching(std::istream& is, int n);

}  // namespace qrg
