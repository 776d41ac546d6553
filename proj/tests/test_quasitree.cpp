#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qrg/error.hpp"
#include "qrg/quasitree.hpp"
#include "qrg/stats.hpp"

using namespace qrg;

namespace {

std::shared_ptr<const BallAtlas> triangle_atlas() { return BallAtlas::make(make_triangle_union(50), 1); }

}  // namespace

TEST_CASE("a new tree holds only its root ball") {
  auto atlas = triangle_atlas();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    QuasiTree t(atlas, seed);
    CHECK(t.ball_count() == 1);
    CHECK(t.shape(0).size() == 3);
    CHECK(t.level(t.root()) == 0);
  }
  CHECK_THROWS_AS(BallAtlas::make(make_triangle_union(3), 0), Error);
  GraphBuilder b(3);
  b.add_edge(0, 1);
  CHECK_THROWS_AS(BallAtlas::make(b.build(), 1), Error);
}

TEST_CASE("neighbors") {
  QuasiTree t(triangle_atlas(), 7);
  auto rn = t.neighbors(t.root());
  CHECK(rn.size() == 2);
  for (auto v : rn) CHECK(v.ball == 0);
  CHECK(t.degree(t.root()) == 2);

  TreeVertex a{0, 1};
  auto na = t.neighbors(a);
  REQUIRE(na.size() == 3);
  int lr = 0, child = -1;
  for (auto v : na)
    if (v.ball != 0) {
      ++lr;
      child = v.ball;
      CHECK(v.local == 0);
    }
  CHECK(lr == 1);
  CHECK(t.level({child, 0}) == 1);
  CHECK(t.ball(child).parent == 0);
  CHECK(t.ball(child).parent_local == 1);
  auto again = t.neighbors(a);
  CHECK(again == na);
  CHECK(t.neighbors({child, 0}).size() == 3);  // two in-ball plus the parent edge
}

TEST_CASE("materialization order does not change the tree") {
  auto atlas = BallAtlas::make(make_cycle_union(20, 12), 2);
  QuasiTree a(atlas, 99), b(atlas, 99);
  // a: depth first along local 1; b: breadth first
  int x = 0;
  for (int d = 0; d < 4; ++d) x = a.child(x, 1);
  int y = b.child(0, 2);
  b.child(0, 3);
  y = b.child(0, 1);
  for (int d = 1; d < 4; ++d) y = b.child(y, 1);
  CHECK(a.ball(x).center == b.ball(y).center);
  CHECK(a.ball(x).key == b.ball(y).key);
  CHECK(a.ball(x).level == 4);

  // rollback and rematerialize
  QuasiTree c(atlas, 99);
  auto mark = c.checkpoint();
  int z = c.child(c.child(0, 1), 1);
  const auto key = c.ball(z).key;
  c.rollback(mark);
  CHECK(c.ball_count() == 1);
  CHECK(c.peek_child(0, 1) == -1);
  CHECK(c.ball(c.child(c.child(0, 1), 1)).key == key);
}

TEST_CASE("walk traces") {
  auto atlas = triangle_atlas();
  QuasiTree t(atlas, 1);
  Rng rng(2);
  auto zero = run_walk(t, t.root(), 0, rng);
  CHECK(zero.length() == 0);
  CHECK(zero.lr_crossings.empty());

  auto tr = run_walk(t, t.root(), 5000, rng);
  // levels recomputed from the crossing log match the stored levels
  std::vector<int> lv(tr.steps.size(), 0);
  std::size_t ci = 0;
  for (std::size_t s = 1; s < tr.steps.size(); ++s) {
    lv[s] = lv[s - 1];
    if (ci < tr.lr_crossings.size() && tr.lr_crossings[ci].time == static_cast<int>(s)) {
      const auto& c = tr.lr_crossings[ci++];
      const bool down = t.ball(c.to.ball).parent == c.from.ball;
      lv[s] += down ? 1 : -1;
      CHECK(std::abs(c.level_after - tr.levels[s - 1]) == 1);
    } else {
      CHECK(tr.steps[s].ball == tr.steps[s - 1].ball);
    }
  }
  CHECK(ci == tr.lr_crossings.size());
  CHECK(lv == tr.levels);
  // consecutive steps are adjacent
  for (std::size_t s = 1; s < tr.steps.size(); ++s) {
    auto nb = t.neighbors(tr.steps[s - 1]);
    CHECK(std::find(nb.begin(), nb.end(), tr.steps[s]) != nb.end());
  }
}

TEST_CASE("trace dump") {
  QuasiTree t(triangle_atlas(), 3);
  Rng rng(3);
  auto tr = run_walk(t, t.root(), 50, rng);
  std::ostringstream os;
  write_trace(os, tr);
  const std::string s = os.str();
  CHECK(s.rfind("t,ball,local,level,crossed_lr\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 52);
}

TEST_CASE("drift on the triangle tree") {
  // the level process of the triangle tree has speed 1/15
  auto atlas = triangle_atlas();
  const int steps = 3000, traces = 500;
  std::vector<double> rate;
  for (int i = 0; i < traces; ++i) {
    QuasiTree t(atlas, stream_seed(kDefaultSeed, "tree", {static_cast<std::uint64_t>(i)}));
    Rng rng = make_rng(kDefaultSeed, "walk", {static_cast<std::uint64_t>(i)});
    auto tr = run_walk(t, t.root(), steps, rng);
    rate.push_back(static_cast<double>(tr.levels.back()) / steps);
  }
  const double m = mean(rate), se = std_error(rate);
  MESSAGE("mean level / t = " << m << " +- " << se);
  CHECK(m > 0.05);
  CHECK(std::abs(m - 1.0 / 15) < 4 * se + 0.002);
}

TEST_CASE("escape probabilities") {
  auto atlas = triangle_atlas();
  QuasiTree t(atlas, 5);
  Rng rng(6);
  CHECK_FALSE(estimate_escape_prob(t, t.root(), 1, 100, rng).defined);
  CHECK_FALSE(estimate_escape_prob(t, t.root(), 5, 0, rng).defined);
  auto tr = run_walk(t, t.root(), 400, rng);
  const auto before = t.ball_count();
  for (int i = 0; i < 10; ++i) {
    TreeVertex x = tr.steps[40 * i];
    auto e = estimate_escape_prob(t, x, 20, 500, rng);
    CHECK(e.defined);
    CHECK(e.p >= 0.02);
  }
  CHECK(t.ball_count() == before);  // trials leave no balls behind

  auto shallow = estimate_escape_prob(t, t.root(), 3, 4000, rng);
  auto deep = estimate_escape_prob(t, t.root(), 12, 4000, rng);
  CHECK(deep.p <= shallow.p + 3 * std::hypot(deep.se, shallow.se));
}
