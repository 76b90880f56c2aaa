#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "ipg/cover_tree.hpp"
#include "ipg/errors.hpp"
#include "ipg/manifolds.hpp"
#include "ipg/rng.hpp"
#include "oracles.hpp"

using namespace ipg;

namespace {

PointCloud line_cloud(std::initializer_list<double> xs) {
  PointCloud c;
  c.dim = 1;
  for (double x : xs) c.add_point(&x);
  return c;
}

const InvariantCheck* find_check(const InvariantReport& rep, const char* name) {
  for (const auto& c : rep.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

// Worked example, derived by hand: cloud {0,1,2,4} on the line, root = point 0,
// sigma = 4.  Descent radii are 4,2,1,0.5, so point 4 separates at scale 1,
// point 2 at scale 2 and point 1 at scale 3; all three hang off the root.
TEST_CASE("four-point line builds the expected compressed tree") {
  const auto cloud = line_cloud({0.0, 1.0, 2.0, 4.0});
  const auto tree = CoverTree::build(cloud);

  CHECK(tree.sigma() == 4.0);
  CHECK(tree.l_max() == 3);
  REQUIRE(tree.nodes().size() == 4);

  const auto& root = tree.nodes()[0];
  CHECK(root.point == 0);
  CHECK(root.scale == 0);
  CHECK(root.parent == -1);
  CHECK(root.maxdist == 4.0);
  REQUIRE(root.children.size() == 3);
  // Children sorted by scale: point 4 at scale 1, point 2 at 2, point 1 at 3.
  CHECK(tree.nodes()[root.children[0]].point == 3);
  CHECK(tree.nodes()[root.children[0]].scale == 1);
  CHECK(tree.nodes()[root.children[1]].point == 2);
  CHECK(tree.nodes()[root.children[1]].scale == 2);
  CHECK(tree.nodes()[root.children[2]].point == 1);
  CHECK(tree.nodes()[root.children[2]].scale == 3);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(tree.nodes()[i].parent == 0);
    CHECK(tree.nodes()[i].maxdist == 0.0);
  }

  CHECK(tree.verify().all_pass());

  // The query 2.9 is covered by every node, so the descent must touch all
  // four points before concluding that point 2 (distance 0.9) is nearest.
  const double q = 2.9;
  const auto r = tree.nn_exact(&q);
  CHECK(r.index == 2);
  CHECK(r.dist == doctest::Approx(0.9));
  CHECK(r.dist_evals == 4);

  // A slack of 2*sigma licenses answering from the root alone.
  const auto rough = tree.nn_fp(&q, 8.0);
  CHECK(rough.index == 0);
  CHECK(rough.dist_evals == 1);
}

TEST_CASE("stats report the tree shape") {
  const auto cloud = line_cloud({0.0, 1.0, 2.0, 4.0});
  const auto st = CoverTree::build(cloud).stats();
  CHECK(st.points == 4);
  CHECK(st.l_max == 3);
  CHECK(st.sigma == 4.0);
  CHECK(st.finest_resolution == 0.5);
  CHECK(st.aspect_ratio == 4.0);  // max pair 4, min pair 1
  REQUIRE(st.nodes_per_scale.size() == 4);
  CHECK(st.nodes_per_scale[0] == 1);
  CHECK(st.nodes_per_scale[1] == 1);
  CHECK(st.nodes_per_scale[2] == 1);
  CHECK(st.nodes_per_scale[3] == 1);
  std::size_t total = 0;
  for (auto c : st.nodes_per_scale) total += c;
  CHECK(total == st.points);
  CHECK(st.to_string().find("sigma") != std::string::npos);
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(CoverTree::build(PointCloud{}), EmptyCloud);

  auto dup = line_cloud({1.0, 3.0, 1.0});
  CHECK_THROWS_AS(CoverTree::build(dup), DuplicatePoints);
  try {
    CoverTree::build(dup);
  } catch (const DuplicatePoints& e) {
    // The offending pair should be named.
    CHECK(std::string(e.what()).find("0") != std::string::npos);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }

  CHECK_THROWS_AS(aspect_ratio(line_cloud({5.0})), EmptyCloud);
  CHECK_THROWS_AS(aspect_ratio(line_cloud({2.0, 2.0})), DegenerateCloud);
  CHECK(aspect_ratio(line_cloud({0.0, 1.0, 3.0})) == 3.0);
}

TEST_CASE("random clouds satisfy every invariant and the depth bound") {
  int id = 0;
  for (std::size_t dim : {1u, 2u, 3u, 5u}) {
    for (std::size_t d : {2u, 10u, 64u, 150u}) {
      const auto cloud = test::uniform_cloud(d, dim, 0xc0ffee + id++);
      const auto tree = CoverTree::build(cloud);
      const auto rep = tree.verify();
      INFO("dim ", dim, " d ", d, "\n", rep.to_string());
      CHECK(rep.all_pass());

      const double delta = aspect_ratio(cloud);
      CHECK(tree.l_max() <= std::log2(delta) + 2.0);
    }
  }
  // Manifold-sampled clouds have very different local geometry; same story.
  for (auto kind :
       {ManifoldKind::s_curve, ManifoldKind::swiss_roll, ManifoldKind::oscillating_wave}) {
    const auto cloud = gen_manifold(kind, 120, 8, 99);
    const auto tree = CoverTree::build(cloud);
    CHECK(tree.verify().all_pass());
    CHECK(tree.l_max() <= std::log2(aspect_ratio(cloud)) + 2.0);
  }
}

TEST_CASE("exact search reproduces the brute-force oracle bitwise") {
  const auto cloud = gen_manifold(ManifoldKind::s_curve, 300, 6, 7);
  const auto tree = CoverTree::build(cloud);
  Rng rng(77);
  std::vector<double> q(cloud.dim);

  for (int t = 0; t < 200; ++t) {
    for (auto& x : q) x = rng.uniform(-2.5, 2.5);
    const auto hit = tree.nn_exact(q.data());
    const auto ref = test::brute_nn(cloud, q.data());
    CHECK(hit.index == ref.index);
    CHECK(hit.dist == ref.dist);  // same kernel, same sqrt: bitwise equal
    CHECK(hit.dist_evals <= cloud.size());
  }
  // Querying the atoms themselves must return them at distance zero.
  for (std::size_t i = 0; i < cloud.size(); i += 17) {
    const auto hit = tree.nn_exact(cloud.point(i));
    CHECK(hit.index == i);
    CHECK(hit.dist == 0.0);
  }
}

TEST_CASE("exact ties resolve to the lowest point index") {
  const auto cloud = line_cloud({-1.0, 1.0, 3.0});
  const auto tree = CoverTree::build(cloud);

  double q = 0.0;  // equidistant from points 0 and 1
  auto hit = tree.nn_exact(&q);
  CHECK(hit.index == 0);
  CHECK(hit.dist == 1.0);

  q = 2.0;  // equidistant from points 1 and 2
  hit = tree.nn_exact(&q);
  CHECK(hit.index == 1);

  // brute oracle agrees on both
  q = 0.0;
  CHECK(test::brute_nn(cloud, &q).index == 0);
  q = 2.0;
  CHECK(test::brute_nn(cloud, &q).index == 1);
}

TEST_CASE("fixed-precision search honours its additive contract") {
  const auto cloud = gen_manifold(ManifoldKind::swiss_roll, 250, 5, 11);
  const auto tree = CoverTree::build(cloud);
  Rng rng(5);
  std::vector<double> q(cloud.dim);

  for (int t = 0; t < 120; ++t) {
    for (auto& x : q) x = rng.uniform(-12.0, 12.0);
    const auto ref = test::brute_nn(cloud, q.data());

    // nu = 0 degenerates to the exact search, bitwise.
    const auto exact = tree.nn_exact(q.data());
    const auto zero = tree.nn_fp(q.data(), 0.0);
    CHECK(zero.index == exact.index);
    CHECK(zero.dist == exact.dist);
    CHECK(zero.dist_evals == exact.dist_evals);

    std::uint64_t prev_evals = exact.dist_evals;
    for (double nu : {1e-3, 1e-2, 0.1, 1.0, 4.0}) {
      const auto hit = tree.nn_fp(q.data(), nu);
      CHECK(hit.dist <= (ref.dist + nu) * (1.0 + 1e-12));
      // Coarser slack can only shorten the descent.
      CHECK(hit.dist_evals <= prev_evals);
      prev_evals = hit.dist_evals;
    }
  }
  CHECK_THROWS_AS(tree.nn_fp(cloud.point(0), -0.5), BadOracle);
}

TEST_CASE("approximate search honours its multiplicative contract") {
  const auto cloud = gen_manifold(ManifoldKind::oscillating_wave, 250, 5, 13);
  const auto tree = CoverTree::build(cloud);
  Rng rng(6);
  std::vector<double> q(cloud.dim);

  for (int t = 0; t < 120; ++t) {
    for (auto& x : q) x = rng.uniform(-1.5, 1.5);
    const auto ref = test::brute_nn(cloud, q.data());
    const auto exact = tree.nn_exact(q.data());

    // eps = 0 delegates to the exact search (ties included).
    const auto zero = tree.nn_eps(q.data(), 0.0);
    CHECK(zero.index == exact.index);
    CHECK(zero.dist == exact.dist);
    CHECK(zero.dist_evals == exact.dist_evals);

    std::uint64_t prev_evals = exact.dist_evals;
    for (double eps : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      const auto hit = tree.nn_eps(q.data(), eps);
      CHECK(hit.dist <= (1.0 + eps) * ref.dist * (1.0 + 1e-12));
      CHECK(hit.dist_evals <= prev_evals);
      prev_evals = hit.dist_evals;
    }
  }
  CHECK_THROWS_AS(tree.nn_eps(cloud.point(0), -0.1), BadOracle);
}

TEST_CASE("verify flags injected corruption") {
  const auto cloud = test::uniform_cloud(60, 3, 0xabcdef);

  SUBCASE("wrong maxdist") {
    auto tree = CoverTree::build(cloud);
    tree.mutable_nodes()[0].maxdist *= 0.5;
    const auto rep = tree.verify();
    CHECK_FALSE(rep.all_pass());
    const auto* c = find_check(rep, "maxdist-exact");
    REQUIRE(c != nullptr);
    CHECK_FALSE(c->pass);
    CHECK(c->detail.find("node 0") != std::string::npos);
  }

  SUBCASE("inflated maxdist breaks the covering-derived bound") {
    auto tree = CoverTree::build(cloud);
    auto& nd = tree.mutable_nodes()[1];
    nd.maxdist = 100.0 * tree.sigma();
    const auto rep = tree.verify();
    const auto* c = find_check(rep, "maxdist-bound");
    REQUIRE(c != nullptr);
    CHECK_FALSE(c->pass);
  }

  SUBCASE("moving a node to a coarser scale violates separation") {
    auto tree = CoverTree::build(cloud);
    // Pick a deepest-scale node; promoting it to scale 1 claims it is
    // 2^-1-separated from every other coarse node, which cannot hold.
    std::size_t victim = 0;
    for (std::size_t i = 0; i < tree.nodes().size(); ++i)
      if (tree.nodes()[i].scale == tree.l_max()) victim = i;
    tree.mutable_nodes()[victim].scale = 1;
    const auto rep = tree.verify();
    CHECK_FALSE(rep.all_pass());
    const auto* c = find_check(rep, "separation");
    REQUIRE(c != nullptr);
    CHECK_FALSE(c->pass);
  }

  SUBCASE("re-pointing a deep node away from its parent violates covering") {
    auto tree = CoverTree::build(cloud);
    std::size_t victim = 0;
    for (std::size_t i = 0; i < tree.nodes().size(); ++i)
      if (tree.nodes()[i].scale == tree.l_max()) victim = i;
    // Swap in the point farthest from the victim's parent.
    const auto parent = static_cast<std::size_t>(tree.nodes()[victim].parent);
    const double* pp = cloud.point(tree.nodes()[parent].point);
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const double d =
          std::sqrt(kernels::sq_dist(pp, cloud.point(i), cloud.dim));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    tree.mutable_nodes()[victim].point = static_cast<std::uint32_t>(far);
    const auto rep = tree.verify();
    CHECK_FALSE(rep.all_pass());
    const auto* c = find_check(rep, "covering");
    REQUIRE(c != nullptr);
    CHECK_FALSE(c->pass);
  }

  SUBCASE("breaking a parent link fails the structure check") {
    auto tree = CoverTree::build(cloud);
    tree.mutable_nodes()[5].parent = 7;  // parent 7 does not list node 5
    const auto rep = tree.verify();
    const auto* c = find_check(rep, "structure");
    REQUIRE(c != nullptr);
    CHECK_FALSE(c->pass);
  }
}

TEST_CASE("serialization round-trips the tree exactly") {
  const auto cloud = gen_manifold(ManifoldKind::s_curve, 150, 4, 21);
  const auto tree = CoverTree::build(cloud);
  const auto path = test::temp_path("tree_rt.txt");
  tree.save(path);
  const auto back = CoverTree::load(path, cloud);

  CHECK(back.sigma() == tree.sigma());
  CHECK(back.l_max() == tree.l_max());
  CHECK(back.maxdist_exact());
  REQUIRE(back.nodes().size() == tree.nodes().size());
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    CHECK(back.nodes()[i].point == tree.nodes()[i].point);
    CHECK(back.nodes()[i].scale == tree.nodes()[i].scale);
    CHECK(back.nodes()[i].parent == tree.nodes()[i].parent);
    CHECK(back.nodes()[i].maxdist == tree.nodes()[i].maxdist);
    CHECK(back.nodes()[i].children == tree.nodes()[i].children);
  }
  CHECK(back.verify().all_pass());

  Rng rng(3);
  std::vector<double> q(cloud.dim);
  for (int t = 0; t < 40; ++t) {
    for (auto& x : q) x = rng.uniform(-2.0, 2.0);
    const auto a = tree.nn_exact(q.data());
    const auto b = back.nn_exact(q.data());
    CHECK(a.index == b.index);
    CHECK(a.dist == b.dist);
    CHECK(a.dist_evals == b.dist_evals);
  }
  std::remove(path.c_str());
}

TEST_CASE("legacy node lines without maxdist get a safe fallback") {
  const auto cloud = gen_manifold(ManifoldKind::swiss_roll, 120, 4, 22);
  const auto tree = CoverTree::build(cloud);
  const auto full = test::temp_path("tree_full.txt");
  const auto stripped = test::temp_path("tree_stripped.txt");
  tree.save(full);

  {
    std::ifstream in(full);
    std::ofstream out(stripped);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (header) {
        out << line << '\n';
        header = false;
        continue;
      }
      const auto last = line.rfind(',');
      out << line.substr(0, last) << '\n';
    }
  }

  const auto back = CoverTree::load(stripped, cloud);
  CHECK_FALSE(back.maxdist_exact());

  const auto rep = back.verify();
  INFO(rep.to_string());
  CHECK(rep.all_pass());  // exactness check is skipped, bound still holds
  const auto* c = find_check(rep, "maxdist-exact");
  REQUIRE(c != nullptr);
  CHECK(c->detail.find("skipped") != std::string::npos);

  // The fallback over-estimates subtree radii, so searches stay correct.
  Rng rng(4);
  std::vector<double> q(cloud.dim);
  for (int t = 0; t < 60; ++t) {
    for (auto& x : q) x = rng.uniform(-12.0, 12.0);
    const auto ref = test::brute_nn(cloud, q.data());
    const auto hit = back.nn_exact(q.data());
    CHECK(hit.index == ref.index);
    CHECK(hit.dist == ref.dist);
    for (std::uint32_t i = 0; i < tree.nodes().size(); ++i)
      CHECK(back.nodes()[i].maxdist >= tree.nodes()[i].maxdist);
    const auto fp = back.nn_fp(q.data(), 0.5);
    CHECK(fp.dist <= (ref.dist + 0.5) * (1.0 + 1e-12));
    const auto ap = back.nn_eps(q.data(), 0.5);
    CHECK(ap.dist <= 1.5 * ref.dist * (1.0 + 1e-12));
  }
  std::remove(full.c_str());
  std::remove(stripped.c_str());
}

TEST_CASE("corrupted tree files are rejected with location info") {
  const auto cloud = line_cloud({0.0, 1.0, 2.0, 4.0});
  const auto tree = CoverTree::build(cloud);
  const auto path = test::temp_path("tree_bad.txt");

  const auto write = [&](const std::string& text) {
    std::ofstream f(path);
    f << text;
  };

  write("");  // empty
  CHECK_THROWS_AS(CoverTree::load(path, cloud), ParseError);

  write("4,2,4,3\n");  // dim mismatch with the 1-d cloud
  CHECK_THROWS_AS(CoverTree::load(path, cloud), DimensionMismatch);

  write("4,1,4,3\n0,0,0,-1,4\n1,1,3,0,0\n2,2,2,0,0\n");  // node 3 missing
  CHECK_THROWS_AS(CoverTree::load(path, cloud), ParseError);

  write("4,1,4,3\n0,0,0,-1,4\n0,1,3,0,0\n2,2,2,0,0\n3,3,1,0,0\n");  // dup id
  CHECK_THROWS_AS(CoverTree::load(path, cloud), ParseError);

  write("4,1,4,3\n0,0,0,5,4\n1,1,3,0,0\n2,2,2,0,0\n3,3,1,0,0\n");  // bad root
  CHECK_THROWS_AS(CoverTree::load(path, cloud), ParseError);

  write("4,1,4,3\n0,0,0,-1,4\n1,1,3,zebra,0\n2,2,2,0,0\n3,3,1,0,0\n");
  try {
    CoverTree::load(path, cloud);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::remove(path.c_str());

  tree.save(path);  // valid file, wrong cloud
  const auto other = line_cloud({0.0, 1.0});
  CHECK_THROWS_AS(CoverTree::load(path, other), DimensionMismatch);
  std::remove(path.c_str());
}

TEST_CASE("builds are deterministic") {
  const auto cloud = test::uniform_cloud(100, 4, 0xfeed);
  const auto a = CoverTree::build(cloud);
  const auto b = CoverTree::build(cloud);
  REQUIRE(a.nodes().size() == b.nodes().size());
  for (std::size_t i = 0; i < a.nodes().size(); ++i) {
    CHECK(a.nodes()[i].point == b.nodes()[i].point);
    CHECK(a.nodes()[i].scale == b.nodes()[i].scale);
    CHECK(a.nodes()[i].parent == b.nodes()[i].parent);
    CHECK(a.nodes()[i].maxdist == b.nodes()[i].maxdist);
  }
}
