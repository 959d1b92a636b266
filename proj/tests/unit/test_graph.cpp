#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "kuraduel/errors.hpp"
#include "kuraduel/graph.hpp"

using namespace kuraduel;
using kuraduel::testing::complete_graph;
using kuraduel::testing::path_graph;

TEST_CASE("kary tree sizes follow the geometric series") {
  for (int b = 1; b <= 4; ++b)
    for (int d = 0; d <= 4; ++d) {
      const Graph t = complete_kary_tree(b, d);
      std::size_t expected = 0, layer = 1;
      for (int k = 0; k <= d; ++k, layer *= static_cast<std::size_t>(b)) expected += layer;
      CHECK(t.size() == expected);
      CHECK(t.edge_count() == expected - 1);
      CHECK(t.connected());
    }
}

TEST_CASE("kary tree examples") {
  const Graph t = complete_kary_tree(4, 2);
  CHECK(t.size() == 21);
  CHECK(t.edge_count() == 20);

  const Graph single = complete_kary_tree(4, 0);
  CHECK(single.size() == 1);
  CHECK(single.edge_count() == 0);

  const Graph bin = complete_kary_tree(2, 2);
  CHECK(bin.size() == 7);
  CHECK(tree_leaves(bin) == std::vector<int>{3, 4, 5, 6});
  CHECK(bin.has_edge(0, 1));
  CHECK(bin.has_edge(2, 6));

  CHECK_THROWS_AS(complete_kary_tree(0, 2), DimensionError);
  CHECK_THROWS_AS(complete_kary_tree(1000, 40), SizeError);
}

TEST_CASE("erdos renyi limits and reproducibility") {
  const Graph k5 = erdos_renyi(5, 1.0, 3, false);
  CHECK(k5.edge_count() == 10);
  const Graph empty = erdos_renyi(5, 0.0, 3, false);
  CHECK(empty.edge_count() == 0);
  CHECK(empty.component_count() == 5);

  const Graph a = erdos_renyi(21, 0.4, 42, true);
  const Graph b = erdos_renyi(21, 0.4, 42, true);
  CHECK(a.connected());
  CHECK(a == b);
  CHECK(!(a == erdos_renyi(21, 0.4, 43, true)));

  CHECK_THROWS_AS(erdos_renyi(30, 0.0, 1, true, 20), RetryLimitError);
  CHECK_THROWS_AS(erdos_renyi(5, 1.5, 1, false), DimensionError);
}

TEST_CASE("laplacian spectra") {
  const Vector p3 = laplacian_spectrum(path_graph(3));
  CHECK(p3(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p3(1) == doctest::Approx(1.0));
  CHECK(p3(2) == doctest::Approx(3.0));

  const Matrix single = laplacian(Graph(1, {}));
  CHECK(single.rows() == 1);
  CHECK(single(0, 0) == 0.0);

  const Vector k5 = laplacian_spectrum(complete_graph(5));
  CHECK(std::abs(k5(0)) < 1e-12);
  for (int i = 1; i < 5; ++i) CHECK(k5(i) == doctest::Approx(5.0));
}

TEST_CASE("laplacian invariants on generated graphs") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Graph g = erdos_renyi(15, 0.3, seed, false);
    const Matrix l = laplacian(g);
    CHECK((l - l.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < l.rows(); ++i) CHECK(l.row(i).sum() == 0.0);
    CHECK((l * Vector::Ones(15)).cwiseAbs().maxCoeff() <= 1e-12);
    const Vector ev = laplacian_spectrum(g);
    CHECK(ev(0) >= -1e-12);
    const auto zeros = std::count_if(ev.begin(), ev.end(), [](double x) { return std::abs(x) < 1e-9; });
    CHECK(static_cast<std::size_t>(zeros) == g.component_count());
    if (g.connected()) CHECK(ev(1) > 0.0);
  }
}

TEST_CASE("leaf matching cross network") {
  const Graph tree = complete_kary_tree(4, 2);
  const Graph red = erdos_renyi(21, 0.4, 1, true);
  const CrossNetwork x = leaf_matching_cross(tree, red, true);
  const CrossDegrees d = cross_degrees(x);
  CHECK(d.total == 16);
  CHECK(x.is_symmetric());
  for (int i = 0; i < 21; ++i) {
    const double expected = i >= 5 ? 1.0 : 0.0;
    CHECK(x.a_br()(i, i) == expected);
    CHECK(x.a_br().row(i).sum() == expected);
    CHECK(x.a_br().col(i).sum() == expected);
  }

  const CrossNetwork one = leaf_matching_cross(complete_kary_tree(4, 0), Graph(1, {}), true);
  CHECK(cross_degrees(one).total == 1);

  const CrossNetwork small = leaf_matching_cross(complete_kary_tree(2, 1), path_graph(3), true);
  CHECK(small.a_br()(1, 1) == 1.0);
  CHECK(small.a_br()(2, 2) == 1.0);
  CHECK(small.a_br().sum() == 2.0);

  CHECK_THROWS_AS(leaf_matching_cross(tree, path_graph(10), true), DimensionError);

  const CrossNetwork oneway = leaf_matching_cross(tree, red, false);
  CHECK(cross_degrees(oneway).total == 16);
  CHECK(oneway.a_rb().sum() == 0.0);
}

TEST_CASE("cross degrees") {
  const CrossDegrees zero = cross_degrees(CrossNetwork(Matrix::Zero(2, 3), Matrix::Zero(3, 2)));
  CHECK(zero.total == 0);
  CHECK(zero.blue_to_red == DegreeVector{0, 0});
  const CrossDegrees dense = cross_degrees(CrossNetwork::symmetric(Matrix::Ones(2, 3)));
  CHECK(dense.blue_to_red == DegreeVector{3, 3});
  CHECK(dense.red_to_blue == DegreeVector{2, 2, 2});
  CHECK(dense.total == 6);
  CHECK_THROWS_AS(CrossNetwork(Matrix::Constant(1, 1, 2.0), Matrix::Zero(1, 1)), DimensionError);
}

TEST_CASE("red partition") {
  const Graph tree = complete_kary_tree(4, 2);
  const Graph red = erdos_renyi(21, 0.4, 9, true);
  const CrossNetwork x = leaf_matching_cross(tree, red, true);
  const RedPartition p = partition_red(red, x);
  CHECK(p.m1() == 16);
  CHECK(p.m2() == 5);
  CHECK(p.d_br1 == 16);
  CHECK(p.d_r1b == 16);
  CHECK(p.d_br2 == 0);
  CHECK(p.d_r2b == 0);
  for (int j : p.r1) CHECK(x.a_br().col(j).sum() + x.a_rb().row(j).sum() >= 1.0);
  for (int j : p.r2) CHECK(x.a_br().col(j).sum() + x.a_rb().row(j).sum() == 0.0);

  CHECK_THROWS_AS(partition_red(Graph(1, {}), CrossNetwork::symmetric(Matrix::Ones(1, 1))),
                  DegeneratePartitionError);

  Matrix a = Matrix::Zero(1, 4);
  a(0, 0) = 1.0;
  const RedPartition path = partition_red(path_graph(4), CrossNetwork::symmetric(a));
  CHECK(path.r1 == std::vector<int>{0});
  CHECK(path.r2 == std::vector<int>{1, 2, 3});
  CHECK(path.d_r1r2 == 1);
}

TEST_CASE("edge list round trip and errors") {
  const Graph p3 = read_edge_list("nodes 3\n0 1\n1 2");
  CHECK(p3 == path_graph(3));
  CHECK(write_edge_list(complete_graph(3)) == "nodes 3\n0 1\n0 2\n1 2");

  const EdgeListDocument doc = parse_edge_list("# red side\npopulation red\nnodes 4\n\n2 0  # comment\n");
  CHECK(doc.population == Population::red);
  CHECK(doc.graph.size() == 4);
  CHECK(doc.graph.has_edge(0, 2));
  CHECK(read_edge_list("0 1\n1 3").size() == 4);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = erdos_renyi(12, 0.3, seed, false);
    CHECK(read_edge_list(write_edge_list(g)) == g);
    const EdgeListDocument tagged = parse_edge_list(write_edge_list(g, Population::blue));
    CHECK(tagged.graph == g);
    CHECK(tagged.population == Population::blue);
  }

  auto line_of = [](const char* text) {
    try {
      read_edge_list(text);
    } catch (const ParseError& e) {
      return static_cast<int>(e.line());
    }
    return -1;
  };
  CHECK(line_of("nodes 2\n0 0") == 2);
  CHECK(line_of("nodes 2\n0 1\n1 0") == 3);
  CHECK(line_of("nodes 2\n\n0 2") == 3);
  CHECK(line_of("nodes 2\n0 x") == 2);
  CHECK(line_of("0 1\nnodes 3") == 2);
}
