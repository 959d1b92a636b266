#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kuraduel/types.hpp"

namespace kuraduel {

enum class Population { blue, red };

std::string_view to_string(Population p);

using Edge = std::pair<int, int>;
using DegreeVector = std::vector<int>;

/// Dense graphs larger than this are refused.
inline constexpr std::size_t max_dense_nodes = 4096;

/// Undirected simple graph on nodes 0..n-1. Immutable once built.
class Graph {
public:
  Graph() = default;
  /// Throws DimensionError on out-of-range indices, self-loops or repeated edges.
  Graph(std::size_t n, const std::vector<Edge>& edges);

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edge_count_; }
  bool has_edge(int i, int j) const;

  /// Symmetric 0/1 matrix with zero diagonal.
  const Matrix& adjacency() const noexcept { return adjacency_; }
  const std::vector<int>& neighbours(int i) const { return neighbours_.at(static_cast<std::size_t>(i)); }

  /// Edges with i < j in lexicographic order.
  std::vector<Edge> edges() const;
  DegreeVector degrees() const;
  std::size_t component_count() const;
  bool connected() const { return n_ > 0 && component_count() == 1; }

  /// Subgraph induced on `nodes`, relabelled 0..k-1 in the given order.
  Graph induced(const std::vector<int>& nodes) const;

  friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.adjacency_ == b.adjacency_; }

private:
  std::size_t n_ = 0;
  std::size_t edge_count_ = 0;
  Matrix adjacency_;
  std::vector<std::vector<int>> neighbours_;
};

/// Directed coupling blocks between the populations: a_br is N x M (Blue rows),
/// a_rb is M x N (Red rows). Entries are 0 or 1.
class CrossNetwork {
public:
  CrossNetwork() = default;
  CrossNetwork(Matrix a_br, Matrix a_rb);

  /// a_rb = a_br^T.
  static CrossNetwork symmetric(Matrix a_br);

  const Matrix& a_br() const noexcept { return a_br_; }
  const Matrix& a_rb() const noexcept { return a_rb_; }
  std::size_t blue_size() const noexcept { return static_cast<std::size_t>(a_br_.rows()); }
  std::size_t red_size() const noexcept { return static_cast<std::size_t>(a_br_.cols()); }
  bool is_symmetric() const { return a_rb_ == a_br_.transpose(); }

  friend bool operator==(const CrossNetwork& a, const CrossNetwork& b) {
    return a.a_br_ == b.a_br_ && a.a_rb_ == b.a_rb_;
  }

private:
  Matrix a_br_;
  Matrix a_rb_;
};

struct CrossDegrees {
  DegreeVector blue_to_red;  // row sums of a_br
  DegreeVector red_to_blue;  // row sums of a_rb
  int total = 0;             // sum of all a_br entries
};

/// Red split into R1 (any cross link, either direction) and R2 (none).
/// Lists are ascending global red indices.
struct RedPartition {
  std::vector<int> r1;
  std::vector<int> r2;
  int d_r1r2 = 0;  // red edges with one end in R1 and the other in R2
  int d_br1 = 0;   // a_br entries landing in R1 columns
  int d_r1b = 0;   // a_rb entries on R1 rows
  int d_br2 = 0;
  int d_r2b = 0;

  std::size_t m1() const noexcept { return r1.size(); }
  std::size_t m2() const noexcept { return r2.size(); }
};

/// Complete rooted tree in breadth-first numbering (root 0, children of i are
/// branching*i+1 .. branching*i+branching).
Graph complete_kary_tree(int branching, int depth);

/// G(n, p). With require_connected, redraws from a fresh seed substream until a
/// single component appears, at most max_retries draws.
Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed, bool require_connected,
                  int max_retries = 1000);

Matrix laplacian(const Graph& g);
/// Ascending eigenvalues of the (symmetric) Laplacian.
Vector laplacian_spectrum(const Graph& g);

/// Nodes of a BFS-numbered tree that have no child (no neighbour with a larger index).
std::vector<int> tree_leaves(const Graph& tree);

/// Links each Blue leaf i to the Red node with the same local index.
CrossNetwork leaf_matching_cross(const Graph& blue, const Graph& red, bool symmetric);

CrossDegrees cross_degrees(const CrossNetwork& x);

RedPartition partition_red(const Graph& red, const CrossNetwork& x);

struct EdgeListDocument {
  Graph graph;
  std::optional<Population> population;
};

/// Edge-list text: optional "population blue|red", optional "nodes K", then
/// one "u v" pair per line. '#' starts a comment.
EdgeListDocument parse_edge_list(std::string_view text);
Graph read_edge_list(std::string_view text);
/// "nodes K" followed by sorted "u v" lines, no trailing newline.
std::string write_edge_list(const Graph& g);
std::string write_edge_list(const Graph& g, Population population);

} // namespace kuraduel
