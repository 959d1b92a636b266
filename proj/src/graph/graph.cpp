#include "kuraduel/graph.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "kuraduel/errors.hpp"
#include "kuraduel/random.hpp"

namespace kuraduel {

std::string_view to_string(Population p) { return p == Population::blue ? "blue" : "red"; }

namespace {
std::size_t checked_size(std::size_t n) {
  if (n > max_dense_nodes) throw SizeError("graph with " + std::to_string(n) + " nodes exceeds dense limit");
  return n;
}
} // namespace

Graph::Graph(std::size_t n, const std::vector<Edge>& edges)
    : n_(checked_size(n)), adjacency_(Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
      neighbours_(n) {
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n)
      throw DimensionError("edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range for " +
                           std::to_string(n) + " nodes");
    if (u == v) throw DimensionError("self-loop at node " + std::to_string(u));
    if (adjacency_(u, v) != 0.0)
      throw DimensionError("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    adjacency_(u, v) = adjacency_(v, u) = 1.0;
    ++edge_count_;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (adjacency_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0)
        neighbours_[i].push_back(static_cast<int>(j));
}

bool Graph::has_edge(int i, int j) const {
  if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n_ || static_cast<std::size_t>(j) >= n_) return false;
  return adjacency_(i, j) != 0.0;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t i = 0; i < n_; ++i)
    for (int j : neighbours_[i])
      if (static_cast<std::size_t>(j) > i) out.emplace_back(static_cast<int>(i), j);
  return out;
}

DegreeVector Graph::degrees() const {
  DegreeVector d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = static_cast<int>(neighbours_[i].size());
  return d;
}

std::size_t Graph::component_count() const {
  std::vector<char> seen(n_, 0);
  std::vector<int> stack;
  std::size_t components = 0;
  for (std::size_t s = 0; s < n_; ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = 1;
    stack.push_back(static_cast<int>(s));
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : neighbours_[static_cast<std::size_t>(u)])
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          stack.push_back(v);
        }
    }
  }
  return components;
}

Graph Graph::induced(const std::vector<int>& nodes) const {
  std::vector<Edge> sub;
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = a + 1; b < nodes.size(); ++b)
      if (has_edge(nodes[a], nodes[b])) sub.emplace_back(static_cast<int>(a), static_cast<int>(b));
  return Graph(nodes.size(), sub);
}

namespace {

void require_binary(const Matrix& m, const char* name) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0 && m(i, j) != 1.0)
        throw DimensionError(std::string(name) + " entries must be 0 or 1");
}

} // namespace

CrossNetwork::CrossNetwork(Matrix a_br, Matrix a_rb) : a_br_(std::move(a_br)), a_rb_(std::move(a_rb)) {
  if (a_rb_.rows() != a_br_.cols() || a_rb_.cols() != a_br_.rows())
    throw DimensionError("cross blocks must be N x M and M x N");
  require_binary(a_br_, "a_br");
  require_binary(a_rb_, "a_rb");
}

CrossNetwork CrossNetwork::symmetric(Matrix a_br) {
  Matrix a_rb = a_br.transpose();
  return CrossNetwork(std::move(a_br), std::move(a_rb));
}

Graph complete_kary_tree(int branching, int depth) {
  if (branching < 1) throw DimensionError("branching must be at least 1");
  if (depth < 0) throw DimensionError("depth must be nonnegative");
  std::size_t count = 0;
  std::size_t level = 1;
  for (int d = 0; d <= depth; ++d) {
    count += level;
    if (count > max_dense_nodes) throw SizeError("complete tree node count overflows the dense limit");
    if (d < depth) level *= static_cast<std::size_t>(branching);
    if (level > max_dense_nodes) throw SizeError("complete tree node count overflows the dense limit");
  }
  std::vector<Edge> edges;
  edges.reserve(count - 1);
  for (std::size_t child = 1; child < count; ++child)
    edges.emplace_back(static_cast<int>((child - 1) / static_cast<std::size_t>(branching)), static_cast<int>(child));
  return Graph(count, edges);
}

Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed, bool require_connected, int max_retries) {
  if (!(p >= 0.0 && p <= 1.0)) throw DimensionError("link probability must lie in [0, 1]");
  if (n == 0) throw DimensionError("Erdos-Renyi graph needs at least one node");
  const int attempts = require_connected ? std::max(max_retries, 1) : 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    auto rng = substream(seed, static_cast<std::uint64_t>(attempt));
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (unit_uniform(rng) < p) edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
    Graph g(n, edges);
    if (!require_connected || g.connected()) return g;
  }
  throw RetryLimitError("no connected G(" + std::to_string(n) + ", " + std::to_string(p) + ") sample in " +
                        std::to_string(attempts) + " draws");
}

Matrix laplacian(const Graph& g) {
  Matrix l = -g.adjacency();
  const auto d = g.degrees();
  for (std::size_t i = 0; i < g.size(); ++i) l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
  return l;
}

Vector laplacian_spectrum(const Graph& g) {
  if (g.size() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian(g), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

std::vector<int> tree_leaves(const Graph& tree) {
  std::vector<int> leaves;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& nb = tree.neighbours(static_cast<int>(i));
    if (std::none_of(nb.begin(), nb.end(), [&](int j) { return static_cast<std::size_t>(j) > i; }))
      leaves.push_back(static_cast<int>(i));
  }
  return leaves;
}

CrossNetwork leaf_matching_cross(const Graph& blue, const Graph& red, bool symmetric) {
  if (blue.size() == 0 || blue.edge_count() + 1 != blue.size() || !blue.connected())
    throw DimensionError("leaf matching needs a tree for the Blue network");
  const auto leaves = tree_leaves(blue);
  if (red.size() <= static_cast<std::size_t>(leaves.back()))
    throw DimensionError("Red network has " + std::to_string(red.size()) + " nodes but Blue leaf " +
                         std::to_string(leaves.back()) + " needs a partner");
  Matrix a_br = Matrix::Zero(static_cast<Eigen::Index>(blue.size()), static_cast<Eigen::Index>(red.size()));
  for (int leaf : leaves) a_br(leaf, leaf) = 1.0;
  if (symmetric) return CrossNetwork::symmetric(std::move(a_br));
  Matrix a_rb = Matrix::Zero(a_br.cols(), a_br.rows());
  return CrossNetwork(std::move(a_br), std::move(a_rb));
}

CrossDegrees cross_degrees(const CrossNetwork& x) {
  CrossDegrees out;
  out.blue_to_red.resize(x.blue_size());
  out.red_to_blue.resize(x.red_size());
  for (Eigen::Index i = 0; i < x.a_br().rows(); ++i)
    out.blue_to_red[static_cast<std::size_t>(i)] = static_cast<int>(x.a_br().row(i).sum());
  for (Eigen::Index i = 0; i < x.a_rb().rows(); ++i)
    out.red_to_blue[static_cast<std::size_t>(i)] = static_cast<int>(x.a_rb().row(i).sum());
  out.total = std::accumulate(out.blue_to_red.begin(), out.blue_to_red.end(), 0);
  return out;
}

RedPartition partition_red(const Graph& red, const CrossNetwork& x) {
  if (x.red_size() != red.size()) throw DimensionError("cross network does not match Red size");
  RedPartition part;
  std::vector<char> in_r1(red.size(), 0);
  for (std::size_t j = 0; j < red.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const bool linked = x.a_br().col(jj).sum() > 0.0 || x.a_rb().row(jj).sum() > 0.0;
    in_r1[j] = linked ? 1 : 0;
    (linked ? part.r1 : part.r2).push_back(static_cast<int>(j));
  }
  if (part.r1.empty() || part.r2.empty())
    throw DegeneratePartitionError("Red partition has " + std::to_string(part.r1.size()) + " cross-linked and " +
                                   std::to_string(part.r2.size()) + " unlinked nodes; both must be nonempty");
  for (auto [u, v] : red.edges())
    if (in_r1[static_cast<std::size_t>(u)] != in_r1[static_cast<std::size_t>(v)]) ++part.d_r1r2;
  for (int j : part.r1) {
    part.d_br1 += static_cast<int>(x.a_br().col(j).sum());
    part.d_r1b += static_cast<int>(x.a_rb().row(j).sum());
  }
  for (int j : part.r2) {
    part.d_br2 += static_cast<int>(x.a_br().col(j).sum());
    part.d_r2b += static_cast<int>(x.a_rb().row(j).sum());
  }
  return part;
}

} // namespace kuraduel
