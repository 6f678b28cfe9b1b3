#include "oblique/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace oblique {

Graph::Graph(Index n_nodes, std::span<const Edge> edges) {
  require(n_nodes >= 1, ErrorCode::InvalidParam, "graph needs at least one node");
  neighbors_.resize(static_cast<std::size_t>(n_nodes));
  for (auto [k, l] : edges) {
    require(k >= 0 && k < n_nodes && l >= 0 && l < n_nodes, ErrorCode::InvalidParam,
            "edge (" + std::to_string(k) + ", " + std::to_string(l) + ") out of range");
    require(k != l, ErrorCode::InvalidParam, "self-loops are implicit and must not be listed");
    neighbors_[static_cast<std::size_t>(k)].push_back(l);
    neighbors_[static_cast<std::size_t>(l)].push_back(k);
  }
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }

  // breadth-first sweep from node 0
  std::vector<char> seen(neighbors_.size(), 0);
  std::vector<Index> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (Index l : neighbors_[static_cast<std::size_t>(queue[head])])
      if (!seen[static_cast<std::size_t>(l)]) {
        seen[static_cast<std::size_t>(l)] = 1;
        queue.push_back(l);
      }
  connected_ = queue.size() == neighbors_.size();
}

std::vector<Index> Graph::closed_neighborhood(Index k) const {
  std::vector<Index> out = neighbors(k);
  out.insert(std::upper_bound(out.begin(), out.end(), k), k);
  return out;
}

bool Graph::adjacent(Index k, Index l) const {
  const auto& nb = neighbors(k);
  return std::binary_search(nb.begin(), nb.end(), l);
}

Index Graph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& nb : neighbors_) twice += nb.size();
  return static_cast<Index>(twice / 2);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  for (Index k = 0; k < size(); ++k)
    for (Index l : neighbors(k))
      if (k < l) out.emplace_back(k, l);
  return out;
}

namespace {

// Decodes a uniformly random Pruefer sequence into a labelled tree.
std::vector<Edge> random_spanning_tree(Index n, std::mt19937_64& rng) {
  if (n == 2) return {{0, 1}};
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::vector<Index> code(static_cast<std::size_t>(n - 2));
  for (auto& c : code) c = pick(rng);
  std::vector<Index> degree(static_cast<std::size_t>(n), 1);
  for (Index c : code) ++degree[static_cast<std::size_t>(c)];

  std::vector<Edge> tree;
  for (Index c : code) {
    Index leaf = 0;
    while (degree[static_cast<std::size_t>(leaf)] != 1) ++leaf;
    tree.emplace_back(leaf, c);
    --degree[static_cast<std::size_t>(leaf)];
    --degree[static_cast<std::size_t>(c)];
  }
  Index u = -1;
  for (Index k = 0; k < n; ++k)
    if (degree[static_cast<std::size_t>(k)] == 1) {
      if (u < 0) {
        u = k;
      } else {
        tree.emplace_back(u, k);
        break;
      }
    }
  return tree;
}

}  // namespace

Graph random_connected_graph(Index n, double edge_prob, std::uint64_t seed) {
  require(n >= 2, ErrorCode::InvalidParam, "random graph needs n >= 2");
  require(edge_prob > 0.0 && edge_prob <= 1.0, ErrorCode::InvalidParam, "edge_prob must lie in (0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Edge> edges;
  for (Index k = 0; k < n; ++k)
    for (Index l = k + 1; l < n; ++l)
      if (unif(rng) < edge_prob) edges.emplace_back(k, l);
  Graph g(n, edges);
  if (g.connected()) return g;
  for (const Edge& e : random_spanning_tree(n, rng)) edges.push_back(e);
  return Graph(n, edges);
}

Graph complete_graph(Index n) {
  std::vector<Edge> edges;
  for (Index k = 0; k < n; ++k)
    for (Index l = k + 1; l < n; ++l) edges.emplace_back(k, l);
  return Graph(n, edges);
}

Graph ring_graph(Index n) {
  require(n >= 3, ErrorCode::InvalidParam, "ring needs n >= 3");
  std::vector<Edge> edges;
  for (Index k = 0; k < n; ++k) edges.emplace_back(k, (k + 1) % n);
  return Graph(n, edges);
}

Graph path_graph(Index n) {
  std::vector<Edge> edges;
  for (Index k = 0; k + 1 < n; ++k) edges.emplace_back(k, k + 1);
  return Graph(n, edges);
}

Graph read_graph(std::istream& in) {
  std::string line;
  Index n = -1;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (n < 0) {
      if (first != "nodes" || !(ls >> n) || n < 1)
        throw Error(ErrorCode::ParseError, "graph file must start with 'nodes N'");
      continue;
    }
    Index k = 0;
    Index l = 0;
    std::istringstream pair(line);
    if (!(pair >> k >> l)) throw Error(ErrorCode::ParseError, "bad edge line: '" + line + "'");
    edges.emplace_back(k - 1, l - 1);
  }
  if (n < 0) throw Error(ErrorCode::ParseError, "missing 'nodes N' header");
  return Graph(n, edges);
}

Graph read_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_graph(in);
}

void write_graph(std::ostream& out, const Graph& g) {
  out << "nodes " << g.size() << '\n';
  for (auto [k, l] : g.edges()) out << k + 1 << ' ' << l + 1 << '\n';
}

void write_graph(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_graph(out, g);
}

// ---------------------------------------------------------------------------

SupportMask::SupportMask(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& pattern) : base_(pattern) {
  require(pattern.rows() == pattern.cols() && pattern.rows() >= 1, ErrorCode::DimensionMismatch,
          "support pattern must be square and nonempty");
  for (Index k = 0; k < base_.rows(); ++k) base_(k, k) = true;
  set_dims(std::vector<Index>(static_cast<std::size_t>(base_.rows()), 1));
}

void SupportMask::set_dims(std::vector<Index> dims) {
  dims_ = std::move(dims);
  offsets_.assign(dims_.size() + 1, 0);
  std::partial_sum(dims_.begin(), dims_.end(), offsets_.begin() + 1);
  owner_.clear();
  owner_.reserve(static_cast<std::size_t>(offsets_.back()));
  for (std::size_t k = 0; k < dims_.size(); ++k) owner_.insert(owner_.end(), static_cast<std::size_t>(dims_[k]), static_cast<Index>(k));
}

std::vector<Index> SupportMask::node_row(Index k) const {
  std::vector<Index> out;
  for (Index l = 0; l < node_count(); ++l)
    if (base_(k, l)) out.push_back(l);
  return out;
}

Index SupportMask::allowed_count() const {
  Index count = 0;
  for (Index k = 0; k < node_count(); ++k)
    for (Index l = 0; l < node_count(); ++l)
      if (base_(k, l)) count += dims_[static_cast<std::size_t>(k)] * dims_[static_cast<std::size_t>(l)];
  return count;
}

Index SupportMask::uniform_block() const {
  const Index m = dims_.front();
  for (Index d : dims_)
    if (d != m) return 0;
  return m;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> SupportMask::dense() const {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> out(dim(), dim());
  for (Index i = 0; i < dim(); ++i)
    for (Index j = 0; j < dim(); ++j) out(i, j) = allowed(i, j);
  return out;
}

Index SupportMask::violations(const Matrix& a) const {
  require(a.rows() == dim() && a.cols() == dim(), ErrorCode::DimensionMismatch, "matrix size differs from mask");
  Index count = 0;
  for (Index j = 0; j < dim(); ++j)
    for (Index i = 0; i < dim(); ++i)
      if (!allowed(i, j) && a(i, j) != 0.0) ++count;
  return count;
}

Matrix SupportMask::apply(const Matrix& a) const {
  require(a.rows() == dim() && a.cols() == dim(), ErrorCode::DimensionMismatch, "matrix size differs from mask");
  Matrix out = a;
  for (Index j = 0; j < dim(); ++j)
    for (Index i = 0; i < dim(); ++i)
      if (!allowed(i, j)) out(i, j) = 0.0;
  return out;
}

SupportMask support_mask(const Graph& g) {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> pattern =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(g.size(), g.size(), false);
  for (Index k = 0; k < g.size(); ++k) {
    pattern(k, k) = true;
    for (Index l : g.neighbors(k)) pattern(k, l) = true;
  }
  return SupportMask(pattern);
}

SupportMask block_expand(const SupportMask& mask, std::span<const Index> dims) {
  require(static_cast<Index>(dims.size()) == mask.dim(), ErrorCode::DimensionMismatch,
          "one block size per mask row is required");
  for (Index d : dims) require(d >= 1, ErrorCode::DimensionMismatch, "block sizes must be >= 1");
  SupportMask out(mask.dense());
  out.set_dims(std::vector<Index>(dims.begin(), dims.end()));
  return out;
}

Matrix kron_expand(const Matrix& b, Index m) {
  require(m >= 1, ErrorCode::InvalidParam, "block size must be >= 1");
  Matrix out = Matrix::Zero(b.rows() * m, b.cols() * m);
  for (Index i = 0; i < b.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j)
      for (Index d = 0; d < m; ++d) out(i * m + d, j * m + d) = b(i, j);
  return out;
}

}  // namespace oblique
