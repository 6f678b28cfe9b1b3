#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "oblique/common.hpp"

namespace oblique {

using Edge = std::pair<Index, Index>;

/// Undirected communication graph on nodes 0..n-1. Self-loops are implied
/// for every node and never stored in the neighbor lists.
class Graph {
 public:
  /// Duplicate edges are merged; self-loops and out-of-range ids are rejected.
  Graph(Index n_nodes, std::span<const Edge> edges);

  Index size() const { return static_cast<Index>(neighbors_.size()); }
  /// Sorted neighbor ids of k, excluding k itself.
  const std::vector<Index>& neighbors(Index k) const { return neighbors_[static_cast<std::size_t>(k)]; }
  /// Sorted {k} union neighbors(k).
  std::vector<Index> closed_neighborhood(Index k) const;
  bool adjacent(Index k, Index l) const;
  bool connected() const { return connected_; }
  Index edge_count() const;
  /// Edges with k < l, lexicographically sorted.
  std::vector<Edge> edges() const;

  friend bool operator==(const Graph& a, const Graph& b) { return a.neighbors_ == b.neighbors_; }

 private:
  std::vector<std::vector<Index>> neighbors_;
  bool connected_ = false;
};

/// Erdos-Renyi G(n, p) draw; when the draw is disconnected a uniformly random
/// labelled spanning tree (random Pruefer code) is overlaid. Deterministic in
/// `seed`.
Graph random_connected_graph(Index n, double edge_prob, std::uint64_t seed);

Graph complete_graph(Index n);
Graph ring_graph(Index n);
Graph path_graph(Index n);

// Edge-list format: header `nodes N`, then one 1-indexed `k l` pair per line.
// Blank lines and `#` comments are ignored.
Graph read_graph(std::istream& in);
Graph read_graph(const std::filesystem::path& path);
void write_graph(std::ostream& out, const Graph& g);
void write_graph(const std::filesystem::path& path, const Graph& g);

/// Sparsity pattern for combination matrices.
///
/// A mask is a base pattern over `node_count()` units together with a block
/// size per unit; entry (i, j) is allowed iff the units owning i and j are
/// allowed in the base pattern. Scalar masks have every block size equal to 1.
/// The diagonal of the base pattern is always allowed.
class SupportMask {
 public:
  /// Base pattern from a dense boolean matrix; the diagonal is forced on.
  explicit SupportMask(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& pattern);

  Index dim() const { return offsets_.back(); }
  Index node_count() const { return static_cast<Index>(dims_.size()); }
  const std::vector<Index>& block_dims() const { return dims_; }
  Index block_offset(Index k) const { return offsets_[static_cast<std::size_t>(k)]; }
  Index node_of(Index i) const { return owner_[static_cast<std::size_t>(i)]; }

  bool node_allowed(Index k, Index l) const { return base_(k, l); }
  bool allowed(Index i, Index j) const { return base_(node_of(i), node_of(j)); }
  /// Nodes l (including k) with node_allowed(k, l), ascending.
  std::vector<Index> node_row(Index k) const;
  Index allowed_count() const;
  /// Block size m when every block has size m.
  Index uniform_block() const;
  /// The base pattern as a scalar mask.
  SupportMask node_mask() const { return SupportMask(base_); }
  /// Entry-level dense pattern.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> dense() const;

  /// Number of nonzero entries of `a` outside the pattern.
  Index violations(const Matrix& a) const;
  /// Copy of `a` with every forbidden entry set to exactly zero.
  Matrix apply(const Matrix& a) const;

  friend bool operator==(const SupportMask& a, const SupportMask& b) {
    return a.dims_ == b.dims_ && a.base_ == b.base_;
  }

 private:
  friend SupportMask block_expand(const SupportMask& mask, std::span<const Index> dims);
  void set_dims(std::vector<Index> dims);

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> base_;
  std::vector<Index> dims_;
  std::vector<Index> offsets_;
  std::vector<Index> owner_;
};

/// allowed(k, l) iff l is a neighbor of k or l == k.
SupportMask support_mask(const Graph& g);

/// Replaces every entry (k, l) of `mask` by a dims[k] x dims[l] block.
/// Requires dims.size() == mask.dim() and all dims >= 1.
SupportMask block_expand(const SupportMask& mask, std::span<const Index> dims);

/// B (x) I_m.
Matrix kron_expand(const Matrix& b, Index m);

}  // namespace oblique
