#pragma once

#include <utility>
#include <vector>

#include "oblique/common.hpp"
#include "oblique/graph.hpp"

namespace oblique {

enum class Execution { Serial, Parallel };

/// Records which node read which node's state during a combination sweep.
struct AccessLog {
  std::vector<std::pair<Index, Index>> reads;  ///< (reader, source)
};

/// Block-sparse combination operator out_k = sum_{l in N_k} A_kl in_l.
///
/// Built from a dense matrix and the mask it is supported on; each node keeps
/// only its own block row restricted to its neighborhood, so a sweep never
/// touches state outside N_k. Entries of the dense matrix outside the mask are
/// ignored.
class NeighborOperator {
 public:
  NeighborOperator(const Matrix& a, const SupportMask& mask);

  Index dim() const { return dim_; }
  Index node_count() const { return static_cast<Index>(rows_.size()); }
  /// Nodes read by node k (including k), ascending.
  const std::vector<Index>& sources(Index k) const { return rows_[static_cast<std::size_t>(k)].sources; }

  /// Serial reference sweep. `in` and `out` must not alias.
  void apply_serial(const Vector& in, Vector& out, AccessLog* log = nullptr) const;
  /// OpenMP sweep over nodes; each thread writes only the slots of the nodes
  /// it owns, so the result is bit-identical to apply_serial.
  void apply_parallel(const Vector& in, Vector& out) const;

  void apply(const Vector& in, Vector& out, Execution exec) const {
    exec == Execution::Parallel ? apply_parallel(in, out) : apply_serial(in, out);
  }

  /// Dense matrix equivalent (zeros outside the mask).
  Matrix dense() const;

 private:
  struct BlockRow {
    Index offset = 0;
    Index size = 0;
    std::vector<Index> sources;
    std::vector<Index> columns;  ///< entry-level columns gathered by this row
    Matrix block;                ///< size x columns.size()
  };

  void apply_row(const BlockRow& row, const Vector& in, Vector& out, Vector& gather) const;

  Index dim_ = 0;
  std::vector<BlockRow> rows_;
};

}  // namespace oblique
