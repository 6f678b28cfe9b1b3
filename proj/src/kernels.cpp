#include "oblique/kernels.hpp"

#include <omp.h>

namespace oblique {

NeighborOperator::NeighborOperator(const Matrix& a, const SupportMask& mask) : dim_(mask.dim()) {
  require(a.rows() == dim_ && a.cols() == dim_, ErrorCode::DimensionMismatch, "matrix size differs from mask");
  rows_.resize(static_cast<std::size_t>(mask.node_count()));
  for (Index k = 0; k < mask.node_count(); ++k) {
    BlockRow& row = rows_[static_cast<std::size_t>(k)];
    row.offset = mask.block_offset(k);
    row.size = mask.block_dims()[static_cast<std::size_t>(k)];
    row.sources = mask.node_row(k);
    for (Index l : row.sources)
      for (Index c = 0; c < mask.block_dims()[static_cast<std::size_t>(l)]; ++c)
        row.columns.push_back(mask.block_offset(l) + c);
    row.block.resize(row.size, static_cast<Index>(row.columns.size()));
    for (Index j = 0; j < row.block.cols(); ++j)
      row.block.col(j) = a.col(row.columns[static_cast<std::size_t>(j)]).segment(row.offset, row.size);
  }
}

void NeighborOperator::apply_row(const BlockRow& row, const Vector& in, Vector& out, Vector& gather) const {
  const Index width = static_cast<Index>(row.columns.size());
  gather.resize(width);
  for (Index j = 0; j < width; ++j) gather(j) = in(row.columns[static_cast<std::size_t>(j)]);
  out.segment(row.offset, row.size).noalias() = row.block * gather;
}

void NeighborOperator::apply_serial(const Vector& in, Vector& out, AccessLog* log) const {
  require(in.size() == dim_, ErrorCode::DimensionMismatch, "input length differs from operator size");
  out.resize(dim_);
  Vector gather;
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    if (log)
      for (Index l : rows_[k].sources) log->reads.emplace_back(static_cast<Index>(k), l);
    apply_row(rows_[k], in, out, gather);
  }
}

void NeighborOperator::apply_parallel(const Vector& in, Vector& out) const {
  require(in.size() == dim_, ErrorCode::DimensionMismatch, "input length differs from operator size");
  out.resize(dim_);
  const auto n = static_cast<std::ptrdiff_t>(rows_.size());
#pragma omp parallel
  {
    Vector gather;
#pragma omp for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) apply_row(rows_[static_cast<std::size_t>(k)], in, out, gather);
  }
}

Matrix NeighborOperator::dense() const {
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const BlockRow& row : rows_)
    for (Index j = 0; j < row.block.cols(); ++j)
      out.col(row.columns[static_cast<std::size_t>(j)]).segment(row.offset, row.size) = row.block.col(j);
  return out;
}

}  // namespace oblique
