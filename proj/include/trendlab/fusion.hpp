#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trendlab/linalg.hpp"

namespace trendlab {

/// Widths of the input streams in input-row order (fundamental, technical and,
/// unless ablated, sentiment) and the common projected width.
struct StreamLayout {
  std::vector<std::size_t> dims;
  std::size_t projected = 0;

  std::size_t input_dim() const;
  std::size_t fused_dim() const { return dims.size() * projected; }
  /// Table-style layout: 3 fundamental, 3 technical, optionally 1 sentiment column.
  /// `projected == 0` picks the widest stream.
  static StreamLayout standard(bool with_sentiment, std::size_t projected = 0);
  void validate() const;
  friend bool operator==(const StreamLayout&, const StreamLayout&) = default;
};

struct StreamProjection {
  Matrix weight;  // projected x stream width
  Vector bias;    // projected
};

struct FusionParameters {
  std::vector<StreamProjection> streams;
};

/// weight * v + bias
Vector project_stream(std::span<const double> v, const Matrix& weight, std::span<const double> bias);

/// Concatenates the projected streams in order.
Vector fuse(std::span<const Vector> parts);
Vector fuse(const Vector& x, const Vector& y, const Vector& z);

/// Splits an input row by the layout, projects every stream and concatenates.
Vector fuse_row(std::span<const double> row, const StreamLayout& layout,
                const FusionParameters& params);

}  // namespace trendlab
