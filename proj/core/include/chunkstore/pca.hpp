#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chunkstore/types.hpp"

namespace chunkstore {

/// Mean-centering followed by projection onto `output_dim` orthonormal rows.
class PcaTransform {
 public:
  PcaTransform() = default;
  PcaTransform(std::vector<float> mean, std::vector<float> projection, std::size_t output_dim);

  std::size_t input_dim() const noexcept { return mean_.size(); }
  std::size_t output_dim() const noexcept { return output_dim_; }

  const std::vector<float>& mean() const noexcept { return mean_; }
  /// Row-major output_dim x input_dim.
  const std::vector<float>& projection() const noexcept { return projection_; }
  std::span<const float> row(std::size_t r) const;

  /// Throws DimensionMismatch.
  void apply(std::span<const float> in, std::span<float> out) const;
  StateVector apply(std::span<const float> in) const;
  /// Maps a reduced vector back into the input space (mean + P^T y).
  StateVector reconstruct(std::span<const float> reduced) const;

  /// Largest |<row_i, row_j> - delta_ij|.
  double orthonormality_error() const;

  bool operator==(const PcaTransform&) const = default;

 private:
  std::vector<float> mean_;
  std::vector<float> projection_;
  std::size_t output_dim_ = 0;
};

struct PcaFit {
  PcaTransform transform;
  /// Eigenvalues of the sample covariance for the kept directions, descending.
  std::vector<double> explained_variance;
};

/// Fits PCA to `count` row-major samples of dimension `dim`.
/// Throws TooFewSamples when count < output_dim, ReducedDimExceedsFull when
/// output_dim > dim.
PcaFit fit_pca(std::span<const float> samples, std::size_t dim, std::size_t output_dim);

}  // namespace chunkstore
