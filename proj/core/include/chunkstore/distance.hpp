#pragma once

#include <span>

namespace chunkstore {

/// Squared Euclidean distance, accumulated in double.
/// Throws DimensionMismatch when the spans differ in length.
double sq_l2(std::span<const float> a, std::span<const float> b);

/// Unchecked single-precision kernel for index scans; `a` and `b` must both
/// hold `dim` values.
float sq_l2_f32(const float* a, const float* b, std::size_t dim) noexcept;

}  // namespace chunkstore
