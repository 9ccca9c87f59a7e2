#include "chunkstore/pca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "chunkstore/error.hpp"

namespace chunkstore {

PcaTransform::PcaTransform(std::vector<float> mean, std::vector<float> projection,
                           std::size_t output_dim)
    : mean_(std::move(mean)), projection_(std::move(projection)), output_dim_(output_dim) {
  if (projection_.size() != output_dim_ * mean_.size()) {
    throw Error(Errc::kDimensionMismatch, "projection size does not match mean and output dim");
  }
  if (output_dim_ > mean_.size()) {
    throw Error(Errc::kReducedDimExceedsFull, "output dim exceeds input dim");
  }
}

std::span<const float> PcaTransform::row(std::size_t r) const {
  return {projection_.data() + r * input_dim(), input_dim()};
}

void PcaTransform::apply(std::span<const float> in, std::span<float> out) const {
  const std::size_t d = input_dim();
  if (in.size() != d || out.size() != output_dim_) {
    throw Error(Errc::kDimensionMismatch, "PCA input " + std::to_string(in.size()) +
                                              " (expected " + std::to_string(d) + ")");
  }
  for (std::size_t r = 0; r < output_dim_; ++r) {
    const float* w = projection_.data() + r * d;
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      acc += static_cast<double>(w[i]) * (static_cast<double>(in[i]) - mean_[i]);
    }
    out[r] = static_cast<float>(acc);
  }
}

StateVector PcaTransform::apply(std::span<const float> in) const {
  StateVector out(output_dim_);
  apply(in, out);
  return out;
}

StateVector PcaTransform::reconstruct(std::span<const float> reduced) const {
  if (reduced.size() != output_dim_) throw Error(Errc::kDimensionMismatch, "reduced vector");
  const std::size_t d = input_dim();
  std::vector<double> acc(mean_.begin(), mean_.end());
  for (std::size_t r = 0; r < output_dim_; ++r) {
    const float* w = projection_.data() + r * d;
    for (std::size_t i = 0; i < d; ++i) acc[i] += static_cast<double>(w[i]) * reduced[r];
  }
  return StateVector(acc.begin(), acc.end());
}

double PcaTransform::orthonormality_error() const {
  const std::size_t d = input_dim();
  double worst = 0.0;
  for (std::size_t a = 0; a < output_dim_; ++a) {
    for (std::size_t b = a; b < output_dim_; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        dot += static_cast<double>(projection_[a * d + i]) * projection_[b * d + i];
      }
      worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

PcaFit fit_pca(std::span<const float> samples, std::size_t dim, std::size_t output_dim) {
  if (dim == 0 || samples.size() % dim != 0) {
    throw Error(Errc::kDimensionMismatch, "sample buffer is not a multiple of the dimension");
  }
  if (output_dim > dim) {
    throw Error(Errc::kReducedDimExceedsFull,
                std::to_string(output_dim) + " > " + std::to_string(dim));
  }
  const std::size_t count = samples.size() / dim;
  if (count < std::max<std::size_t>(output_dim, 1)) {
    throw Error(Errc::kTooFewSamples, std::to_string(count) + " samples for " +
                                          std::to_string(output_dim) + " components");
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t i = 0; i < dim; ++i) mean[static_cast<Eigen::Index>(i)] += samples[s * dim + i];
  }
  mean /= static_cast<double>(count);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  Eigen::VectorXd centered(static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t i = 0; i < dim; ++i) {
      centered[static_cast<Eigen::Index>(i)] = samples[s * dim + i] - mean[static_cast<Eigen::Index>(i)];
    }
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(std::max<std::size_t>(count - 1, 1));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::kInvalidArgument, "covariance eigendecomposition failed");
  }
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& vectors = solver.eigenvectors();

  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[static_cast<Eigen::Index>(a)] > values[static_cast<Eigen::Index>(b)];
  });

  PcaFit fit;
  std::vector<float> projection(output_dim * dim);
  for (std::size_t r = 0; r < output_dim; ++r) {
    const auto col = static_cast<Eigen::Index>(order[r]);
    // Sign convention: the largest-magnitude component is positive.
    Eigen::Index pivot = 0;
    vectors.col(col).cwiseAbs().maxCoeff(&pivot);
    const double sign = vectors(pivot, col) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      projection[r * dim + i] = static_cast<float>(sign * vectors(static_cast<Eigen::Index>(i), col));
    }
    fit.explained_variance.push_back(values[col]);
  }
  std::vector<float> mean_f(dim);
  for (std::size_t i = 0; i < dim; ++i) mean_f[i] = static_cast<float>(mean[static_cast<Eigen::Index>(i)]);
  fit.transform = PcaTransform(std::move(mean_f), std::move(projection), output_dim);
  return fit;
}

}  // namespace chunkstore
