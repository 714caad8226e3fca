#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace needle {

/// Labeled points with a dense symmetric distance matrix.
class FiniteMetricSpace {
public:
    FiniteMetricSpace() = default;
    /// `d` is row-major size x size. Throws std::invalid_argument on a size
    /// mismatch, negative or non-finite entries, nonzero diagonal, or asymmetry
    /// beyond 1e-12 (the matrix is then symmetrized exactly).
    FiniteMetricSpace(std::vector<std::string> labels, std::vector<double> d);

    std::size_t size() const { return labels_.size(); }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * size() + j]; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::span<const double> matrix() const { return d_; }

    /// Largest d(i,k) - d(i,j) - d(j,k) over all triples (<= 0 for a metric).
    double max_triangle_violation() const;
    /// Subspace on the given indices.
    FiniteMetricSpace subspace(std::span<const std::size_t> indices) const;

private:
    std::vector<std::string> labels_;
    std::vector<double> d_;
};

/// Uniform sample of [0, length] with N points and the |x - y| metric.
FiniteMetricSpace sampled_interval(double length, std::size_t count);

}  // namespace needle
