#include "needle/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace needle {

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> labels, std::vector<double> d)
    : labels_(std::move(labels)), d_(std::move(d)) {
    const std::size_t n = labels_.size();
    if (d_.size() != n * n) throw std::invalid_argument("FiniteMetricSpace: matrix size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (d_[i * n + i] != 0.0) throw std::invalid_argument("FiniteMetricSpace: nonzero diagonal");
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a = d_[i * n + j], b = d_[j * n + i];
            if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0) {
                throw std::invalid_argument("FiniteMetricSpace: negative or non-finite distance");
            }
            if (std::abs(a - b) > 1e-12 * std::max(1.0, std::max(a, b))) {
                throw std::invalid_argument("FiniteMetricSpace: asymmetric matrix");
            }
            d_[j * n + i] = a;
        }
    }
}

double FiniteMetricSpace::max_triangle_violation() const {
    const std::size_t n = size();
    double worst = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                worst = std::max(worst, (*this)(i, k) - (*this)(i, j) - (*this)(j, k));
            }
        }
    }
    return n == 0 ? 0.0 : worst;
}

FiniteMetricSpace FiniteMetricSpace::subspace(std::span<const std::size_t> indices) const {
    std::vector<std::string> labels;
    std::vector<double> d;
    d.reserve(indices.size() * indices.size());
    for (std::size_t i : indices) {
        labels.push_back(labels_.at(i));
        for (std::size_t j : indices) d.push_back((*this)(i, j));
    }
    return FiniteMetricSpace(std::move(labels), std::move(d));
}

FiniteMetricSpace sampled_interval(double length, std::size_t count) {
    if (count < 2 || !(length > 0.0)) {
        throw std::invalid_argument("sampled_interval: need count >= 2 and length > 0");
    }
    std::vector<double> x(count);
    for (std::size_t i = 0; i < count; ++i) {
        x[i] = length * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    x.back() = length;
    std::vector<std::string> labels(count);
    std::vector<double> d(count * count);
    for (std::size_t i = 0; i < count; ++i) {
        labels[i] = "s" + std::to_string(i);
        for (std::size_t j = 0; j < count; ++j) d[i * count + j] = std::abs(x[i] - x[j]);
    }
    return FiniteMetricSpace(std::move(labels), std::move(d));
}

}  // namespace needle
