// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "relight/errors.hpp"

namespace relight {

/// Dense row-major rank-3 tensor of doubles.
///
/// Used for latents (channels x height x width) and for cached attention
/// features (heads x tokens x head_dim).
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(int d0, int d1, int d2, double fill = 0.0)
        : shape_{d0, d1, d2}, data_(static_cast<std::size_t>(d0) * d1 * d2, fill) {
        if (d0 < 0 || d1 < 0 || d2 < 0) throw ContractError("Tensor3: negative extent");
    }

    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    const std::array<int, 3>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    /// Contiguous slab for the leading index (one latent channel, one head).
    std::span<double> slab(int i) {
        const auto n = static_cast<std::size_t>(shape_[1]) * shape_[2];
        return {data_.data() + static_cast<std::size_t>(i) * n, n};
    }
    std::span<const double> slab(int i) const {
        const auto n = static_cast<std::size_t>(shape_[1]) * shape_[2];
        return {data_.data() + static_cast<std::size_t>(i) * n, n};
    }

    bool same_shape(const Tensor3& o) const { return shape_ == o.shape_; }
    bool all_finite() const;

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k;
    }

    std::array<int, 3> shape_{0, 0, 0};
    std::vector<double> data_;
};

std::string shape_string(const Tensor3& t);

/// Throws ContractError unless both tensors share a shape.
void require_same_shape(const Tensor3& a, const Tensor3& b, const char* what);

}  // namespace relight
