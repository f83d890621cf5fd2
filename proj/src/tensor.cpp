// SPDX-License-Identifier: Apache-2.0
#include "relight/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace relight {

bool Tensor3::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const Tensor3& t) {
    return "[" + std::to_string(t.dim(0)) + "x" + std::to_string(t.dim(1)) + "x" +
           std::to_string(t.dim(2)) + "]";
}

void require_same_shape(const Tensor3& a, const Tensor3& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ContractError(std::string(what) + ": shape mismatch " + shape_string(a) + " vs " +
                            shape_string(b));
    }
}

}  // namespace relight
