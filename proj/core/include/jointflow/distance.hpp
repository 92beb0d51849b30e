#pragma once

#include <cstddef>
#include <vector>

namespace jointflow {

/// Per-class nonnegative distances ordered by class id. Used for the
/// prediction-error vector, the classifier distance vector and their fusion.
struct DistanceVector {
    std::vector<double> values;

    DistanceVector() = default;
    explicit DistanceVector(std::vector<double> v) : values(std::move(v)) {}

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    friend bool operator==(const DistanceVector&, const DistanceVector&) = default;
};

}  // namespace jointflow
