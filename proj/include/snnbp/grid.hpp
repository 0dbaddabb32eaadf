#pragma once

#include <vector>

namespace snnbp {

// Uniform partition of [0, T] into N steps of size h = T/N.
struct TemporalGrid {
    double T = 1.0;
    int N = 1;
    double h = 1.0;

    double node(int n) const { return h * n; }
    std::vector<double> nodes() const;

    friend bool operator==(const TemporalGrid&, const TemporalGrid&) = default;
};

TemporalGrid make_grid(double T, int N);

}  // namespace snnbp
