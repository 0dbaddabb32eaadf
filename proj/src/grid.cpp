#include "snnbp/grid.hpp"

#include <stdexcept>

namespace snnbp {

std::vector<double> TemporalGrid::nodes() const {
    std::vector<double> out(N + 1);
    for (int n = 0; n <= N; ++n) out[n] = node(n);
    return out;
}

TemporalGrid make_grid(double T, int N) {
    if (!(T > 0.0)) throw std::invalid_argument("make_grid: T must be positive");
    if (N < 1) throw std::invalid_argument("make_grid: N must be >= 1");
    return TemporalGrid{T, N, T / N};
}

}  // namespace snnbp
