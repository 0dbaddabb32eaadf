#include "snnbp/paths.hpp"

#include <cmath>
#include <stdexcept>

#include "snnbp/rng.hpp"

namespace snnbp {

ControlPath::ControlPath(const TemporalGrid& g, Eigen::MatrixXd v) : grid(g), values(std::move(v)) {
    if (values.rows() != grid.N) throw std::invalid_argument("ControlPath: values must have N rows");
}

double inner_product(const ControlPath& u, const ControlPath& v) {
    if (u.grid.N != v.grid.N || u.grid.h != v.grid.h || u.p() != v.p())
        throw std::invalid_argument("inner_product: mismatched grids or control dimensions");
    return u.grid.h * (u.values.array() * v.values.array()).sum();
}

double l2_norm(const ControlPath& u) { return std::sqrt(inner_product(u, u)); }

NoisePath sample_noise(const TemporalGrid& grid, int m, std::uint64_t seed, std::uint64_t stream) {
    if (m < 1) throw std::invalid_argument("sample_noise: m must be >= 1");
    CtrRng rng(seed, stream);
    const double s = std::sqrt(grid.h);
    Eigen::MatrixXd inc(grid.N, m);
    for (int n = 0; n < grid.N; ++n)
        for (int j = 0; j < m; ++j) inc(n, j) = s * rng.normal();
    return NoisePath{grid, std::move(inc), seed, stream};
}

}  // namespace snnbp
