#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "snnbp/grid.hpp"

namespace snnbp {

// Piecewise-constant control: row n applies on [t_n, t_{n+1}).
struct ControlPath {
    TemporalGrid grid;
    Eigen::MatrixXd values;  // N x p

    ControlPath() = default;
    ControlPath(const TemporalGrid& g, int p) : grid(g), values(Eigen::MatrixXd::Zero(g.N, p)) {}
    ControlPath(const TemporalGrid& g, Eigen::MatrixXd v);

    int p() const { return static_cast<int>(values.cols()); }
    Eigen::VectorXd row(int n) const { return values.row(n).transpose(); }
};

// Brownian increments: row n ~ N(0, h I_m).
struct NoisePath {
    TemporalGrid grid;
    Eigen::MatrixXd increments;  // N x m
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    int m() const { return static_cast<int>(increments.cols()); }
};

struct StatePath {
    TemporalGrid grid;
    Eigen::MatrixXd states;  // (N+1) x d

    int d() const { return static_cast<int>(states.cols()); }
    Eigen::VectorXd row(int n) const { return states.row(n).transpose(); }
};

// Adjoint pair: y rows 0..N, z[n] = y_{n+1} w_n^T / h (d x m outer product).
struct AdjointPath {
    TemporalGrid grid;
    Eigen::MatrixXd y;               // (N+1) x d
    std::vector<Eigen::MatrixXd> z;  // N entries, each d x m

    Eigen::VectorXd y_row(int n) const { return y.row(n).transpose(); }
};

struct DataSample {
    Eigen::VectorXd input;
    Eigen::VectorXd target;
};

// Discrete L2 pairing <u,v> = h * sum_n u_n . v_n over rows 0..N-1.
double inner_product(const ControlPath& u, const ControlPath& v);
double l2_norm(const ControlPath& u);

NoisePath sample_noise(const TemporalGrid& grid, int m, std::uint64_t seed, std::uint64_t stream);

}  // namespace snnbp
