#pragma once

#include <cstdint>
#include <utility>

#include "snnbp/datasets.hpp"
#include "snnbp/problem.hpp"

namespace snnbp {

// Layered stochastic net as a controlled SDE: layer transition
//   X_{n+1} = X_n + h * mix (a .* logistic(W X_n + V)) + g(c) w_n,
// with per-layer parameters packed into the control row
//   u_n = (a, W row-major, V, mix row-major, c).
struct SnnArch {
    int L = 4;         // neurons per layer (state dimension)
    int N_layers = 8;  // depth; equals the grid's N
    int n_sig = 4;     // sigmoid units per layer
    int d_in = 1;
    int d_out = 1;

    int p() const { return n_sig + n_sig * L + n_sig + L * n_sig + 1; }
    int off_a() const { return 0; }
    int off_w() const { return n_sig; }
    int off_v() const { return n_sig + n_sig * L; }
    int off_mix() const { return n_sig + n_sig * L + n_sig; }
    int off_c() const { return p() - 1; }
};

double logistic(double z);
double softplus(double z);

// diffusion g = (diffusion_floor + softplus(c)) * I_L stays elliptic for all c
ProblemSpec make_snn_problem(const SnnArch& arch, const DatasetHandle& dataset,
                             double diffusion_floor, double lambda_reg = 1e-4);

// Entries uniform on (-init_range, init_range) except the c slots, which are
// set so the initial diffusion amplitude equals g0.
ControlPath snn_init_control(const SnnArch& arch, const TemporalGrid& grid, std::uint64_t seed,
                             double g0 = 0.05, double diffusion_floor = 0.005,
                             double init_range = 0.5);

// Coordinatewise (lower, upper) limits: a-block in [-a_box, a_box], the W, V,
// mix blocks in [-w_box, w_box], c effectively unconstrained.
std::pair<Eigen::VectorXd, Eigen::VectorXd> snn_box_limits(const SnnArch& arch, double a_box = 4.5,
                                                           double w_box = 10.0);

}  // namespace snnbp
