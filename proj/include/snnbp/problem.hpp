#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>

#include "snnbp/paths.hpp"

namespace snnbp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Control problem definition: dynamics dX = f dt + g dW, running cost r,
// terminal cost phi, and every partial the adjoint pass consumes. Callbacks
// must be pure and total on finite inputs; specs are immutable and shareable
// across threads.
struct ProblemSpec {
    int d = 0;  // state dimension
    int p = 0;  // control dimension
    int m = 0;  // Brownian dimension

    std::function<VectorXd(const VectorXd& x, const VectorXd& u, double t)> f;
    std::function<MatrixXd(const VectorXd& x, const VectorXd& u, double t)> f_x;  // d x d
    std::function<MatrixXd(const VectorXd& x, const VectorXd& u, double t)> f_u;  // d x p
    std::function<MatrixXd(const VectorXd& u, double t)> g;                       // d x m
    // entry j = sum_{i,l} dg_{il}/du_j * Z_{il}
    std::function<VectorXd(const VectorXd& u, double t, const MatrixXd& z)> gu_dot_z;
    std::function<double(const VectorXd& x, const VectorXd& u, double t)> r;
    std::function<VectorXd(const VectorXd& x, const VectorXd& u, double t)> r_x;
    std::function<VectorXd(const VectorXd& x, const VectorXd& u, double t)> r_u;
    std::function<double(const VectorXd& x_T, const VectorXd& gamma)> phi;
    std::function<VectorXd(const VectorXd& x_T, const VectorXd& gamma)> phi_x;
    std::function<VectorXd(const DataSample&)> initial_state;
    std::function<DataSample(std::uint64_t seed, std::uint64_t stream)> data_sampler;

    // Optional fast paths; the solver falls back to materializing the
    // Jacobians when unset. fu_t_apply matters when p >> d (layered nets).
    std::function<VectorXd(const VectorXd& x, const VectorXd& u, double t, const VectorXd& y)> fx_t_apply;
    std::function<VectorXd(const VectorXd& x, const VectorXd& u, double t, const VectorXd& y)> fu_t_apply;
    std::function<VectorXd(const VectorXd& u, double t, const VectorXd& omega)> g_apply;

    // Optional observation map for prediction (set by data-fitting problems).
    std::function<VectorXd(const VectorXd& x_T)> readout;

    VectorXd apply_fx_t(const VectorXd& x, const VectorXd& u, double t, const VectorXd& y) const {
        return fx_t_apply ? fx_t_apply(x, u, t, y) : VectorXd(f_x(x, u, t).transpose() * y);
    }
    VectorXd apply_fu_t(const VectorXd& x, const VectorXd& u, double t, const VectorXd& y) const {
        return fu_t_apply ? fu_t_apply(x, u, t, y) : VectorXd(f_u(x, u, t).transpose() * y);
    }
    VectorXd apply_g(const VectorXd& u, double t, const VectorXd& omega) const {
        return g_apply ? g_apply(u, t, omega) : VectorXd(g(u, t) * omega);
    }
};

}  // namespace snnbp
