#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "snnbp/problem.hpp"

namespace snnbp {

// A trajectory or adjoint value went non-finite; step() is the grid index at
// which it was first observed, sample() the batch position when applicable.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, int step, std::int64_t sample = -1)
        : std::runtime_error(what), step_(step), sample_(sample) {}
    int step() const { return step_; }
    std::int64_t sample() const { return sample_; }

private:
    int step_;
    std::int64_t sample_;
};

// Piecewise-constant gradient estimate; row n approximates the L2-density of
// dJ/du on [t_n, t_{n+1}).
struct GradientPath {
    TemporalGrid grid;
    Eigen::MatrixXd values;  // N x p

    GradientPath() = default;
    GradientPath(const TemporalGrid& g, int p) : grid(g), values(Eigen::MatrixXd::Zero(g.N, p)) {}

    double l2_norm() const;
};

struct TrajectoryBundle {
    NoisePath noise;
    StatePath state;
    AdjointPath adjoint;
    DataSample data;
    double cost_sample = 0.0;
};

// X_{n+1} = X_n + h f(X_n, u_n, t_n) + g(u_n, t_n) w_n, X_0 from the sample.
StatePath simulate_forward(const ProblemSpec& spec, const ControlPath& u, const NoisePath& noise,
                           const DataSample& data);

// Y_N = phi_x(X_N, gamma); descending n:
//   Y_n = Y_{n+1} + h (f_x^T Y_{n+1} + r_x) at (X_{n+1}, u_{t_{n+1}}, t_{n+1}),
// where u_{t_{n+1}} falls back to the last control row at the terminal step
// (controls live on [t_n, t_{n+1})); Z_n = Y_{n+1} w_n^T / h.
AdjointPath backward_sample(const ProblemSpec& spec, const ControlPath& u, const StatePath& state,
                            const NoisePath& noise, const DataSample& data);

// row n = f_u^T Y_n + gu_dot_z(Z_n) + r_u at (X_n, u_n, t_n)
GradientPath sample_gradient(const ProblemSpec& spec, const ControlPath& u, const StatePath& state,
                             const AdjointPath& adjoint);

// Sampled cost of one realized trajectory:
//   h * sum_{j=1..N} r(X_j, u_{j-1}, t_j) + phi(X_N, gamma).
// The running cost pairs each interval's control with the state it produced;
// this quadrature is the one whose exact discrete adjoint is the backward
// recursion above (for r with u-independent r_x and x-independent r_u), so
// finite differences of it match the sample-gradient mean.
double trajectory_cost(const ProblemSpec& spec, const ControlPath& u, const StatePath& state,
                       const DataSample& data);

// Noise from (seed, substream(stream, 0)), data from (seed, substream(stream, 1)).
TrajectoryBundle solve_trajectory(const ProblemSpec& spec, const ControlPath& u,
                                  std::uint64_t seed, std::uint64_t stream);

struct BatchGradient {
    GradientPath grad;
    double mean_cost = 0.0;
};

// Mean of B independent sample gradients; sample i draws its streams from
// substream(stream, i). Accumulation order is fixed (i ascending).
BatchGradient batch_gradient(const ProblemSpec& spec, const ControlPath& u, int B,
                             std::uint64_t seed, std::uint64_t stream);

struct GradientEstimate {
    GradientPath grad;
    Eigen::MatrixXd se;  // per-entry standard errors, N x p

    // discrete-L2 norm of the SE matrix, the scale against which the
    // estimate's own norm is judged
    double aggregate_se() const;
};

// High-accuracy Monte-Carlo oracle: mean over M samples with per-entry SEs.
GradientEstimate estimate_full_gradient(const ProblemSpec& spec, const ControlPath& u,
                                        std::int64_t M, std::uint64_t seed);

// Central differences of the M-sample cost in every control coordinate under
// common random numbers, scaled by 1/h to the same density convention as
// sample_gradient.
GradientEstimate finite_difference_gradient(const ProblemSpec& spec, const ControlPath& u,
                                            std::int64_t M, double eps, std::uint64_t seed);

struct CostEstimate {
    double mean = 0.0;
    double se = 0.0;
};

CostEstimate estimate_cost(const ProblemSpec& spec, const ControlPath& u, std::int64_t M,
                           std::uint64_t seed);

}  // namespace snnbp
