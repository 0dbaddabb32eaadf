#include "snnbp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "snnbp/rng.hpp"

namespace snnbp {

namespace {
constexpr std::uint64_t kFullGradientStream = 0x46554c4cull;
constexpr std::uint64_t kCostStream = 0x434f5354ull;
}  // namespace

double GradientPath::l2_norm() const { return std::sqrt(grid.h * values.squaredNorm()); }

double GradientEstimate::aggregate_se() const { return std::sqrt(grad.grid.h * se.squaredNorm()); }

StatePath simulate_forward(const ProblemSpec& spec, const ControlPath& u, const NoisePath& noise,
                           const DataSample& data) {
    if (u.p() != spec.p || noise.m() != spec.m || u.grid.N != noise.grid.N)
        throw std::invalid_argument("simulate_forward: dimension mismatch");
    const TemporalGrid& grid = u.grid;
    const double h = grid.h;
    StatePath path{grid, Eigen::MatrixXd(grid.N + 1, spec.d)};
    VectorXd x = spec.initial_state(data);
    if (x.size() != spec.d) throw std::invalid_argument("simulate_forward: bad initial state size");
    path.states.row(0) = x.transpose();
    for (int n = 0; n < grid.N; ++n) {
        const double t = grid.node(n);
        const VectorXd un = u.row(n);
        x += h * spec.f(x, un, t) + spec.apply_g(un, t, noise.increments.row(n).transpose());
        if (!x.allFinite())
            throw DivergenceError("simulate_forward: non-finite state at step " + std::to_string(n + 1),
                                  n + 1);
        path.states.row(n + 1) = x.transpose();
    }
    return path;
}

AdjointPath backward_sample(const ProblemSpec& spec, const ControlPath& u, const StatePath& state,
                            const NoisePath& noise, const DataSample& data) {
    const TemporalGrid& grid = u.grid;
    const int N = grid.N;
    const double h = grid.h;
    if (state.states.rows() != N + 1 || state.d() != spec.d || noise.grid.N != N)
        throw std::invalid_argument("backward_sample: dimension mismatch");
    AdjointPath adj{grid, Eigen::MatrixXd(N + 1, spec.d), std::vector<Eigen::MatrixXd>(N)};
    VectorXd y = spec.phi_x(state.row(N), data.target);
    adj.y.row(N) = y.transpose();
    for (int n = N - 1; n >= 0; --n) {
        adj.z[n] = (y * noise.increments.row(n)) / h;  // y is Y_{n+1} here
        const int nu = std::min(n + 1, N - 1);         // u_{t_N} does not exist
        const double t = grid.node(n + 1);
        const VectorXd xn1 = state.row(n + 1);
        const VectorXd un = u.row(nu);
        y += h * (spec.apply_fx_t(xn1, un, t, y) + spec.r_x(xn1, un, t));
        if (!y.allFinite())
            throw DivergenceError("backward_sample: non-finite adjoint at step " + std::to_string(n), n);
        adj.y.row(n) = y.transpose();
    }
    return adj;
}

GradientPath sample_gradient(const ProblemSpec& spec, const ControlPath& u, const StatePath& state,
                             const AdjointPath& adjoint) {
    const TemporalGrid& grid = u.grid;
    GradientPath grad(grid, spec.p);
    for (int n = 0; n < grid.N; ++n) {
        const double t = grid.node(n);
        const VectorXd xn = state.row(n);
        const VectorXd un = u.row(n);
        grad.values.row(n) = (spec.apply_fu_t(xn, un, t, adjoint.y_row(n)) +
                              spec.gu_dot_z(un, t, adjoint.z[n]) + spec.r_u(xn, un, t))
                                 .transpose();
    }
    return grad;
}

double trajectory_cost(const ProblemSpec& spec, const ControlPath& u, const StatePath& state,
                       const DataSample& data) {
    const TemporalGrid& grid = u.grid;
    double running = 0.0;
    for (int j = 1; j <= grid.N; ++j)
        running += spec.r(state.row(j), u.row(j - 1), grid.node(j));
    return grid.h * running + spec.phi(state.row(grid.N), data.target);
}

TrajectoryBundle solve_trajectory(const ProblemSpec& spec, const ControlPath& u,
                                  std::uint64_t seed, std::uint64_t stream) {
    NoisePath noise = sample_noise(u.grid, spec.m, seed, substream(stream, 0));
    DataSample data = spec.data_sampler(seed, substream(stream, 1));
    StatePath state = simulate_forward(spec, u, noise, data);
    AdjointPath adjoint = backward_sample(spec, u, state, noise, data);
    const double cost = trajectory_cost(spec, u, state, data);
    return TrajectoryBundle{std::move(noise), std::move(state), std::move(adjoint), std::move(data),
                            cost};
}

BatchGradient batch_gradient(const ProblemSpec& spec, const ControlPath& u, int B,
                             std::uint64_t seed, std::uint64_t stream) {
    if (B < 1) throw std::invalid_argument("batch_gradient: B must be >= 1");
    GradientPath acc{u.grid, spec.p};
    double cost_acc = 0.0;
    for (int i = 0; i < B; ++i) {
        try {
            const TrajectoryBundle bundle = solve_trajectory(spec, u, seed, substream(stream, i));
            acc.values += sample_gradient(spec, u, bundle.state, bundle.adjoint).values;
            cost_acc += bundle.cost_sample;
        } catch (const DivergenceError& e) {
            throw DivergenceError(std::string(e.what()) + " (batch sample " + std::to_string(i) + ")",
                                  e.step(), i);
        }
    }
    acc.values /= B;
    return BatchGradient{std::move(acc), cost_acc / B};
}

GradientEstimate estimate_full_gradient(const ProblemSpec& spec, const ControlPath& u,
                                        std::int64_t M, std::uint64_t seed) {
    if (M < 1) throw std::invalid_argument("estimate_full_gradient: M must be >= 1");
    const int N = u.grid.N;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(N, spec.p);
    Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(N, spec.p);
    for (std::int64_t i = 0; i < M; ++i) {
        try {
            const TrajectoryBundle bundle =
                solve_trajectory(spec, u, seed, substream(kFullGradientStream, i));
            const GradientPath g = sample_gradient(spec, u, bundle.state, bundle.adjoint);
            sum += g.values;
            sumsq += g.values.cwiseProduct(g.values);
        } catch (const DivergenceError& e) {
            throw DivergenceError(std::string(e.what()) + " (sample " + std::to_string(i) + ")",
                                  e.step(), i);
        }
    }
    GradientEstimate est;
    est.grad = GradientPath{u.grid, spec.p};
    est.grad.values = sum / static_cast<double>(M);
    est.se = Eigen::MatrixXd::Zero(N, spec.p);
    if (M > 1) {
        const double m = static_cast<double>(M);
        est.se = ((sumsq - sum.cwiseProduct(sum) / m) / (m - 1.0)).cwiseMax(0.0).cwiseSqrt() /
                 std::sqrt(m);
    }
    return est;
}

CostEstimate estimate_cost(const ProblemSpec& spec, const ControlPath& u, std::int64_t M,
                           std::uint64_t seed) {
    if (M < 1) throw std::invalid_argument("estimate_cost: M must be >= 1");
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = 0; i < M; ++i) {
        const std::uint64_t stream = substream(kCostStream, i);
        const NoisePath noise = sample_noise(u.grid, spec.m, seed, substream(stream, 0));
        const DataSample data = spec.data_sampler(seed, substream(stream, 1));
        const StatePath state = simulate_forward(spec, u, noise, data);
        const double c = trajectory_cost(spec, u, state, data);
        sum += c;
        sumsq += c * c;
    }
    const double m = static_cast<double>(M);
    CostEstimate est;
    est.mean = sum / m;
    if (M > 1) est.se = std::sqrt(std::max(0.0, (sumsq - sum * sum / m) / (m - 1.0)) / m);
    return est;
}

GradientEstimate finite_difference_gradient(const ProblemSpec& spec, const ControlPath& u,
                                            std::int64_t M, double eps, std::uint64_t seed) {
    if (!(eps > 0.0)) throw std::invalid_argument("finite_difference_gradient: eps must be positive");
    if (M < 1) throw std::invalid_argument("finite_difference_gradient: M must be >= 1");
    const int N = u.grid.N;
    const double h = u.grid.h;

    // the same realizations estimate_cost would draw, shared by both sides of
    // every central difference
    std::vector<NoisePath> noises;
    std::vector<DataSample> datas;
    noises.reserve(M);
    datas.reserve(M);
    for (std::int64_t i = 0; i < M; ++i) {
        const std::uint64_t stream = substream(kCostStream, i);
        noises.push_back(sample_noise(u.grid, spec.m, seed, substream(stream, 0)));
        datas.push_back(spec.data_sampler(seed, substream(stream, 1)));
    }

    GradientEstimate est;
    est.grad = GradientPath{u.grid, spec.p};
    est.se = Eigen::MatrixXd::Zero(N, spec.p);
    ControlPath up = u, um = u;
    for (int n = 0; n < N; ++n) {
        for (int j = 0; j < spec.p; ++j) {
            up.values(n, j) = u.values(n, j) + eps;
            um.values(n, j) = u.values(n, j) - eps;
            double sum = 0.0, sumsq = 0.0;
            for (std::int64_t i = 0; i < M; ++i) {
                const double cp = trajectory_cost(spec, up, simulate_forward(spec, up, noises[i], datas[i]), datas[i]);
                const double cm = trajectory_cost(spec, um, simulate_forward(spec, um, noises[i], datas[i]), datas[i]);
                const double diff = (cp - cm) / (2.0 * eps) / h;
                sum += diff;
                sumsq += diff * diff;
            }
            const double m = static_cast<double>(M);
            est.grad.values(n, j) = sum / m;
            if (M > 1)
                est.se(n, j) = std::sqrt(std::max(0.0, (sumsq - sum * sum / m) / (m - 1.0)) / m);
            up.values(n, j) = u.values(n, j);
            um.values(n, j) = u.values(n, j);
        }
    }
    return est;
}

}  // namespace snnbp
