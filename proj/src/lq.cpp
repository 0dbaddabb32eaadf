#include "snnbp/lq.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace snnbp {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double lq_beta(double t, double sigma) { return (1.0 + sigma * sigma) + sigma * sigma * (1.0 - t); }

LqConstants lq_constants(double sigma) {
    const double s2 = sigma * sigma;
    const double D = std::log(1.0 + s2 / (1.0 + s2)) / (s2 + std::log(1.0 + s2 / (1.0 + s2)));
    Eigen::Matrix<double, 7, 1> x_T;
    x_T << D / 2.0, D * std::sin(1.0), D / 2.0, D / 3.0, D * std::log(2.0),
        D * std::cos(kTwoPi), D * std::tan(1.0);
    auto alpha = [s2](double t) { return std::log((1.0 + 2.0 * s2) / (s2 * (2.0 - t) + 1.0)); };
    return LqConstants{D, x_T, alpha};
}

Eigen::Matrix<double, 8, 1> lq_a(double t, double sigma) {
    const double b = lq_beta(t, sigma);
    const double s2 = sigma * sigma;
    Eigen::Matrix<double, 8, 1> a;
    a << -t * t / (2.0 * b), -std::sin(t) / b, -0.5 * std::exp(1.0 - t) / b, -t * t * t / (3.0 * b),
        -std::log(1.0 + t) / b, -std::cos(kTwoPi * t) / b, -std::tan(t) / b,
        (1.0 - t) / (s2 * (1.0 - t) + 1.0);
    return a;
}

Eigen::Matrix<double, 8, 1> lq_xstar(double t, double sigma) {
    const auto c = lq_constants(sigma);
    const double s2 = sigma * sigma;
    const double al = c.alpha(t);
    Eigen::Matrix<double, 8, 1> x;
    x << t + al * (0.5 - c.x_T(0)) / s2,
        std::cos(t) + al * (std::sin(1.0) - c.x_T(1)) / s2,
        -std::exp(1.0 - t) / 2.0 + al * (0.5 - c.x_T(2)) / s2,
        t * t + al * (1.0 / 3.0 - c.x_T(3)) / s2,
        1.0 / (1.0 + t) + al * (std::log(2.0) - c.x_T(4)) / s2,
        -kTwoPi * std::sin(kTwoPi * t) + al * (std::cos(kTwoPi) - c.x_T(5)) / s2,
        1.0 / (std::cos(t) * std::cos(t)) + al * (std::tan(1.0) - c.x_T(6)) / s2,
        1.0 + s2 / ((1.0 + s2 * (1.0 - t)) * (1.0 + s2 * (1.0 - t)));
    return x;
}

Eigen::Matrix<double, 8, 1> lq_ustar(double t, double sigma, double T) {
    const auto c = lq_constants(sigma);
    const double b = lq_beta(t, sigma);
    const double s2 = sigma * sigma;
    Eigen::Matrix<double, 8, 1> u;
    u << (-t * t / 2.0 + T * T / 2.0 - c.x_T(0)) / b,
        (-std::sin(t) + std::sin(1.0) - c.x_T(1)) / b,
        (-0.5 * std::exp(T - t) + 0.5 - c.x_T(2)) / b,
        (-t * t * t + T * T * T - 3.0 * c.x_T(3)) / (3.0 * b),
        (-std::log(1.0 + t) + std::log(1.0 + T) - c.x_T(4)) / b,
        (-std::cos(kTwoPi * t) + std::cos(kTwoPi) - c.x_T(5)) / b,
        (-std::tan(t) + std::tan(1.0) - c.x_T(6)) / b,
        (T - t) / (s2 * (T - t) + 1.0);
    return u;
}

ControlPath lq_ustar_path(const TemporalGrid& grid, double sigma, double T) {
    Eigen::MatrixXd v(grid.N, 8);
    for (int n = 0; n < grid.N; ++n) v.row(n) = lq_ustar(grid.node(n), sigma, T).transpose();
    return ControlPath(grid, std::move(v));
}

namespace {

// Node-cached evaluation of a smooth 8-vector function of t.
struct NodeTable {
    double h = 0.0;
    std::vector<Eigen::Matrix<double, 8, 1>> at_node;

    template <class F>
    NodeTable(const TemporalGrid& grid, F&& fn) : h(grid.h), at_node(grid.N + 1) {
        for (int n = 0; n <= grid.N; ++n) at_node[n] = fn(grid.node(n));
    }

    template <class F>
    Eigen::Matrix<double, 8, 1> eval(double t, F&& fn) const {
        const double q = t / h;
        const auto idx = static_cast<long>(std::lround(q));
        if (idx >= 0 && idx < static_cast<long>(at_node.size()) && std::abs(q - idx) < 1e-9)
            return at_node[idx];
        return fn(t);
    }
};

}  // namespace

ProblemSpec make_lq_problem(const LqParams& params, const TemporalGrid* grid) {
    const double sigma = params.sigma;
    auto a_fn = [sigma](double t) { return lq_a(t, sigma); };
    auto xs_fn = [sigma](double t) { return lq_xstar(t, sigma); };
    std::shared_ptr<const NodeTable> a_tab, xs_tab;
    if (grid) {
        a_tab = std::make_shared<NodeTable>(*grid, a_fn);
        xs_tab = std::make_shared<NodeTable>(*grid, xs_fn);
    }
    auto a_at = [a_fn, a_tab](double t) { return a_tab ? a_tab->eval(t, a_fn) : a_fn(t); };
    auto xs_at = [xs_fn, xs_tab](double t) { return xs_tab ? xs_tab->eval(t, xs_fn) : xs_fn(t); };

    ProblemSpec spec;
    spec.d = LqParams::d;
    spec.p = LqParams::p;
    spec.m = LqParams::m;
    spec.f = [a_at](const VectorXd& /*x*/, const VectorXd& u, double t) -> VectorXd {
        return u - a_at(t);
    };
    spec.f_x = [](const VectorXd&, const VectorXd&, double) -> MatrixXd {
        return MatrixXd::Zero(8, 8);
    };
    spec.f_u = [](const VectorXd&, const VectorXd&, double) -> MatrixXd {
        return MatrixXd::Identity(8, 8);
    };
    spec.fx_t_apply = [](const VectorXd&, const VectorXd&, double, const VectorXd&) -> VectorXd {
        return VectorXd::Zero(8);
    };
    spec.fu_t_apply = [](const VectorXd&, const VectorXd&, double, const VectorXd& y) -> VectorXd {
        return y;
    };
    spec.g = [sigma](const VectorXd& u, double) -> MatrixXd {
        return sigma * MatrixXd(u.asDiagonal());
    };
    spec.g_apply = [sigma](const VectorXd& u, double, const VectorXd& omega) -> VectorXd {
        return sigma * u.cwiseProduct(omega);
    };
    spec.gu_dot_z = [sigma](const VectorXd&, double, const MatrixXd& z) -> VectorXd {
        return sigma * z.diagonal();
    };
    spec.r = [xs_at](const VectorXd& x, const VectorXd& u, double t) -> double {
        return 0.5 * (x - xs_at(t)).squaredNorm() + 0.5 * u.squaredNorm();
    };
    spec.r_x = [xs_at](const VectorXd& x, const VectorXd&, double t) -> VectorXd {
        return x - xs_at(t);
    };
    spec.r_u = [](const VectorXd&, const VectorXd& u, double) -> VectorXd { return u; };
    spec.phi = [](const VectorXd& x_T, const VectorXd&) -> double { return 0.5 * x_T.squaredNorm(); };
    spec.phi_x = [](const VectorXd& x_T, const VectorXd&) -> VectorXd { return x_T; };
    spec.initial_state = [](const DataSample&) -> VectorXd { return VectorXd::Zero(8); };
    spec.data_sampler = [](std::uint64_t, std::uint64_t) -> DataSample {
        return DataSample{VectorXd(0), VectorXd(0)};
    };
    return spec;
}

}  // namespace snnbp
