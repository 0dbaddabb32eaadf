#include "snnbp/derivative_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snnbp/rng.hpp"

namespace snnbp {

double DerivativeReport::error_for(const std::string& callback) const {
    for (const auto& e : entries)
        if (e.callback == callback) return e.max_rel_error;
    throw std::invalid_argument("DerivativeReport: no entry for " + callback);
}

DerivativeReport check_problem_derivatives(const ProblemSpec& spec, int trials, double tol,
                                           std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_problem_derivatives: trials must be >= 1");
    const double eps = 1e-6;
    CtrRng rng(seed, 0x44435248ull);

    DerivativeReport rep;
    rep.entries = {{"f_x", 0.0}, {"f_u", 0.0}, {"gu_dot_z", 0.0},
                   {"r_x", 0.0}, {"r_u", 0.0}, {"phi_x", 0.0}};
    auto& e_fx = rep.entries[0].max_rel_error;
    auto& e_fu = rep.entries[1].max_rel_error;
    auto& e_gu = rep.entries[2].max_rel_error;
    auto& e_rx = rep.entries[3].max_rel_error;
    auto& e_ru = rep.entries[4].max_rel_error;
    auto& e_px = rep.entries[5].max_rel_error;

    for (int trial = 0; trial < trials; ++trial) {
        VectorXd x(spec.d), u(spec.p);
        for (int i = 0; i < spec.d; ++i) x(i) = rng.uniform(-1.0, 1.0);
        for (int j = 0; j < spec.p; ++j) u(j) = rng.uniform(-0.5, 0.5);
        const double t = rng.uniform01();
        const DataSample sample = spec.data_sampler(seed, substream(0x44435248ull, trial + 1));
        const VectorXd gamma =
            sample.target.size() > 0 ? sample.target : VectorXd::Zero(std::max(1, spec.d));
        MatrixXd zprobe(spec.d, spec.m);
        for (int i = 0; i < spec.d; ++i)
            for (int l = 0; l < spec.m; ++l) zprobe(i, l) = rng.uniform(-1.0, 1.0);

        const MatrixXd fx = spec.f_x(x, u, t);
        MatrixXd fx_fd(spec.d, spec.d);
        for (int j = 0; j < spec.d; ++j) {
            VectorXd xp = x, xm = x;
            xp(j) += eps;
            xm(j) -= eps;
            fx_fd.col(j) = (spec.f(xp, u, t) - spec.f(xm, u, t)) / (2.0 * eps);
        }
        e_fx = std::max(e_fx, (fx - fx_fd).cwiseAbs().maxCoeff() / (1.0 + fx.cwiseAbs().maxCoeff()));

        const MatrixXd fu = spec.f_u(x, u, t);
        MatrixXd fu_fd(spec.d, spec.p);
        for (int j = 0; j < spec.p; ++j) {
            VectorXd up = u, um = u;
            up(j) += eps;
            um(j) -= eps;
            fu_fd.col(j) = (spec.f(x, up, t) - spec.f(x, um, t)) / (2.0 * eps);
        }
        e_fu = std::max(e_fu, (fu - fu_fd).cwiseAbs().maxCoeff() / (1.0 + fu.cwiseAbs().maxCoeff()));

        const VectorXd gz = spec.gu_dot_z(u, t, zprobe);
        VectorXd gz_fd(spec.p);
        for (int j = 0; j < spec.p; ++j) {
            VectorXd up = u, um = u;
            up(j) += eps;
            um(j) -= eps;
            gz_fd(j) = ((spec.g(up, t) - spec.g(um, t)) / (2.0 * eps)).cwiseProduct(zprobe).sum();
        }
        e_gu = std::max(e_gu, (gz - gz_fd).cwiseAbs().maxCoeff() / (1.0 + gz.cwiseAbs().maxCoeff()));

        const VectorXd rx = spec.r_x(x, u, t);
        VectorXd rx_fd(spec.d);
        for (int j = 0; j < spec.d; ++j) {
            VectorXd xp = x, xm = x;
            xp(j) += eps;
            xm(j) -= eps;
            rx_fd(j) = (spec.r(xp, u, t) - spec.r(xm, u, t)) / (2.0 * eps);
        }
        e_rx = std::max(e_rx, (rx - rx_fd).cwiseAbs().maxCoeff() / (1.0 + rx.cwiseAbs().maxCoeff()));

        const VectorXd ru = spec.r_u(x, u, t);
        VectorXd ru_fd(spec.p);
        for (int j = 0; j < spec.p; ++j) {
            VectorXd up = u, um = u;
            up(j) += eps;
            um(j) -= eps;
            ru_fd(j) = (spec.r(x, up, t) - spec.r(x, um, t)) / (2.0 * eps);
        }
        e_ru = std::max(e_ru, (ru - ru_fd).cwiseAbs().maxCoeff() / (1.0 + ru.cwiseAbs().maxCoeff()));

        const VectorXd px = spec.phi_x(x, gamma);
        VectorXd px_fd(spec.d);
        for (int j = 0; j < spec.d; ++j) {
            VectorXd xp = x, xm = x;
            xp(j) += eps;
            xm(j) -= eps;
            px_fd(j) = (spec.phi(xp, gamma) - spec.phi(xm, gamma)) / (2.0 * eps);
        }
        e_px = std::max(e_px, (px - px_fd).cwiseAbs().maxCoeff() / (1.0 + px.cwiseAbs().maxCoeff()));
    }

    for (const auto& e : rep.entries) {
        if (e.max_rel_error > tol) {
            rep.passed = false;
            if (rep.first_failure.empty()) rep.first_failure = e.callback;
        }
    }
    return rep;
}

}  // namespace snnbp
