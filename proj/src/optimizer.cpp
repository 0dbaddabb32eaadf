#include "snnbp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "snnbp/io.hpp"
#include "snnbp/paths.hpp"
#include "snnbp/rng.hpp"

namespace snnbp {

LrSchedule LrSchedule::Constant(double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("LrSchedule: eta must be positive");
    LrSchedule s;
    s.kind = Kind::constant;
    s.eta = eta;
    return s;
}

LrSchedule LrSchedule::Harmonic(double theta, std::int64_t M) {
    if (!(theta > 0.0) || M <= 0) throw std::invalid_argument("LrSchedule: theta and M must be positive");
    LrSchedule s;
    s.kind = Kind::harmonic;
    s.theta = theta;
    s.M = M;
    return s;
}

double lr(const LrSchedule& schedule, std::int64_t k) {
    if (k < 0) throw std::invalid_argument("lr: k must be >= 0");
    return schedule.kind == LrSchedule::Kind::constant
               ? schedule.eta
               : schedule.theta / static_cast<double>(k + schedule.M);
}

BoxBounds BoxBounds::symmetric(double half_width) {
    return of(Eigen::VectorXd::Constant(1, -half_width), Eigen::VectorXd::Constant(1, half_width));
}

BoxBounds BoxBounds::of(Eigen::VectorXd lower, Eigen::VectorXd upper) {
    if (lower.size() != upper.size()) throw std::invalid_argument("BoxBounds: limit sizes differ");
    if ((lower.array() > upper.array()).any())
        throw std::invalid_argument("BoxBounds: lower must not exceed upper");
    return BoxBounds{std::move(lower), std::move(upper)};
}

namespace {

void check_bounds_shape(const BoxBounds& bounds, int p) {
    if (bounds.lower.size() != 1 && bounds.lower.size() != p)
        throw std::invalid_argument("BoxBounds: limits must be scalar or p-vectors");
}

}  // namespace

ControlPath project(const ControlPath& u, const BoxBounds& bounds) {
    check_bounds_shape(bounds, u.p());
    ControlPath out = u;
    for (int j = 0; j < u.p(); ++j)
        out.values.col(j) = out.values.col(j).cwiseMax(bounds.lo(j)).cwiseMin(bounds.hi(j));
    return out;
}

ControlPath sgd_step(const ControlPath& u, const GradientPath& grad, double eta,
                     const BoxBounds& bounds) {
    if (grad.values.rows() != u.values.rows() || grad.values.cols() != u.values.cols())
        throw std::invalid_argument("sgd_step: gradient shape mismatch");
    if (!(eta > 0.0)) throw std::invalid_argument("sgd_step: eta must be positive");
    if (!grad.values.allFinite())
        throw DivergenceError("sgd_step: non-finite gradient, step rejected", -1);
    ControlPath out = u;
    out.values -= eta * grad.values;
    return project(out, bounds);
}

SgdResult run_sgd(const ProblemSpec& spec, const ControlPath& u0, const SgdConfig& config,
                  const ControlPath* reference, const std::vector<std::int64_t>* checkpoints) {
    if (config.K < 1) throw std::invalid_argument("run_sgd: K must be >= 1");
    if (config.B < 1) throw std::invalid_argument("run_sgd: B must be >= 1");
    check_bounds_shape(config.bounds, u0.p());

    std::vector<std::int64_t> marks;
    if (checkpoints) {
        marks = *checkpoints;
    } else if (config.diagnostics_every > 0) {
        for (std::int64_t k = 0; k <= config.K; k += config.diagnostics_every) marks.push_back(k);
        if (marks.back() != config.K) marks.push_back(config.K);
    } else {
        marks = {0, config.K};
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    std::erase_if(marks, [&](std::int64_t k) { return k < 0 || k > config.K; });

    SgdResult res{u0, {}};
    std::size_t next_mark = 0;

    auto record_at = [&](std::int64_t k, double probe_cost) {
        TrainingTrace::Record rec;
        rec.k = k;
        rec.eta = lr(config.schedule, k);
        rec.cost = probe_cost;
        rec.control_norm = l2_norm(res.control);
        if (config.oracle_M > 0) {
            const GradientEstimate est = estimate_full_gradient(
                spec, res.control, config.oracle_M, mix64(config.seed ^ (2 * k + 1)));
            rec.oracle_grad_norm = est.grad.l2_norm();
        }
        if (reference) {
            ControlPath diff = res.control;
            diff.values -= reference->values;
            rec.dist_to_reference = l2_norm(diff);
        }
        res.trace.records.push_back(std::move(rec));
    };

    for (std::int64_t k = 0; k < config.K; ++k) {
        try {
            const BatchGradient bg =
                batch_gradient(spec, res.control, config.B, config.seed, 2 * static_cast<std::uint64_t>(k));
            if (next_mark < marks.size() && marks[next_mark] == k) {
                record_at(k, bg.mean_cost);
                ++next_mark;
            }
            res.control = sgd_step(res.control, bg.grad, lr(config.schedule, k), config.bounds);
        } catch (const DivergenceError& e) {
            res.trace.diverged = true;
            res.trace.diverged_at = k;
            res.trace.divergence_what = e.what();
            return res;
        }
    }
    if (next_mark < marks.size() && marks[next_mark] == config.K) {
        // probe batch on an odd stream: reads the state, never advances it
        const BatchGradient probe = batch_gradient(spec, res.control, config.B, config.seed,
                                                   2 * static_cast<std::uint64_t>(config.K) + 1);
        record_at(config.K, probe.mean_cost);
    }
    return res;
}

void save_checkpoint(const std::filesystem::path& path, const ControlPath& u) {
    std::ostringstream out;
    out << "SNNBP-CTRL v1\n";
    out << u.grid.N << " " << u.p() << " " << fmt_double(u.grid.h) << "\n";
    for (int n = 0; n < u.grid.N; ++n) {
        for (int j = 0; j < u.p(); ++j) out << (j ? " " : "") << fmt_double(u.values(n, j));
        out << "\n";
    }
    atomic_write_text(path, out.str());
}

ControlPath load_checkpoint(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string magic;
    std::getline(in, magic);
    if (magic != "SNNBP-CTRL v1") throw std::runtime_error("load_checkpoint: bad header: " + magic);
    int N = 0, p = 0;
    double h = 0.0;
    if (!(in >> N >> p >> h) || N < 1 || p < 1 || !(h > 0.0))
        throw std::runtime_error("load_checkpoint: bad shape line");
    Eigen::MatrixXd values(N, p);
    for (int n = 0; n < N; ++n)
        for (int j = 0; j < p; ++j)
            if (!(in >> values(n, j))) throw std::runtime_error("load_checkpoint: truncated data");
    return ControlPath(make_grid(h * N, N), std::move(values));
}

}  // namespace snnbp
