#include "snnbp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "snnbp/io.hpp"
#include "snnbp/rng.hpp"
#include "snnbp/solver.hpp"

namespace snnbp {

namespace {

void parallel_for(int total, int threads, const std::function<void(int)>& body) {
    threads = std::min(threads, total);
    if (threads <= 1) {
        for (int i = 0; i < total; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < total; i += threads) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> residuals;
    bool valid = false;
};

OlsFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    OlsFit fit;
    const std::size_t n = x.size();
    if (n < 2) return fit;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) return fit;
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        fit.residuals[i] = ly[i] - (fit.intercept + fit.slope * lx[i]);
    }
    fit.valid = true;
    return fit;
}

struct RowStats {
    double rmse = 0.0;
    double stderr_val = 0.0;
};

// delta method: SE(rmse) = SE(mse) / (2 rmse)
RowStats aggregate_sq_errors(const std::vector<double>& sq) {
    RowStats s;
    const std::size_t n = sq.size();
    if (n == 0) return s;
    double mean = 0.0;
    for (double e : sq) mean += e;
    mean /= double(n);
    s.rmse = std::sqrt(mean);
    if (n > 1 && s.rmse > 0.0) {
        double var = 0.0;
        for (double e : sq) var += (e - mean) * (e - mean);
        var /= double(n - 1);
        s.stderr_val = std::sqrt(var / double(n)) / (2.0 * s.rmse);
    }
    return s;
}

double control_error_sq(const ControlPath& u, const ControlPath& ustar) {
    ControlPath diff(u.grid, u.values - ustar.values);
    const double e = l2_norm(diff);
    return e * e;
}

void check_divergence_fraction(int diverged, int repeats, const std::string& where) {
    if (diverged * 10 > repeats) {
        throw std::runtime_error(where + ": " + std::to_string(diverged) + " of " +
                                 std::to_string(repeats) + " repeats diverged");
    }
}

std::string convergence_csv_text(const ConvergenceReport& report) {
    std::string out = "N,K,rmse,stderr,diverged\n";
    for (const auto& row : report.rows) {
        out += std::to_string(row.N) + "," + std::to_string(row.K) + "," + fmt_double(row.rmse) +
               "," + fmt_double(row.stderr_val) + "," + std::to_string(row.diverged) + "\n";
    }
    return out;
}

}  // namespace

ConvergenceReport run_lq_convergence_in_N(const LqStudyConfig& config) {
    if (config.N_list.empty()) throw std::invalid_argument("lq study: empty N_list");
    if (config.repeats < 1) throw std::invalid_argument("lq study: repeats must be >= 1");
    if (config.kappa < 0.0) throw std::invalid_argument("lq study: kappa must be >= 0");

    ConvergenceReport report;
    const BoxBounds bounds = BoxBounds::symmetric(config.box);
    for (int N : config.N_list) {
        const auto grid = make_grid(config.T, N);
        const LqParams params{config.sigma, config.T};
        const auto spec = make_lq_problem(params, &grid);
        const auto ustar = lq_ustar_path(grid, config.sigma, config.T);
        const auto K = std::int64_t(std::llround(config.kappa * double(N) * double(N)));
        const std::uint64_t base = substream(mix64(config.seed) ^ 0x4c514e53ull, std::uint64_t(N));

        std::vector<double> sq(config.repeats, 0.0);
        std::vector<char> ok(config.repeats, 0);
        parallel_for(config.repeats, config.threads, [&](int r) {
            ControlPath u0(grid, Eigen::MatrixXd::Zero(N, LqParams::p));
            if (config.init == LqStudyConfig::Init::optimum) u0 = ustar;
            ControlPath u = u0;
            if (K > 0) {
                SgdConfig sc;
                sc.K = K;
                sc.B = config.batch;
                sc.schedule = config.schedule;
                sc.bounds = bounds;
                sc.seed = substream(base, std::uint64_t(r));
                auto res = run_sgd(spec, u0, sc);
                if (res.trace.diverged) return;
                u = res.control;
            }
            sq[r] = control_error_sq(u, ustar);
            ok[r] = 1;
        });

        std::vector<double> kept;
        kept.reserve(config.repeats);
        for (int r = 0; r < config.repeats; ++r) {
            if (ok[r]) kept.push_back(sq[r]);
        }
        const int diverged = config.repeats - int(kept.size());
        check_divergence_fraction(diverged, config.repeats, "lq convergence in N");
        const auto stats = aggregate_sq_errors(kept);
        report.rows.push_back({N, K, stats.rmse, stats.stderr_val, diverged});
        report.repeat_sq_errors.push_back(std::move(kept));
    }

    std::vector<double> xs, ys;
    for (const auto& row : report.rows) {
        xs.push_back(double(row.N));
        ys.push_back(row.rmse);
    }
    const auto fit = fit_loglog(xs, ys);
    if (fit.valid) {
        report.slope = fit.slope;
        report.intercept = fit.intercept;
        report.residuals = fit.residuals;
    }
    return report;
}

ConvergenceReport run_lq_convergence_in_K(int N, const std::vector<std::int64_t>& K_list,
                                          int repeats, const LrSchedule& schedule,
                                          std::uint64_t seed, const LqKStudyOptions& opt) {
    if (K_list.empty()) throw std::invalid_argument("lq K study: empty K_list");
    if (repeats < 1) throw std::invalid_argument("lq K study: repeats must be >= 1");
    std::vector<std::int64_t> ks = K_list;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    if (ks.front() < 0) throw std::invalid_argument("lq K study: negative K");

    const auto grid = make_grid(opt.T, N);
    const LqParams params{opt.sigma, opt.T};
    const auto spec = make_lq_problem(params, &grid);
    const auto ustar = lq_ustar_path(grid, opt.sigma, opt.T);
    const BoxBounds bounds = BoxBounds::symmetric(opt.box);
    const std::int64_t K_max = ks.back();
    const std::size_t n_rows = ks.size();

    // sq[r][i] is the squared error of the snapshot after ks[i] iterations;
    // the in-run snapshot equals an independent ks[i]-iteration run because
    // iteration k draws from stream 2k alone.
    std::vector<std::vector<double>> sq(repeats, std::vector<double>(n_rows, 0.0));
    std::vector<std::vector<char>> ok(repeats, std::vector<char>(n_rows, 0));
    parallel_for(repeats, opt.threads, [&](int r) {
        const std::uint64_t run_seed = substream(mix64(seed) ^ 0x4c514b53ull, std::uint64_t(r));
        ControlPath u(grid, Eigen::MatrixXd::Zero(N, LqParams::p));
        std::size_t next = 0;
        if (next < n_rows && ks[next] == 0) {
            sq[r][next] = control_error_sq(u, ustar);
            ok[r][next] = 1;
            ++next;
        }
        try {
            for (std::int64_t k = 0; k < K_max; ++k) {
                const auto bg = batch_gradient(spec, u, opt.batch, run_seed,
                                               2 * std::uint64_t(k));
                u = sgd_step(u, bg.grad, lr(schedule, k), bounds);
                if (next < n_rows && k + 1 == ks[next]) {
                    sq[r][next] = control_error_sq(u, ustar);
                    ok[r][next] = 1;
                    ++next;
                }
            }
        } catch (const DivergenceError&) {
            // snapshots past the failure stay invalid
        }
    });

    ConvergenceReport report;
    for (std::size_t i = 0; i < n_rows; ++i) {
        std::vector<double> kept;
        kept.reserve(repeats);
        for (int r = 0; r < repeats; ++r) {
            if (ok[r][i]) kept.push_back(sq[r][i]);
        }
        const int diverged = repeats - int(kept.size());
        check_divergence_fraction(diverged, repeats, "lq convergence in K");
        const auto stats = aggregate_sq_errors(kept);
        report.rows.push_back({N, ks[i], stats.rmse, stats.stderr_val, diverged});
        report.repeat_sq_errors.push_back(std::move(kept));
    }

    std::vector<double> xs, ys;
    for (const auto& row : report.rows) {
        xs.push_back(double(row.K));
        ys.push_back(row.rmse);
    }
    const auto fit = fit_loglog(xs, ys);
    if (fit.valid) {
        report.slope = fit.slope;
        report.intercept = fit.intercept;
        report.residuals = fit.residuals;
    }

    // improvement per doubling between consecutive rows; the plateau starts at
    // the first row from which every later gain stays below 10%
    const std::size_t n = report.rows.size();
    if (n >= 2) {
        std::vector<double> gain(n - 1, 0.0);
        bool gains_ok = true;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto& a = report.rows[i];
            const auto& b = report.rows[i + 1];
            if (a.rmse <= 0.0 || b.rmse <= 0.0 || a.K <= 0 || b.K <= a.K) {
                gains_ok = false;
                break;
            }
            const double doublings = std::log2(double(b.K) / double(a.K));
            gain[i] = 1.0 - std::pow(b.rmse / a.rmse, 1.0 / doublings);
        }
        if (gains_ok) {
            std::size_t start = n - 1;
            while (start > 0 && gain[start - 1] < 0.10) --start;
            if (start < n - 1) report.plateau_K = report.rows[start].K;
            const std::size_t fit_rows = (report.plateau_K >= 0) ? start + 1 : n;
            if (fit_rows >= 2) {
                const std::vector<double> px(xs.begin(), xs.begin() + std::ptrdiff_t(fit_rows));
                const std::vector<double> py(ys.begin(), ys.begin() + std::ptrdiff_t(fit_rows));
                const auto pre = fit_loglog(px, py);
                if (pre.valid) report.pre_plateau_slope = pre.slope;
            }
        }
    }
    return report;
}

GradientDecayReport run_gradient_decay(const ProblemSpec& spec, const ControlPath& u0,
                                       const SgdConfig& config,
                                       const std::vector<std::int64_t>& checkpoints) {
    if (config.oracle_M <= 0) {
        throw std::invalid_argument("gradient decay: oracle_M must be positive");
    }
    GradientDecayReport report;
    auto res = run_sgd(spec, u0, config, nullptr, checkpoints.empty() ? nullptr : &checkpoints);
    report.trace = std::move(res.trace);
    report.control = std::move(res.control);
    const auto& records = report.trace.records;
    if (!records.empty() && records.front().oracle_grad_norm && records.back().oracle_grad_norm) {
        report.initial_norm = *records.front().oracle_grad_norm;
        report.final_norm = *records.back().oracle_grad_norm;
        if (report.initial_norm > 0.0) report.ratio = report.final_norm / report.initial_norm;
    }
    return report;
}

std::vector<BandPoint> predict_with_bands(const ProblemSpec& spec, const ControlPath& u,
                                          const std::vector<Eigen::VectorXd>& inputs, int M,
                                          std::uint64_t seed) {
    if (!spec.readout) throw std::invalid_argument("predict_with_bands: problem has no readout");
    if (M < 1) throw std::invalid_argument("predict_with_bands: M must be >= 1");
    std::vector<BandPoint> out(inputs.size());
    std::vector<double> vals(M);
    for (std::size_t q = 0; q < inputs.size(); ++q) {
        DataSample sample;
        sample.input = inputs[q];
        sample.target = Eigen::VectorXd::Zero(0);
        const std::uint64_t point_stream = mix64(0x7052454dull ^ std::uint64_t(q));
        for (int i = 0; i < M; ++i) {
            const auto noise =
                sample_noise(u.grid, spec.m, seed, substream(point_stream, std::uint64_t(i)));
            const auto path = simulate_forward(spec, u, noise, sample);
            const Eigen::VectorXd value = spec.readout(path.row(u.grid.N));
            if (value.size() != 1) {
                throw std::invalid_argument("predict_with_bands: readout must be scalar");
            }
            vals[i] = value(0);
        }
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= double(M);
        double var = 0.0;
        if (M > 1) {
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= double(M - 1);
        }
        out[q] = {mean, 1.96 * std::sqrt(var)};
    }
    return out;
}

namespace {

BandReport run_funcapprox(const SnnArch& arch, std::int64_t K, const FuncApproxConfig& config,
                          const DatasetHandle& dataset,
                          const std::vector<Eigen::VectorXd>& eval_points,
                          const std::function<double(const Eigen::VectorXd&)>& truth) {
    const auto spec = make_snn_problem(arch, dataset, config.diffusion_floor, config.lambda_reg);
    const auto grid = make_grid(double(arch.N_layers), arch.N_layers);
    const auto u0 = snn_init_control(arch, grid, config.seed, config.g0, config.diffusion_floor,
                                     config.init_range);

    BandReport report;
    report.control = u0;
    if (K > 0) {
        SgdConfig sc;
        sc.K = K;
        sc.B = config.batch;
        sc.schedule = config.schedule;
        auto limits = snn_box_limits(arch, config.a_box, config.w_box);
        sc.bounds = BoxBounds::of(std::move(limits.first), std::move(limits.second));
        sc.seed = config.seed;
        sc.diagnostics_every = config.diagnostics_every;
        sc.oracle_M = config.oracle_M;
        auto res = run_sgd(spec, u0, sc);
        report.trace = std::move(res.trace);
        if (report.trace.diverged) {
            throw std::runtime_error("funcapprox: training diverged at iteration " +
                                     std::to_string(report.trace.diverged_at) + ": " +
                                     report.trace.divergence_what);
        }
        report.control = std::move(res.control);
    }

    const auto bands = predict_with_bands(spec, report.control, eval_points, config.band_M,
                                          mix64(config.seed ^ 0x45564142ull));
    const double truth_half = 1.96 * config.noise;
    report.rows.reserve(eval_points.size());
    for (std::size_t i = 0; i < eval_points.size(); ++i) {
        BandReport::Row row;
        row.point = eval_points[i];
        row.mean = bands[i].mean;
        row.half_width = bands[i].half_width;
        row.truth_mean = truth(eval_points[i]);
        row.truth_half_width = truth_half;
        report.rows.push_back(std::move(row));
    }

    double sq_sum = 0.0, band_err = 0.0;
    for (const auto& row : report.rows) {
        sq_sum += (row.mean - row.truth_mean) * (row.mean - row.truth_mean);
        band_err += std::abs(row.half_width - row.truth_half_width);
    }
    report.rmse_of_means = std::sqrt(sq_sum / double(report.rows.size()));
    report.mean_abs_band_error = band_err / double(report.rows.size());
    return report;
}

}  // namespace

BandReport run_funcapprox_1d(const SnnArch& arch, std::int64_t K, const FuncApproxConfig& config) {
    if (arch.d_in != 1 || arch.d_out != 1) {
        throw std::invalid_argument("funcapprox 1d: arch must have d_in = d_out = 1");
    }
    if (config.eval_points < 2) throw std::invalid_argument("funcapprox 1d: eval_points < 2");
    const auto dataset =
        make_dataset_1d(config.dataset_n, config.noise, mix64(config.seed ^ 0x44415431ull));
    std::vector<Eigen::VectorXd> points;
    points.reserve(config.eval_points);
    for (int i = 0; i < config.eval_points; ++i) {
        Eigen::VectorXd x(1);
        x(0) = double(i) / double(config.eval_points - 1);
        points.push_back(x);
    }
    auto report = run_funcapprox(arch, K, config, dataset, points,
                                 [](const Eigen::VectorXd& x) { return truth_1d(x(0)); });
    double interior = 0.0;
    for (std::size_t i = 1; i + 1 < report.rows.size(); ++i) interior += report.rows[i].half_width;
    report.interior_band_mean = interior / double(report.rows.size() - 2);
    return report;
}

BandReport run_funcapprox_8d(const SnnArch& arch, std::int64_t K, const FuncApproxConfig& config) {
    if (arch.d_in != 8 || arch.d_out != 1) {
        throw std::invalid_argument("funcapprox 8d: arch must have d_in = 8, d_out = 1");
    }
    if (config.section_points < 2 || config.surface_points < 2) {
        throw std::invalid_argument("funcapprox 8d: need at least 2 points per section axis");
    }
    const auto dataset =
        make_dataset_8d(config.points_per_dim, config.noise, mix64(config.seed ^ 0x44415438ull));

    // one section per axis (others pinned at 0.5), then the X2-X5 and X4-X7
    // surface grids
    std::vector<Eigen::VectorXd> points;
    const int sp = config.section_points;
    for (int axis = 0; axis < 8; ++axis) {
        for (int i = 0; i < sp; ++i) {
            Eigen::VectorXd x = Eigen::VectorXd::Constant(8, 0.5);
            x(axis) = double(i) / double(sp - 1);
            points.push_back(x);
        }
    }
    const int gp = config.surface_points;
    const std::vector<std::pair<int, int>> surfaces = {{1, 4}, {3, 6}};
    for (const auto& [a, b] : surfaces) {
        for (int i = 0; i < gp; ++i) {
            for (int j = 0; j < gp; ++j) {
                Eigen::VectorXd x = Eigen::VectorXd::Constant(8, 0.5);
                x(a) = double(i) / double(gp - 1);
                x(b) = double(j) / double(gp - 1);
                points.push_back(x);
            }
        }
    }

    auto report = run_funcapprox(arch, K, config, dataset, points, truth_8d);
    report.section_rmse.assign(8, 0.0);
    for (int axis = 0; axis < 8; ++axis) {
        double sq = 0.0;
        for (int i = 0; i < sp; ++i) {
            const auto& row = report.rows[std::size_t(axis) * sp + i];
            sq += (row.mean - row.truth_mean) * (row.mean - row.truth_mean);
        }
        report.section_rmse[axis] = std::sqrt(sq / double(sp));
    }
    double band = 0.0;
    for (const auto& row : report.rows) band += row.half_width;
    report.interior_band_mean = band / double(report.rows.size());
    return report;
}

void write_convergence_csv(const ConvergenceReport& report, const std::filesystem::path& path) {
    atomic_write_text(path, convergence_csv_text(report));
}

void write_band_csv(const BandReport& report, const std::filesystem::path& path) {
    if (report.rows.empty()) throw std::invalid_argument("write_band_csv: empty report");
    const auto d = report.rows.front().point.size();
    std::string out;
    for (Eigen::Index j = 0; j < d; ++j) out += "x_" + std::to_string(j + 1) + ",";
    out += "mean,half_width,truth_mean,truth_half_width\n";
    for (const auto& row : report.rows) {
        for (Eigen::Index j = 0; j < d; ++j) out += fmt_double(row.point(j)) + ",";
        out += fmt_double(row.mean) + "," + fmt_double(row.half_width) + "," +
               fmt_double(row.truth_mean) + "," + fmt_double(row.truth_half_width) + "\n";
    }
    atomic_write_text(path, out);
}

void write_trace_csv(const TrainingTrace& trace, const std::filesystem::path& path) {
    std::string out = "k,eta,cost,control_norm,oracle_grad_norm,dist_to_reference\n";
    for (const auto& rec : trace.records) {
        out += std::to_string(rec.k) + "," + fmt_double(rec.eta) + "," + fmt_double(rec.cost) +
               "," + fmt_double(rec.control_norm) + ",";
        if (rec.oracle_grad_norm) out += fmt_double(*rec.oracle_grad_norm);
        out += ",";
        if (rec.dist_to_reference) out += fmt_double(*rec.dist_to_reference);
        out += "\n";
    }
    atomic_write_text(path, out);
}

}  // namespace snnbp
