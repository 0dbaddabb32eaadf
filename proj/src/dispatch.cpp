#include "snnbp/dispatch.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "snnbp/derivative_check.hpp"
#include "snnbp/experiments.hpp"
#include "snnbp/io.hpp"
#include "snnbp/rng.hpp"
#include "snnbp/svg_plot.hpp"

namespace snnbp {

namespace {

using nlohmann::json;

struct RunContext {
    const RunConfig& rc;
    json summary = json::object();
    std::vector<std::string> outputs;

    std::filesystem::path out(const std::string& name) {
        outputs.push_back(name);
        return rc.output_dir / name;
    }
};

LrSchedule schedule_from(const RunConfig& rc) {
    if (rc.str("optimizer.schedule") == "constant") {
        return LrSchedule::Constant(rc.f64("optimizer.eta"));
    }
    return LrSchedule::Harmonic(rc.f64("optimizer.theta"), rc.i64("optimizer.M"));
}

SnnArch arch_from(const RunConfig& rc, int d_in) {
    SnnArch arch;
    arch.L = rc.i32("net.neurons");
    arch.N_layers = rc.i32("net.layers");
    arch.n_sig = rc.i32("net.sigmoids");
    arch.d_in = d_in;
    arch.d_out = 1;
    return arch;
}

BoxBounds snn_bounds(const RunConfig& rc, const SnnArch& arch) {
    auto limits = snn_box_limits(arch, rc.f64("box.a"), rc.f64("box.w"));
    return BoxBounds::of(std::move(limits.first), std::move(limits.second));
}

FuncApproxConfig funcapprox_config(const RunConfig& rc) {
    FuncApproxConfig fc;
    fc.noise = rc.f64("data.noise");
    fc.diffusion_floor = rc.f64("problem.diffusion_floor");
    fc.lambda_reg = rc.f64("problem.lambda_reg");
    fc.g0 = rc.f64("init.g0");
    fc.init_range = rc.f64("init.range");
    fc.schedule = schedule_from(rc);
    fc.batch = rc.i32("optimizer.batch");
    fc.a_box = rc.f64("box.a");
    fc.w_box = rc.f64("box.w");
    fc.seed = rc.seed;
    fc.band_M = rc.i32("eval.band_M");
    fc.diagnostics_every = rc.i64("optimizer.diagnostics_every");
    fc.oracle_M = rc.i64("optimizer.oracle_M");
    return fc;
}

void plot_convergence(RunContext& ctx, const ConvergenceReport& report, bool vs_K,
                      const std::string& name) {
    PlotSpec plot;
    plot.title = vs_K ? "RMSE vs iteration budget" : "RMSE vs grid size";
    plot.x_label = vs_K ? "K" : "N";
    plot.y_label = "RMSE";
    plot.log_x = true;
    plot.log_y = true;
    PlotSeries data;
    for (const auto& row : report.rows) {
        const double x = vs_K ? double(row.K) : double(row.N);
        if (x <= 0.0 || row.rmse <= 0.0) return;
        data.x.push_back(x);
        data.y.push_back(row.rmse);
    }
    plot.series.push_back(std::move(data));
    if (report.rows.size() >= 2 && (report.slope != 0.0 || report.intercept != 0.0)) {
        PlotSeries fitted;
        fitted.color = "#b22222";
        fitted.points = false;
        fitted.line = true;
        for (double x : {plot.series[0].x.front(), plot.series[0].x.back()}) {
            fitted.x.push_back(x);
            fitted.y.push_back(std::exp(report.intercept + report.slope * std::log(x)));
        }
        plot.series.push_back(std::move(fitted));
    }
    write_svg_plot(plot, ctx.out(name));
}

void plot_bands(RunContext& ctx, const BandReport& report, std::size_t first, std::size_t count,
                int axis, const std::string& name) {
    BandPlotSpec plot;
    plot.title = "mean prediction with 95% band";
    plot.x_label = "x_" + std::to_string(axis + 1);
    plot.y_label = "y";
    for (std::size_t i = first; i < first + count; ++i) {
        const auto& row = report.rows[i];
        plot.x.push_back(row.point(axis));
        plot.mean.push_back(row.mean);
        plot.half_width.push_back(row.half_width);
        plot.truth.push_back(row.truth_mean);
    }
    write_svg_band_plot(plot, ctx.out(name));
}

void run_lq_convergence_n_command(RunContext& ctx) {
    const RunConfig& rc = ctx.rc;
    LqStudyConfig config;
    config.sigma = rc.f64("study.sigma");
    config.T = rc.f64("study.T");
    config.N_list = rc.int_list("study.N_list");
    config.kappa = rc.f64("study.kappa");
    config.repeats = rc.i32("study.repeats");
    config.schedule = schedule_from(rc);
    config.seed = rc.seed;
    config.batch = rc.i32("study.batch");
    config.box = rc.f64("study.box");
    config.threads = rc.threads;
    config.init = (rc.str("study.init") == "optimum") ? LqStudyConfig::Init::optimum
                                                      : LqStudyConfig::Init::zero;
    const auto report = run_lq_convergence_in_N(config);
    write_convergence_csv(report, ctx.out("convergence.csv"));
    ctx.summary["slope"] = report.slope;
    ctx.summary["intercept"] = report.intercept;
    if (rc.emit_plots) plot_convergence(ctx, report, false, "convergence.svg");
}

void run_lq_convergence_k_command(RunContext& ctx) {
    const RunConfig& rc = ctx.rc;
    LqKStudyOptions opt;
    opt.sigma = rc.f64("study.sigma");
    opt.T = rc.f64("study.T");
    opt.batch = rc.i32("study.batch");
    opt.box = rc.f64("study.box");
    opt.threads = rc.threads;
    const auto report =
        run_lq_convergence_in_K(rc.i32("study.N"), rc.i64_list("study.K_list"),
                                rc.i32("study.repeats"), schedule_from(rc), rc.seed, opt);
    write_convergence_csv(report, ctx.out("convergence.csv"));
    ctx.summary["slope"] = report.slope;
    ctx.summary["pre_plateau_slope"] = report.pre_plateau_slope;
    ctx.summary["plateau_K"] = report.plateau_K;
    if (rc.emit_plots) plot_convergence(ctx, report, true, "convergence.svg");
}

void run_gradient_decay_command(RunContext& ctx) {
    const RunConfig& rc = ctx.rc;
    const auto arch = arch_from(rc, 1);
    const auto dataset =
        make_dataset_1d(rc.i64("data.n"), rc.f64("data.noise"), mix64(rc.seed ^ 0x44415431ull));
    const auto spec = make_snn_problem(arch, dataset, rc.f64("problem.diffusion_floor"),
                                       rc.f64("problem.lambda_reg"));
    const auto grid = make_grid(double(arch.N_layers), arch.N_layers);
    const auto u0 = snn_init_control(arch, grid, rc.seed, rc.f64("init.g0"),
                                     rc.f64("problem.diffusion_floor"), rc.f64("init.range"));
    SgdConfig config;
    config.K = rc.i64("optimizer.K");
    config.B = rc.i32("optimizer.batch");
    config.schedule = schedule_from(rc);
    config.bounds = snn_bounds(rc, arch);
    config.seed = rc.seed;
    config.oracle_M = rc.i64("optimizer.oracle_M");
    const auto report =
        run_gradient_decay(spec, u0, config, rc.i64_list("optimizer.checkpoints"));
    write_trace_csv(report.trace, ctx.out("trace.csv"));
    save_checkpoint(ctx.out("control.txt"), report.control);
    ctx.summary["initial_norm"] = report.initial_norm;
    ctx.summary["final_norm"] = report.final_norm;
    ctx.summary["ratio"] = report.ratio;
    if (report.trace.diverged) {
        throw std::runtime_error("training diverged at iteration " +
                                 std::to_string(report.trace.diverged_at) + ": " +
                                 report.trace.divergence_what);
    }
    if (rc.emit_plots) {
        PlotSpec plot;
        plot.title = "full-gradient norm along training";
        plot.x_label = "k";
        plot.y_label = "gradient norm";
        PlotSeries series;
        series.line = true;
        bool positive = true;
        for (const auto& rec : report.trace.records) {
            if (!rec.oracle_grad_norm) continue;
            series.x.push_back(double(rec.k));
            series.y.push_back(*rec.oracle_grad_norm);
            positive = positive && *rec.oracle_grad_norm > 0.0;
        }
        if (series.x.size() >= 2) {
            plot.log_y = positive;
            plot.series.push_back(std::move(series));
            write_svg_plot(plot, ctx.out("decay.svg"));
        }
    }
}

void run_funcapprox_command(RunContext& ctx, bool eight_d) {
    const RunConfig& rc = ctx.rc;
    const auto arch = arch_from(rc, eight_d ? 8 : 1);
    auto fc = funcapprox_config(rc);
    BandReport report;
    if (eight_d) {
        fc.points_per_dim = rc.i32("data.points_per_dim");
        fc.section_points = rc.i32("eval.sections");
        fc.surface_points = rc.i32("eval.surface");
        report = run_funcapprox_8d(arch, rc.i64("optimizer.K"), fc);
    } else {
        fc.dataset_n = rc.i64("data.n");
        fc.eval_points = rc.i32("eval.points");
        report = run_funcapprox_1d(arch, rc.i64("optimizer.K"), fc);
    }
    write_band_csv(report, ctx.out("bands.csv"));
    write_trace_csv(report.trace, ctx.out("trace.csv"));
    save_checkpoint(ctx.out("control.txt"), report.control);
    ctx.summary["rmse_of_means"] = report.rmse_of_means;
    ctx.summary["mean_abs_band_error"] = report.mean_abs_band_error;
    ctx.summary["interior_band_mean"] = report.interior_band_mean;
    if (eight_d) ctx.summary["section_rmse"] = report.section_rmse;
    if (rc.emit_plots) {
        if (eight_d) {
            plot_bands(ctx, report, 0, std::size_t(rc.i32("eval.sections")), 0, "bands.svg");
        } else {
            plot_bands(ctx, report, 0, report.rows.size(), 0, "bands.svg");
        }
    }
}

void run_gradient_check_command(RunContext& ctx) {
    const RunConfig& rc = ctx.rc;
    ProblemSpec spec;
    ControlPath u;
    if (rc.str("problem.name") == "lq") {
        const auto grid = make_grid(rc.f64("problem.T"), rc.i32("problem.N"));
        LqParams params{rc.f64("problem.sigma"), rc.f64("problem.T")};
        spec = make_lq_problem(params, &grid);
        u = lq_ustar_path(grid, params.sigma, params.T);
    } else {
        const auto arch = arch_from(rc, 1);
        const auto grid = make_grid(rc.f64("problem.T"), arch.N_layers);
        const auto dataset = make_dataset_1d(rc.i64("data.n"), rc.f64("data.noise"),
                                             mix64(rc.seed ^ 0x44415431ull));
        spec = make_snn_problem(arch, dataset, rc.f64("problem.diffusion_floor"),
                                rc.f64("problem.lambda_reg"));
        u = snn_init_control(arch, grid, rc.seed, rc.f64("init.g0"),
                             rc.f64("problem.diffusion_floor"), rc.f64("init.range"));
    }
    const auto est = estimate_full_gradient(spec, u, rc.i64("check.M"), rc.seed);
    const auto fd =
        finite_difference_gradient(spec, u, rc.i64("check.fd_M"), rc.f64("check.eps"), rc.seed);
    const double tol_abs = rc.f64("check.tol_abs");
    const double tol_se = rc.f64("check.tol_se");

    std::string csv = "n,j,estimate,fd,se_estimate,se_fd,abs_diff,tol,ok\n";
    int violations = 0;
    double max_diff = 0.0;
    const auto& grid = u.grid;
    for (int n = 0; n < grid.N; ++n) {
        for (int j = 0; j < u.p(); ++j) {
            const double a = est.grad.values(n, j);
            const double b = fd.grad.values(n, j);
            const double combined = std::hypot(est.se(n, j), fd.se(n, j));
            const double diff = std::abs(a - b);
            const double tol = std::max(tol_se * combined, tol_abs);
            const bool ok = diff <= tol;
            if (!ok) ++violations;
            max_diff = std::max(max_diff, diff);
            csv += std::to_string(n) + "," + std::to_string(j) + "," + fmt_double(a) + "," +
                   fmt_double(b) + "," + fmt_double(est.se(n, j)) + "," + fmt_double(fd.se(n, j)) +
                   "," + fmt_double(diff) + "," + fmt_double(tol) + "," + (ok ? "1" : "0") + "\n";
        }
    }
    atomic_write_text(ctx.out("gradient_check.csv"), csv);
    ctx.summary["violations"] = violations;
    ctx.summary["max_abs_diff"] = max_diff;
    if (violations > 0) {
        throw std::runtime_error("gradient check failed: " + std::to_string(violations) +
                                 " entries outside tolerance");
    }
}

void run_derivative_check_command(RunContext& ctx) {
    const RunConfig& rc = ctx.rc;
    const auto lq_spec = make_lq_problem();
    const auto lq_report = check_problem_derivatives(lq_spec, rc.i32("check.trials"),
                                                     rc.f64("check.tol_lq"), rc.seed);
    const auto arch = arch_from(rc, 1);
    const auto dataset =
        make_dataset_1d(rc.i64("data.n"), rc.f64("data.noise"), mix64(rc.seed ^ 0x44415431ull));
    const auto snn_spec = make_snn_problem(arch, dataset, rc.f64("problem.diffusion_floor"),
                                           rc.f64("problem.lambda_reg"));
    const auto snn_report = check_problem_derivatives(snn_spec, rc.i32("check.trials"),
                                                      rc.f64("check.tol_snn"), rc.seed + 1);

    std::string csv = "problem,callback,max_rel_error,tol,pass\n";
    const auto append = [&](const char* name, const DerivativeReport& report, double tol) {
        for (const auto& entry : report.entries) {
            csv += std::string(name) + "," + entry.callback + "," +
                   fmt_double(entry.max_rel_error) + "," + fmt_double(tol) + "," +
                   (entry.max_rel_error <= tol ? "1" : "0") + "\n";
        }
    };
    append("lq", lq_report, rc.f64("check.tol_lq"));
    append("snn", snn_report, rc.f64("check.tol_snn"));
    atomic_write_text(ctx.out("derivative_check.csv"), csv);
    ctx.summary["lq_passed"] = lq_report.passed;
    ctx.summary["snn_passed"] = snn_report.passed;
    if (!lq_report.passed || !snn_report.passed) {
        const auto& which = lq_report.passed ? snn_report : lq_report;
        throw std::runtime_error("derivative check failed at " + which.first_failure);
    }
}

}  // namespace

int dispatch(const RunConfig& config) {
    std::filesystem::create_directories(config.output_dir);
    RunContext ctx{config};
    atomic_write_text(ctx.out("effective_config.ini"), render_config(config.table));

    json manifest;
    manifest["command"] = config.command;
    manifest["version"] = kVersion;
    manifest["seed"] = config.seed;
    manifest["threads"] = config.threads;
    manifest["plots"] = config.emit_plots;

    int status = 0;
    try {
        if (config.command == "lq-convergence-n") {
            run_lq_convergence_n_command(ctx);
        } else if (config.command == "lq-convergence-k") {
            run_lq_convergence_k_command(ctx);
        } else if (config.command == "gradient-decay") {
            run_gradient_decay_command(ctx);
        } else if (config.command == "funcapprox-1d") {
            run_funcapprox_command(ctx, false);
        } else if (config.command == "funcapprox-8d") {
            run_funcapprox_command(ctx, true);
        } else if (config.command == "gradient-check") {
            run_gradient_check_command(ctx);
        } else if (config.command == "derivative-check") {
            run_derivative_check_command(ctx);
        } else {
            throw std::invalid_argument("unknown command '" + config.command + "'");
        }
        manifest["status"] = "complete";
    } catch (const std::exception& e) {
        manifest["status"] = "failed";
        manifest["error"] = e.what();
        std::cerr << "error: " << e.what() << "\n";
        status = 1;
    }
    manifest["outputs"] = ctx.outputs;
    manifest["summary"] = ctx.summary;
    atomic_write_text(config.output_dir / "manifest.json", manifest.dump(2) + "\n");
    return status;
}

}  // namespace snnbp
