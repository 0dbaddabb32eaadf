#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "snnbp/datasets.hpp"
#include "snnbp/experiments.hpp"
#include "snnbp/io.hpp"

using namespace snnbp;

namespace {

ProblemSpec quadratic_toy(double target) {
    ProblemSpec spec;
    spec.d = 1;
    spec.p = 1;
    spec.m = 1;
    spec.f = [](const VectorXd&, const VectorXd&, double) { return VectorXd::Zero(1); };
    spec.f_x = [](const VectorXd&, const VectorXd&, double) { return MatrixXd::Zero(1, 1); };
    spec.f_u = [](const VectorXd&, const VectorXd&, double) { return MatrixXd::Zero(1, 1); };
    spec.g = [](const VectorXd&, double) { return MatrixXd::Zero(1, 1); };
    spec.gu_dot_z = [](const VectorXd&, double, const MatrixXd&) { return VectorXd::Zero(1); };
    spec.r = [target](const VectorXd&, const VectorXd& u, double) {
        return 0.5 * (u(0) - target) * (u(0) - target);
    };
    spec.r_x = [](const VectorXd&, const VectorXd&, double) { return VectorXd::Zero(1); };
    spec.r_u = [target](const VectorXd&, const VectorXd& u, double) {
        return VectorXd::Constant(1, u(0) - target);
    };
    spec.phi = [](const VectorXd&, const VectorXd&) { return 0.0; };
    spec.phi_x = [](const VectorXd&, const VectorXd&) { return VectorXd::Zero(1); };
    spec.initial_state = [](const DataSample&) { return VectorXd::Zero(1); };
    spec.data_sampler = [](std::uint64_t, std::uint64_t) { return DataSample{}; };
    return spec;
}

// Noiseless pass-through network: the prediction equals the input, so bands
// collapse to points.
ProblemSpec passthrough_spec() {
    auto spec = quadratic_toy(0.0);
    spec.initial_state = [](const DataSample& s) { return s.input; };
    spec.readout = [](const VectorXd& x_T) { return x_T.head(1); };
    return spec;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("untrained study at the closed-form optimum reports zero error") {
    LqStudyConfig config;
    config.N_list = {4, 8};
    config.kappa = 0.0;
    config.repeats = 2;
    config.init = LqStudyConfig::Init::optimum;
    const auto report = run_lq_convergence_in_N(config);
    REQUIRE(report.rows.size() == 2);
    for (const auto& row : report.rows) {
        CHECK(row.K == 0);
        CHECK(row.rmse < 1e-12);
        CHECK(row.diverged == 0);
    }
}

TEST_CASE("n-study is deterministic and thread-count invariant") {
    LqStudyConfig config;
    config.N_list = {5, 10};
    config.repeats = 3;
    config.seed = 7;
    const auto a = run_lq_convergence_in_N(config);
    const auto b = run_lq_convergence_in_N(config);
    config.threads = 3;
    const auto c = run_lq_convergence_in_N(config);
    REQUIRE(a.rows.size() == 2);
    CHECK(a.rows[0].K == 5);
    CHECK(a.rows[1].K == 20);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(a.rows[i].rmse == b.rows[i].rmse);
        CHECK(a.rows[i].rmse == c.rows[i].rmse);
        CHECK(a.rows[i].rmse > 0.0);
        CHECK(a.rows[i].stderr_val >= 0.0);
    }
    CHECK(a.slope == c.slope);
}

TEST_CASE("row rmse re-aggregates from the stored squared errors") {
    LqStudyConfig config;
    config.N_list = {6};
    config.repeats = 4;
    config.seed = 3;
    const auto report = run_lq_convergence_in_N(config);
    REQUIRE(report.repeat_sq_errors.size() == 1);
    REQUIRE(report.repeat_sq_errors[0].size() == 4);
    double mean_sq = 0.0;
    for (double sq : report.repeat_sq_errors[0]) mean_sq += sq;
    mean_sq /= 4.0;
    CHECK(report.rows[0].rmse == doctest::Approx(std::sqrt(mean_sq)).epsilon(1e-14));
}

TEST_CASE("k-study snapshots equal independent shorter runs") {
    LqKStudyOptions opt;
    opt.batch = 2;
    const auto full = run_lq_convergence_in_K(4, {3, 6}, 2, LrSchedule::Harmonic(2.0, 3), 11, opt);
    const auto short_run = run_lq_convergence_in_K(4, {3}, 2, LrSchedule::Harmonic(2.0, 3), 11, opt);
    REQUIRE(full.rows.size() == 2);
    REQUIRE(short_run.rows.size() == 1);
    CHECK(full.rows[0].K == 3);
    CHECK(full.rows[1].K == 6);
    CHECK(full.rows[0].rmse == short_run.rows[0].rmse);
    CHECK(full.rows[0].stderr_val == short_run.rows[0].stderr_val);
}

TEST_CASE("deterministic passthrough network yields zero-width bands") {
    const auto spec = passthrough_spec();
    const ControlPath u(make_grid(1.0, 3), 1);
    std::vector<Eigen::VectorXd> inputs;
    inputs.push_back(Eigen::VectorXd::Constant(1, 0.3));
    inputs.push_back(Eigen::VectorXd::Constant(1, -2.0));
    const auto bands = predict_with_bands(spec, u, inputs, 5, 17);
    REQUIRE(bands.size() == 2);
    CHECK(bands[0].mean == 0.3);
    CHECK(bands[0].half_width == 0.0);
    CHECK(bands[1].mean == -2.0);
    CHECK(bands[1].half_width == 0.0);
}

TEST_CASE("predict_with_bands requires a readout") {
    const auto spec = quadratic_toy(0.0);
    const ControlPath u(make_grid(1.0, 3), 1);
    std::vector<Eigen::VectorXd> inputs{Eigen::VectorXd::Zero(1)};
    CHECK_THROWS_AS(predict_with_bands(spec, u, inputs, 5, 17), std::invalid_argument);
}

TEST_CASE("untrained 1-d study produces well-formed band rows") {
    SnnArch arch;
    arch.L = 4;
    arch.N_layers = 4;
    arch.n_sig = 4;
    FuncApproxConfig config;
    config.dataset_n = 200;
    config.eval_points = 11;
    config.band_M = 50;
    config.seed = 5;
    const auto report = run_funcapprox_1d(arch, 0, config);
    REQUIRE(report.rows.size() == 11);
    for (std::size_t q = 0; q < report.rows.size(); ++q) {
        const auto& row = report.rows[q];
        REQUIRE(row.point.size() == 1);
        const double x = double(q) / 10.0;
        CHECK(row.point(0) == doctest::Approx(x).epsilon(1e-12));
        CHECK(row.truth_mean == doctest::Approx(truth_1d(x)).epsilon(1e-12));
        CHECK(row.truth_half_width == doctest::Approx(1.96 * 0.05).epsilon(1e-12));
        CHECK(std::isfinite(row.mean));
        CHECK(row.half_width > 0.0);
    }
    const double rmse = report.rmse_of_means;
    CHECK(rmse > 0.0);

    double interior = 0.0;
    for (std::size_t q = 1; q + 1 < report.rows.size(); ++q) interior += report.rows[q].half_width;
    interior /= double(report.rows.size() - 2);
    CHECK(report.interior_band_mean == doctest::Approx(interior).epsilon(1e-14));

    const auto rerun = run_funcapprox_1d(arch, 0, config);
    for (std::size_t q = 0; q < report.rows.size(); ++q) {
        CHECK(report.rows[q].mean == rerun.rows[q].mean);
        CHECK(report.rows[q].half_width == rerun.rows[q].half_width);
    }
}

TEST_CASE("untrained 8-d study covers sections and surfaces") {
    SnnArch arch;
    arch.L = 8;
    arch.N_layers = 3;
    arch.n_sig = 4;
    arch.d_in = 8;
    FuncApproxConfig config;
    config.points_per_dim = 2;
    config.section_points = 5;
    config.surface_points = 3;
    config.band_M = 20;
    config.seed = 9;
    const auto report = run_funcapprox_8d(arch, 0, config);
    REQUIRE(report.rows.size() == 8 * 5 + 2 * 3 * 3);
    REQUIRE(report.section_rmse.size() == 8);
    for (const auto& row : report.rows) {
        REQUIRE(row.point.size() == 8);
        CHECK(row.truth_mean == doctest::Approx(truth_8d(row.point)).epsilon(1e-12));
        CHECK(std::isfinite(row.mean));
        CHECK(row.half_width >= 0.0);
    }
    // first section sweeps axis 1 with the others anchored at 0.5
    CHECK(report.rows[0].point(0) == 0.0);
    CHECK(report.rows[0].point(1) == 0.5);
    CHECK(report.rows[4].point(0) == 1.0);
    for (double rmse : report.section_rmse) CHECK(rmse > 0.0);
}

TEST_CASE("gradient decay on the quadratic toy collapses the oracle norm") {
    const auto spec = quadratic_toy(1.0);
    const ControlPath u0(make_grid(1.0, 4), 1);
    SgdConfig config;
    config.K = 300;
    config.schedule = LrSchedule::Constant(0.1);
    config.oracle_M = 2;
    const auto report = run_gradient_decay(spec, u0, config, {0, 150, 300});
    REQUIRE(report.trace.records.size() == 3);
    CHECK(report.initial_norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.final_norm < 1e-8);
    CHECK(report.ratio < 1e-8);
    CHECK(report.control.values(0, 0) == doctest::Approx(1.0).epsilon(1e-9));

    SgdConfig no_oracle = config;
    no_oracle.oracle_M = 0;
    CHECK_THROWS_AS(run_gradient_decay(spec, u0, no_oracle, {0, 300}), std::invalid_argument);
}

TEST_CASE("csv writers emit the documented headers") {
    ConvergenceReport conv;
    conv.rows.push_back({10, 20, 0.5, 0.01, 0});
    const auto conv_path = temp_file("snnbp_conv.csv");
    write_convergence_csv(conv, conv_path);
    std::istringstream conv_in(read_text(conv_path));
    std::string line;
    std::getline(conv_in, line);
    CHECK(line == "N,K,rmse,stderr,diverged");
    std::getline(conv_in, line);
    CHECK(line == "10,20,0.5,0.01,0");

    BandReport band;
    BandReport::Row row;
    row.point = Eigen::VectorXd::Constant(1, 0.25);
    row.mean = 1.0;
    row.half_width = 0.1;
    row.truth_mean = 1.0;
    row.truth_half_width = 0.098;
    band.rows.push_back(row);
    const auto band_path = temp_file("snnbp_band.csv");
    write_band_csv(band, band_path);
    std::istringstream band_in(read_text(band_path));
    std::getline(band_in, line);
    CHECK(line == "x_1,mean,half_width,truth_mean,truth_half_width");

    TrainingTrace trace;
    TrainingTrace::Record rec;
    rec.k = 5;
    rec.eta = 0.1;
    rec.cost = 2.0;
    rec.control_norm = 1.5;
    trace.records.push_back(rec);
    const auto trace_path = temp_file("snnbp_trace.csv");
    write_trace_csv(trace, trace_path);
    std::istringstream trace_in(read_text(trace_path));
    std::getline(trace_in, line);
    CHECK(line == "k,eta,cost,control_norm,oracle_grad_norm,dist_to_reference");
    std::getline(trace_in, line);
    CHECK(line == "5,0.1,2,1.5,,");

    for (const auto& p : {conv_path, band_path, trace_path}) std::filesystem::remove(p);
}

TEST_CASE("study validation rejects malformed configurations") {
    LqStudyConfig config;
    config.N_list = {};
    CHECK_THROWS_AS(run_lq_convergence_in_N(config), std::invalid_argument);
    config.N_list = {4};
    config.repeats = 0;
    CHECK_THROWS_AS(run_lq_convergence_in_N(config), std::invalid_argument);
    CHECK_THROWS_AS(run_lq_convergence_in_K(4, {}, 2, LrSchedule::Harmonic(2.0, 3), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_lq_convergence_in_K(4, {-1, 5}, 2, LrSchedule::Harmonic(2.0, 3), 1),
                    std::invalid_argument);
}
