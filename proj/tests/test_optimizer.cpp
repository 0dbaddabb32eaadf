#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "snnbp/io.hpp"
#include "snnbp/lq.hpp"
#include "snnbp/optimizer.hpp"
#include "snnbp/rng.hpp"

using namespace snnbp;

namespace {

// f = 0, g = 0, r = 0.5 (u - target)^2: the batch gradient is exactly
// u - target whatever the seed, so SGD trajectories are closed-form.
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

ProblemSpec exploding_toy() {
    auto spec = quadratic_toy(0.0);
    spec.f = [](const VectorXd& x, const VectorXd&, double) {
        return VectorXd::Constant(1, (x(0) + 1.0) * 1e308);
    };
    return spec;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("learning-rate schedules evaluate to their pinned values") {
    const auto c = LrSchedule::Constant(0.1);
    CHECK(lr(c, 0) == 0.1);
    CHECK(lr(c, 1000000) == 0.1);
    const auto h = LrSchedule::Harmonic(2.0, 3);
    CHECK(lr(h, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(lr(h, 1) == 0.5);
    CHECK(lr(h, 97) == doctest::Approx(0.02).epsilon(1e-15));
    CHECK_THROWS_AS(lr(h, -1), std::invalid_argument);
}

TEST_CASE("schedule constructors reject non-positive parameters") {
    CHECK_THROWS_AS(LrSchedule::Constant(0.0), std::invalid_argument);
    CHECK_THROWS_AS(LrSchedule::Constant(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(LrSchedule::Harmonic(0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(LrSchedule::Harmonic(2.0, 0), std::invalid_argument);
}

TEST_CASE("project clamps coordinatewise with scalar or vector limits") {
    const auto grid = make_grid(1.0, 2);
    Eigen::MatrixXd uv(2, 2);
    uv << -3.0, 0.2, 5.0, -0.7;
    const ControlPath u(grid, uv);

    const auto clamped = project(u, BoxBounds::symmetric(1.0));
    CHECK(clamped.values(0, 0) == -1.0);
    CHECK(clamped.values(0, 1) == 0.2);
    CHECK(clamped.values(1, 0) == 1.0);
    CHECK(clamped.values(1, 1) == -0.7);

    const auto box = BoxBounds::of(Eigen::Vector2d(-0.5, 0.0), Eigen::Vector2d(0.5, 0.1));
    const auto per_coord = project(u, box);
    CHECK(per_coord.values(0, 0) == -0.5);
    CHECK(per_coord.values(0, 1) == 0.1);
    CHECK(per_coord.values(1, 0) == 0.5);
    CHECK(per_coord.values(1, 1) == 0.0);

    const auto bad = BoxBounds::of(Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
    CHECK_THROWS_AS(project(u, bad), std::invalid_argument);
    CHECK_THROWS_AS(BoxBounds::of(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0)),
                    std::invalid_argument);
}

TEST_CASE("sgd_step applies the projected update and rejects bad input") {
    const auto grid = make_grid(1.0, 2);
    const ControlPath u(grid, Eigen::MatrixXd::Ones(2, 1));
    GradientPath grad(grid, 1);
    grad.values << 2.0, -30.0;
    const auto next = sgd_step(u, grad, 0.1, BoxBounds::symmetric(2.0));
    CHECK(next.values(0, 0) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(next.values(1, 0) == 2.0);

    GradientPath bad_shape(make_grid(1.0, 3), 1);
    CHECK_THROWS_AS(sgd_step(u, bad_shape, 0.1, BoxBounds::symmetric(2.0)), std::invalid_argument);
    CHECK_THROWS_AS(sgd_step(u, grad, 0.0, BoxBounds::symmetric(2.0)), std::invalid_argument);

    GradientPath nan_grad(grid, 1);
    nan_grad.values(1, 0) = std::nan("");
    CHECK_THROWS_AS(sgd_step(u, nan_grad, 0.1, BoxBounds::symmetric(2.0)), DivergenceError);
}

TEST_CASE("run_sgd is deterministic and a shorter run is a prefix of a longer one") {
    const auto grid = make_grid(1.0, 4);
    const auto spec = make_lq_problem(LqParams{}, &grid);
    const ControlPath u0(grid, 8);

    SgdConfig config;
    config.K = 5;
    config.B = 2;
    config.schedule = LrSchedule::Harmonic(2.0, 3);
    config.seed = 42;
    const auto a = run_sgd(spec, u0, config);
    const auto b = run_sgd(spec, u0, config);
    CHECK(a.control.values == b.control.values);

    ControlPath manual = u0;
    for (std::int64_t k = 0; k < 5; ++k) {
        const auto bg = batch_gradient(spec, manual, 2, 42, 2 * static_cast<std::uint64_t>(k));
        manual = sgd_step(manual, bg.grad, lr(config.schedule, k), config.bounds);
    }
    CHECK(a.control.values == manual.values);

    SgdConfig shorter = config;
    shorter.K = 3;
    ControlPath prefix = u0;
    for (std::int64_t k = 0; k < 3; ++k) {
        const auto bg = batch_gradient(spec, prefix, 2, 42, 2 * static_cast<std::uint64_t>(k));
        prefix = sgd_step(prefix, bg.grad, lr(config.schedule, k), config.bounds);
    }
    CHECK(run_sgd(spec, u0, shorter).control.values == prefix.values);
}

TEST_CASE("sgd drives the quadratic toy to its target") {
    const auto grid = make_grid(1.0, 4);
    const auto spec = quadratic_toy(1.0);
    const ControlPath u0(grid, 1);

    SgdConfig config;
    config.K = 200;
    config.schedule = LrSchedule::Constant(0.1);
    const auto res = run_sgd(spec, u0, config);
    REQUIRE(!res.trace.diverged);
    for (int n = 0; n < 4; ++n) CHECK(res.control.values(n, 0) == doctest::Approx(1.0).epsilon(1e-6));

    SgdConfig boxed = config;
    boxed.bounds = BoxBounds::symmetric(0.5);
    const auto clamped = run_sgd(spec, u0, boxed);
    for (int n = 0; n < 4; ++n) CHECK(clamped.control.values(n, 0) == 0.5);
}

TEST_CASE("trace marks follow the diagnostics cadence") {
    const auto spec = quadratic_toy(1.0);
    const ControlPath u0(make_grid(1.0, 2), 1);

    SgdConfig config;
    config.K = 30;
    config.schedule = LrSchedule::Constant(0.1);
    config.diagnostics_every = 10;
    const auto res = run_sgd(spec, u0, config);
    REQUIRE(res.trace.records.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(res.trace.records[i].k == std::int64_t(10 * i));
        CHECK(res.trace.records[i].eta == 0.1);
        CHECK(!res.trace.records[i].oracle_grad_norm.has_value());
        CHECK(!res.trace.records[i].dist_to_reference.has_value());
    }
    CHECK(res.trace.records[0].cost == 0.5);  // J(u0) = integral of 0.5 (0 - 1)^2

    SgdConfig sparse = config;
    sparse.diagnostics_every = 0;
    const auto first_last = run_sgd(spec, u0, sparse);
    REQUIRE(first_last.trace.records.size() == 2);
    CHECK(first_last.trace.records[0].k == 0);
    CHECK(first_last.trace.records[1].k == 30);
}

TEST_CASE("explicit checkpoints replace the cadence and are cleaned up") {
    const auto spec = quadratic_toy(1.0);
    const ControlPath u0(make_grid(1.0, 2), 1);

    SgdConfig config;
    config.K = 4;
    config.schedule = LrSchedule::Constant(0.1);
    config.diagnostics_every = 1;
    const std::vector<std::int64_t> marks{4, 0, 0, 2, 9, -3};
    const auto res = run_sgd(spec, u0, config, nullptr, &marks);
    REQUIRE(res.trace.records.size() == 3);
    CHECK(res.trace.records[0].k == 0);
    CHECK(res.trace.records[1].k == 2);
    CHECK(res.trace.records[2].k == 4);
}

TEST_CASE("oracle and reference diagnostics fill the optional fields") {
    const auto spec = quadratic_toy(1.0);
    const auto grid = make_grid(1.0, 4);
    const ControlPath u0(grid, 1);
    const ControlPath reference(grid, Eigen::MatrixXd::Ones(4, 1));

    SgdConfig config;
    config.K = 400;
    config.schedule = LrSchedule::Constant(0.1);
    config.oracle_M = 3;
    const auto res = run_sgd(spec, u0, config, &reference);
    REQUIRE(res.trace.records.size() == 2);
    const auto& first = res.trace.records.front();
    const auto& last = res.trace.records.back();
    REQUIRE(first.oracle_grad_norm.has_value());
    REQUIRE(first.dist_to_reference.has_value());
    CHECK(*first.oracle_grad_norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*first.dist_to_reference == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*last.oracle_grad_norm < 1e-6);
    CHECK(*last.dist_to_reference < 1e-6);
}

TEST_CASE("divergence during training stops cleanly with the last good control") {
    const auto spec = exploding_toy();
    const ControlPath u0(make_grid(1.0, 3), 1);
    SgdConfig config;
    config.K = 10;
    config.schedule = LrSchedule::Constant(0.1);
    const auto res = run_sgd(spec, u0, config);
    CHECK(res.trace.diverged);
    CHECK(res.trace.diverged_at == 0);
    CHECK(!res.trace.divergence_what.empty());
    CHECK(res.control.values == u0.values);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    const auto grid = make_grid(1.0, 4);
    Eigen::MatrixXd uv(4, 2);
    uv << 0.1, -2.0 / 3.0, 1e-17, 3.0, -0.25, M_PI, 7.0, -1e16;
    const ControlPath u(grid, uv);
    const auto path = temp_file("snnbp_ckpt_roundtrip.txt");
    save_checkpoint(path, u);
    const auto back = load_checkpoint(path);
    CHECK(back.grid.N == 4);
    CHECK(back.grid.h == 0.25);
    CHECK(back.values == u.values);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader rejects malformed files") {
    const auto bad_magic = temp_file("snnbp_ckpt_bad_magic.txt");
    atomic_write_text(bad_magic, "SNNBP-CTRL v9\n1 1 1\n0\n");
    CHECK_THROWS_WITH_AS(load_checkpoint(bad_magic), doctest::Contains("bad header"),
                         std::runtime_error);

    const auto bad_shape = temp_file("snnbp_ckpt_bad_shape.txt");
    atomic_write_text(bad_shape, "SNNBP-CTRL v1\n0 1 1\n");
    CHECK_THROWS_WITH_AS(load_checkpoint(bad_shape), doctest::Contains("bad shape"),
                         std::runtime_error);

    const auto truncated = temp_file("snnbp_ckpt_truncated.txt");
    atomic_write_text(truncated, "SNNBP-CTRL v1\n2 2 0.5\n1 2\n3\n");
    CHECK_THROWS_WITH_AS(load_checkpoint(truncated), doctest::Contains("truncated"),
                         std::runtime_error);

    for (const auto& p : {bad_magic, bad_shape, truncated}) std::filesystem::remove(p);
}
