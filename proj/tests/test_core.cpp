#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "snnbp/grid.hpp"
#include "snnbp/io.hpp"
#include "snnbp/paths.hpp"
#include "snnbp/rng.hpp"

using namespace snnbp;

TEST_CASE("make_grid produces uniform nodes") {
    const auto grid = make_grid(1.0, 4);
    CHECK(grid.h == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(grid.N == 4);
    const auto nodes = grid.nodes();
    REQUIRE(nodes.size() == 5);
    CHECK(nodes.front() == 0.0);
    CHECK(nodes.back() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(grid.node(2) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("make_grid single interval") {
    const auto grid = make_grid(1.0, 1);
    CHECK(grid.h == 1.0);
    CHECK(grid.node(0) == 0.0);
    CHECK(grid.node(1) == 1.0);
}

TEST_CASE("make_grid rejects invalid arguments") {
    CHECK_THROWS_AS(make_grid(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(-1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1.0, 0), std::invalid_argument);
}

TEST_CASE("control path validates shape") {
    const auto grid = make_grid(1.0, 3);
    CHECK_NOTHROW(ControlPath(grid, Eigen::MatrixXd::Zero(3, 2)));
    CHECK_THROWS_AS(ControlPath(grid, Eigen::MatrixXd::Zero(4, 2)), std::invalid_argument);
}

TEST_CASE("inner product uses the h-weighted quadrature") {
    const auto grid = make_grid(1.0, 2);
    Eigen::MatrixXd values(2, 1);
    values << 0.0, 1.0;
    const ControlPath u(grid, values);
    CHECK(inner_product(u, u) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(l2_norm(u) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}

TEST_CASE("inner product rejects mismatched paths") {
    const auto g2 = make_grid(1.0, 2);
    const auto g3 = make_grid(1.0, 3);
    const ControlPath a(g2, Eigen::MatrixXd::Zero(2, 1));
    const ControlPath b(g3, Eigen::MatrixXd::Zero(3, 1));
    const ControlPath c(g2, Eigen::MatrixXd::Zero(2, 2));
    CHECK_THROWS_AS(inner_product(a, b), std::invalid_argument);
    CHECK_THROWS_AS(inner_product(a, c), std::invalid_argument);
}

TEST_CASE("counter rng is deterministic and stream-separated") {
    CtrRng a(42, 7);
    CtrRng b(42, 7);
    CtrRng c(42, 8);
    bool same = true;
    bool differs = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        same = same && (va == b.next_u64());
        differs = differs || (va != c.next_u64());
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("uniform01 stays in the half-open unit interval") {
    CtrRng rng(1, 1);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double v = rng.uniform01();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(lo < 0.001);
    CHECK(hi > 0.999);
}

TEST_CASE("normal draws match standard moments") {
    CtrRng rng(3, 5);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0, sum_cu = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        sum += v;
        sum_sq += v * v;
        sum_cu += v * v * v;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(sum_cu / n) < 0.05);
}

TEST_CASE("uniform_index is unbiased over small ranges") {
    CtrRng rng(9, 2);
    std::array<int, 5> counts{};
    for (int i = 0; i < 50000; ++i) counts[rng.uniform_index(5)]++;
    for (int k = 0; k < 5; ++k) {
        CHECK(counts[k] > 9500);
        CHECK(counts[k] < 10500);
    }
}

TEST_CASE("sample_noise draws N(0, h) increments") {
    const int N = 200000;
    const auto grid = make_grid(double(N) * 0.25, N);
    REQUIRE(grid.h == doctest::Approx(0.25).epsilon(1e-15));
    const auto noise = sample_noise(grid, 2, 11, 13);
    REQUIRE(noise.increments.rows() == N);
    REQUIRE(noise.increments.cols() == 2);

    const Eigen::VectorXd mean = noise.increments.colwise().mean();
    CHECK(std::abs(mean(0)) < 0.005);
    CHECK(std::abs(mean(1)) < 0.005);
    const Eigen::MatrixXd centered = noise.increments.rowwise() - mean.transpose();
    const double var0 = centered.col(0).squaredNorm() / double(N - 1);
    const double var1 = centered.col(1).squaredNorm() / double(N - 1);
    CHECK(var0 == doctest::Approx(0.25).epsilon(0.01));
    CHECK(var1 == doctest::Approx(0.25).epsilon(0.01));
    const double corr =
        centered.col(0).dot(centered.col(1)) / double(N - 1) / std::sqrt(var0 * var1);
    CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("sample_noise is reproducible per (seed, stream)") {
    const auto grid = make_grid(1.0, 16);
    const auto a = sample_noise(grid, 3, 5, 21);
    const auto b = sample_noise(grid, 3, 5, 21);
    const auto c = sample_noise(grid, 3, 5, 22);
    CHECK(a.increments == b.increments);
    CHECK(a.increments != c.increments);
    CHECK(a.seed == 5);
    CHECK(a.stream == 21);
}

TEST_CASE("substream separates lanes") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t lane = 0; lane < 1000; ++lane) seen.insert(substream(77, lane));
    CHECK(seen.size() == 1000);
}

TEST_CASE("fmt_double round-trips exactly") {
    for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 0.098, 1e-300, -2.5e17,
                     0.42172644576523916, 3.141592653589793}) {
        const auto s = fmt_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("atomic_write_text round-trips and creates directories") {
    const auto dir = std::filesystem::temp_directory_path() / "snnbp_core_test";
    std::filesystem::remove_all(dir);
    const auto path = dir / "nested" / "file.txt";
    atomic_write_text(path, "line one\nline two\n");
    CHECK(read_text(path) == "line one\nline two\n");
    CHECK(!std::filesystem::exists(dir / "nested" / "file.txt.tmp"));
    std::filesystem::remove_all(dir);
}
