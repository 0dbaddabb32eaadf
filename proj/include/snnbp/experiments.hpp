#pragma once

#include <filesystem>
#include <vector>

#include "snnbp/lq.hpp"
#include "snnbp/optimizer.hpp"
#include "snnbp/snn.hpp"

namespace snnbp {

struct LqStudyConfig {
    double sigma = 0.5;
    double T = 1.0;
    std::vector<int> N_list = {20, 30, 40, 50, 60, 70, 80, 90, 100};
    double kappa = 0.2;  // K = round(kappa * N^2)
    int repeats = 50;
    LrSchedule schedule = LrSchedule::Harmonic(2.0, 3);
    std::uint64_t seed = 1;
    int batch = 1;
    double box = 1e6;
    int threads = 1;
    enum class Init { zero, optimum } init = Init::zero;
};

struct ConvergenceReport {
    struct Row {
        int N = 0;
        std::int64_t K = 0;
        double rmse = 0.0;
        double stderr_val = 0.0;
        int diverged = 0;
    };
    std::vector<Row> rows;
    double slope = 0.0;      // OLS over all rows: log rmse vs log N (or log K)
    double intercept = 0.0;
    std::vector<double> residuals;
    std::vector<std::vector<double>> repeat_sq_errors;  // per row, kept for re-aggregation
    std::int64_t plateau_K = -1;      // K-study: first K past which gains per doubling stay < 10%
    double pre_plateau_slope = 0.0;   // K-study: slope over rows up to the plateau
};

// RMSE(N) = sqrt(mean_r ||u^{K,r} - u*_N||_2^2) with K = round(kappa N^2),
// trained from u0 = 0 against the pointwise-discretized closed form.
ConvergenceReport run_lq_convergence_in_N(const LqStudyConfig& config);

struct LqKStudyOptions {
    double sigma = 0.5;
    double T = 1.0;
    int batch = 64;
    double box = 1e6;
    int threads = 1;
};

// RMSE at fixed N over a ladder of iteration budgets. One run per repeat is
// snapshotted at every K in K_list; because iteration k draws its batch from
// (seed, k) alone, each snapshot equals an independent K-iteration run.
ConvergenceReport run_lq_convergence_in_K(int N, const std::vector<std::int64_t>& K_list,
                                          int repeats, const LrSchedule& schedule,
                                          std::uint64_t seed, const LqKStudyOptions& opt = {});

struct GradientDecayReport {
    TrainingTrace trace;
    ControlPath control;
    double initial_norm = 0.0;
    double final_norm = 0.0;
    double ratio = 0.0;
};

// Tracks the full-gradient-norm oracle along a projected-SGD run; config must
// enable oracle_M.
GradientDecayReport run_gradient_decay(const ProblemSpec& spec, const ControlPath& u0,
                                       const SgdConfig& config,
                                       const std::vector<std::int64_t>& checkpoints);

struct BandPoint {
    double mean = 0.0;
    double half_width = 0.0;
};

// Per input: M forward simulations; mean of the readout and 1.96 times its
// sample standard deviation.
std::vector<BandPoint> predict_with_bands(const ProblemSpec& spec, const ControlPath& u,
                                          const std::vector<Eigen::VectorXd>& inputs, int M,
                                          std::uint64_t seed);

struct BandReport {
    struct Row {
        Eigen::VectorXd point;
        double mean = 0.0;
        double half_width = 0.0;
        double truth_mean = 0.0;
        double truth_half_width = 0.0;
    };
    std::vector<Row> rows;
    double rmse_of_means = 0.0;
    double mean_abs_band_error = 0.0;
    double interior_band_mean = 0.0;   // half-widths averaged away from the grid endpoints
    std::vector<double> section_rmse;  // 8-D study: per-axis mean RMSE
    TrainingTrace trace;
    ControlPath control;
};

struct FuncApproxConfig {
    std::int64_t dataset_n = 10000;  // 1-D dataset size
    int points_per_dim = 6;          // 8-D mesh
    double noise = 0.05;
    double diffusion_floor = 0.005;
    double lambda_reg = 1e-4;
    double g0 = 0.05;
    double init_range = 0.5;
    LrSchedule schedule = LrSchedule::Constant(0.05);
    int batch = 1;
    double a_box = 4.5;
    double w_box = 10.0;
    std::uint64_t seed = 1;
    int eval_points = 101;
    int section_points = 26;
    int surface_points = 21;
    int band_M = 400;
    std::int64_t diagnostics_every = 0;
    std::int64_t oracle_M = 0;
};

BandReport run_funcapprox_1d(const SnnArch& arch, std::int64_t K, const FuncApproxConfig& config);

// Section views along each axis (others fixed at 0.5) plus the X2-X5 and
// X4-X7 surface grids. Training at full depth is hours-scale; meant for the
// slow path.
BandReport run_funcapprox_8d(const SnnArch& arch, std::int64_t K, const FuncApproxConfig& config);

void write_convergence_csv(const ConvergenceReport& report, const std::filesystem::path& path);
void write_band_csv(const BandReport& report, const std::filesystem::path& path);
void write_trace_csv(const TrainingTrace& trace, const std::filesystem::path& path);

}  // namespace snnbp
