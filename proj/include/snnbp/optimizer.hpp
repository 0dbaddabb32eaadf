#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "snnbp/solver.hpp"

namespace snnbp {

// Constant eta or the Robbins-Monro family eta_k = theta / (k + M).
struct LrSchedule {
    enum class Kind { constant, harmonic };
    Kind kind = Kind::constant;
    double eta = 0.01;
    double theta = 2.0;
    std::int64_t M = 3;

    static LrSchedule Constant(double eta);
    static LrSchedule Harmonic(double theta, std::int64_t M);
};

double lr(const LrSchedule& schedule, std::int64_t k);

// Coordinatewise box; limits are either a single pair broadcast to every
// coordinate or full p-vectors.
struct BoxBounds {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static BoxBounds symmetric(double half_width);
    static BoxBounds of(Eigen::VectorXd lower, Eigen::VectorXd upper);

    double lo(int j) const { return lower.size() == 1 ? lower(0) : lower(j); }
    double hi(int j) const { return upper.size() == 1 ? upper(0) : upper(j); }
};

ControlPath project(const ControlPath& u, const BoxBounds& bounds);

// project(u - eta * grad); rejects non-finite gradients
ControlPath sgd_step(const ControlPath& u, const GradientPath& grad, double eta,
                     const BoxBounds& bounds);

struct SgdConfig {
    std::int64_t K = 100;
    int B = 1;
    LrSchedule schedule;
    BoxBounds bounds = BoxBounds::symmetric(1e6);
    std::uint64_t seed = 1;
    std::int64_t diagnostics_every = 0;  // 0 = first and last record only
    std::int64_t oracle_M = 0;           // 0 = no full-gradient estimates
};

struct TrainingTrace {
    struct Record {
        std::int64_t k = 0;
        double eta = 0.0;
        double cost = 0.0;
        double control_norm = 0.0;
        std::optional<double> oracle_grad_norm;
        std::optional<double> dist_to_reference;
    };
    std::vector<Record> records;
    bool diverged = false;
    std::int64_t diverged_at = -1;
    std::string divergence_what;
};

struct SgdResult {
    ControlPath control;
    TrainingTrace trace;
};

// Projected SGD: u <- project(u - eta_k * batch_gradient). Iteration k draws
// its batch from stream 2k of config.seed, so a K-step run is a prefix of any
// longer run with the same seed; diagnostics use odd streams and never
// perturb that coupling. checkpoints (when given) lists the k values to
// record, replacing the diagnostics_every cadence.
SgdResult run_sgd(const ProblemSpec& spec, const ControlPath& u0, const SgdConfig& config,
                  const ControlPath* reference = nullptr,
                  const std::vector<std::int64_t>* checkpoints = nullptr);

// Text checkpoint: "SNNBP-CTRL v1", then "N p h", then N rows of p values at
// full round-trip precision.
void save_checkpoint(const std::filesystem::path& path, const ControlPath& u);
ControlPath load_checkpoint(const std::filesystem::path& path);

}  // namespace snnbp
