#pragma once

#include <functional>

#include "snnbp/problem.hpp"

namespace snnbp {

// Linear-quadratic benchmark: dX = (u - a_t) dt + sigma diag(u) dW on [0, T],
// running cost 0.5|x - X*_t|^2 + 0.5|u|^2, terminal cost 0.5|x_T|^2, with a
// closed-form optimal control u*. State, control, and noise are all 8-D.
struct LqParams {
    double sigma = 0.5;
    double T = 1.0;
    static constexpr int d = 8;
    static constexpr int p = 8;
    static constexpr int m = 8;
};

struct LqConstants {
    double D;
    Eigen::Matrix<double, 7, 1> x_T;
    std::function<double(double)> alpha;
};

double lq_beta(double t, double sigma);
LqConstants lq_constants(double sigma);
Eigen::Matrix<double, 8, 1> lq_a(double t, double sigma);
Eigen::Matrix<double, 8, 1> lq_xstar(double t, double sigma);
Eigen::Matrix<double, 8, 1> lq_ustar(double t, double sigma, double T);

// Optional grid enables node-cached a_t / X*_t lookups inside the callbacks;
// off-node times still evaluate exactly.
ProblemSpec make_lq_problem(const LqParams& params = {}, const TemporalGrid* grid = nullptr);

// u* sampled at the left node of each interval.
ControlPath lq_ustar_path(const TemporalGrid& grid, double sigma, double T);

}  // namespace snnbp
