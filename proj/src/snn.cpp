#include "snnbp/snn.hpp"

#include <cmath>
#include <stdexcept>

#include "snnbp/rng.hpp"

namespace snnbp {

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) {
    if (z > 30.0) return z;
    if (z < -30.0) return std::exp(z);
    return std::log1p(std::exp(z));
}

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Views into one packed control row.
struct Blocks {
    Eigen::Map<const VectorXd> a, v;
    RowMajorMap w, mix;
    double c;

    Blocks(const SnnArch& ar, const VectorXd& u)
        : a(u.data() + ar.off_a(), ar.n_sig),
          v(u.data() + ar.off_v(), ar.n_sig),
          w(u.data() + ar.off_w(), ar.n_sig, ar.L),
          mix(u.data() + ar.off_mix(), ar.L, ar.n_sig),
          c(u(ar.off_c())) {}
};

struct Activation {
    VectorXd s;   // logistic(Wx + V)
    VectorXd sp;  // elementwise derivative s (1 - s)
};

Activation activate(const Blocks& b, const VectorXd& x) {
    VectorXd z = b.w * x + b.v;
    VectorXd s(z.size()), sp(z.size());
    for (int i = 0; i < z.size(); ++i) {
        s(i) = logistic(z(i));
        sp(i) = s(i) * (1.0 - s(i));
    }
    return {std::move(s), std::move(sp)};
}

}  // namespace

ProblemSpec make_snn_problem(const SnnArch& arch, const DatasetHandle& dataset,
                             double diffusion_floor, double lambda_reg) {
    if (arch.L < 1 || arch.n_sig < 1 || arch.N_layers < 1 || arch.d_in < 1 || arch.d_out < 1)
        throw std::invalid_argument("make_snn_problem: all architecture sizes must be >= 1");
    if (arch.L < arch.d_in) throw std::invalid_argument("make_snn_problem: L must be >= d_in");
    if (arch.L < arch.d_out) throw std::invalid_argument("make_snn_problem: L must be >= d_out");
    if (!dataset || dataset->size() == 0) throw std::invalid_argument("make_snn_problem: dataset is empty");
    if (dataset->d_in() != arch.d_in || dataset->d_out() != arch.d_out)
        throw std::invalid_argument("make_snn_problem: dataset dimensions do not match architecture");
    if (!(diffusion_floor > 0.0)) throw std::invalid_argument("make_snn_problem: diffusion_floor must be positive");

    const SnnArch ar = arch;
    const double floor = diffusion_floor;
    const double lam = lambda_reg;
    const int L = ar.L;
    const int p = ar.p();

    ProblemSpec spec;
    spec.d = L;
    spec.p = p;
    spec.m = L;

    spec.f = [ar](const VectorXd& x, const VectorXd& u, double) -> VectorXd {
        Blocks b(ar, u);
        const auto act = activate(b, x);
        return b.mix * (b.a.cwiseProduct(act.s));
    };
    spec.f_x = [ar](const VectorXd& x, const VectorXd& u, double) -> MatrixXd {
        Blocks b(ar, u);
        const auto act = activate(b, x);
        return b.mix * (b.a.cwiseProduct(act.sp)).asDiagonal() * b.w;
    };
    spec.fx_t_apply = [ar](const VectorXd& x, const VectorXd& u, double, const VectorXd& y) -> VectorXd {
        Blocks b(ar, u);
        const auto act = activate(b, x);
        VectorXd q = b.mix.transpose() * y;
        return b.w.transpose() * (b.a.cwiseProduct(act.sp).cwiseProduct(q));
    };
    spec.f_u = [ar, p, L](const VectorXd& x, const VectorXd& u, double) -> MatrixXd {
        Blocks b(ar, u);
        const auto act = activate(b, x);
        MatrixXd fu = MatrixXd::Zero(L, p);
        fu.block(0, ar.off_a(), L, ar.n_sig) = b.mix * act.s.asDiagonal();
        const VectorXd t2 = b.a.cwiseProduct(act.sp);
        for (int i = 0; i < ar.n_sig; ++i)
            for (int j = 0; j < L; ++j)
                fu.col(ar.off_w() + i * L + j) = (t2(i) * x(j)) * b.mix.col(i);
        fu.block(0, ar.off_v(), L, ar.n_sig) = b.mix * t2.asDiagonal();
        const VectorXd as = b.a.cwiseProduct(act.s);
        for (int l = 0; l < L; ++l)
            for (int i = 0; i < ar.n_sig; ++i) fu(l, ar.off_mix() + l * ar.n_sig + i) = as(i);
        return fu;
    };
    spec.fu_t_apply = [ar, p, L](const VectorXd& x, const VectorXd& u, double, const VectorXd& y) -> VectorXd {
        Blocks b(ar, u);
        const auto act = activate(b, x);
        VectorXd out = VectorXd::Zero(p);
        const VectorXd q = b.mix.transpose() * y;
        out.segment(ar.off_a(), ar.n_sig) = act.s.cwiseProduct(q);
        const VectorXd t2 = b.a.cwiseProduct(act.sp).cwiseProduct(q);
        for (int i = 0; i < ar.n_sig; ++i)
            out.segment(ar.off_w() + i * L, L) = t2(i) * x;
        out.segment(ar.off_v(), ar.n_sig) = t2;
        const VectorXd as = b.a.cwiseProduct(act.s);
        for (int l = 0; l < L; ++l)
            out.segment(ar.off_mix() + l * ar.n_sig, ar.n_sig) = y(l) * as;
        return out;
    };
    spec.g = [ar, floor, L](const VectorXd& u, double) -> MatrixXd {
        return (floor + softplus(u(ar.off_c()))) * MatrixXd::Identity(L, L);
    };
    spec.g_apply = [ar, floor](const VectorXd& u, double, const VectorXd& omega) -> VectorXd {
        return (floor + softplus(u(ar.off_c()))) * omega;
    };
    spec.gu_dot_z = [ar, p](const VectorXd& u, double, const MatrixXd& z) -> VectorXd {
        VectorXd out = VectorXd::Zero(p);
        out(ar.off_c()) = logistic(u(ar.off_c())) * z.trace();
        return out;
    };
    spec.r = [lam](const VectorXd&, const VectorXd& u, double) -> double {
        return 0.5 * lam * u.squaredNorm();
    };
    spec.r_x = [L](const VectorXd&, const VectorXd&, double) -> VectorXd { return VectorXd::Zero(L); };
    spec.r_u = [lam](const VectorXd&, const VectorXd& u, double) -> VectorXd { return lam * u; };
    spec.phi = [ar](const VectorXd& x_T, const VectorXd& gamma) -> double {
        return 0.5 * (x_T.head(ar.d_out) - gamma).squaredNorm();
    };
    spec.phi_x = [ar, L](const VectorXd& x_T, const VectorXd& gamma) -> VectorXd {
        VectorXd out = VectorXd::Zero(L);
        out.head(ar.d_out) = x_T.head(ar.d_out) - gamma;
        return out;
    };
    spec.initial_state = [ar, L](const DataSample& s) -> VectorXd {
        VectorXd x0 = VectorXd::Zero(L);
        x0.head(ar.d_in) = s.input;
        return x0;
    };
    spec.data_sampler = [dataset](std::uint64_t seed, std::uint64_t stream) -> DataSample {
        return dataset->sample(seed, stream);
    };
    spec.readout = [ar](const VectorXd& x_T) -> VectorXd { return x_T.head(ar.d_out); };
    return spec;
}

ControlPath snn_init_control(const SnnArch& arch, const TemporalGrid& grid, std::uint64_t seed,
                             double g0, double diffusion_floor, double init_range) {
    if (grid.N != arch.N_layers)
        throw std::invalid_argument("snn_init_control: grid.N must equal arch.N_layers");
    if (!(g0 > diffusion_floor))
        throw std::invalid_argument("snn_init_control: g0 must exceed the diffusion floor");
    const double c0 = std::log(std::expm1(g0 - diffusion_floor));
    CtrRng rng(seed, 0x494e4954ull);
    ControlPath u(grid, arch.p());
    for (int n = 0; n < grid.N; ++n) {
        for (int j = 0; j < arch.p(); ++j) u.values(n, j) = rng.uniform(-init_range, init_range);
        u.values(n, arch.off_c()) = c0;
    }
    return u;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> snn_box_limits(const SnnArch& arch, double a_box,
                                                           double w_box) {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(arch.p(), -w_box);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(arch.p(), w_box);
    lo.segment(arch.off_a(), arch.n_sig).setConstant(-a_box);
    hi.segment(arch.off_a(), arch.n_sig).setConstant(a_box);
    lo(arch.off_c()) = -1e18;
    hi(arch.off_c()) = 1e18;
    return {std::move(lo), std::move(hi)};
}

}  // namespace snnbp
