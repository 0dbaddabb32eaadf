#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <memory>

#include "snnbp/paths.hpp"

namespace snnbp {

// Immutable collection of (input, target) pairs. Rows are addressable by
// index so large meshes can synthesize rows on demand instead of storing them.
class Dataset {
public:
    virtual ~Dataset() = default;
    virtual std::int64_t size() const = 0;
    virtual DataSample row(std::int64_t i) const = 0;
    virtual int d_in() const = 0;
    virtual int d_out() const = 0;

    DataSample sample(std::uint64_t seed, std::uint64_t stream) const;
};

using DatasetHandle = std::shared_ptr<const Dataset>;

// Noise-free targets of the two regression benchmarks.
double truth_1d(double x);
double truth_8d(const Eigen::VectorXd& x);

// n pairs (x_i, sin(2 pi x_i) + noise * xi_i), x_i uniform on [0,1].
DatasetHandle make_dataset_1d(std::int64_t n, double noise, std::uint64_t seed);

// Uniform tensor mesh over [0,1]^8 with points_per_dim nodes per axis;
// rows are synthesized lazily and the per-row noise is keyed by the row
// index, so row(i) is deterministic.
DatasetHandle make_dataset_8d(int points_per_dim, double noise, std::uint64_t seed);

// CSV with header x_1..x_{d_in},y_1..y_{d_out}.
void export_dataset_csv(const Dataset& ds, const std::filesystem::path& path);
DatasetHandle import_dataset_csv(const std::filesystem::path& path);

}  // namespace snnbp
