#include "snnbp/datasets.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "snnbp/io.hpp"
#include "snnbp/rng.hpp"

namespace snnbp {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

DataSample Dataset::sample(std::uint64_t seed, std::uint64_t stream) const {
    CtrRng rng(seed, stream);
    return row(static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(size()))));
}

double truth_1d(double x) { return std::sin(kTwoPi * x); }

double truth_8d(const Eigen::VectorXd& x) {
    return std::exp(x(0)) * std::cos(kTwoPi * x(1)) + 8.0 * x(2) * (x(3) - 0.5) * (x(3) - 0.5) +
           x(4) + std::log(2.0 + x(5)) + x(6) * x(6) + 2.0 * x(7);
}

namespace {

class MemoryDataset final : public Dataset {
public:
    MemoryDataset(Eigen::MatrixXd inputs, Eigen::MatrixXd targets)
        : inputs_(std::move(inputs)), targets_(std::move(targets)) {}

    std::int64_t size() const override { return inputs_.rows(); }
    DataSample row(std::int64_t i) const override {
        return DataSample{inputs_.row(i).transpose(), targets_.row(i).transpose()};
    }
    int d_in() const override { return static_cast<int>(inputs_.cols()); }
    int d_out() const override { return static_cast<int>(targets_.cols()); }

private:
    Eigen::MatrixXd inputs_;
    Eigen::MatrixXd targets_;
};

class Mesh8dDataset final : public Dataset {
public:
    Mesh8dDataset(int ppd, double noise, std::uint64_t seed)
        : ppd_(ppd), noise_(noise), seed_(seed) {
        size_ = 1;
        for (int k = 0; k < 8; ++k) size_ *= ppd_;
    }

    std::int64_t size() const override { return size_; }

    DataSample row(std::int64_t i) const override {
        Eigen::VectorXd x(8);
        std::int64_t rest = i;
        for (int k = 0; k < 8; ++k) {
            x(k) = static_cast<double>(rest % ppd_) / (ppd_ - 1);
            rest /= ppd_;
        }
        CtrRng rng(seed_, substream(0x384d4553ull, static_cast<std::uint64_t>(i)));
        Eigen::VectorXd y(1);
        y(0) = truth_8d(x) + noise_ * rng.normal();
        return DataSample{std::move(x), std::move(y)};
    }

    int d_in() const override { return 8; }
    int d_out() const override { return 1; }

private:
    int ppd_;
    double noise_;
    std::uint64_t seed_;
    std::int64_t size_;
};

}  // namespace

DatasetHandle make_dataset_1d(std::int64_t n, double noise, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("make_dataset_1d: n must be >= 1");
    CtrRng rng(seed, 0);
    Eigen::MatrixXd xs(n, 1), ys(n, 1);
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = rng.uniform01();
        xs(i, 0) = x;
        ys(i, 0) = truth_1d(x) + noise * rng.normal();
    }
    return std::make_shared<MemoryDataset>(std::move(xs), std::move(ys));
}

DatasetHandle make_dataset_8d(int points_per_dim, double noise, std::uint64_t seed) {
    if (points_per_dim < 2) throw std::invalid_argument("make_dataset_8d: points_per_dim must be >= 2");
    return std::make_shared<Mesh8dDataset>(points_per_dim, noise, seed);
}

void export_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ostringstream out;
    for (int j = 0; j < ds.d_in(); ++j) out << (j ? "," : "") << "x_" << (j + 1);
    for (int j = 0; j < ds.d_out(); ++j) out << ",y_" << (j + 1);
    out << "\n";
    for (std::int64_t i = 0; i < ds.size(); ++i) {
        const DataSample s = ds.row(i);
        for (int j = 0; j < s.input.size(); ++j) out << (j ? "," : "") << fmt_double(s.input(j));
        for (int j = 0; j < s.target.size(); ++j) out << "," << fmt_double(s.target(j));
        out << "\n";
    }
    atomic_write_text(path, out.str());
}

DatasetHandle import_dataset_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("import_dataset_csv: empty file");
    int d_in = 0, d_out = 0;
    {
        std::istringstream hdr(line);
        std::string col;
        while (std::getline(hdr, col, ',')) {
            if (col.rfind("x_", 0) == 0)
                ++d_in;
            else if (col.rfind("y_", 0) == 0)
                ++d_out;
            else
                throw std::runtime_error("import_dataset_csv: unexpected column " + col);
        }
    }
    if (d_in < 1 || d_out < 1) throw std::runtime_error("import_dataset_csv: bad header");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
        if (static_cast<int>(vals.size()) != d_in + d_out)
            throw std::runtime_error("import_dataset_csv: row width mismatch");
        rows.push_back(std::move(vals));
    }
    Eigen::MatrixXd xs(rows.size(), d_in), ys(rows.size(), d_out);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < d_in; ++j) xs(i, j) = rows[i][j];
        for (int j = 0; j < d_out; ++j) ys(i, j) = rows[i][d_in + j];
    }
    return std::make_shared<MemoryDataset>(std::move(xs), std::move(ys));
}

}  // namespace snnbp
