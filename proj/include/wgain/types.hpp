#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgain {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Error taxonomy mirrored by the CLI exit codes (2 config, 3 data, 4 numeric, 5 io).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One unit of data: outcome, binary treatment, covariate vector.
struct Observation {
    double y = 0.0;
    int d = 0;
    VectorXd z;
};

// Column-oriented dataset. All rows share the covariate dimension q and
// the type is immutable after construction, so it can be shared freely
// across concurrent workers.
class Dataset {
public:
    Dataset() = default;
    Dataset(VectorXd y, VectorXi d, MatrixXd z);
    explicit Dataset(const std::vector<Observation>& rows);

    Eigen::Index n() const { return y_.size(); }
    Eigen::Index q() const { return z_.cols(); }

    const VectorXd& y() const { return y_; }
    const VectorXi& d() const { return d_; }
    const MatrixXd& z() const { return z_; }

    Observation row(Eigen::Index i) const { return {y_[i], d_[i], z_.row(i).transpose()}; }

    Eigen::Index treated_count() const { return d_.sum(); }

private:
    VectorXd y_;
    VectorXi d_;
    MatrixXd z_;
};

// Assignment of every observation to one of L folds.  Stored together with
// the seed that produced the shuffle so any downstream number is replayable.
struct FoldPlan {
    std::vector<int> assignments;
    int fold_count = 0;
    std::uint64_t seed = 0;

    std::vector<int> fold_indices(int ell) const;
    std::vector<int> complement_indices(int ell) const;
    std::vector<int> pair_complement_indices(int ell, int ell_prime) const;
    int fold_size(int ell) const;
};

enum class SmoothingFamily { Sigmoid, Lse, Indicator };

std::string to_string(SmoothingFamily family);
SmoothingFamily smoothing_family_from_string(const std::string& name);

// Smoothing family plus the margin constants that drive bias bounds and the
// optimal smoothing rate.  `s` is ignored by the Indicator family.
struct SmoothingConfig {
    SmoothingFamily family = SmoothingFamily::Sigmoid;
    double s = 1.0;
    double alpha4 = 1.0;
    double c4 = 0.25;
    std::optional<double> c6;
    std::optional<double> c8;
    bool margin_assumed = true;

    void validate() const;
};

}  // namespace wgain
