#include "wgain/data_model.hpp"

#include "wgain/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wgain {

Dataset::Dataset(VectorXd y, VectorXi d, MatrixXd z)
    : y_(std::move(y)), d_(std::move(d)), z_(std::move(z)) {
    if (y_.size() != d_.size() || y_.size() != z_.rows()) {
        throw std::invalid_argument("Dataset: y, d, z row counts differ");
    }
}

Dataset::Dataset(const std::vector<Observation>& rows) {
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index q = n > 0 ? rows.front().z.size() : 0;
    y_.resize(n);
    d_.resize(n);
    z_.resize(n, q);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Observation& obs = rows[static_cast<std::size_t>(i)];
        if (obs.z.size() != q) {
            throw data_error("Dataset: covariate length differs at row " + std::to_string(i));
        }
        y_[i] = obs.y;
        d_[i] = obs.d;
        z_.row(i) = obs.z.transpose();
    }
}

std::vector<int> FoldPlan::fold_indices(int ell) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == ell) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> FoldPlan::complement_indices(int ell) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != ell) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> FoldPlan::pair_complement_indices(int ell, int ell_prime) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != ell && assignments[i] != ell_prime) out.push_back(static_cast<int>(i));
    }
    return out;
}

int FoldPlan::fold_size(int ell) const {
    int count = 0;
    for (int a : assignments) count += (a == ell);
    return count;
}

FoldPlan make_fold_plan(Eigen::Index n, int fold_count, std::uint64_t seed) {
    if (fold_count < 2) throw std::invalid_argument("make_fold_plan: need at least 2 folds");
    if (n < 2 * static_cast<Eigen::Index>(fold_count)) {
        throw std::invalid_argument("make_fold_plan: need n >= 2*L");
    }

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }

    FoldPlan plan;
    plan.fold_count = fold_count;
    plan.seed = seed;
    plan.assignments.assign(static_cast<std::size_t>(n), -1);
    const Eigen::Index base = n / fold_count;
    const Eigen::Index remainder = n % fold_count;
    Eigen::Index pos = 0;
    for (int ell = 0; ell < fold_count; ++ell) {
        const Eigen::Index size = base + (ell < remainder ? 1 : 0);
        for (Eigen::Index k = 0; k < size; ++k, ++pos) {
            plan.assignments[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos)])] = ell;
        }
    }
    return plan;
}

void validate_dataset(const Dataset& ds) {
    const Eigen::Index n = ds.n();
    if (n == 0) throw data_error("validate_dataset: empty dataset");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(ds.y()[i])) {
            throw data_error("validate_dataset: non-finite outcome at row " + std::to_string(i));
        }
        if (ds.d()[i] != 0 && ds.d()[i] != 1) {
            throw data_error("validate_dataset: treatment not in {0,1} at row " + std::to_string(i));
        }
        for (Eigen::Index j = 0; j < ds.q(); ++j) {
            if (!std::isfinite(ds.z()(i, j))) {
                throw data_error("validate_dataset: non-finite covariate at row " + std::to_string(i) +
                                 ", column " + std::to_string(j));
            }
        }
    }
    const Eigen::Index treated = ds.treated_count();
    if (treated == 0 || treated == n) {
        throw data_error("validate_dataset: degenerate design, one treatment arm is empty");
    }
}

std::string to_string(SmoothingFamily family) {
    switch (family) {
        case SmoothingFamily::Sigmoid: return "sigmoid";
        case SmoothingFamily::Lse: return "lse";
        case SmoothingFamily::Indicator: return "indicator";
    }
    return "sigmoid";
}

SmoothingFamily smoothing_family_from_string(const std::string& name) {
    if (name == "sigmoid") return SmoothingFamily::Sigmoid;
    if (name == "lse") return SmoothingFamily::Lse;
    if (name == "indicator") return SmoothingFamily::Indicator;
    throw config_error("unknown smoothing family: " + name);
}

void SmoothingConfig::validate() const {
    if (family != SmoothingFamily::Indicator && !(s > 0.0)) {
        throw config_error("SmoothingConfig: s must be positive");
    }
    if (!(alpha4 > 0.0)) throw config_error("SmoothingConfig: alpha4 must be positive");
    if (!(c4 > 0.0)) throw config_error("SmoothingConfig: c4 must be positive");
    if (c6.has_value() != c8.has_value()) {
        throw config_error("SmoothingConfig: c6 and c8 must be supplied together");
    }
    if (c6 && c8) {
        if (!(*c6 > 0.0) || !(*c8 > 0.0)) throw config_error("SmoothingConfig: c6, c8 must be positive");
        if (*c6 * *c8 > c4) throw config_error("SmoothingConfig: c6*c8 cannot exceed c4");
    }
}

}  // namespace wgain
