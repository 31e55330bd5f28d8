#pragma once

#include "wgain/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace wgain {

struct PowerTerm {
    int index = 0;
    int max_degree = 1;  // contributes columns z^1 .. z^max_degree
};

// Declarative recipe for the dictionary b(z): intercept, per-covariate power
// ladders, pairwise interactions, optional appended standard-normal noise
// columns (simulation use), and a standardization flag.  With
// log_covariates the powers and interactions are taken in ln(z), which
// requires strictly positive covariates.
struct DictionarySpec {
    bool include_intercept = true;
    std::vector<PowerTerm> power_terms;
    std::vector<std::pair<int, int>> interactions;
    int noise_columns = 0;
    bool standardize = false;
    bool log_covariates = false;

    Eigen::Index dimension() const;
    void validate(Eigen::Index q) const;
};

// Per-column affine transform frozen on a fitting subsample.  The intercept
// column and constant columns pass through unchanged.
struct Standardizer {
    VectorXd mean;
    VectorXd sd;
    std::vector<std::string> warnings;

    VectorXd apply_row(const VectorXd& raw) const;
    MatrixXd apply(const MatrixXd& raw) const;
    static Standardizer identity(Eigen::Index p);
};

// Population-convention column moments over the given rows; intercept_column
// (when >= 0) and zero-variance columns are left alone, the latter with a
// warning recorded.
Standardizer fit_standardizer(const MatrixXd& raw, const std::vector<int>& rows,
                              int intercept_column);

struct DesignMatrix {
    MatrixXd values;  // standardized when spec.standardize, raw otherwise
    std::vector<std::string> column_names;
    VectorXd column_means;
    VectorXd column_sds;
    DictionarySpec spec;
    std::vector<std::string> warnings;

    int intercept_column() const { return spec.include_intercept ? 0 : -1; }
};

// Realizes the dictionary on a dataset.  The seed only feeds the noise
// columns; everything else is a pure function of (ds, spec).
DesignMatrix build_design(const Dataset& ds, const DictionarySpec& spec, std::uint64_t seed);

// Raw (never standardized) feature matrix; the estimator standardizes
// per-fold on top of this.
MatrixXd raw_features(const Dataset& ds, const DictionarySpec& spec, std::uint64_t seed);

// Feature vector for a new covariate vector, run through the stored
// standardization so out-of-fold evaluation reuses in-fold statistics.
// Rejects specs with noise columns: those columns are draws, not functions
// of z, so there is nothing to evaluate out of sample.
VectorXd apply_transform(const DesignMatrix& dm, const VectorXd& z);

// Named presets addressable from configs: "sim1", "sim2", "sim3" for the
// simulation dictionaries, "emp1".."emp4" for the five-covariate empirical
// ones (column order: age, education, black, hispanic, prevearn).
DictionarySpec dictionary_preset(const std::string& name);
bool is_dictionary_preset(const std::string& name);

}  // namespace wgain
