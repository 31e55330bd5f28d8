#include "wgain/features.hpp"

#include "wgain/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace wgain {

Eigen::Index DictionarySpec::dimension() const {
    Eigen::Index p = include_intercept ? 1 : 0;
    for (const auto& term : power_terms) p += term.max_degree;
    p += static_cast<Eigen::Index>(interactions.size());
    p += noise_columns;
    return p;
}

void DictionarySpec::validate(Eigen::Index q) const {
    for (const auto& term : power_terms) {
        if (term.index < 0 || term.index >= q) {
            throw std::invalid_argument("DictionarySpec: power term index out of range");
        }
        if (term.max_degree < 1) throw std::invalid_argument("DictionarySpec: degree must be >= 1");
    }
    for (const auto& [a, b] : interactions) {
        if (a == b) throw std::invalid_argument("DictionarySpec: interaction indices must differ");
        if (a < 0 || a >= q || b < 0 || b >= q) {
            throw std::invalid_argument("DictionarySpec: interaction index out of range");
        }
    }
    if (noise_columns < 0) throw std::invalid_argument("DictionarySpec: negative noise column count");
}

namespace {

std::vector<std::string> column_names_for(const DictionarySpec& spec) {
    std::vector<std::string> names;
    auto base_name = [&spec](int index) {
        const std::string z = "z" + std::to_string(index + 1);
        return spec.log_covariates ? "ln(" + z + ")" : z;
    };
    if (spec.include_intercept) names.push_back("intercept");
    for (const auto& term : spec.power_terms) {
        for (int degree = 1; degree <= term.max_degree; ++degree) {
            std::string name = base_name(term.index);
            if (degree > 1) name += "^" + std::to_string(degree);
            names.push_back(name);
        }
    }
    for (const auto& [a, b] : spec.interactions) {
        names.push_back(base_name(a) + "*" + base_name(b));
    }
    for (int k = 0; k < spec.noise_columns; ++k) {
        names.push_back("noise" + std::to_string(k + 1));
    }
    return names;
}

double base_covariate(const DictionarySpec& spec, const VectorXd& z, int index) {
    if (!spec.log_covariates) return z[index];
    if (!(z[index] > 0.0)) {
        throw data_error("dictionary: log-scale covariates require positive values, got " +
                         std::to_string(z[index]) + " in column " + std::to_string(index));
    }
    return std::log(z[index]);
}

// Deterministic part of the feature map (everything except noise columns).
void fill_deterministic(const DictionarySpec& spec, const VectorXd& z, VectorXd& out) {
    Eigen::Index col = 0;
    if (spec.include_intercept) out[col++] = 1.0;
    for (const auto& term : spec.power_terms) {
        const double base = base_covariate(spec, z, term.index);
        double value = 1.0;
        for (int degree = 1; degree <= term.max_degree; ++degree) {
            value *= base;
            out[col++] = value;
        }
    }
    for (const auto& [a, b] : spec.interactions) {
        out[col++] = base_covariate(spec, z, a) * base_covariate(spec, z, b);
    }
}

}  // namespace

MatrixXd raw_features(const Dataset& ds, const DictionarySpec& spec, std::uint64_t seed) {
    spec.validate(ds.q());
    const Eigen::Index n = ds.n();
    const Eigen::Index p = spec.dimension();
    MatrixXd raw(n, p);
    VectorXd row(p);
    for (Eigen::Index i = 0; i < n; ++i) {
        fill_deterministic(spec, ds.z().row(i).transpose(), row);
        raw.row(i).head(p - spec.noise_columns) = row.head(p - spec.noise_columns).transpose();
    }
    if (spec.noise_columns > 0) {
        Rng rng = Rng::stream(seed, 0x6e6f6973);  // dedicated noise stream
        for (Eigen::Index j = p - spec.noise_columns; j < p; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) raw(i, j) = rng.normal();
        }
    }
    return raw;
}

Standardizer Standardizer::identity(Eigen::Index p) {
    Standardizer t;
    t.mean = VectorXd::Zero(p);
    t.sd = VectorXd::Ones(p);
    return t;
}

VectorXd Standardizer::apply_row(const VectorXd& raw) const {
    return (raw - mean).cwiseQuotient(sd);
}

MatrixXd Standardizer::apply(const MatrixXd& raw) const {
    return (raw.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
}

Standardizer fit_standardizer(const MatrixXd& raw, const std::vector<int>& rows,
                              int intercept_column) {
    const Eigen::Index p = raw.cols();
    const double n = static_cast<double>(rows.size());
    if (rows.empty()) throw std::invalid_argument("fit_standardizer: empty row set");

    Standardizer t = Standardizer::identity(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (j == intercept_column) continue;
        double sum = 0.0, sumsq = 0.0;
        for (int i : rows) {
            const double v = raw(i, j);
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / n;
        const double var = sumsq / n - mean * mean;
        if (var <= 0.0) {
            t.warnings.push_back("column " + std::to_string(j) +
                                 " is constant on the fitting subsample; left unstandardized");
            continue;
        }
        t.mean[j] = mean;
        t.sd[j] = std::sqrt(var);
    }
    return t;
}

DesignMatrix build_design(const Dataset& ds, const DictionarySpec& spec, std::uint64_t seed) {
    DesignMatrix dm;
    dm.spec = spec;
    dm.column_names = column_names_for(spec);
    dm.values = raw_features(ds, spec, seed);

    const Eigen::Index p = dm.values.cols();
    if (spec.standardize) {
        std::vector<int> all(static_cast<std::size_t>(ds.n()));
        for (Eigen::Index i = 0; i < ds.n(); ++i) all[static_cast<std::size_t>(i)] = static_cast<int>(i);
        Standardizer t = fit_standardizer(dm.values, all, dm.intercept_column());
        dm.values = t.apply(dm.values);
        dm.column_means = t.mean;
        dm.column_sds = t.sd;
        dm.warnings = t.warnings;
    } else {
        dm.column_means = VectorXd::Zero(p);
        dm.column_sds = VectorXd::Ones(p);
    }
    return dm;
}

VectorXd apply_transform(const DesignMatrix& dm, const VectorXd& z) {
    if (dm.spec.noise_columns > 0) {
        throw std::invalid_argument(
            "apply_transform: dictionary has noise columns, which are draws rather than "
            "functions of z");
    }
    Eigen::Index max_index = -1;
    for (const auto& term : dm.spec.power_terms) max_index = std::max<Eigen::Index>(max_index, term.index);
    for (const auto& [a, b] : dm.spec.interactions) {
        max_index = std::max<Eigen::Index>(max_index, std::max(a, b));
    }
    if (z.size() <= max_index) throw std::invalid_argument("apply_transform: covariate vector too short");

    VectorXd raw(dm.values.cols());
    fill_deterministic(dm.spec, z, raw);
    return (raw - dm.column_means).cwiseQuotient(dm.column_sds);
}

namespace {

std::vector<std::pair<int, int>> all_pairs(int count) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < count; ++a) {
        for (int b = a + 1; b < count; ++b) pairs.emplace_back(a, b);
    }
    return pairs;
}

std::vector<PowerTerm> uniform_powers(int count, int degree) {
    std::vector<PowerTerm> terms;
    for (int j = 0; j < count; ++j) terms.push_back({j, degree});
    return terms;
}

}  // namespace

DictionarySpec dictionary_preset(const std::string& name) {
    DictionarySpec spec;
    spec.include_intercept = true;
    // The simulated covariates are exponentials; their dictionaries work on
    // the log scale, where the group-minimum structure of the outcome is
    // close to the polynomial span.
    if (name == "sim1") {
        spec.power_terms = uniform_powers(6, 2);  // p = 13
        spec.standardize = true;
        spec.log_covariates = true;
    } else if (name == "sim2") {
        spec.power_terms = uniform_powers(6, 3);
        spec.interactions = all_pairs(6);  // p = 34
        spec.standardize = true;
        spec.log_covariates = true;
    } else if (name == "sim3") {
        spec.power_terms = uniform_powers(6, 6);
        spec.interactions = all_pairs(6);
        spec.noise_columns = 6;  // p = 58
        spec.standardize = true;
        spec.log_covariates = true;
    } else if (name == "emp1") {
        spec.power_terms = {{0, 2}, {1, 2}, {2, 1}, {3, 1}, {4, 2}};
        spec.interactions = all_pairs(5);  // p = 19
        spec.standardize = true;
    } else if (name == "emp2") {
        spec.power_terms = {{0, 3}, {1, 3}, {2, 1}, {3, 1}, {4, 3}};  // p = 12
        spec.standardize = true;
    } else if (name == "emp3") {
        spec.power_terms = {{0, 4}, {1, 4}, {2, 1}, {3, 1}, {4, 3}};  // p = 14
        spec.standardize = true;
    } else if (name == "emp4") {
        spec.power_terms = {{0, 6}, {1, 6}, {2, 1}, {3, 1}, {4, 3}};
        spec.interactions = all_pairs(5);  // p = 28
        spec.standardize = true;
    } else {
        throw config_error("unknown dictionary preset: " + name);
    }
    return spec;
}

bool is_dictionary_preset(const std::string& name) {
    return name == "sim1" || name == "sim2" || name == "sim3" || name == "emp1" ||
           name == "emp2" || name == "emp3" || name == "emp4";
}

}  // namespace wgain
