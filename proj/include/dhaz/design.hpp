#ifndef DHAZ_DESIGN_HPP
#define DHAZ_DESIGN_HPP

// Design-matrix construction for binary-response fits on person-period data.

#include <Eigen/Dense>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhaz/data.hpp"

namespace dhaz {

enum class TimeEncoding { dummies, none };

struct DesignMatrix {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> column_names;
    std::vector<int> time_values; // time points holding a dummy column, ascending
    std::vector<std::string> warnings;
};

// Covariate block width after encoding.
inline int encoded_width(const CovariateSchema& schema) {
    int w = 0;
    for (const auto& cov : schema) {
        if (cov.is_factor())
            w += std::max<int>(0, static_cast<int>(cov.levels.size()) - 1);
        else
            w += 1;
    }
    return w;
}

inline std::vector<std::string> encoded_names(const CovariateSchema& schema) {
    std::vector<std::string> names;
    for (const auto& cov : schema) {
        if (cov.is_factor()) {
            for (std::size_t l = 1; l < cov.levels.size(); ++l)
                names.push_back(cov.name + cov.levels[l]);
        } else {
            names.push_back(cov.name);
        }
    }
    return names;
}

// Write the encoded covariate block of one observation into dst. Numeric
// columns pass through; factors are dummy coded against the first level.
inline void encode_covariates(const CovariateSchema& schema, const std::vector<double>& values,
                              double* dst) {
    int j = 0;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const auto& cov = schema[c];
        if (cov.is_factor()) {
            int lev = static_cast<int>(values[c]);
            for (std::size_t l = 1; l < cov.levels.size(); ++l)
                dst[j++] = (lev == static_cast<int>(l)) ? 1.0 : 0.0;
        } else {
            dst[j++] = values[c];
        }
    }
}

// Assemble the design: time dummies first (one indicator per time value
// present, no global intercept), then the encoded covariates in schema order.
inline DesignMatrix build_design(const AugmentedDataset& aug, TimeEncoding encode_time) {
    if (aug.n_rows() == 0) throw std::invalid_argument("empty augmented dataset");

    DesignMatrix d;
    if (encode_time == TimeEncoding::dummies) {
        std::set<int> times;
        for (const auto& row : aug.rows()) times.insert(row.time_interval);
        d.time_values.assign(times.begin(), times.end());
    }
    const int n_time = static_cast<int>(d.time_values.size());
    const int n_cov = encoded_width(aug.schema());
    const auto n = static_cast<Eigen::Index>(aug.n_rows());

    d.X = Eigen::MatrixXd::Zero(n, n_time + n_cov);
    d.y = Eigen::VectorXd(n);
    std::vector<double> covbuf(n_cov);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = aug.rows()[i];
        d.y[i] = row.response;
        if (n_time > 0) {
            int idx = static_cast<int>(std::lower_bound(d.time_values.begin(), d.time_values.end(),
                                                        row.time_interval) -
                                       d.time_values.begin());
            d.X(i, idx) = 1.0;
        }
        encode_covariates(aug.schema(), row.covariates, covbuf.data());
        for (int j = 0; j < n_cov; ++j) d.X(i, n_time + j) = covbuf[j];
    }

    for (int t : d.time_values) d.column_names.push_back("timeInt" + std::to_string(t));
    for (const auto& nm : encoded_names(aug.schema())) d.column_names.push_back(nm);

    for (int j = n_time; j < n_time + n_cov; ++j) {
        double lo = d.X.col(j).minCoeff(), hi = d.X.col(j).maxCoeff();
        if (lo == hi)
            d.warnings.push_back("constant covariate column: " + d.column_names[j]);
    }
    return d;
}

} // namespace dhaz

#endif
