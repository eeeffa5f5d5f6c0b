#ifndef DHAZ_GLM_HPP
#define DHAZ_GLM_HPP

// Proportional continuation-ratio model: time-specific intercepts plus
// time-constant covariate effects, fitted by maximum likelihood on the
// person-period data.

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhaz/design.hpp"
#include "dhaz/irls.hpp"

namespace dhaz {

struct ParametricHazardModel {
    Link link = Link::logit;
    int horizon_k = 0;
    std::vector<int> time_values;     // times carrying an intercept, ascending
    std::vector<double> intercepts;   // gamma_0t, aligned with time_values
    std::vector<std::string> coef_names;
    std::vector<double> coefficients; // covariate effects, encoded order
    Eigen::MatrixXd covariance;       // over (intercepts, coefficients)
    CovariateSchema schema;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;

    int n_params() const { return static_cast<int>(time_values.size() + coefficients.size()); }
};

inline ParametricHazardModel fit_parametric(const AugmentedDataset& aug,
                                            const IrlsOptions& opts = IrlsOptions{}) {
    DesignMatrix d = build_design(aug, TimeEncoding::dummies);
    IrlsResult r = fit_irls(d.X, d.y, nullptr, opts);

    ParametricHazardModel m;
    m.link = opts.link;
    m.horizon_k = aug.horizon_k();
    m.time_values = d.time_values;
    const int n_time = static_cast<int>(d.time_values.size());
    for (int j = 0; j < n_time; ++j) m.intercepts.push_back(r.beta[j]);
    for (std::size_t j = n_time; j < d.column_names.size(); ++j) {
        m.coef_names.push_back(d.column_names[j]);
        m.coefficients.push_back(r.beta[static_cast<int>(j)]);
    }
    m.covariance = r.covariance;
    m.schema = aug.schema();
    m.loglik = r.loglik;
    m.iterations = r.iterations;
    m.converged = r.converged;
    m.warnings = r.warnings;
    for (const auto& w : d.warnings) m.warnings.push_back(w);
    return m;
}

// Linear predictor for one subject at time t (without the horizon rule).
inline double linear_predictor(const ParametricHazardModel& m, int t,
                               const std::vector<double>& covariates) {
    auto it = std::lower_bound(m.time_values.begin(), m.time_values.end(), t);
    if (it == m.time_values.end() || *it != t)
        throw std::invalid_argument("no intercept for time " + std::to_string(t));
    double eta = m.intercepts[it - m.time_values.begin()];
    std::vector<double> enc(m.coefficients.size());
    encode_covariates(m.schema, covariates, enc.data());
    for (std::size_t j = 0; j < enc.size(); ++j) eta += enc[j] * m.coefficients[j];
    return eta;
}

// Hazard at (t, x). The hazard at the horizon is 1 by construction.
inline double predict_hazard(const ParametricHazardModel& m, int t,
                             const std::vector<double>& covariates) {
    if (t < 1) throw std::invalid_argument("time must be >= 1");
    if (t >= m.horizon_k) return 1.0;
    return link_inverse(m.link, linear_predictor(m, t, covariates));
}

// exp(coefficient): multiplicative change of the continuation ratio per unit
// of the covariate. Multi-level factors yield one factor per dummy.
inline std::vector<std::pair<std::string, double>>
continuation_ratio_factor(const ParametricHazardModel& m, const std::string& covariate) {
    std::vector<std::pair<std::string, double>> out;
    int col = schema_column(m.schema, covariate);
    if (col < 0) throw std::invalid_argument("unknown covariate: " + covariate);
    // locate the encoded columns belonging to this covariate
    int j = 0;
    for (int c = 0; c < col; ++c)
        j += m.schema[c].is_factor() ? static_cast<int>(m.schema[c].levels.size()) - 1 : 1;
    int width = m.schema[col].is_factor() ? static_cast<int>(m.schema[col].levels.size()) - 1 : 1;
    for (int w = 0; w < width; ++w)
        out.emplace_back(m.coef_names[j + w], std::exp(m.coefficients[j + w]));
    return out;
}

struct WaldRow {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;
    double z = 0.0;
    double p = 0.0;
    bool degenerate = false; // zero standard error
};

inline double normal_two_sided_p(double z) {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

inline std::vector<WaldRow> wald_table(const ParametricHazardModel& m) {
    std::vector<WaldRow> rows;
    const int n_time = static_cast<int>(m.time_values.size());
    auto push = [&](const std::string& name, double est, int idx) {
        WaldRow r;
        r.name = name;
        r.estimate = est;
        double var = m.covariance(idx, idx);
        r.se = var > 0 ? std::sqrt(var) : 0.0;
        if (r.se > 0) {
            r.z = est / r.se;
            r.p = normal_two_sided_p(r.z);
        } else {
            r.degenerate = true;
            r.z = 0.0;
            r.p = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(r);
    };
    for (int j = 0; j < n_time; ++j)
        push("timeInt" + std::to_string(m.time_values[j]), m.intercepts[j], j);
    for (std::size_t j = 0; j < m.coefficients.size(); ++j)
        push(m.coef_names[j], m.coefficients[j], n_time + static_cast<int>(j));
    return rows;
}

// ---------------------------------------------------------------------------
// JSON serialization

inline nlohmann::json schema_to_json(const CovariateSchema& schema) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& cov : schema) {
        nlohmann::json j;
        j["name"] = cov.name;
        j["kind"] = cov.kind == CovKind::numeric ? "numeric"
                    : cov.kind == CovKind::binary_factor ? "binary-factor"
                                                         : "multi-factor";
        j["levels"] = cov.levels;
        arr.push_back(j);
    }
    return arr;
}

inline CovariateSchema schema_from_json(const nlohmann::json& arr) {
    CovariateSchema schema;
    for (const auto& j : arr) {
        Covariate cov;
        cov.name = j.at("name").get<std::string>();
        std::string kind = j.at("kind").get<std::string>();
        cov.kind = kind == "numeric" ? CovKind::numeric
                   : kind == "binary-factor" ? CovKind::binary_factor
                                             : CovKind::multi_factor;
        cov.levels = j.at("levels").get<std::vector<std::string>>();
        schema.push_back(cov);
    }
    return schema;
}

inline nlohmann::json to_json(const ParametricHazardModel& m) {
    nlohmann::json j;
    j["type"] = "parametric";
    j["link"] = link_name(m.link);
    j["horizon_k"] = m.horizon_k;
    j["time_values"] = m.time_values;
    j["intercepts"] = m.intercepts;
    nlohmann::json coefs = nlohmann::json::object();
    for (std::size_t i = 0; i < m.coef_names.size(); ++i) coefs[m.coef_names[i]] = m.coefficients[i];
    j["coefficients"] = coefs;
    std::vector<double> cov;
    cov.reserve(static_cast<std::size_t>(m.covariance.size()));
    for (Eigen::Index r = 0; r < m.covariance.rows(); ++r)
        for (Eigen::Index c = 0; c < m.covariance.cols(); ++c) cov.push_back(m.covariance(r, c));
    j["covariance"] = cov;
    j["loglik"] = m.loglik;
    j["converged"] = m.converged;
    j["schema"] = schema_to_json(m.schema);
    return j;
}

inline ParametricHazardModel parametric_from_json(const nlohmann::json& j) {
    ParametricHazardModel m;
    m.link = link_from_name(j.at("link").get<std::string>());
    m.horizon_k = j.at("horizon_k").get<int>();
    m.time_values = j.at("time_values").get<std::vector<int>>();
    m.intercepts = j.at("intercepts").get<std::vector<double>>();
    m.schema = schema_from_json(j.at("schema"));
    for (const auto& nm : encoded_names(m.schema)) {
        m.coef_names.push_back(nm);
        m.coefficients.push_back(j.at("coefficients").at(nm).get<double>());
    }
    auto cov = j.at("covariance").get<std::vector<double>>();
    int p = m.n_params();
    m.covariance = Eigen::MatrixXd::Zero(p, p);
    if (cov.size() == static_cast<std::size_t>(p) * p) {
        for (int r = 0; r < p; ++r)
            for (int c = 0; c < p; ++c) m.covariance(r, c) = cov[static_cast<std::size_t>(r) * p + c];
    }
    m.loglik = j.at("loglik").get<double>();
    m.converged = j.at("converged").get<bool>();
    return m;
}

} // namespace dhaz

#endif
