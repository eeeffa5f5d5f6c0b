#ifndef DHAZ_ADDITIVE_HPP
#define DHAZ_ADDITIVE_HPP

// Additive discrete hazard models: a P-spline baseline over time, optional
// P-spline covariate smooths and linear terms, fitted by penalized IRLS with
// GCV-selected smoothing parameters.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhaz/bspline.hpp"
#include "dhaz/design.hpp"
#include "dhaz/glm.hpp"
#include "dhaz/irls.hpp"

namespace dhaz {

inline constexpr const char* kTimeVariable = "timeInt";

struct SmoothTermFit {
    SplineBasisSpec spec;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd column_means; // centering offsets (empty when uncentered)
    double delta = 0.0;
    double edf = 0.0;
};

struct AdditiveHazardModel {
    SmoothTermFit baseline;             // smooth over timeInt, absorbs the intercept
    std::vector<SmoothTermFit> smooths; // centered covariate smooths
    std::vector<std::string> linear_terms; // covariate names, in term order
    std::vector<std::string> linear_names; // encoded column names
    Eigen::VectorXd linear_coefficients;
    Link link = Link::logit;
    CovariateSchema schema;
    int horizon_k = 0;
    double loglik = 0.0;
    double penalized_loglik = 0.0;
    double gcv = 0.0;
    int iterations = 0;
    bool converged = false;
    Eigen::MatrixXd covariance; // penalized, over [baseline | smooths | linear]
    std::vector<std::string> warnings;

    int n_smooth_terms() const { return 1 + static_cast<int>(smooths.size()); }
};

struct GcvOptions {
    double log10_lo = -6.0;
    double log10_hi = 8.0;
    double tol = 1e-6;   // stop cycling when the GCV change falls below this
    double xtol = 1e-3;  // golden-section interval width on the log10 scale
    int max_cycles = 20;
};

namespace detail {

// Assembled penalized design shared by smoothing selection and the final fit.
struct AdditiveWork {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<SplineBasisSpec> specs;      // [0] is the time smooth
    std::vector<Eigen::VectorXd> col_means;  // per smooth, empty if uncentered
    std::vector<int> offset;                 // per smooth block
    std::vector<Eigen::MatrixXd> K;          // per smooth penalty
    int linear_offset = 0;
    int linear_size = 0;
    std::vector<std::string> linear_names;
    std::vector<std::string> warnings;

    int n_cols() const { return static_cast<int>(X.cols()); }

    Eigen::MatrixXd assemble_penalty(const std::vector<double>& deltas) const {
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n_cols(), n_cols());
        for (std::size_t j = 0; j < specs.size(); ++j) {
            int off = offset[j], nb = specs[j].n_basis;
            S.block(off, off, nb, nb) = 2.0 * deltas[j] * K[j];
        }
        return S;
    }
};

inline Eigen::VectorXd smooth_variable_values(const AugmentedDataset& aug,
                                              const std::string& variable) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(aug.n_rows()));
    if (variable == kTimeVariable) {
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x[i] = aug.rows()[static_cast<std::size_t>(i)].time_interval;
        return x;
    }
    int col = schema_column(aug.schema(), variable);
    if (col < 0) throw std::invalid_argument("unknown smooth variable: " + variable);
    if (aug.schema()[static_cast<std::size_t>(col)].is_factor())
        throw std::invalid_argument("smooth terms require a numeric variable: " + variable);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = aug.rows()[static_cast<std::size_t>(i)].covariates[static_cast<std::size_t>(col)];
    return x;
}

inline AdditiveWork build_additive_work(const AugmentedDataset& aug,
                                        std::vector<SplineBasisSpec> smooths,
                                        const std::vector<std::string>& linear_terms) {
    if (aug.n_rows() == 0) throw std::invalid_argument("empty augmented dataset");
    if (smooths.empty() || smooths[0].variable != kTimeVariable)
        throw std::invalid_argument("the first smooth term must be the time smooth (" +
                                    std::string(kTimeVariable) + ")");

    AdditiveWork w;
    const auto n = static_cast<Eigen::Index>(aug.n_rows());

    std::vector<Eigen::MatrixXd> blocks;
    for (std::size_t j = 0; j < smooths.size(); ++j) {
        SplineBasisSpec spec = smooths[j];
        Eigen::VectorXd x = smooth_variable_values(aug, spec.variable);
        std::set<double> distinct(x.data(), x.data() + x.size());
        if (static_cast<int>(distinct.size()) < spec.n_basis)
            throw std::invalid_argument("smooth variable " + spec.variable + " has " +
                                        std::to_string(distinct.size()) +
                                        " distinct values, need >= n_basis");
        if (spec.knots.empty())
            spec = uniform_basis(spec.variable, x.minCoeff(), x.maxCoeff(), spec.n_basis,
                                 spec.degree, spec.penalty_order, j > 0);
        spec.centered = j > 0; // covariate smooths are centered, the baseline is not
        Eigen::MatrixXd B = bspline_basis(spec, x);
        Eigen::VectorXd means;
        if (spec.centered) {
            means = B.colwise().mean();
            B.rowwise() -= means.transpose();
        }
        w.specs.push_back(spec);
        w.col_means.push_back(means);
        w.K.push_back(difference_penalty(spec.n_basis, spec.penalty_order));
        blocks.push_back(std::move(B));
    }

    // linear covariate columns, in the given term order
    CovariateSchema linear_schema;
    std::vector<int> linear_cols;
    for (const auto& name : linear_terms) {
        int col = schema_column(aug.schema(), name);
        if (col < 0) throw std::invalid_argument("unknown covariate: " + name);
        linear_schema.push_back(aug.schema()[static_cast<std::size_t>(col)]);
        linear_cols.push_back(col);
    }
    const int n_lin = encoded_width(linear_schema);
    Eigen::MatrixXd L(n, n_lin);
    if (n_lin > 0) {
        std::vector<double> buf(static_cast<std::size_t>(n_lin));
        std::vector<double> vals(linear_schema.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& row = aug.rows()[static_cast<std::size_t>(i)];
            for (std::size_t c = 0; c < linear_cols.size(); ++c)
                vals[c] = row.covariates[static_cast<std::size_t>(linear_cols[c])];
            encode_covariates(linear_schema, vals, buf.data());
            for (int jc = 0; jc < n_lin; ++jc) L(i, jc) = buf[static_cast<std::size_t>(jc)];
        }
    }
    w.linear_names = encoded_names(linear_schema);

    int p = 0;
    for (const auto& b : blocks) p += static_cast<int>(b.cols());
    w.linear_offset = p;
    w.linear_size = n_lin;
    p += n_lin;

    w.X.resize(n, p);
    int off = 0;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        w.offset.push_back(off);
        w.X.middleCols(off, blocks[j].cols()) = blocks[j];
        off += static_cast<int>(blocks[j].cols());
    }
    if (n_lin > 0) w.X.middleCols(off, n_lin) = L;

    w.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) w.y[i] = aug.rows()[static_cast<std::size_t>(i)].response;
    return w;
}

struct PenalizedFit {
    IrlsResult irls;
    std::vector<double> edf; // per smooth block
    double edf_total = 0.0;
    double gcv = 0.0;
};

inline PenalizedFit fit_penalized(const AdditiveWork& w, const std::vector<double>& deltas,
                                  const IrlsOptions& opts, const Eigen::VectorXd* start) {
    Eigen::MatrixXd S = w.assemble_penalty(deltas);
    PenalizedFit fit;
    fit.irls = fit_irls(w.X, w.y, &S, opts, start);

    // influence trace via F = (X'WX + S)^{-1} X'WX at the converged weights
    const Eigen::Index n = w.X.rows();
    Eigen::VectorXd wt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double mu = fit.irls.fitted[i];
        wt[i] = std::max(mu * (1.0 - mu), 1e-12);
    }
    Eigen::MatrixXd XtWX = w.X.transpose() * wt.asDiagonal() * w.X;
    Eigen::MatrixXd F = (XtWX + S).ldlt().solve(XtWX);
    fit.edf_total = F.trace();
    for (std::size_t j = 0; j < w.specs.size(); ++j) {
        double e = 0.0;
        for (int c = 0; c < w.specs[j].n_basis; ++c) e += F(w.offset[j] + c, w.offset[j] + c);
        fit.edf.push_back(e);
    }

    double dev = -2.0 * fit.irls.loglik;
    double denom = static_cast<double>(n) - fit.edf_total;
    fit.gcv = static_cast<double>(n) * dev / (denom * denom);
    return fit;
}

// Golden-section minimization; f is evaluated at log10-scale points.
template <typename F>
double golden_section(F&& f, double lo, double hi, double xtol, bool* flat = nullptr) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    double fmin = std::min(f1, f2), fmax = std::max(f1, f2);
    while (b - a > xtol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
        fmin = std::min(fmin, std::min(f1, f2));
        fmax = std::max(fmax, std::max(f1, f2));
    }
    if (flat) *flat = (fmax - fmin) <= 1e-9 * (1.0 + std::abs(fmin));
    return (a + b) / 2.0;
}

} // namespace detail

// GCV-driven smoothing selection: cyclic golden-section search per term on
// the log10 scale. Returns one delta per smooth term (time smooth first).
inline std::vector<double> select_smoothing(const AugmentedDataset& aug,
                                            const std::vector<SplineBasisSpec>& smooths,
                                            const std::vector<std::string>& linear_terms,
                                            const IrlsOptions& irls_opts = IrlsOptions{},
                                            const GcvOptions& gcv_opts = GcvOptions{},
                                            std::vector<std::string>* warnings = nullptr) {
    detail::AdditiveWork w = detail::build_additive_work(aug, smooths, linear_terms);
    const std::size_t n_terms = w.specs.size();
    std::vector<double> log_delta(n_terms, 0.0);
    Eigen::VectorXd warm;
    bool have_warm = false;

    auto gcv_at = [&](const std::vector<double>& ld) {
        std::vector<double> deltas(n_terms);
        for (std::size_t j = 0; j < n_terms; ++j) deltas[j] = std::pow(10.0, ld[j]);
        detail::PenalizedFit fit =
            detail::fit_penalized(w, deltas, irls_opts, have_warm ? &warm : nullptr);
        warm = fit.irls.beta;
        have_warm = true;
        return fit.gcv;
    };

    double last = gcv_at(log_delta);
    for (int cycle = 0; cycle < gcv_opts.max_cycles; ++cycle) {
        for (std::size_t j = 0; j < n_terms; ++j) {
            bool flat = false;
            auto profile = [&](double ldj) {
                std::vector<double> ld = log_delta;
                ld[j] = ldj;
                return gcv_at(ld);
            };
            double best = detail::golden_section(profile, gcv_opts.log10_lo, gcv_opts.log10_hi,
                                                 gcv_opts.xtol, &flat);
            if (flat) {
                best = gcv_opts.log10_lo;
                if (warnings)
                    warnings->push_back("flat GCV profile for " + w.specs[j].variable +
                                        ", using smallest delta");
            } else if (best - gcv_opts.log10_lo < 0.05 || gcv_opts.log10_hi - best < 0.05) {
                if (warnings)
                    warnings->push_back("GCV optimum at grid boundary for " + w.specs[j].variable);
            }
            log_delta[j] = best;
        }
        double cur = gcv_at(log_delta);
        if (std::abs(last - cur) < gcv_opts.tol * (1.0 + std::abs(cur))) break;
        last = cur;
    }

    std::vector<double> deltas(n_terms);
    for (std::size_t j = 0; j < n_terms; ++j) deltas[j] = std::pow(10.0, log_delta[j]);
    return deltas;
}

// Fit the additive model. `smooths` must start with the time smooth
// (variable "timeInt", numeric time values); pass `fixed_deltas` to bypass
// the GCV search.
inline AdditiveHazardModel fit_additive(const AugmentedDataset& aug,
                                        const std::vector<SplineBasisSpec>& smooths,
                                        const std::vector<std::string>& linear_terms,
                                        const std::vector<double>* fixed_deltas = nullptr,
                                        const IrlsOptions& irls_opts = IrlsOptions{},
                                        const GcvOptions& gcv_opts = GcvOptions{}) {
    std::vector<std::string> warnings;
    std::vector<double> deltas;
    if (fixed_deltas) {
        if (fixed_deltas->size() != smooths.size())
            throw std::invalid_argument("need one delta per smooth term");
        deltas = *fixed_deltas;
    } else {
        deltas = select_smoothing(aug, smooths, linear_terms, irls_opts, gcv_opts, &warnings);
    }

    detail::AdditiveWork w = detail::build_additive_work(aug, smooths, linear_terms);
    detail::PenalizedFit fit = detail::fit_penalized(w, deltas, irls_opts, nullptr);

    AdditiveHazardModel m;
    m.link = irls_opts.link;
    m.schema = aug.schema();
    m.horizon_k = aug.horizon_k();
    for (std::size_t j = 0; j < w.specs.size(); ++j) {
        SmoothTermFit term;
        term.spec = w.specs[j];
        term.coefficients = fit.irls.beta.segment(w.offset[j], w.specs[j].n_basis);
        term.column_means = w.col_means[j];
        term.delta = deltas[j];
        term.edf = fit.edf[j];
        if (j == 0)
            m.baseline = std::move(term);
        else
            m.smooths.push_back(std::move(term));
    }
    m.linear_terms = linear_terms;
    m.linear_names = w.linear_names;
    m.linear_coefficients = fit.irls.beta.segment(w.linear_offset, w.linear_size);
    m.loglik = fit.irls.loglik;
    m.penalized_loglik = fit.irls.penalized_loglik;
    m.gcv = fit.gcv;
    m.iterations = fit.irls.iterations;
    m.converged = fit.irls.converged;
    m.covariance = fit.irls.covariance;
    for (const auto& s : fit.irls.warnings) warnings.push_back(s);
    m.warnings = std::move(warnings);
    if (!m.converged) m.warnings.push_back("penalized IRLS did not converge");
    return m;
}

// ---------------------------------------------------------------------------
// Evaluation

struct SmoothCurve {
    Eigen::VectorXd grid;
    Eigen::VectorXd fit;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

namespace detail {

inline const SmoothTermFit& find_term(const AdditiveHazardModel& m, const std::string& name) {
    if (name == m.baseline.spec.variable) return m.baseline;
    for (const auto& t : m.smooths)
        if (t.spec.variable == name) return t;
    throw std::invalid_argument("no smooth term for " + name);
}

inline int term_offset(const AdditiveHazardModel& m, const SmoothTermFit& term) {
    int off = 0;
    if (&term == &m.baseline) return off;
    off += m.baseline.spec.n_basis;
    for (const auto& t : m.smooths) {
        if (&t == &term) return off;
        off += t.spec.n_basis;
    }
    return off;
}

} // namespace detail

// Evaluate one smooth term on a grid with pointwise 95% bands from the
// penalized covariance. Centered terms are returned centered.
inline SmoothCurve evaluate_smooth(const AdditiveHazardModel& m, const std::string& term_name,
                                   const Eigen::VectorXd& grid, bool clamp = false) {
    const SmoothTermFit& term = detail::find_term(m, term_name);
    Eigen::MatrixXd B = bspline_basis(term.spec, grid, clamp);
    if (term.column_means.size() > 0) B.rowwise() -= term.column_means.transpose();

    SmoothCurve curve;
    curve.grid = grid;
    curve.fit = B * term.coefficients;
    curve.lower.resize(grid.size());
    curve.upper.resize(grid.size());
    const int off = detail::term_offset(m, term);
    const Eigen::MatrixXd V = m.covariance.block(off, off, term.spec.n_basis, term.spec.n_basis);
    const double z = 1.959963984540054;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        double var = B.row(i) * V * B.row(i).transpose();
        double half = z * std::sqrt(std::max(var, 0.0));
        curve.lower[i] = curve.fit[i] - half;
        curve.upper[i] = curve.fit[i] + half;
    }
    return curve;
}

// Linear predictor for one subject at time t; basis evaluation clamps to the
// training span.
inline double linear_predictor(const AdditiveHazardModel& m, double t,
                               const std::vector<double>& covariates) {
    Eigen::VectorXd one(1);
    one[0] = t;
    double eta = (bspline_basis(m.baseline.spec, one, true) * m.baseline.coefficients)(0);
    for (const auto& term : m.smooths) {
        int col = schema_column(m.schema, term.spec.variable);
        one[0] = covariates[static_cast<std::size_t>(col)];
        Eigen::MatrixXd B = bspline_basis(term.spec, one, true);
        if (term.column_means.size() > 0) B.rowwise() -= term.column_means.transpose();
        eta += (B * term.coefficients)(0);
    }
    if (m.linear_coefficients.size() > 0) {
        CovariateSchema lin_schema;
        std::vector<double> vals;
        for (const auto& name : m.linear_terms) {
            int col = schema_column(m.schema, name);
            lin_schema.push_back(m.schema[static_cast<std::size_t>(col)]);
            vals.push_back(covariates[static_cast<std::size_t>(col)]);
        }
        std::vector<double> enc(static_cast<std::size_t>(encoded_width(lin_schema)));
        encode_covariates(lin_schema, vals, enc.data());
        for (std::size_t j = 0; j < enc.size(); ++j)
            eta += enc[j] * m.linear_coefficients[static_cast<Eigen::Index>(j)];
    }
    return eta;
}

inline double predict_hazard(const AdditiveHazardModel& m, int t,
                             const std::vector<double>& covariates) {
    if (t < 1) throw std::invalid_argument("time must be >= 1");
    if (t >= m.horizon_k) return 1.0;
    return link_inverse(m.link, linear_predictor(m, t, covariates));
}

// ---------------------------------------------------------------------------
// JSON serialization

namespace detail {

inline nlohmann::json smooth_term_to_json(const SmoothTermFit& t) {
    nlohmann::json j;
    j["variable"] = t.spec.variable;
    j["n_basis"] = t.spec.n_basis;
    j["degree"] = t.spec.degree;
    j["penalty_order"] = t.spec.penalty_order;
    j["knots"] = t.spec.knots;
    j["centered"] = t.spec.centered;
    j["coefficients"] = std::vector<double>(t.coefficients.data(),
                                            t.coefficients.data() + t.coefficients.size());
    j["column_means"] = std::vector<double>(t.column_means.data(),
                                            t.column_means.data() + t.column_means.size());
    j["delta"] = t.delta;
    j["edf"] = t.edf;
    return j;
}

inline SmoothTermFit smooth_term_from_json(const nlohmann::json& j) {
    SmoothTermFit t;
    t.spec.variable = j.at("variable").get<std::string>();
    t.spec.n_basis = j.at("n_basis").get<int>();
    t.spec.degree = j.at("degree").get<int>();
    t.spec.penalty_order = j.at("penalty_order").get<int>();
    t.spec.knots = j.at("knots").get<std::vector<double>>();
    t.spec.centered = j.at("centered").get<bool>();
    auto coefs = j.at("coefficients").get<std::vector<double>>();
    t.coefficients = Eigen::Map<Eigen::VectorXd>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
    auto means = j.at("column_means").get<std::vector<double>>();
    t.column_means = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    t.delta = j.at("delta").get<double>();
    t.edf = j.at("edf").get<double>();
    return t;
}

} // namespace detail

inline nlohmann::json to_json(const AdditiveHazardModel& m) {
    nlohmann::json j;
    j["type"] = "additive";
    j["link"] = link_name(m.link);
    j["horizon_k"] = m.horizon_k;
    j["baseline"] = detail::smooth_term_to_json(m.baseline);
    nlohmann::json smooths = nlohmann::json::array();
    for (const auto& t : m.smooths) smooths.push_back(detail::smooth_term_to_json(t));
    j["smooths"] = smooths;
    nlohmann::json coefs = nlohmann::json::object();
    for (std::size_t i = 0; i < m.linear_names.size(); ++i)
        coefs[m.linear_names[i]] = m.linear_coefficients[static_cast<Eigen::Index>(i)];
    j["coefficients"] = coefs;
    j["linear_terms"] = m.linear_terms;
    j["linear_names"] = m.linear_names;
    std::vector<double> cov;
    cov.reserve(static_cast<std::size_t>(m.covariance.size()));
    for (Eigen::Index r = 0; r < m.covariance.rows(); ++r)
        for (Eigen::Index c = 0; c < m.covariance.cols(); ++c) cov.push_back(m.covariance(r, c));
    j["covariance"] = cov;
    j["loglik"] = m.loglik;
    j["penalized_loglik"] = m.penalized_loglik;
    j["gcv"] = m.gcv;
    j["converged"] = m.converged;
    j["schema"] = schema_to_json(m.schema);
    return j;
}

inline AdditiveHazardModel additive_from_json(const nlohmann::json& j) {
    AdditiveHazardModel m;
    m.link = link_from_name(j.at("link").get<std::string>());
    m.horizon_k = j.at("horizon_k").get<int>();
    m.baseline = detail::smooth_term_from_json(j.at("baseline"));
    for (const auto& t : j.at("smooths")) m.smooths.push_back(detail::smooth_term_from_json(t));
    m.linear_terms = j.at("linear_terms").get<std::vector<std::string>>();
    m.linear_names = j.at("linear_names").get<std::vector<std::string>>();
    m.linear_coefficients.resize(static_cast<Eigen::Index>(m.linear_names.size()));
    for (std::size_t i = 0; i < m.linear_names.size(); ++i)
        m.linear_coefficients[static_cast<Eigen::Index>(i)] =
            j.at("coefficients").at(m.linear_names[i]).get<double>();
    m.schema = schema_from_json(j.at("schema"));
    int p = m.baseline.spec.n_basis;
    for (const auto& t : m.smooths) p += t.spec.n_basis;
    p += static_cast<int>(m.linear_names.size());
    auto cov = j.at("covariance").get<std::vector<double>>();
    m.covariance = Eigen::MatrixXd::Zero(p, p);
    if (cov.size() == static_cast<std::size_t>(p) * p)
        for (int r = 0; r < p; ++r)
            for (int c = 0; c < p; ++c) m.covariance(r, c) = cov[static_cast<std::size_t>(r) * p + c];
    m.loglik = j.at("loglik").get<double>();
    m.penalized_loglik = j.at("penalized_loglik").get<double>();
    m.gcv = j.at("gcv").get<double>();
    m.converged = j.at("converged").get<bool>();
    return m;
}

} // namespace dhaz

#endif
