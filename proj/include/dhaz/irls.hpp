#ifndef DHAZ_IRLS_HPP
#define DHAZ_IRLS_HPP

// Fisher-scoring / IRLS for binomial regression with an optional quadratic
// penalty. The penalized objective is l(beta) - 0.5 * beta' S beta, so the
// penalized score is X'(y - mu) - S beta for the canonical logit link.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace dhaz {

enum class Link { logit, cloglog };

inline double link_inverse(Link link, double eta) {
    switch (link) {
    case Link::logit:
        return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
    case Link::cloglog:
        return -std::expm1(-std::exp(eta));
    }
    return 0.0;
}

inline std::string link_name(Link link) { return link == Link::logit ? "logit" : "cloglog"; }

inline Link link_from_name(const std::string& s) {
    if (s == "logit") return Link::logit;
    if (s == "cloglog") return Link::cloglog;
    throw std::invalid_argument("unknown link: " + s);
}

struct IrlsOptions {
    int max_iter = 50;
    double tol = 1e-8;
    int max_halvings = 10;
    Link link = Link::logit;
};

struct IrlsResult {
    Eigen::VectorXd beta;
    Eigen::MatrixXd covariance; // inverse (penalized) Fisher information
    Eigen::VectorXd fitted;     // mu at the final iterate
    double loglik = 0.0;
    double penalized_loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<int> aliased; // dropped column indices (coefficients pinned to 0)
    std::vector<std::string> warnings;
};

namespace detail {

// Binomial log-likelihood for 0/1 responses, guarded against saturation.
inline double binom_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double m = std::min(std::max(mu[i], 1e-12), 1.0 - 1e-12);
        ll += y[i] == 1.0 ? std::log(m) : std::log1p(-m);
    }
    return ll;
}

inline void link_moments(Link link, double eta, double& mu, double& mu_eta) {
    mu = link_inverse(link, eta);
    if (link == Link::logit) {
        mu_eta = mu * (1.0 - mu);
    } else {
        double ee = std::exp(eta);
        mu_eta = ee * std::exp(-ee);
    }
}

// Greedy rank screen over the Gram matrix in column order: a column whose
// conditional variance after projecting on the kept columns vanishes is
// aliased. Later duplicates are the ones dropped.
inline std::vector<int> aliased_columns(const Eigen::MatrixXd& X) {
    const int p = static_cast<int>(X.cols());
    Eigen::MatrixXd G = X.transpose() * X;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(p, p);
    std::vector<int> kept;
    std::vector<int> dropped;
    for (int j = 0; j < p; ++j) {
        double d = G(j, j);
        Eigen::VectorXd lrow(kept.size());
        for (std::size_t m = 0; m < kept.size(); ++m) {
            double s = G(j, kept[m]);
            for (std::size_t q = 0; q < m; ++q) s -= lrow[q] * L(kept[m], q);
            lrow[m] = s / L(kept[m], m);
            d -= lrow[m] * lrow[m];
        }
        if (d <= 1e-10 * std::max(G(j, j), 1.0)) {
            dropped.push_back(j);
        } else {
            for (std::size_t m = 0; m < kept.size(); ++m) L(j, m) = lrow[m];
            L(j, kept.size()) = std::sqrt(d);
            kept.push_back(j);
        }
    }
    return dropped;
}

} // namespace detail

// Fit by Fisher scoring with step halving. `penalty`, when given, is the
// quadratic-form matrix S above (same dimension as the full design).
// Aliased columns of an unpenalized design are detected up front and pinned
// to zero. `start` optionally warm-starts the iteration.
inline IrlsResult fit_irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd* penalty = nullptr,
                           const IrlsOptions& opts = IrlsOptions{},
                           const Eigen::VectorXd* start = nullptr) {
    const Eigen::Index n = X.rows();
    const int p = static_cast<int>(X.cols());
    if (y.size() != n) throw std::invalid_argument("design/response size mismatch");

    IrlsResult res;
    std::vector<int> keep;
    if (!penalty) {
        res.aliased = detail::aliased_columns(X);
        if (!res.aliased.empty()) {
            std::string msg = "aliased columns dropped:";
            for (int j : res.aliased) msg += " " + std::to_string(j);
            res.warnings.push_back(msg);
        }
    }
    {
        std::vector<bool> drop(p, false);
        for (int j : res.aliased) drop[j] = true;
        for (int j = 0; j < p; ++j)
            if (!drop[j]) keep.push_back(j);
    }
    const int pk = static_cast<int>(keep.size());
    Eigen::MatrixXd Xk(n, pk);
    for (int m = 0; m < pk; ++m) Xk.col(m) = X.col(keep[m]);
    Eigen::MatrixXd Sk;
    if (penalty) {
        Sk.resize(pk, pk);
        for (int a = 0; a < pk; ++a)
            for (int b = 0; b < pk; ++b) Sk(a, b) = (*penalty)(keep[a], keep[b]);
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(pk);
    if (start && start->size() == p) {
        for (int m = 0; m < pk; ++m) beta[m] = (*start)[keep[m]];
    }

    // per-column score scale: dummy columns converge to an absolute tol,
    // wide columns to a proportional one
    Eigen::VectorXd colscale(pk);
    for (int m = 0; m < pk; ++m)
        colscale[m] = std::max(1.0, Xk.col(m).cwiseAbs().maxCoeff());

    auto penalized = [&](const Eigen::VectorXd& b, double ll) {
        return penalty ? ll - 0.5 * b.dot(Sk * b) : ll;
    };

    Eigen::VectorXd eta = Xk * beta;
    Eigen::VectorXd mu(n), mu_eta(n), w(n);
    auto refresh = [&](const Eigen::VectorXd& e) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double m, me;
            detail::link_moments(opts.link, e[i], m, me);
            mu[i] = m;
            mu_eta[i] = std::max(me, 1e-12);
            double v = std::max(m * (1.0 - m), 1e-12);
            w[i] = mu_eta[i] * mu_eta[i] / v;
        }
    };
    refresh(eta);
    double ll = detail::binom_loglik(y, mu);
    double pll = penalized(beta, ll);

    Eigen::MatrixXd info(pk, pk);
    bool converged = false;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        // score of the penalized objective
        Eigen::VectorXd resid(n);
        for (Eigen::Index i = 0; i < n; ++i)
            resid[i] = (y[i] - mu[i]) / std::max(mu[i] * (1.0 - mu[i]), 1e-12) * mu_eta[i];
        Eigen::VectorXd score = Xk.transpose() * resid;
        if (penalty) score -= Sk * beta;

        info = Xk.transpose() * w.asDiagonal() * Xk;
        if (penalty) info += Sk;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success) {
            res.warnings.push_back("singular information matrix");
            break;
        }
        Eigen::VectorXd step = ldlt.solve(score);

        double scale = 1.0;
        Eigen::VectorXd beta_new;
        double ll_new = 0.0, pll_new = -std::numeric_limits<double>::infinity();
        for (int h = 0; h <= opts.max_halvings; ++h) {
            beta_new = beta + scale * step;
            Eigen::VectorXd eta_new = Xk * beta_new;
            Eigen::VectorXd mu_new(n);
            for (Eigen::Index i = 0; i < n; ++i) mu_new[i] = link_inverse(opts.link, eta_new[i]);
            ll_new = detail::binom_loglik(y, mu_new);
            pll_new = penalized(beta_new, ll_new);
            if (pll_new >= pll || h == opts.max_halvings) break;
            scale *= 0.5;
        }

        double rel_change = std::abs(pll_new - pll) / (std::abs(pll_new) + 0.1);
        beta = beta_new;
        eta = Xk * beta;
        refresh(eta);
        ll = detail::binom_loglik(y, mu);
        pll = penalized(beta, ll);

        // convergence: stationary score and a settled objective
        Eigen::VectorXd resid2(n);
        for (Eigen::Index i = 0; i < n; ++i)
            resid2[i] = (y[i] - mu[i]) / std::max(mu[i] * (1.0 - mu[i]), 1e-12) * mu_eta[i];
        Eigen::VectorXd score2 = Xk.transpose() * resid2;
        if (penalty) score2 -= Sk * beta;
        if ((score2.cwiseAbs().array() <= opts.tol * colscale.array()).all() &&
            rel_change < opts.tol) {
            converged = true;
            ++iter;
            break;
        }
    }

    info = Xk.transpose() * w.asDiagonal() * Xk;
    if (penalty) info += Sk;
    Eigen::MatrixXd cov_k = info.ldlt().solve(Eigen::MatrixXd::Identity(pk, pk));

    res.beta = Eigen::VectorXd::Zero(p);
    res.covariance = Eigen::MatrixXd::Zero(p, p);
    for (int a = 0; a < pk; ++a) {
        res.beta[keep[a]] = beta[a];
        for (int b = 0; b < pk; ++b) res.covariance(keep[a], keep[b]) = cov_k(a, b);
    }
    res.fitted = mu;
    res.loglik = ll;
    res.penalized_loglik = pll;
    res.iterations = iter;
    res.converged = converged;
    for (int a = 0; a < pk; ++a) {
        if (std::abs(beta[a]) > 15.0) {
            res.warnings.push_back("possible separation: |coefficient| > 15 in column " +
                                   std::to_string(keep[a]));
            break;
        }
    }
    return res;
}

} // namespace dhaz

#endif
