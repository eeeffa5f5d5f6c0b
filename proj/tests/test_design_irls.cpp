#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dhaz/design.hpp"
#include "dhaz/irls.hpp"
#include "support/oracles.hpp"

using namespace dhaz;
using Catch::Approx;

namespace {

Dataset toy3() {
    CovariateSchema schema{{"x", CovKind::numeric, {}}};
    std::vector<SurvivalRecord> recs{{1, 2, 1, {1.0}}, {2, 1, 0, {0.0}}, {3, 3, 1, {-1.0}}};
    return Dataset(std::move(recs), 3, schema);
}

double binom_ll(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<double>& b) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double eta = 0.0;
        for (Eigen::Index j = 0; j < X.cols(); ++j) eta += X(i, j) * b[static_cast<std::size_t>(j)];
        double mu = 1.0 / (1.0 + std::exp(-eta));
        mu = std::min(std::max(mu, 1e-12), 1.0 - 1e-12);
        ll += y[i] == 1.0 ? std::log(mu) : std::log(1.0 - mu);
    }
    return ll;
}

// Bernoulli draws on a random design; coefficients kept small to avoid
// separation on tiny samples.
struct Instance {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

Instance random_instance(std::mt19937_64& rng, int n, int p) {
    auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Instance in;
    in.X = Eigen::MatrixXd(n, p);
    Eigen::VectorXd beta(p);
    for (int j = 0; j < p; ++j) beta[j] = 1.5 * (u01() - 0.5);
    for (int i = 0; i < n; ++i) {
        in.X(i, 0) = 1.0;
        for (int j = 1; j < p; ++j) in.X(i, j) = 2.0 * u01() - 1.0;
    }
    in.y = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) {
        double eta = in.X.row(i) * beta;
        in.y[i] = u01() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    }
    return in;
}

} // namespace

TEST_CASE("design matrix for the toy data") {
    AugmentedDataset aug = augment(recode_last_period(toy3()));
    DesignMatrix d = build_design(aug, TimeEncoding::dummies);
    REQUIRE(d.X.rows() == 5);
    REQUIRE(d.X.cols() == 3); // two time dummies + x
    REQUIRE(d.time_values == std::vector<int>{1, 2});
    REQUIRE(d.column_names == std::vector<std::string>{"timeInt1", "timeInt2", "x"});
    // each row carries exactly one time indicator
    for (Eigen::Index i = 0; i < d.X.rows(); ++i)
        REQUIRE(d.X(i, 0) + d.X(i, 1) == 1.0);

    DesignMatrix plain = build_design(aug, TimeEncoding::none);
    REQUIRE(plain.X.cols() == 1);
    REQUIRE(plain.time_values.empty());
}

TEST_CASE("factor covariates are dummy coded against the first level") {
    CovariateSchema schema{{"grp", CovKind::multi_factor, {"a", "b", "c"}},
                           {"ui", CovKind::binary_factor, {"no", "yes"}}};
    std::vector<SurvivalRecord> recs{
        {1, 1, 1, {0.0, 0.0}}, {2, 2, 0, {1.0, 1.0}}, {3, 1, 1, {2.0, 0.0}}};
    AugmentedDataset aug = augment(Dataset(std::move(recs), 2, schema));
    DesignMatrix d = build_design(aug, TimeEncoding::dummies);
    REQUIRE(d.column_names ==
            std::vector<std::string>{"timeInt1", "timeInt2", "grpb", "grpc", "uiyes"});
    REQUIRE(d.X.rows() == 4); // 1 + 2 + 1 person-periods
    // subject 2 (rows 1,2) is level b / yes
    REQUIRE(d.X(1, 2) == 1.0);
    REQUIRE(d.X(1, 3) == 0.0);
    REQUIRE(d.X(1, 4) == 1.0);
    // subject 3 (row 3) is level c / no
    REQUIRE(d.X(3, 2) == 0.0);
    REQUIRE(d.X(3, 3) == 1.0);
    REQUIRE(d.X(3, 4) == 0.0);
}

TEST_CASE("constant covariate columns warn but stay") {
    CovariateSchema schema{{"c", CovKind::numeric, {}}};
    std::vector<SurvivalRecord> recs{{1, 1, 1, {2.5}}, {2, 2, 0, {2.5}}};
    AugmentedDataset aug = augment(Dataset(std::move(recs), 2, schema));
    DesignMatrix d = build_design(aug, TimeEncoding::dummies);
    REQUIRE(d.X.cols() == 3);
    REQUIRE_FALSE(d.warnings.empty());
}

TEST_CASE("irls matches direct likelihood maximization on a small dataset") {
    // events and non-events at every time level, so the optimum is interior
    CovariateSchema schema{{"x", CovKind::numeric, {}}};
    std::vector<SurvivalRecord> recs{{1, 1, 1, {1.0}},
                                     {2, 1, 0, {0.0}},
                                     {3, 2, 1, {-1.0}},
                                     {4, 2, 0, {0.5}},
                                     {5, 1, 1, {-0.5}}};
    AugmentedDataset aug = augment(Dataset(std::move(recs), 3, schema));
    DesignMatrix d = build_design(aug, TimeEncoding::dummies);
    IrlsResult fit = fit_irls(d.X, d.y);
    REQUIRE(fit.converged);

    auto obj = [&](const std::vector<double>& b) { return binom_ll(d.X, d.y, b); };
    auto opt = oracles::nelder_mead_max(obj, {0.0, 0.0, 0.0});
    for (int j = 0; j < 3; ++j) REQUIRE(fit.beta[j] == Approx(opt[static_cast<std::size_t>(j)]).margin(1e-5));
}

TEST_CASE("irls agrees with the simplex maximizer on random instances") {
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 50; ++rep) {
        Instance in = random_instance(rng, 40, 3);
        IrlsResult fit = fit_irls(in.X, in.y);
        if (!fit.converged) continue; // separation on a tiny draw
        auto obj = [&](const std::vector<double>& b) { return binom_ll(in.X, in.y, b); };
        auto opt = oracles::nelder_mead_max(obj, {0.0, 0.0, 0.0});
        for (int j = 0; j < 3; ++j)
            REQUIRE(fit.beta[j] == Approx(opt[static_cast<std::size_t>(j)]).margin(1e-4));
    }
}

TEST_CASE("score equations vanish at the optimum") {
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 20; ++rep) {
        Instance in = random_instance(rng, 60, 4);
        IrlsResult fit = fit_irls(in.X, in.y);
        if (!fit.converged) continue;
        Eigen::VectorXd mu(in.X.rows());
        for (Eigen::Index i = 0; i < in.X.rows(); ++i) {
            double eta = in.X.row(i) * fit.beta;
            mu[i] = 1.0 / (1.0 + std::exp(-eta));
        }
        Eigen::VectorXd score = in.X.transpose() * (in.y - mu);
        for (Eigen::Index j = 0; j < score.size(); ++j) {
            double scale = std::max(1.0, in.X.col(j).cwiseAbs().maxCoeff());
            REQUIRE(std::abs(score[j]) <= 1e-6 * scale);
        }
        // likelihood did not decrease relative to the null start
        REQUIRE(fit.loglik >= binom_ll(in.X, in.y, {0, 0, 0, 0}) - 1e-12);
    }
}

TEST_CASE("all-zero response flags separation") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(25, 1);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(25);
    IrlsResult fit = fit_irls(X, y);
    bool flagged = false;
    for (const auto& w : fit.warnings) flagged = flagged || w.find("separation") != std::string::npos;
    REQUIRE(flagged);
    REQUIRE(fit.beta[0] < -15.0);
}

TEST_CASE("duplicated columns are aliased deterministically") {
    std::mt19937_64 rng(71);
    Instance in = random_instance(rng, 50, 3);
    Eigen::MatrixXd X(in.X.rows(), 4);
    X << in.X, in.X.col(1); // duplicate a column at the end
    IrlsResult fit = fit_irls(X, in.y);
    REQUIRE(fit.aliased == std::vector<int>{3});
    REQUIRE(fit.beta[3] == 0.0);
    IrlsResult base = fit_irls(in.X, in.y);
    for (int j = 0; j < 3; ++j) REQUIRE(fit.beta[j] == Approx(base.beta[j]).margin(1e-10));
}

TEST_CASE("correlated but independent columns are never aliased") {
    // disjoint indicator blocks plus several correlated covariates: the rank
    // screen must keep everything
    std::mt19937_64 rng(73);
    auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const int n = 400, blocks = 8;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, blocks + 4);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, i % blocks) = 1.0;
        double z = u01();
        X(i, blocks + 0) = z;
        X(i, blocks + 1) = 0.9 * z + 0.1 * u01(); // strongly correlated with z
        X(i, blocks + 2) = u01() < 0.5 ? 0.0 : 1.0;
        X(i, blocks + 3) = 3.0 + z + u01();
        y[i] = u01() < 0.4 ? 1.0 : 0.0;
    }
    IrlsResult fit = fit_irls(X, y);
    REQUIRE(fit.aliased.empty());
    for (int j = 0; j < blocks + 4; ++j) REQUIRE(fit.covariance(j, j) > 0.0);

    // a genuine three-way dependence is caught at its last column
    Eigen::MatrixXd Xd(n, blocks + 5);
    Xd << X, X.col(blocks + 0) - 2.0 * X.col(blocks + 3);
    IrlsResult dep = fit_irls(Xd, y);
    REQUIRE(dep.aliased == std::vector<int>{blocks + 4});
}

TEST_CASE("standard errors shrink as data replicate") {
    std::mt19937_64 rng(97);
    Instance in = random_instance(rng, 80, 3);
    auto replicate = [&](int times) {
        Eigen::MatrixXd X(in.X.rows() * times, in.X.cols());
        Eigen::VectorXd y(in.y.size() * times);
        for (int r = 0; r < times; ++r) {
            X.middleRows(r * in.X.rows(), in.X.rows()) = in.X;
            y.segment(r * in.y.size(), in.y.size()) = in.y;
        }
        IrlsResult fit = fit_irls(X, y);
        return std::sqrt(fit.covariance(1, 1));
    };
    double se1 = replicate(1), se2 = replicate(2), se8 = replicate(8);
    REQUIRE(se2 < se1);
    REQUIRE(se8 < se2);
    REQUIRE(se8 == Approx(se1 / std::sqrt(8.0)).epsilon(0.01));
}

TEST_CASE("penalized irls solves the penalized score equations") {
    std::mt19937_64 rng(113);
    Instance in = random_instance(rng, 60, 4);
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(4, 4) * 3.0;
    IrlsResult fit = fit_irls(in.X, in.y, &S);
    REQUIRE(fit.converged);
    Eigen::VectorXd mu(in.X.rows());
    for (Eigen::Index i = 0; i < in.X.rows(); ++i)
        mu[i] = 1.0 / (1.0 + std::exp(-double(in.X.row(i) * fit.beta)));
    Eigen::VectorXd score = in.X.transpose() * (in.y - mu) - S * fit.beta;
    REQUIRE(score.lpNorm<Eigen::Infinity>() <= 1e-6);
    REQUIRE(fit.penalized_loglik <= fit.loglik);
}
