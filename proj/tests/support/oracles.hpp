#ifndef DHAZ_TEST_ORACLES_HPP
#define DHAZ_TEST_ORACLES_HPP

// Independent reference implementations used only by the test suite. These
// deliberately avoid the library's code paths: the subject-level likelihood
// multiplies per-subject contributions instead of summing person-period
// rows, the simplex maximizer knows nothing about IRLS, and the naive
// B-spline recursion evaluates the textbook definition directly.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "dhaz/data.hpp"

namespace oracles {

// log of prod_i lambda(T_i)^D_i (1-lambda(T_i))^(1-D_i) prod_{j<T_i}(1-lambda(j))
template <typename HazardFn>
double subject_loglik(const dhaz::Dataset& ds, HazardFn&& hazard_fn) {
    double ll = 0.0;
    for (const auto& rec : ds.records()) {
        double lam_T = hazard_fn(rec.observed_time, rec.covariates);
        if (rec.status == 1)
            ll += std::log(lam_T);
        else
            ll += std::log(1.0 - lam_T);
        for (int j = 1; j < rec.observed_time; ++j)
            ll += std::log(1.0 - hazard_fn(j, rec.covariates));
    }
    return ll;
}

// Nelder-Mead maximization of f, restarted from the incumbent.
inline std::vector<double> nelder_mead_max(const std::function<double(const std::vector<double>&)>& f,
                                           std::vector<double> x0, int restarts = 3,
                                           int max_iter = 4000, double ftol = 1e-13) {
    auto neg = [&](const std::vector<double>& x) { return -f(x); };
    const std::size_t n = x0.size();
    std::vector<double> best = x0;
    double best_val = neg(best);

    for (int r = 0; r < restarts; ++r) {
        double scale = r == 0 ? 0.5 : 0.1 / (r + 1);
        std::vector<std::vector<double>> simplex(n + 1, best);
        for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += scale;
        std::vector<double> fv(n + 1);
        for (std::size_t i = 0; i <= n; ++i) fv[i] = neg(simplex[i]);

        for (int it = 0; it < max_iter; ++it) {
            std::vector<std::size_t> order(n + 1);
            for (std::size_t i = 0; i <= n; ++i) order[i] = i;
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            std::size_t lo = order[0], hi = order[n], hi2 = order[n - 1];
            if (std::abs(fv[hi] - fv[lo]) < ftol * (std::abs(fv[lo]) + 1e-12)) break;

            std::vector<double> centroid(n, 0.0);
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == hi) continue;
                for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / n;
            }
            auto blend = [&](double t) {
                std::vector<double> x(n);
                for (std::size_t d = 0; d < n; ++d)
                    x[d] = centroid[d] + t * (simplex[hi][d] - centroid[d]);
                return x;
            };
            auto xr = blend(-1.0);
            double fr = neg(xr);
            if (fr < fv[lo]) {
                auto xe = blend(-2.0);
                double fe = neg(xe);
                if (fe < fr) {
                    simplex[hi] = xe;
                    fv[hi] = fe;
                } else {
                    simplex[hi] = xr;
                    fv[hi] = fr;
                }
            } else if (fr < fv[hi2]) {
                simplex[hi] = xr;
                fv[hi] = fr;
            } else {
                auto xc = blend(0.5);
                double fc = neg(xc);
                if (fc < fv[hi]) {
                    simplex[hi] = xc;
                    fv[hi] = fc;
                } else {
                    for (std::size_t i = 0; i <= n; ++i) {
                        if (i == lo) continue;
                        for (std::size_t d = 0; d < n; ++d)
                            simplex[i][d] = simplex[lo][d] + 0.5 * (simplex[i][d] - simplex[lo][d]);
                        fv[i] = neg(simplex[i]);
                    }
                }
            }
        }
        std::size_t argmin = 0;
        for (std::size_t i = 1; i <= n; ++i)
            if (fv[i] < fv[argmin]) argmin = i;
        if (fv[argmin] < best_val) {
            best_val = fv[argmin];
            best = simplex[argmin];
        }
    }
    return best;
}

// Textbook Cox-de Boor recursion, evaluated naively per basis function.
inline double bspline_naive(const std::vector<double>& knots, int i, int d, double x) {
    if (d == 0) {
        // closed on the right at the final interval end
        bool last = (static_cast<std::size_t>(i + 2) == knots.size());
        if (x >= knots[i] && (x < knots[i + 1] || (last && x == knots[i + 1]))) return 1.0;
        return 0.0;
    }
    double left = 0.0, right = 0.0;
    double den1 = knots[i + d] - knots[i];
    if (den1 > 0) left = (x - knots[i]) / den1 * bspline_naive(knots, i, d - 1, x);
    double den2 = knots[i + d + 1] - knots[i + 1];
    if (den2 > 0) right = (knots[i + d + 1] - x) / den2 * bspline_naive(knots, i + 1, d - 1, x);
    return left + right;
}

// Small random datasets for property tests. Covariates: one numeric, one
// binary factor.
inline dhaz::Dataset random_dataset(std::mt19937_64& rng, int max_n = 20, int max_k = 5) {
    auto uint_in = [&](int lo, int hi) { return lo + static_cast<int>(rng() % (hi - lo + 1)); };
    auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    int k = uint_in(2, max_k);
    int n = uint_in(2, max_n);
    dhaz::CovariateSchema schema;
    schema.push_back({"x", dhaz::CovKind::numeric, {}});
    schema.push_back({"g", dhaz::CovKind::binary_factor, {"a", "b"}});

    std::vector<dhaz::SurvivalRecord> recs;
    bool below = false;
    for (int i = 0; i < n; ++i) {
        dhaz::SurvivalRecord r;
        r.subject_id = i + 1;
        r.observed_time = uint_in(1, k);
        r.status = uint_in(0, 1);
        r.covariates = {2.0 * u01() - 1.0, static_cast<double>(uint_in(0, 1))};
        below = below || r.observed_time < k;
        recs.push_back(r);
    }
    if (!below) recs[0].observed_time = 1; // keep the dataset non-degenerate
    return dhaz::Dataset(std::move(recs), k, schema);
}

// Random hazard table lambda(t) on 1..k with lambda(k)=1.
inline std::vector<double> random_hazard_table(std::mt19937_64& rng, int k) {
    auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<double> lam(static_cast<std::size_t>(k));
    for (int t = 0; t < k - 1; ++t) lam[static_cast<std::size_t>(t)] = 0.05 + 0.9 * u01();
    lam[static_cast<std::size_t>(k - 1)] = 1.0;
    return lam;
}

} // namespace oracles

#endif
