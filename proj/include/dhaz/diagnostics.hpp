#ifndef DHAZ_DIAGNOSTICS_HPP
#define DHAZ_DIAGNOSTICS_HPP

// Goodness-of-fit tooling: percentile-grouped calibration of fitted hazards
// against empirical event frequencies, martingale residuals, and a
// local-linear trend smoother for residual plots.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhaz/data.hpp"

namespace dhaz {

struct CalibrationGroup {
    long n = 0;
    long events = 0;
    double mean_fitted = 0.0;
    double empirical = 0.0;
    double hazard_lo = 0.0; // fitted-hazard range covered by the group
    double hazard_hi = 0.0;
};

struct CalibrationTable {
    std::vector<CalibrationGroup> groups;
    std::vector<std::string> warnings;
};

// Rows sorted by fitted hazard and cut at empirical percentiles into K
// groups; tied fitted values stay together in the lower group.
template <typename HazardFn>
CalibrationTable calibration(const AugmentedDataset& aug, HazardFn&& hazard_fn, int K = 10) {
    const long n = static_cast<long>(aug.n_rows());
    if (K < 2) throw std::invalid_argument("need K >= 2 groups");
    if (n < K) throw std::invalid_argument("fewer rows than groups");

    std::vector<std::pair<double, int>> fitted(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const auto& row = aug.rows()[static_cast<std::size_t>(i)];
        fitted[static_cast<std::size_t>(i)] = {hazard_fn(row.time_interval, row.covariates),
                                               row.response};
    }
    std::sort(fitted.begin(), fitted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    CalibrationTable table;
    long pos = 0;
    for (int g = 0; g < K && pos < n; ++g) {
        long end = g == K - 1 ? n : (n * static_cast<long>(g + 1)) / K;
        if (end <= pos) end = pos + 1;
        while (end < n && fitted[static_cast<std::size_t>(end)].first ==
                              fitted[static_cast<std::size_t>(end - 1)].first)
            ++end;
        CalibrationGroup grp;
        grp.n = end - pos;
        double sum = 0.0;
        for (long i = pos; i < end; ++i) {
            sum += fitted[static_cast<std::size_t>(i)].first;
            grp.events += fitted[static_cast<std::size_t>(i)].second;
        }
        grp.mean_fitted = sum / static_cast<double>(grp.n);
        grp.empirical = static_cast<double>(grp.events) / static_cast<double>(grp.n);
        grp.hazard_lo = fitted[static_cast<std::size_t>(pos)].first;
        grp.hazard_hi = fitted[static_cast<std::size_t>(end - 1)].first;
        table.groups.push_back(grp);
        pos = end;
    }
    if (static_cast<int>(table.groups.size()) < K)
        table.warnings.push_back("tied fitted hazards: " +
                                 std::to_string(table.groups.size()) + " effective groups of " +
                                 std::to_string(K));
    return table;
}

struct MartingaleResidual {
    long subject_id = 0;
    int observed_time = 0;
    double residual = 0.0; // status minus cumulative fitted hazard
};

struct ResidualSet {
    std::vector<MartingaleResidual> residuals;
};

template <typename HazardFn>
ResidualSet martingale_residuals(const Dataset& ds, HazardFn&& hazard_fn) {
    ResidualSet out;
    out.residuals.reserve(ds.size());
    for (const auto& rec : ds.records()) {
        double cum = 0.0;
        for (int t = 1; t <= rec.observed_time; ++t) cum += hazard_fn(t, rec.covariates);
        out.residuals.push_back({rec.subject_id, rec.observed_time,
                                 static_cast<double>(rec.status) - cum});
    }
    return out;
}

struct TrendCurve {
    std::vector<double> grid;
    std::vector<double> trend;
    std::vector<std::string> warnings;
};

// Local-linear fit with a Gaussian kernel on a 100-point grid. Grid points
// with effective weight below 3 observations widen their bandwidth locally.
inline TrendCurve residual_trend(const std::vector<double>& x, const std::vector<double>& r,
                                 double bandwidth = 0.0, int grid_points = 100) {
    if (x.size() != r.size()) throw std::invalid_argument("x/residual size mismatch");
    const std::size_t n = x.size();
    if (n < 10) throw std::invalid_argument("need at least 10 observations");

    if (bandwidth <= 0.0) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        double sd = std::sqrt(ss / static_cast<double>(n - 1));
        bandwidth = 0.9 * sd * std::pow(static_cast<double>(n), -0.2);
        if (bandwidth <= 0.0) throw std::invalid_argument("degenerate covariate for trend");
    }

    double lo = *std::min_element(x.begin(), x.end());
    double hi = *std::max_element(x.begin(), x.end());
    TrendCurve curve;
    bool widened = false;
    for (int g = 0; g < grid_points; ++g) {
        double gx = grid_points == 1 ? lo : lo + (hi - lo) * g / (grid_points - 1);
        double h = bandwidth;
        double a = 0.0;
        for (int attempt = 0; attempt < 60; ++attempt) {
            double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = x[i] - gx;
                double u = d / h;
                double w = std::exp(-0.5 * u * u);
                s0 += w;
                s1 += w * d;
                s2 += w * d * d;
                t0 += w * r[i];
                t1 += w * d * r[i];
            }
            if (s0 < 3.0) {
                h *= 2.0;
                widened = true;
                continue;
            }
            double det = s0 * s2 - s1 * s1;
            a = det > 1e-300 * s0 ? (s2 * t0 - s1 * t1) / det : t0 / s0;
            break;
        }
        curve.grid.push_back(gx);
        curve.trend.push_back(a);
    }
    if (widened) curve.warnings.push_back("bandwidth widened locally to reach 3 effective observations");
    return curve;
}

} // namespace dhaz

#endif
