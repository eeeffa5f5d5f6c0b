#ifndef DHAZ_BSPLINE_HPP
#define DHAZ_BSPLINE_HPP

// B-spline bases on uniform knot grids and difference penalties on adjacent
// coefficients.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhaz {

struct SplineBasisSpec {
    std::string variable;
    int n_basis = 10;
    int degree = 3;        // d
    int penalty_order = 2; // m
    std::vector<double> knots; // n_basis + degree + 1, strictly increasing
    bool centered = false;

    // Interval on which the basis is a partition of unity.
    double span_lo() const { return knots[static_cast<std::size_t>(degree)]; }
    double span_hi() const { return knots[static_cast<std::size_t>(n_basis)]; }

    // Structural checks only; fitting entry points additionally require
    // n_basis >= 4 and n_basis > penalty_order.
    void validate() const {
        if (n_basis < 1) throw std::invalid_argument("n_basis must be >= 1");
        if (degree < 0) throw std::invalid_argument("degree must be >= 0");
        if (knots.size() != static_cast<std::size_t>(n_basis + degree + 1))
            throw std::invalid_argument("knot count must be n_basis + degree + 1");
        for (std::size_t i = 1; i < knots.size(); ++i)
            if (!(knots[i] > knots[i - 1]))
                throw std::invalid_argument("knots must be strictly increasing");
    }
};

// Uniform knots: equally spaced over the padded data range, extended `degree`
// knots beyond each boundary so the interior span covers the data.
inline SplineBasisSpec uniform_basis(const std::string& variable, double x_lo, double x_hi,
                                     int n_basis = 10, int degree = 3, int penalty_order = 2,
                                     bool centered = false) {
    if (!(x_hi > x_lo)) throw std::invalid_argument("degenerate range for " + variable);
    if (n_basis < 4) throw std::invalid_argument("n_basis must be >= 4");
    if (n_basis <= penalty_order || penalty_order < 1)
        throw std::invalid_argument("need n_basis > penalty_order >= 1");
    SplineBasisSpec spec;
    spec.variable = variable;
    spec.n_basis = n_basis;
    spec.degree = degree;
    spec.penalty_order = penalty_order;
    spec.centered = centered;
    double eps = 1e-8 * (x_hi - x_lo);
    double lo = x_lo - eps, hi = x_hi + eps;
    int n_interior = n_basis - degree; // intervals across [lo, hi]
    if (n_interior < 1) throw std::invalid_argument("n_basis must exceed degree");
    double h = (hi - lo) / n_interior;
    for (int i = 0; i <= n_basis + degree; ++i)
        spec.knots.push_back(lo + (i - degree) * h);
    spec.validate();
    return spec;
}

namespace detail {

// Index j with knots[j] <= x < knots[j+1], restricted to the interior span;
// the right span end falls into the last interior interval.
inline int knot_interval(const SplineBasisSpec& spec, double x) {
    int lo = spec.degree;
    int hi = spec.n_basis; // interval indices in [lo, hi-1]
    auto it = std::upper_bound(spec.knots.begin() + lo, spec.knots.begin() + hi + 1, x);
    int j = static_cast<int>(it - spec.knots.begin()) - 1;
    return std::min(std::max(j, lo), hi - 1);
}

} // namespace detail

// Evaluate all basis functions at x into `row` (length n_basis). Cox-de Boor
// triangle over the d+1 functions active on x's interval.
inline void bspline_row(const SplineBasisSpec& spec, double x, double* row) {
    const int d = spec.degree;
    const auto& t = spec.knots;
    std::fill(row, row + spec.n_basis, 0.0);
    int j = detail::knot_interval(spec, x);

    std::vector<double> N(static_cast<std::size_t>(d) + 1, 0.0);
    N[0] = 1.0;
    for (int r = 1; r <= d; ++r) {
        double saved = 0.0;
        for (int i = 0; i < r; ++i) {
            // N[i] currently holds B_{j-r+1+i, r-1}
            int idx = j - r + 1 + i;
            double den = t[static_cast<std::size_t>(idx + r)] - t[static_cast<std::size_t>(idx)];
            double term = den > 0 ? N[i] / den : 0.0;
            N[i] = saved + (t[static_cast<std::size_t>(idx + r)] - x) * term;
            saved = (x - t[static_cast<std::size_t>(idx)]) * term;
        }
        N[r] = saved;
    }
    for (int i = 0; i <= d; ++i) {
        int idx = j - d + i;
        if (idx >= 0 && idx < spec.n_basis) row[idx] = N[static_cast<std::size_t>(i)];
    }
}

// Basis matrix for a vector of evaluation points. Points outside the
// interior span raise unless `clamp` pins them to the span boundary.
inline Eigen::MatrixXd bspline_basis(const SplineBasisSpec& spec, const Eigen::VectorXd& x,
                                     bool clamp = false) {
    spec.validate();
    Eigen::MatrixXd B(x.size(), spec.n_basis);
    std::vector<double> row(static_cast<std::size_t>(spec.n_basis));
    const double lo = spec.span_lo(), hi = spec.span_hi();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double xi = x[i];
        if (xi < lo || xi > hi) {
            if (!clamp)
                throw std::invalid_argument("evaluation point outside basis span for " +
                                            spec.variable);
            xi = std::min(std::max(xi, lo), hi);
        }
        bspline_row(spec, xi, row.data());
        for (int jcol = 0; jcol < spec.n_basis; ++jcol) B(i, jcol) = row[static_cast<std::size_t>(jcol)];
    }
    return B;
}

// m-th order difference operator, (n_basis - m) x n_basis.
inline Eigen::MatrixXd difference_matrix(int n_basis, int m) {
    if (n_basis <= m) throw std::invalid_argument("need n_basis > penalty order");
    Eigen::MatrixXd D = Eigen::MatrixXd::Identity(n_basis, n_basis);
    for (int order = 0; order < m; ++order) {
        int rows = n_basis - order;
        Eigen::MatrixXd Dn = Eigen::MatrixXd::Zero(rows - 1, rows);
        for (int i = 0; i < rows - 1; ++i) {
            Dn(i, i) = -1.0;
            Dn(i, i + 1) = 1.0;
        }
        D = (Dn * D.topRows(rows)).eval();
    }
    return D;
}

// K = D'D, positive semi-definite; its null space holds coefficient
// sequences polynomial of degree < m in the index.
inline Eigen::MatrixXd difference_penalty(int n_basis, int m) {
    Eigen::MatrixXd D = difference_matrix(n_basis, m);
    return D.transpose() * D;
}

} // namespace dhaz

#endif
