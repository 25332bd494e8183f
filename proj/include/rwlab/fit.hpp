#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rwlab {

struct LinFit {
    double slope = 0;
    double intercept = 0;
    double rms_residual = 0;
};

inline LinFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("ols: need two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LinFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = y[i] - f.slope * x[i] - f.intercept;
        ss += e * e;
    }
    f.rms_residual = std::sqrt(ss / n);
    return f;
}

// Least squares over an arbitrary small basis: rows[i][j] = phi_j(x_i).
// Solves the normal equations by Gaussian elimination with partial pivoting.
inline std::vector<double> lsq_basis(const std::vector<std::vector<double>>& rows,
                                     const std::vector<double>& y) {
    std::size_t n = rows.size();
    if (n == 0 || n != y.size()) throw std::invalid_argument("lsq_basis: bad sizes");
    std::size_t k = rows[0].size();
    std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = 0; q < k; ++q) a[p][q] += rows[i][p] * rows[i][q];
            a[p][k] += rows[i][p] * y[i];
        }
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t rw = col + 1; rw < k; ++rw)
            if (std::fabs(a[rw][col]) > std::fabs(a[piv][col])) piv = rw;
        std::swap(a[col], a[piv]);
        if (std::fabs(a[col][col]) < 1e-300) throw std::runtime_error("lsq_basis: singular system");
        for (std::size_t rw = 0; rw < k; ++rw) {
            if (rw == col) continue;
            double m = a[rw][col] / a[col][col];
            for (std::size_t q = col; q <= k; ++q) a[rw][q] -= m * a[col][q];
        }
    }
    std::vector<double> coef(k);
    for (std::size_t p = 0; p < k; ++p) coef[p] = a[p][k] / a[p][p];
    return coef;
}

// One Aitken delta-squared step applied to the tail of a convergent sequence.
inline double aitken(const std::vector<double>& s) {
    if (s.size() < 3) throw std::invalid_argument("aitken: need three terms");
    std::size_t n = s.size();
    double d2 = s[n - 1] - 2 * s[n - 2] + s[n - 3];
    if (std::fabs(d2) < 1e-300) return s[n - 1];
    double d = s[n - 1] - s[n - 2];
    return s[n - 1] - d * d / d2;
}

}  // namespace rwlab
