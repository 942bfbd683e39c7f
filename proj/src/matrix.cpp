#include "optiplan/matrix.hpp"

#include <cmath>
#include <cstdlib>

namespace optiplan::num {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (!std::isfinite(fill)) throw Error("matrix fill value must be finite");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionMismatch("matrix data length does not match rows*cols");
    }
    check_finite();
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Matrix::check_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) throw Error("matrix entry is not finite");
    }
}

Matrix cholesky(const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.rows() != a.cols()) throw NotSquare("cholesky requires a square matrix");

    // Relative symmetry tolerance 1e-9 against the largest magnitude entry.
    double max_abs = 0.0;
    double max_asym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            max_abs = std::max(max_abs, std::abs(a(i, j)));
            max_asym = std::max(max_asym, std::abs(a(i, j) - a(j, i)));
        }
    }
    if (max_asym > 1e-9 * std::max(1.0, max_abs)) {
        throw NotSymmetric("matrix asymmetry exceeds 1e-9 relative tolerance");
    }

    // Factor the symmetrized matrix (A + A^T)/2.
    Matrix l(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = 0.5 * (a(j, j) + a(j, j));
        const double* lj = &l.data()[j * n];
        for (std::size_t k = 0; k < j; ++k) diag -= lj[k] * lj[k];
        if (diag <= 0.0 || !std::isfinite(diag)) {
            throw NotPositiveDefinite("non-positive pivot in cholesky");
        }
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        const double inv = 1.0 / ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = 0.5 * (a(i, j) + a(j, i));
            const double* li = &l.data()[i * n];
            double acc = 0.0;
            for (std::size_t k = 0; k < j; ++k) acc += li[k] * lj[k];
            l(i, j) = (s - acc) * inv;
        }
    }
    return l;
}

std::vector<double> forward_sub(const Matrix& l, std::span<const double> b) {
    const std::size_t n = l.rows();
    if (b.size() != n) throw DimensionMismatch("forward_sub size mismatch");
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        const double* li = &l.data()[i * n];
        for (std::size_t k = 0; k < i; ++k) s -= li[k] * z[k];
        z[i] = s / li[i];
    }
    return z;
}

std::vector<double> back_sub_transpose(const Matrix& l, std::span<const double> z) {
    const std::size_t n = l.rows();
    if (z.size() != n) throw DimensionMismatch("back_sub_transpose size mismatch");
    std::vector<double> x(z.begin(), z.end());
    for (std::size_t ii = n; ii-- > 0;) {
        x[ii] /= l(ii, ii);
        const double xi = x[ii];
        for (std::size_t k = 0; k < ii; ++k) x[k] -= l(ii, k) * xi;
    }
    return x;
}

std::vector<double> solve_psd(const Matrix& a, std::span<const double> b) {
    if (a.rows() != b.size()) throw DimensionMismatch("solve_psd size mismatch");
    Matrix l = cholesky(a);
    return solve_cholesky(l, b);
}

std::vector<double> solve_cholesky(const Matrix& l, std::span<const double> b) {
    return back_sub_transpose(l, forward_sub(l, b));
}

std::vector<double> mat_vec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw DimensionMismatch("mat_vec size mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* row = &a.data()[i * a.cols()];
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace optiplan::num
