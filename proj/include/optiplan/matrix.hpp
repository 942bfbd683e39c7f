#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "optiplan/errors.hpp"

namespace optiplan::num {

/// Dense row-major matrix of doubles. Entries are validated to be finite on
/// construction; instances are treated as immutable once filled.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    /// Takes ownership of `data` (row-major, rows*cols entries, all finite).
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }

    /// Throws Error if any entry is NaN or infinite.
    void check_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Cholesky factor L (lower triangular) of a symmetric positive definite
/// matrix, L*L^T = a. Asymmetry below 1e-9 relative is symmetrized away;
/// larger asymmetry throws NotSymmetric. A non-positive pivot throws
/// NotPositiveDefinite.
Matrix cholesky(const Matrix& a);

/// Solves L*z = b by forward substitution (L lower triangular).
std::vector<double> forward_sub(const Matrix& l, std::span<const double> b);

/// Solves L^T*x = z by back substitution (L lower triangular).
std::vector<double> back_sub_transpose(const Matrix& l, std::span<const double> z);

/// Solves a*x = b for symmetric positive definite a via Cholesky.
std::vector<double> solve_psd(const Matrix& a, std::span<const double> b);

/// Solves a*x = b reusing a precomputed Cholesky factor of a.
std::vector<double> solve_cholesky(const Matrix& l, std::span<const double> b);

std::vector<double> mat_vec(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace optiplan::num
