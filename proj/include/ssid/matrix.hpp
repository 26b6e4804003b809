#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "ssid/errors.hpp"

namespace ssid {

/// Dense real matrix, row-major storage.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    /// Row i as a contiguous span.
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> col(std::size_t j) const;
    void set_col(std::size_t j, std::span<const double> v);

    /// Columns [j0, j1) as a rows x (j1-j0) matrix.
    Matrix col_range(std::size_t j0, std::size_t j1) const;

    Matrix transpose() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    double frobenius_norm() const;
    double trace() const;
    double max_abs() const;
    bool all_finite() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(Matrix a, double s);

/// C = A * B
Matrix operator*(const Matrix& a, const Matrix& b);
/// C = A^T * B without forming the transpose.
Matrix mul_tn(const Matrix& a, const Matrix& b);
/// C = A * B^T without forming the transpose.
Matrix mul_nt(const Matrix& a, const Matrix& b);
/// C += alpha * A * B
void add_mul(Matrix& c, double alpha, const Matrix& a, const Matrix& b);
/// Y += alpha * X (same shape)
void axpy_scaled(Matrix& y, double alpha, const Matrix& x);
/// C += alpha * A * B^T
void add_mul_nt(Matrix& c, double alpha, const Matrix& a, const Matrix& b);

std::vector<double> matvec(const Matrix& a, std::span<const double> x);

// Small vector helpers.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Throws DimensionError with `what` if the shapes differ.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);
/// Throws NumericalError with `what` if any entry is NaN/Inf.
void require_finite(const Matrix& m, const char* what);

} // namespace ssid
