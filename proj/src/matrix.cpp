#include "ssid/matrix.hpp"

#include <cmath>
#include <string>

namespace ssid {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_)
        throw DimensionError("matrix entry count does not match rows*cols");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("ragged initializer for Matrix");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

std::vector<double> Matrix::col(std::size_t j) const {
    std::vector<double> v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

void Matrix::set_col(std::size_t j, std::span<const double> v) {
    if (v.size() != rows_) throw DimensionError("set_col: length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::col_range(std::size_t j0, std::size_t j1) const {
    if (j0 > j1 || j1 > cols_) throw DimensionError("col_range: bad column bounds");
    Matrix m(rows_, j1 - j0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = j0; j < j1; ++j) m(i, j - j0) = (*this)(i, j);
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Matrix::trace() const {
    const std::size_t k = rows_ < cols_ ? rows_ : cols_;
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += (*this)(i, i);
    return s;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    add_mul(c, 1.0, a, b);
    return c;
}

void add_mul(Matrix& c, double alpha, const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
        throw DimensionError("add_mul: incompatible shapes");
    const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c.data() + i * p;
        const double* ai = a.data() + i * m;
        for (std::size_t j = 0; j < m; ++j) {
            const double av = alpha * ai[j];
            if (av == 0.0) continue;
            const double* bj = b.data() + j * p;
            for (std::size_t k = 0; k < p; ++k) ci[k] += av * bj[k];
        }
    }
}

void axpy_scaled(Matrix& y, double alpha, const Matrix& x) {
    require_same_shape(y, x, "axpy_scaled");
    double* yp = y.data();
    const double* xp = x.data();
    for (std::size_t k = 0; k < y.size(); ++k) yp[k] += alpha * xp[k];
}

Matrix mul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionError("mul_tn: incompatible shapes");
    const std::size_t n = a.cols(), m = a.rows(), p = b.cols();
    Matrix c(n, p);
    for (std::size_t j = 0; j < m; ++j) {
        const double* aj = a.data() + j * n;
        const double* bj = b.data() + j * p;
        for (std::size_t i = 0; i < n; ++i) {
            const double av = aj[i];
            if (av == 0.0) continue;
            double* ci = c.data() + i * p;
            for (std::size_t k = 0; k < p; ++k) ci[k] += av * bj[k];
        }
    }
    return c;
}

Matrix mul_nt(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.rows());
    add_mul_nt(c, 1.0, a, b);
    return c;
}

void add_mul_nt(Matrix& c, double alpha, const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows())
        throw DimensionError("add_mul_nt: incompatible shapes");
    const std::size_t n = a.rows(), m = a.cols(), p = b.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.data() + i * m;
        double* ci = c.data() + i * p;
        for (std::size_t k = 0; k < p; ++k) {
            const double* bk = b.data() + k * m;
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += ai[j] * bk[j];
            ci[k] += alpha * s;
        }
    }
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw DimensionError("matvec: incompatible shapes");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.data() + i * a.cols();
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
        y[i] = s;
    }
    return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError(std::string(what) + ": shape mismatch (" +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.all_finite())
        throw NumericalError(std::string(what) + ": matrix contains NaN or Inf");
}

} // namespace ssid
