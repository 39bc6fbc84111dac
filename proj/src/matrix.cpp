#include "spacee/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace spacee {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::span<const double> values)
    : rows_(rows), cols_(cols), data_(values.begin(), values.end()) {
  if (data_.size() != rows * cols) throw std::invalid_argument("matrix value count mismatch");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw std::invalid_argument("shape mismatch in +");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw std::invalid_argument("shape mismatch in -");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("shape mismatch in *");
  Matrix out(a.rows(), b.cols());
  matmul(a.values(), b.values(), out.values(), a.rows(), a.cols(), b.cols());
  return out;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

double squared_frobenius_norm(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

double frobenius_norm(const Matrix& m) { return std::sqrt(squared_frobenius_norm(m.values())); }

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out,
            std::size_t rows, std::size_t inner, std::size_t n) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* o = out.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) o[j] = 0.0;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a[i * inner + k];
      const double* brow = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += aik * brow[j];
    }
  }
}

}  // namespace spacee
