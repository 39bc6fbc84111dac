#pragma once
// Small dense row-major matrices. Sizes here are q <= 64, so everything is a
// straightforward triple loop.

#include <cstddef>
#include <span>
#include <vector>

namespace spacee {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::span<const double> values);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  Matrix transposed() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

double frobenius_norm(const Matrix& m);
double squared_frobenius_norm(std::span<const double> values);

// out (rows x n) = a (rows x inner) * b (inner x n), all row-major.
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out,
            std::size_t rows, std::size_t inner, std::size_t n);

}  // namespace spacee
