#include "spacee/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spacee {

double rotate_score(std::span<const Complex> h, std::span<const Complex> r,
                    std::span<const Complex> t) {
  if (h.size() != r.size() || r.size() != t.size()) {
    throw std::invalid_argument("rotate_score: length mismatch");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (std::abs(std::abs(r[i]) - 1.0) > kUnitModulusTolerance) {
      throw std::invalid_argument("rotate_score: relation component " + std::to_string(i) +
                                  " is not unit modulus");
    }
    sq += std::norm(h[i] * r[i] - t[i]);
  }
  return std::sqrt(sq);
}

double transe_score(std::span<const double> h, std::span<const double> r,
                    std::span<const double> t) {
  if (h.size() != r.size() || r.size() != t.size()) {
    throw std::invalid_argument("transe_score: length mismatch");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double d = h[i] + r[i] - t[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

Matrix complex_to_block_diag(std::span<const Complex> z) {
  Matrix m(2 * z.size(), 2 * z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double a = z[i].real(), b = z[i].imag();
    m(2 * i, 2 * i) = a;
    m(2 * i, 2 * i + 1) = -b;
    m(2 * i + 1, 2 * i) = b;
    m(2 * i + 1, 2 * i + 1) = a;
  }
  return m;
}

}  // namespace spacee
