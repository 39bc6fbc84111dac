#pragma once
// Vector baselines and the complex -> block-diagonal embedding that maps a
// RotatE model into SpaceE.

#include <complex>
#include <span>

#include "spacee/matrix.hpp"

namespace spacee {

using Complex = std::complex<double>;

inline constexpr double kUnitModulusTolerance = 1e-9;

// ||h o r - t||_2 with o the Hadamard product. Every |r_i| must be 1.
double rotate_score(std::span<const Complex> h, std::span<const Complex> r,
                    std::span<const Complex> t);

// ||h + r - t||_2.
double transe_score(std::span<const double> h, std::span<const double> r,
                    std::span<const double> t);

// 2K x 2K block diagonal; block i is [[a, -b], [b, a]] for z_i = a + b i.
Matrix complex_to_block_diag(std::span<const Complex> z);

}  // namespace spacee
