#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "boson_owf/config_space.hpp"
#include "boson_owf/errors.hpp"
#include "boson_owf/rng.hpp"

namespace boson_owf {

using Complex = std::complex<double>;

/// Dense row-major complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols) {
    if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
  }

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
    if (entries_.size() != rows * cols) {
      throw DimensionError("entry count " + std::to_string(entries_.size()) +
                           " does not match " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    }
    for (const auto& z : entries_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw ValidationError("matrix entries must be finite");
      }
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t r, std::size_t c) noexcept { return entries_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const noexcept {
    return entries_[r * cols_ + c];
  }

  [[nodiscard]] std::span<const Complex> entries() const noexcept { return entries_; }
  [[nodiscard]] std::span<Complex> entries() noexcept { return entries_; }

  [[nodiscard]] ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    }
    return out;
  }

  bool operator==(const ComplexMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> entries_;
};

/// max |(A^H A - I)_{ij}| for a square A.
inline double unitarity_defect(const ComplexMatrix& a) {
  if (!a.is_square()) throw DimensionError("unitarity defect needs a square matrix");
  const std::size_t n = a.rows();
  double defect = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Complex dot = 0.0;
      for (std::size_t k = 0; k < n; ++k) dot += std::conj(a(k, i)) * a(k, j);
      if (i == j) dot -= 1.0;
      defect = std::max(defect, std::abs(dot));
    }
  }
  return defect;
}

inline constexpr double kUnitarityTolerance = 1e-10;

/// The public M x M interferometer, together with the seed it was drawn from.
class UnitaryMatrix {
 public:
  UnitaryMatrix(ComplexMatrix matrix, std::uint64_t seed)
      : matrix_(std::move(matrix)), seed_(seed) {
    if (!matrix_.is_square()) throw DimensionError("unitary must be square");
    defect_ = boson_owf::unitarity_defect(matrix_);
    if (!(defect_ <= kUnitarityTolerance)) {
      throw ValidationError("matrix is not unitary: defect " + std::to_string(defect_));
    }
  }

  [[nodiscard]] const ComplexMatrix& matrix() const noexcept { return matrix_; }
  [[nodiscard]] std::size_t modes() const noexcept { return matrix_.rows(); }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] double unitarity_defect() const noexcept { return defect_; }
  const Complex& operator()(std::size_t r, std::size_t c) const noexcept { return matrix_(r, c); }

 private:
  ComplexMatrix matrix_;
  std::uint64_t seed_;
  double defect_ = 0.0;
};

namespace detail {

inline double standard_normal(RngStream& rng) {
  // Box-Muller; written out so generated unitaries do not depend on the
  // standard library's normal_distribution.
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

/// Haar-random unitary: complex Ginibre matrix, Householder QR, then Q is
/// multiplied by the phases of R's diagonal so that R has a positive diagonal.
inline UnitaryMatrix haar_random_unitary(std::size_t modes, std::uint64_t seed) {
  if (modes < 1) throw ArgumentError("haar_random_unitary requires M >= 1");
  const std::size_t n = modes;
  RngStream rng(seed, 0x4861617275ULL);

  ComplexMatrix a(n, n);
  const double scale = std::sqrt(0.5);
  for (auto& z : a.entries()) {
    const double re = detail::standard_normal(rng);
    const double im = detail::standard_normal(rng);
    z = Complex(re * scale, im * scale);
  }

  // Householder reflections H_k = I - 2 v v^H, stored per column.
  std::vector<std::vector<Complex>> reflectors;
  reflectors.reserve(n);
  std::vector<Complex> r_diag(n);
  for (std::size_t k = 0; k < n; ++k) {
    double norm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) norm2 += std::norm(a(i, k));
    const double norm = std::sqrt(norm2);
    const Complex x0 = a(k, k);
    const Complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0);
    const Complex alpha = -phase * norm;

    std::vector<Complex> v(n - k);
    for (std::size_t i = k; i < n; ++i) v[i - k] = a(i, k);
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (const auto& z : v) vnorm2 += std::norm(z);
    if (vnorm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(vnorm2);
      for (auto& z : v) z *= inv;
      for (std::size_t c = k; c < n; ++c) {
        Complex dot = 0.0;
        for (std::size_t i = k; i < n; ++i) dot += std::conj(v[i - k]) * a(i, c);
        for (std::size_t i = k; i < n; ++i) a(i, c) -= 2.0 * v[i - k] * dot;
      }
    }
    r_diag[k] = a(k, k);
    reflectors.push_back(std::move(v));
  }

  // Q = H_0 H_1 ... H_{n-1}, accumulated right to left onto the identity.
  ComplexMatrix q = ComplexMatrix::identity(n);
  for (std::size_t kk = n; kk-- > 0;) {
    const auto& v = reflectors[kk];
    for (std::size_t c = 0; c < n; ++c) {
      Complex dot = 0.0;
      for (std::size_t i = kk; i < n; ++i) dot += std::conj(v[i - kk]) * q(i, c);
      for (std::size_t i = kk; i < n; ++i) q(i, c) -= 2.0 * v[i - kk] * dot;
    }
  }

  for (std::size_t c = 0; c < n; ++c) {
    const double mag = std::abs(r_diag[c]);
    const Complex phase = mag > 0.0 ? r_diag[c] / mag : Complex(1.0);
    for (std::size_t r = 0; r < n; ++r) q(r, c) *= phase;
  }
  return UnitaryMatrix(std::move(q), seed);
}

inline constexpr std::size_t kMaxPermanentSize = 32;
inline constexpr std::size_t kMaxNaivePermanentSize = 9;

/// Ryser's formula over a row-major n x n block, visiting column subsets in
/// Gray-code order so each step adds or removes one column from the row sums.
inline Complex permanent_ryser(std::span<const Complex> entries, std::size_t n) {
  if (n == 0 || entries.size() != n * n) throw DimensionError("permanent needs a square matrix");
  if (n > kMaxPermanentSize) {
    throw SizeLimitError("permanent size " + std::to_string(n) + " exceeds 32");
  }
  std::array<Complex, kMaxPermanentSize> row_sums{};
  Complex total = 0.0;
  std::uint64_t gray = 0;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const auto col = static_cast<std::size_t>(std::countr_zero(k));
    const std::uint64_t bit = std::uint64_t{1} << col;
    gray ^= bit;
    if (gray & bit) {
      for (std::size_t r = 0; r < n; ++r) row_sums[r] += entries[r * n + col];
    } else {
      for (std::size_t r = 0; r < n; ++r) row_sums[r] -= entries[r * n + col];
    }
    Complex product = row_sums[0];
    for (std::size_t r = 1; r < n; ++r) product *= row_sums[r];
    // Term sign (-1)^{n - |subset|}.
    if ((std::popcount(gray) ^ n) & 1U) {
      total -= product;
    } else {
      total += product;
    }
  }
  return total;
}

inline Complex permanent_ryser(const ComplexMatrix& a) {
  if (!a.is_square()) {
    throw DimensionError("permanent of a non-square " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " matrix");
  }
  return permanent_ryser(a.entries(), a.rows());
}

/// Sum over all n! permutations. Test oracle; n <= 9.
inline Complex permanent_naive(const ComplexMatrix& a) {
  if (!a.is_square()) throw DimensionError("permanent of a non-square matrix");
  const std::size_t n = a.rows();
  if (n > kMaxNaivePermanentSize) {
    throw SizeLimitError("naive permanent limited to N <= 9, got " + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Complex total = 0.0;
  do {
    Complex product = 1.0;
    for (std::size_t r = 0; r < n; ++r) product *= a(r, perm[r]);
    total += product;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

/// N x N block with entry (j, k) = U[output_j, input_k].
inline ComplexMatrix submatrix(const ComplexMatrix& u, const Configuration& input_cfg,
                               const Configuration& output_cfg) {
  if (input_cfg.size() != output_cfg.size() || input_cfg.size() == 0) {
    throw DimensionError("input and output configurations must have equal, nonzero length");
  }
  const std::size_t n = input_cfg.size();
  ComplexMatrix sub(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    if (output_cfg.ports[j] >= u.rows()) throw BoundsError("output port out of range");
    for (std::size_t k = 0; k < n; ++k) {
      if (input_cfg.ports[k] >= u.cols()) throw BoundsError("input port out of range");
      sub(j, k) = u(output_cfg.ports[j], input_cfg.ports[k]);
    }
  }
  return sub;
}

inline ComplexMatrix submatrix(const UnitaryMatrix& u, const Configuration& input_cfg,
                               const Configuration& output_cfg) {
  return submatrix(u.matrix(), input_cfg, output_cfg);
}

}  // namespace boson_owf
