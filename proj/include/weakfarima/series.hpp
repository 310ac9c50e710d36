#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace weakfarima::series {

/// Truncated power series c_0 + c_1 z + ... + c_M z^M.
struct CoeffSeq {
  std::vector<double> coeffs;

  CoeffSeq() = default;
  explicit CoeffSeq(std::vector<double> c) : coeffs(std::move(c)) {}

  [[nodiscard]] std::size_t trunc_len() const {
    return coeffs.empty() ? 0 : coeffs.size() - 1;
  }
  [[nodiscard]] std::size_t size() const { return coeffs.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return coeffs[i]; }
  [[nodiscard]] std::span<const double> view() const { return coeffs; }
};

/// Coefficients of (1 - z)^d up to z^M, by the ratio recursion
/// alpha_j = alpha_{j-1} (j - 1 - d) / j.
CoeffSeq frac_coeffs(double d, std::size_t M);

/// Derivative of frac_coeffs with respect to d.
CoeffSeq frac_coeffs_dd(double d, std::size_t M);

/// Cauchy product of a and b truncated to degree M.
CoeffSeq convolve(const CoeffSeq& a, const CoeffSeq& b, std::size_t M);

/// Power-series inverse of p (p_0 must be 1) truncated to degree M.
CoeffSeq invert_unit_poly(const CoeffSeq& p, std::size_t M);

/// Coefficients of ln(1 - z): (0, -1, -1/2, ..., -1/M).
CoeffSeq log_one_minus_z(std::size_t M);

/// Unit-lag polynomial 1 - c_1 z - ... - c_k z^k from a coefficient list.
CoeffSeq lag_poly(std::span<const double> c);

}  // namespace weakfarima::series
