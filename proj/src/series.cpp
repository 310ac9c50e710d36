#include "weakfarima/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace weakfarima::series {

CoeffSeq frac_coeffs(double d, std::size_t M) {
  std::vector<double> a(M + 1);
  a[0] = 1.0;
  for (std::size_t j = 1; j <= M; ++j) {
    const double jj = static_cast<double>(j);
    a[j] = a[j - 1] * (jj - 1.0 - d) / jj;
  }
  return CoeffSeq(std::move(a));
}

CoeffSeq frac_coeffs_dd(double d, std::size_t M) {
  std::vector<double> a(M + 1);
  std::vector<double> da(M + 1);
  a[0] = 1.0;
  da[0] = 0.0;
  for (std::size_t j = 1; j <= M; ++j) {
    const double jj = static_cast<double>(j);
    a[j] = a[j - 1] * (jj - 1.0 - d) / jj;
    da[j] = da[j - 1] * (jj - 1.0 - d) / jj - a[j - 1] / jj;
  }
  return CoeffSeq(std::move(da));
}

CoeffSeq convolve(const CoeffSeq& a, const CoeffSeq& b, std::size_t M) {
  if (a.size() == 0 || b.size() == 0) {
    return CoeffSeq(std::vector<double>(M + 1, 0.0));
  }
  // Shorter inputs are treated as zero-padded polynomials.
  std::vector<double> c(M + 1, 0.0);
  const std::size_t na = std::min(a.size(), M + 1);
  for (std::size_t k = 0; k < na; ++k) {
    const double ak = a[k];
    if (ak == 0.0) continue;
    const std::size_t nb = std::min(b.size(), M + 1 - k);
    for (std::size_t j = 0; j < nb; ++j) c[k + j] += ak * b[j];
  }
  return CoeffSeq(std::move(c));
}

CoeffSeq invert_unit_poly(const CoeffSeq& p, std::size_t M) {
  if (p.size() == 0 || p[0] != 1.0) {
    throw std::invalid_argument("invert_unit_poly: leading coefficient must be 1");
  }
  const std::size_t deg = p.trunc_len();
  std::vector<double> q(M + 1, 0.0);
  q[0] = 1.0;
  for (std::size_t i = 1; i <= M; ++i) {
    double s = 0.0;
    const std::size_t kmax = std::min(i, deg);
    for (std::size_t k = 1; k <= kmax; ++k) s += p[k] * q[i - k];
    q[i] = -s;
  }
  return CoeffSeq(std::move(q));
}

CoeffSeq log_one_minus_z(std::size_t M) {
  std::vector<double> c(M + 1, 0.0);
  for (std::size_t i = 1; i <= M; ++i) c[i] = -1.0 / static_cast<double>(i);
  return CoeffSeq(std::move(c));
}

CoeffSeq lag_poly(std::span<const double> c) {
  std::vector<double> p(c.size() + 1);
  p[0] = 1.0;
  for (std::size_t i = 0; i < c.size(); ++i) p[i + 1] = -c[i];
  return CoeffSeq(std::move(p));
}

}  // namespace weakfarima::series
