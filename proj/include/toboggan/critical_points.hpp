#pragma once

// Shift values of the base line at which the rectified contour passes
// through x = 0 and its winding descriptor flips.
//
// For kappa = 2M+1 the flip condition (1 + (i z)^2)^kappa = 1 with
// z = s - i eps splits, per root of unity exp(2 pi i m / kappa), into
//   s^2 - eps^2 - A = 0,   2 s eps = B,
// with A = 1 - cos(theta), B = sin(theta), theta = 2 pi m / kappa, whose
// positive solution is eps = sqrt((-A + sqrt(A^2 + B^2)) / 2), s = B / (2 eps).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "toboggan/errors.hpp"

namespace toboggan {

struct CriticalShift {
  int M = 0;
  int m = 0;
  double theta = 0.0;
  double A = 0.0;
  double B = 0.0;
  double epsilon = 0.0;
  double s_abs = 0.0;
  double phi = 0.0;
};

/// The flip record for one (M, m) pair.
inline CriticalShift critical_shift(int M, int m) {
  if (M < 1 || m < 1 || m > M) {
    throw Error(ErrorKind::InvalidArgument,
                "critical shift needs M >= 1 and 1 <= m <= M (got M=" + std::to_string(M) +
                    ", m=" + std::to_string(m) + ")");
  }
  CriticalShift c;
  c.M = M;
  c.m = m;
  c.theta = 2.0 * std::numbers::pi * m / (2.0 * M + 1.0);
  // 1 - cos(theta) without cancellation at small theta.
  const double half_sin = std::sin(0.5 * c.theta);
  c.A = 2.0 * half_sin * half_sin;
  c.B = std::sin(c.theta);
  // (-A + r) / 2 rewritten as B^2 / (2 (A + r)), r = hypot(A, B).
  c.epsilon = c.B / std::sqrt(2.0 * (c.A + std::hypot(c.A, c.B)));
  c.s_abs = c.B / (2.0 * c.epsilon);
  c.phi = std::atan(c.epsilon / c.s_abs);
  return c;
}

/// All M flip records for kappa = 2M+1, ascending in epsilon. The m label of
/// each row is kept, so position j (0-based) is the (j+1)-th critical shift.
inline std::vector<CriticalShift> critical_table(int M) {
  if (M < 1) {
    throw Error(ErrorKind::InvalidArgument, "critical_table needs M >= 1, got " + std::to_string(M));
  }
  std::vector<CriticalShift> rows;
  rows.reserve(static_cast<std::size_t>(M));
  for (int m = 1; m <= M; ++m) rows.push_back(critical_shift(M, m));
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CriticalShift& a, const CriticalShift& b) { return a.epsilon < b.epsilon; });
  return rows;
}

/// j-th smallest critical shift (1-based ordinal) for the given M.
inline CriticalShift critical_by_ordinal(int M, int j) {
  auto rows = critical_table(M);
  if (j < 1 || j > static_cast<int>(rows.size())) {
    throw Error(ErrorKind::InvalidArgument,
                "critical ordinal " + std::to_string(j) + " out of range 1.." + std::to_string(rows.size()));
  }
  return rows[static_cast<std::size_t>(j - 1)];
}

/// |(1 + [i (s - i eps)]^(2M+1)) - 1| for the stored (s_abs, epsilon).
inline double flip_residual(const CriticalShift& shift) {
  using cplx = std::complex<double>;
  const cplx iz = cplx(0.0, 1.0) * cplx(shift.s_abs, -shift.epsilon);
  const cplx base = 1.0 + iz * iz;
  cplx power = 1.0;
  for (int k = 0; k < 2 * shift.M + 1; ++k) power *= base;
  return std::abs(power - 1.0);
}

struct NearestCritical {
  std::optional<CriticalShift> shift;  // empty for kappa = 1
  double distance = std::numeric_limits<double>::infinity();
};

inline NearestCritical nearest_critical(int kappa, double epsilon) {
  if (kappa < 1 || kappa % 2 == 0) {
    throw Error(ErrorKind::InvalidArgument, "kappa must be an odd positive integer, got " + std::to_string(kappa));
  }
  NearestCritical out;
  const int M = (kappa - 1) / 2;
  if (M == 0) return out;
  for (const auto& row : critical_table(M)) {
    const double d = std::abs(epsilon - row.epsilon);
    if (d < out.distance) {
      out.distance = d;
      out.shift = row;
    }
  }
  return out;
}

/// CSV `M,m,B,epsilon,s_abs,phi`; epsilon printed with 20 significant digits.
inline void write_critical_csv(std::ostream& os, const std::vector<CriticalShift>& rows) {
  os << "M,m,B,epsilon,s_abs,phi\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.20g,%.17g,%.17g\n", r.M, r.m, r.B, r.epsilon, r.s_abs, r.phi);
    os << buf;
  }
}

}  // namespace toboggan
