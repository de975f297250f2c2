#pragma once

// Rectification map x = -i sqrt((1 - z^2)^kappa - 1) applied to the straight
// line z = s - i eps, traced with continuous square-root branch selection.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "toboggan/critical_points.hpp"
#include "toboggan/errors.hpp"

namespace toboggan {

using ComplexValue = std::complex<double>;

namespace detail {

// Plain repeated multiplication keeps pow(conj(w), n) == conj(pow(w, n))
// bit for bit, which the mirror symmetry of traced contours relies on.
inline ComplexValue ipow(ComplexValue base, int n) {
  ComplexValue out = 1.0;
  for (int k = 0; k < n; ++k) out *= base;
  return out;
}

inline bool finite(ComplexValue v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

}  // namespace detail

class BaseLine {
 public:
  explicit BaseLine(double epsilon) : epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw Error(ErrorKind::InvalidArgument, "base line shift must be finite and > 0");
    }
  }
  double epsilon() const noexcept { return epsilon_; }

 private:
  double epsilon_;
};

inline ComplexValue base_line_point(const BaseLine& line, double s) { return {s, -line.epsilon()}; }

class RectificationMap {
 public:
  static RectificationMap from_kappa(int kappa) {
    if (kappa < 1 || kappa % 2 == 0) {
      throw Error(ErrorKind::InvalidArgument, "kappa must be an odd positive integer, got " + std::to_string(kappa));
    }
    return RectificationMap((kappa - 1) / 2);
  }
  static RectificationMap from_M(int M) {
    if (M < 0) throw Error(ErrorKind::InvalidArgument, "M must be non-negative");
    return RectificationMap(M);
  }

  int kappa() const noexcept { return 2 * M_ + 1; }
  int M() const noexcept { return M_; }

  /// w = (1 - z^2)^kappa - 1, so that x^2 = -w.
  ComplexValue radicand(ComplexValue z) const { return detail::ipow(1.0 - z * z, kappa()) - 1.0; }

  /// Principal branch -i sqrt(w).
  ComplexValue principal(ComplexValue z) const { return ComplexValue(0.0, -1.0) * std::sqrt(radicand(z)); }

  /// The root of x^2 = -w(z) closest to `reference`.
  ComplexValue nearest_root(ComplexValue z, ComplexValue reference) const {
    const ComplexValue p = principal(z);
    return std::abs(p - reference) <= std::abs(p + reference) ? p : -p;
  }

 private:
  explicit RectificationMap(int M) : M_(M) {}
  int M_;
};

/// x(0) on the negative imaginary axis.
inline ComplexValue rectify_anchor(const RectificationMap& map, const BaseLine& line) {
  const double e2 = line.epsilon() * line.epsilon();
  double power = 1.0;
  for (int k = 0; k < map.kappa(); ++k) power *= 1.0 + e2;
  return {0.0, -std::sqrt(power - 1.0)};
}

/// dx/dz = kappa z (1 - z^2)^(kappa - 1) / x on the branch that produced x.
inline ComplexValue map_derivative(const RectificationMap& map, ComplexValue z, ComplexValue x) {
  if (!(std::abs(x) > std::numeric_limits<double>::min())) {
    throw Error(ErrorKind::OriginSingularity, "dx/dz undefined at x = 0");
  }
  return static_cast<double>(map.kappa()) * z * detail::ipow(1.0 - z * z, map.kappa() - 1) / x;
}

/// x and its first three z-derivatives. Obtained by differentiating
/// x^2 = h(z), h = 1 - (1 - z^2)^kappa, so no branch choice enters beyond x.
struct MapJet {
  ComplexValue x, d1, d2, d3;

  ComplexValue schwarzian() const {
    const ComplexValue r = d2 / d1;
    return d3 / d1 - 1.5 * r * r;
  }
};

inline MapJet map_jet(const RectificationMap& map, ComplexValue z, ComplexValue x) {
  const int k = map.kappa();
  const double kd = k;
  const ComplexValue P = 1.0 - z * z;
  auto Pn = [&](int n) { return n >= 0 ? detail::ipow(P, n) : ComplexValue(0.0); };
  const ComplexValue h2 = 2.0 * kd * Pn(k - 1) - 4.0 * kd * (kd - 1.0) * z * z * Pn(k - 2);
  const ComplexValue h3 =
      -12.0 * kd * (kd - 1.0) * z * Pn(k - 2) + 8.0 * kd * (kd - 1.0) * (kd - 2.0) * z * z * z * Pn(k - 3);

  MapJet jet;
  jet.x = x;
  jet.d1 = map_derivative(map, z, x);
  jet.d2 = (h2 - 2.0 * jet.d1 * jet.d1) / (2.0 * x);
  jet.d3 = (h3 - 6.0 * jet.d1 * jet.d2) / (2.0 * x);
  return jet;
}

struct SamplingPolicy {
  double base_step = 0.01;
  double max_jump = 0.05;
  int max_depth = 40;
  double critical_guard = 1e-6;
};

struct ContourSample {
  double s = 0.0;
  ComplexValue z;
  ComplexValue x;
  ComplexValue dxdz;
  int sheet = 0;  // signed principal-cut crossings of w since the anchor
};

class Contour {
 public:
  Contour(RectificationMap map, BaseLine line, std::vector<ContourSample> samples, SamplingPolicy policy = {})
      : map_(map), line_(line), samples_(std::move(samples)), policy_(policy) {
    if (samples_.size() < 2) throw Error(ErrorKind::InvalidArgument, "contour needs at least two samples");
    for (std::size_t i = 1; i < samples_.size(); ++i) {
      if (!(samples_[i].s > samples_[i - 1].s)) {
        throw Error(ErrorKind::InvalidArgument, "contour samples must be strictly increasing in s");
      }
    }
  }

  const RectificationMap& map() const noexcept { return map_; }
  const BaseLine& line() const noexcept { return line_; }
  const SamplingPolicy& policy() const noexcept { return policy_; }
  std::span<const ContourSample> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const ContourSample& operator[](std::size_t i) const { return samples_[i]; }
  const ContourSample& front() const { return samples_.front(); }
  const ContourSample& back() const { return samples_.back(); }
  double s_min() const { return samples_.front().s; }
  double s_max() const { return samples_.back().s; }

  /// Index of the sample at s == 0, or size() if there is none.
  std::size_t anchor_index() const {
    auto it = std::lower_bound(samples_.begin(), samples_.end(), 0.0,
                               [](const ContourSample& a, double s) { return a.s < s; });
    if (it == samples_.end() || it->s != 0.0) return samples_.size();
    return static_cast<std::size_t>(it - samples_.begin());
  }

  /// Index i with s_i <= s <= s_{i+1} (clamped to the valid range).
  std::size_t interval_of(double s) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), s,
                               [](double v, const ContourSample& a) { return v < a.s; });
    std::size_t i = it == samples_.begin() ? 0 : static_cast<std::size_t>(it - samples_.begin()) - 1;
    return std::min(i, samples_.size() - 2);
  }

  /// x(s) for s inside interval i, continued from the chord between its ends.
  ComplexValue x_in_interval(std::size_t i, double s) const {
    const auto& a = samples_[i];
    const auto& b = samples_[i + 1];
    const double t = (s - a.s) / (b.s - a.s);
    const ComplexValue guess = a.x + t * (b.x - a.x);
    return map_.nearest_root(base_line_point(line_, s), guess);
  }

  ComplexValue x_at(double s) const { return x_in_interval(interval_of(s), s); }

 private:
  RectificationMap map_;
  BaseLine line_;
  std::vector<ContourSample> samples_;
  SamplingPolicy policy_;
};

namespace detail {

// Smallest of the distances that control how finely a neighbourhood of x must
// be resolved: overall size, the two branch points, and the opposite root -x.
inline double local_scale(ComplexValue x) {
  return std::min({1.0 + std::abs(x), std::abs(x - 1.0), std::abs(x + 1.0), std::abs(x)});
}

class HalfTracer {
 public:
  HalfTracer(const RectificationMap& map, const BaseLine& line, const SamplingPolicy& policy)
      : map_(map), line_(line), policy_(policy) {}

  // Samples from the anchor (excluded) out to s_end, in traversal order.
  std::vector<ContourSample> run(const ContourSample& anchor, double s_end) {
    out_.clear();
    current_ = anchor;
    current_w_ = map_.radicand(anchor.z);
    current_flipped_ = false;
    const double dir = s_end > 0 ? 1.0 : -1.0;
    const double len = std::abs(s_end);
    for (long k = 1;; ++k) {
      const double mag = std::min(static_cast<double>(k) * policy_.base_step, len);
      advance(dir * mag, 0);
      if (mag >= len) break;
    }
    return std::move(out_);
  }

 private:
  void advance(double s_target, int depth) {
    const ComplexValue z = base_line_point(line_, s_target);
    const ComplexValue x = map_.nearest_root(z, current_.x);
    const double jump = std::abs(x - current_.x);
    const double scale = std::min(local_scale(x), local_scale(current_.x));
    if (!(jump <= policy_.max_jump * scale)) {
      if (depth >= policy_.max_depth) {
        throw Error(ErrorKind::RefinementExhausted,
                    "continuity bound unreachable near s = " + std::to_string(s_target));
      }
      const double mid = 0.5 * (current_.s + s_target);
      advance(mid, depth + 1);
      advance(s_target, depth + 1);
      return;
    }
    accept(s_target, z, x);
  }

  void accept(double s, ComplexValue z, ComplexValue x) {
    const ComplexValue w = map_.radicand(z);
    const ComplexValue p = ComplexValue(0.0, -1.0) * std::sqrt(w);
    const bool flipped = std::abs(x + p) < std::abs(x - p);
    int sheet = current_.sheet;
    if (flipped != current_flipped_) sheet += current_w_.imag() > 0.0 ? 1 : -1;

    ContourSample sample;
    sample.s = s;
    sample.z = z;
    sample.x = x;
    sample.dxdz = map_derivative(map_, z, x);
    sample.sheet = sheet;
    out_.push_back(sample);
    current_ = sample;
    current_w_ = w;
    current_flipped_ = flipped;
  }

  const RectificationMap& map_;
  const BaseLine& line_;
  const SamplingPolicy& policy_;
  std::vector<ContourSample> out_;
  ContourSample current_;
  ComplexValue current_w_;
  bool current_flipped_ = false;
};

}  // namespace detail

/// Branch-continuous sampling of x(s) over [s_min, s_max], traced outward
/// from the anchor at s = 0.
inline Contour trace_contour(const RectificationMap& map, const BaseLine& line, double s_min, double s_max,
                             const SamplingPolicy& policy = {}) {
  if (!(s_min < 0.0 && 0.0 < s_max) || !std::isfinite(s_min) || !std::isfinite(s_max)) {
    throw Error(ErrorKind::InvalidArgument, "trace range must satisfy s_min < 0 < s_max");
  }
  if (!(policy.base_step > 0.0) || !(policy.max_jump > 0.0) || policy.max_depth < 0) {
    throw Error(ErrorKind::InvalidArgument, "invalid sampling policy");
  }
  const auto nearest = nearest_critical(map.kappa(), line.epsilon());
  if (nearest.distance < policy.critical_guard) {
    throw Error(ErrorKind::CriticalProximity,
                "epsilon = " + std::to_string(line.epsilon()) + " lies within " +
                    std::to_string(policy.critical_guard) + " of critical shift " +
                    std::to_string(nearest.shift->epsilon));
  }

  ContourSample anchor;
  anchor.s = 0.0;
  anchor.z = base_line_point(line, 0.0);
  anchor.x = rectify_anchor(map, line);
  anchor.dxdz = map_derivative(map, anchor.z, anchor.x);

  detail::HalfTracer tracer(map, line, policy);
  auto left = tracer.run(anchor, s_min);
  auto right = tracer.run(anchor, s_max);

  std::vector<ContourSample> samples;
  samples.reserve(left.size() + right.size() + 1);
  samples.insert(samples.end(), left.rbegin(), left.rend());
  samples.push_back(anchor);
  samples.insert(samples.end(), right.begin(), right.end());
  return Contour(map, line, std::move(samples), policy);
}

/// Smallest grid value s > 0 beyond which |x(+-s)| stays at or above radius
/// out to s_limit. |x| is branch independent, so no tracing is needed.
inline double half_range_for_radius(const RectificationMap& map, const BaseLine& line, double radius,
                                    double step = 0.01, double s_limit = 1.0e3) {
  double last_inside = 0.0;
  for (long k = 1;; ++k) {
    const double s = k * step;
    if (s > s_limit) break;
    if (std::abs(map.principal(base_line_point(line, s))) < radius) last_inside = s;
    else if (s > last_inside + 1.0) break;
  }
  return last_inside + step;
}

/// CSV `s,re_z,im_z,re_x,im_x,sheet`, 17 significant digits.
inline void write_contour_csv(std::ostream& os, const Contour& contour) {
  os << "s,re_z,im_z,re_x,im_x,sheet\n";
  char buf[256];
  for (const auto& p : contour.samples()) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", p.s, p.z.real(), p.z.imag(), p.x.real(),
                  p.x.imag(), p.sheet);
    os << buf;
  }
}

}  // namespace toboggan
