#pragma once

// Complex-contour eigenproblem  -psi'' + V(x) psi = E psi  (hbar^2/2m = 1)
// solved by two-sided shooting, either along the traced tobogganic contour
// x(s) or along the straight line z = s - i eps after the Liouville
// substitution phi(z) = psi(x(z)) (dx/dz)^(-1/2), which gives
//   phi'' = [ (dx/dz)^2 (V(x) - E) - S(x; z) / 2 ] phi,
// S being the Schwarzian derivative of x with respect to z.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "toboggan/contour.hpp"
#include "toboggan/errors.hpp"

namespace toboggan {

enum class PotentialFamily { HarmonicPlusPoles, CubicPlusPoles };

struct PotentialSpec {
  PotentialFamily family = PotentialFamily::HarmonicPlusPoles;
  double coupling = 0.0;  // F for the harmonic family, G for the cubic one
  double pole_tolerance = 1e-3;
};

namespace detail {

inline void check_poles(const PotentialSpec& spec, ComplexValue x) {
  if (std::abs(x - 1.0) < spec.pole_tolerance || std::abs(x + 1.0) < spec.pole_tolerance) {
    throw Error(ErrorKind::PoleProximity, "potential evaluated within " + std::to_string(spec.pole_tolerance) +
                                              " of a pole at x = +-1");
  }
}

}  // namespace detail

/// x^2 + F/(x-1)^2 + F/(x+1)^2  or  i x^3 + G/(x-1)^2 + G/(x+1)^2.
inline ComplexValue potential_eval(const PotentialSpec& spec, ComplexValue x) {
  detail::check_poles(spec, x);
  const ComplexValue a = x - 1.0;
  const ComplexValue b = x + 1.0;
  const ComplexValue poles = spec.coupling / (a * a) + spec.coupling / (b * b);
  if (spec.family == PotentialFamily::HarmonicPlusPoles) return x * x + poles;
  return ComplexValue(0.0, 1.0) * x * x * x + poles;
}

inline ComplexValue potential_derivative(const PotentialSpec& spec, ComplexValue x) {
  detail::check_poles(spec, x);
  const ComplexValue a = x - 1.0;
  const ComplexValue b = x + 1.0;
  const ComplexValue poles = -2.0 * spec.coupling / (a * a * a) - 2.0 * spec.coupling / (b * b * b);
  if (spec.family == PotentialFamily::HarmonicPlusPoles) return 2.0 * x + poles;
  return ComplexValue(0.0, 3.0) * x * x + poles;
}

enum class BoundaryMode { WkbDecay };

enum class Representation {
  Tobogganic,  // integrate in x along the traced contour
  Rectified,   // integrate the transformed equation along the straight line
};

struct ShootingConfig {
  double s_max = 8.0;        // half-range used when a contour is built for shooting
  double step = 0.01;        // largest integration sub-step in s
  double match_point = 0.0;
  BoundaryMode bc_mode = BoundaryMode::WkbDecay;
  double tol_energy = 1e-9;
  int max_iter = 60;
  double local_tol = 1e-12;  // <= 0 selects fixed-step RK4
  double min_step = 1e-10;
  double residual_tol = 1e-8;
};

struct EigenResult {
  ComplexValue energy;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string note;
};

enum class End { Left, Right };

struct SolutionPoint {
  double s = 0.0;
  ComplexValue u;  // psi (or phi on the rectified line)
  ComplexValue v;  // d psi / dx (or d phi / dz)
};

using SolutionTrace = std::vector<SolutionPoint>;

struct InitialData {
  ComplexValue u = 1.0;
  ComplexValue v = 0.0;
};

template <class V>
concept Potential = requires(const V& v, ComplexValue x) {
  { v(x) } -> std::convertible_to<ComplexValue>;
};

/// Callable view of a PotentialSpec.
struct SpecPotential {
  const PotentialSpec& spec;
  ComplexValue operator()(ComplexValue x) const { return potential_eval(spec, x); }
};

/// Coefficient c(s) of phi'' = c phi at z = s - i eps, given x on the traced branch.
template <Potential V>
ComplexValue transformed_rhs(const RectificationMap& map, const BaseLine& line, const V& potential, double s,
                             ComplexValue E, ComplexValue x) {
  const ComplexValue z = base_line_point(line, s);
  const MapJet jet = map_jet(map, z, x);
  return jet.d1 * jet.d1 * (potential(x) - E) - 0.5 * jet.schwarzian();
}

inline ComplexValue transformed_rhs(const RectificationMap& map, const BaseLine& line, const PotentialSpec& spec,
                                    double s, ComplexValue E, ComplexValue x) {
  return transformed_rhs(map, line, SpecPotential{spec}, s, E, x);
}

/// Same, with x resolved on the contour's branch.
inline ComplexValue transformed_rhs(const Contour& c, const PotentialSpec& spec, double s, ComplexValue E) {
  return transformed_rhs(c.map(), c.line(), spec, s, E, c.x_at(s));
}

namespace detail {

using State = std::array<ComplexValue, 2>;

inline State axpy(const State& y, ComplexValue h, const State& k) { return {y[0] + h * k[0], y[1] + h * k[1]}; }

inline double state_norm(const State& y) { return std::max(std::abs(y[0]), std::abs(y[1])); }

template <class Rhs>
State rk4_step(const Rhs& f, std::size_t interval, double s, const State& y, double h) {
  const State k1 = f(interval, s, y);
  const State k2 = f(interval, s + 0.5 * h, axpy(y, 0.5 * h, k1));
  const State k3 = f(interval, s + 0.5 * h, axpy(y, 0.5 * h, k2));
  const State k4 = f(interval, s + h, axpy(y, h, k3));
  return {y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
          y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

// Integrates over [from, to] inside one sample interval.
template <class Rhs>
State integrate_interval(const Rhs& f, std::size_t interval, double from, double to, State y,
                         const ShootingConfig& cfg) {
  const double len = to - from;
  if (len == 0.0) return y;
  if (cfg.local_tol <= 0.0) {
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(len) / cfg.step - 1e-9)));
    const double h = len / static_cast<double>(n);
    for (long k = 0; k < n; ++k) y = rk4_step(f, interval, from + static_cast<double>(k) * h, y, h);
    return y;
  }
  const double dir = len > 0 ? 1.0 : -1.0;
  double s = from;
  double h = dir * std::min(cfg.step, std::abs(len));
  while (dir * (to - s) > 0.0) {
    if (dir * (s + h - to) > 0.0) h = to - s;
    const State full = rk4_step(f, interval, s, y, h);
    const State half = rk4_step(f, interval, s + 0.5 * h, rk4_step(f, interval, s, y, 0.5 * h), 0.5 * h);
    const double err = state_norm({half[0] - full[0], half[1] - full[1]}) / 15.0;
    if (err <= cfg.local_tol * std::max(state_norm(half), std::numeric_limits<double>::min())) {
      s = (dir * (to - (s + h)) <= 0.0) ? to : s + h;
      y = half;
      h = dir * std::min(cfg.step, 2.0 * std::abs(h));
    } else {
      h *= 0.5;
      if (std::abs(h) < cfg.min_step) {
        throw Error(ErrorKind::StepUnderflow, "local tolerance unreachable near s = " + std::to_string(s));
      }
    }
  }
  return y;
}

// Walks from one end of the contour to the match point, one sample interval
// at a time, recording the state at every sample passed.
template <class Rhs>
SolutionTrace integrate_to_match(const Contour& c, End end, State y, const ShootingConfig& cfg, const Rhs& f) {
  const double match = cfg.match_point;
  if (!(match > c.s_min() && match < c.s_max())) {
    throw Error(ErrorKind::InvalidArgument, "match point outside the contour range");
  }
  SolutionTrace trace;
  if (end == End::Left) {
    trace.push_back({c.s_min(), y[0], y[1]});
    for (std::size_t i = 0; i + 1 < c.size() && c[i].s < match; ++i) {
      const double to = std::min(c[i + 1].s, match);
      y = integrate_interval(f, i, c[i].s, to, y, cfg);
      trace.push_back({to, y[0], y[1]});
    }
  } else {
    trace.push_back({c.s_max(), y[0], y[1]});
    for (std::size_t i = c.size() - 1; i > 0 && c[i].s > match; --i) {
      const double to = std::max(c[i - 1].s, match);
      y = integrate_interval(f, i - 1, c[i].s, to, y, cfg);
      trace.push_back({to, y[0], y[1]});
    }
  }
  return trace;
}

inline void check_contour_poles(const Contour& c, const PotentialSpec& spec) {
  for (const auto& p : c.samples()) check_poles(spec, p.x);
}

}  // namespace detail

/// Decaying WKB data psi = 1, psi' = -(q + V'/(4 (V - E))) at one end, with
/// the branch of q = sqrt(V - E) that decays in the outward direction.
inline InitialData wkb_initial(const Contour& c, const PotentialSpec& spec, ComplexValue E, End end) {
  const ContourSample& p = end == End::Left ? c.front() : c.back();
  const ComplexValue outward = end == End::Right ? p.dxdz : -p.dxdz;
  const ComplexValue D = potential_eval(spec, p.x) - E;
  ComplexValue q = std::sqrt(D);
  if ((q * outward).real() < 0.0) q = -q;
  return {1.0, -(q + potential_derivative(spec, p.x) / (4.0 * D))};
}

/// psi and d psi/dx from one end of the contour to the match point, for an
/// arbitrary potential and explicit initial data.
template <Potential V>
SolutionTrace integrate_along_contour(const Contour& c, const V& potential, ComplexValue E, End end,
                                      const ShootingConfig& cfg, const InitialData& initial) {
  const RectificationMap& map = c.map();
  const BaseLine& line = c.line();
  auto rhs = [&](std::size_t interval, double s, const detail::State& y) -> detail::State {
    const ComplexValue x = c.x_in_interval(interval, s);
    const ComplexValue xs = map_derivative(map, base_line_point(line, s), x);
    return {y[1] * xs, (potential(x) - E) * y[0] * xs};
  };
  return detail::integrate_to_match(c, end, {initial.u, initial.v}, cfg, rhs);
}

/// Default initial data is the decaying WKB data at the chosen end.
inline SolutionTrace integrate_along_contour(const Contour& c, const PotentialSpec& spec, ComplexValue E, End end,
                                             const ShootingConfig& cfg = {},
                                             std::optional<InitialData> initial = std::nullopt) {
  detail::check_contour_poles(c, spec);
  const InitialData init = initial ? *initial : wkb_initial(c, spec, E, end);
  return integrate_along_contour(c, SpecPotential{spec}, E, end, cfg, init);
}

/// Converts contour data (psi, psi_x) at a sample into rectified-line data
/// (phi, phi_z), normalized to phi = 1; only the log-derivative is carried.
inline InitialData to_rectified(const Contour& c, std::size_t index, const InitialData& psi) {
  const auto& p = c[index];
  const MapJet jet = map_jet(c.map(), p.z, p.x);
  return {1.0, jet.d1 * psi.v / psi.u - 0.5 * jet.d2 / jet.d1};
}

/// phi and d phi/dz along the straight line from one end to the match point.
template <Potential V>
SolutionTrace integrate_rectified(const Contour& c, const V& potential, ComplexValue E, End end,
                                  const ShootingConfig& cfg, const InitialData& initial) {
  auto rhs = [&](std::size_t interval, double s, const detail::State& y) -> detail::State {
    const ComplexValue x = c.x_in_interval(interval, s);
    return {y[1], transformed_rhs(c.map(), c.line(), potential, s, E, x) * y[0]};
  };
  return detail::integrate_to_match(c, end, {initial.u, initial.v}, cfg, rhs);
}

/// Default initial data is the contour WKB data mapped through the
/// Liouville substitution.
inline SolutionTrace integrate_rectified(const Contour& c, const PotentialSpec& spec, ComplexValue E, End end,
                                         const ShootingConfig& cfg = {},
                                         std::optional<InitialData> initial = std::nullopt) {
  detail::check_contour_poles(c, spec);
  const std::size_t end_index = end == End::Left ? 0 : c.size() - 1;
  const InitialData init = initial ? *initial : to_rectified(c, end_index, wkb_initial(c, spec, E, end));
  return integrate_rectified(c, SpecPotential{spec}, E, end, cfg, init);
}

/// sqrt(dx/dz(s_to) / dx/dz(s_from)) continued sample by sample.
inline ComplexValue continued_derivative_root(const Contour& c, std::size_t from, std::size_t to) {
  ComplexValue r = 1.0;
  const ComplexValue base = c[from].dxdz;
  const long step = to >= from ? 1 : -1;
  for (long i = static_cast<long>(from); i != static_cast<long>(to);) {
    i += step;
    const ComplexValue next = std::sqrt(c[static_cast<std::size_t>(i)].dxdz / base);
    r = std::abs(next - r) <= std::abs(next + r) ? next : -next;
  }
  return r;
}

/// Maps rectified-line data at sample `index` back to (psi, psi_x), for a
/// solution whose line data started at sample `start` from contour data
/// psi(start) = start_psi.
inline InitialData to_tobogganic(const Contour& c, std::size_t start, ComplexValue start_psi, std::size_t index,
                                 const InitialData& phi) {
  const auto& p = c[index];
  const MapJet jet = map_jet(c.map(), p.z, p.x);
  // psi = C (dx/dz)^(1/2) phi with C fixed by psi(start) = start_psi, phi(start) = 1.
  const ComplexValue psi = start_psi * continued_derivative_root(c, start, index) * phi.u;
  const ComplexValue log_derivative = (phi.v / phi.u + 0.5 * jet.d2 / jet.d1) / jet.d1;
  return {psi, log_derivative * psi};
}

/// Normalized Wronskian (u_L v_R - u_R v_L) / (|y_L| |y_R|) at the match point.
/// The positive real normalization leaves the zeros in E unchanged.
inline ComplexValue shoot_match(const Contour& c, Representation rep, const PotentialSpec& spec,
                                const ShootingConfig& cfg, ComplexValue E) {
  SolutionTrace left, right;
  if (rep == Representation::Tobogganic) {
    left = integrate_along_contour(c, spec, E, End::Left, cfg);
    right = integrate_along_contour(c, spec, E, End::Right, cfg);
  } else {
    left = integrate_rectified(c, spec, E, End::Left, cfg);
    right = integrate_rectified(c, spec, E, End::Right, cfg);
  }
  const SolutionPoint& L = left.back();
  const SolutionPoint& R = right.back();
  const double nl = std::hypot(std::abs(L.u), std::abs(L.v));
  const double nr = std::hypot(std::abs(R.u), std::abs(R.v));
  return (L.u * R.v - R.u * L.v) / (nl * nr);
}

/// Secant iteration on the matching function from each seed.
inline EigenResult refine_eigenvalue(const Contour& c, Representation rep, const PotentialSpec& spec,
                                     const ShootingConfig& cfg, ComplexValue seed) {
  EigenResult out;
  out.energy = seed;
  try {
    ComplexValue e0 = seed;
    ComplexValue e1 = seed + 1e-3 * (1.0 + std::abs(seed));
    ComplexValue w0 = shoot_match(c, rep, spec, cfg, e0);
    ComplexValue w1 = shoot_match(c, rep, spec, cfg, e1);
    for (int it = 1; it <= cfg.max_iter; ++it) {
      out.iterations = it;
      if (w1 == w0) {
        out.note = "secant stalled";
        break;
      }
      const ComplexValue e2 = e1 - w1 * (e1 - e0) / (w1 - w0);
      const ComplexValue w2 = shoot_match(c, rep, spec, cfg, e2);
      e0 = e1;
      w0 = w1;
      e1 = e2;
      w1 = w2;
      out.energy = e1;
      out.residual = std::abs(w1);
      if (std::abs(e1 - e0) < cfg.tol_energy) {
        out.converged = out.residual < cfg.residual_tol;
        if (!out.converged) out.note = "residual above threshold";
        return out;
      }
      if (!std::isfinite(e1.real()) || !std::isfinite(e1.imag())) {
        out.note = "iteration diverged";
        break;
      }
    }
    if (out.note.empty()) out.note = "max_iter reached";
  } catch (const Error& e) {
    out.note = e.what();
  }
  out.converged = false;
  return out;
}

/// Converged roots are deduplicated within 10 tol_energy; all results are
/// returned sorted by real part, unconverged seeds included.
inline std::vector<EigenResult> find_eigenvalues(const Contour& c, Representation rep, const PotentialSpec& spec,
                                                 const ShootingConfig& cfg, const std::vector<ComplexValue>& seeds) {
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds.size(); ++j) {
      if (seeds[i] == seeds[j]) throw Error(ErrorKind::InvalidArgument, "seeds must be pairwise distinct");
    }
  }
  std::vector<EigenResult> found;
  for (const auto& seed : seeds) {
    EigenResult r = refine_eigenvalue(c, rep, spec, cfg, seed);
    if (r.converged) {
      const bool duplicate = std::any_of(found.begin(), found.end(), [&](const EigenResult& o) {
        return o.converged && std::abs(o.energy - r.energy) < 10.0 * cfg.tol_energy;
      });
      if (duplicate) continue;
    }
    found.push_back(std::move(r));
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const EigenResult& a, const EigenResult& b) { return a.energy.real() < b.energy.real(); });
  return found;
}

/// Contour suitable for shooting: symmetric range reaching |x| >= radius.
inline Contour shooting_contour(const RectificationMap& map, const BaseLine& line, double radius,
                                const SamplingPolicy& policy = {}) {
  const double half = half_range_for_radius(map, line, radius);
  return trace_contour(map, line, -half, half, policy);
}

/// CSV `re_E,im_E,residual,iterations,converged`.
inline void write_spectrum_csv(std::ostream& os, const std::vector<EigenResult>& results) {
  os << "re_E,im_E,residual,iterations,converged\n";
  char buf[256];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%d\n", r.energy.real(), r.energy.imag(), r.residual,
                  r.iterations, r.converged ? 1 : 0);
    os << buf;
  }
}

}  // namespace toboggan
