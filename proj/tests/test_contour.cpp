#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "toboggan/contour.hpp"

using namespace toboggan;

namespace {

Contour trace(int kappa, double eps, double s_min, double s_max, SamplingPolicy policy = {}) {
  return trace_contour(RectificationMap::from_kappa(kappa), BaseLine(eps), s_min, s_max, policy);
}

double max_mirror_defect(const Contour& c) {
  std::map<double, ComplexValue> by_s;
  for (const auto& p : c.samples()) by_s[p.s] = p.x;
  double worst = 0.0;
  std::size_t pairs = 0;
  for (const auto& p : c.samples()) {
    auto it = by_s.find(-p.s);
    REQUIRE(it != by_s.end());
    worst = std::max(worst, std::abs(it->second + std::conj(p.x)));
    ++pairs;
  }
  REQUIRE(pairs == c.size());
  return worst;
}

}  // namespace

TEST_CASE("base_line_point", "[contour]") {
  CHECK(base_line_point(BaseLine(0.25), 0.0) == ComplexValue(0.0, -0.25));
  CHECK(base_line_point(BaseLine(0.4), 1.0) == ComplexValue(1.0, -0.4));
  CHECK(base_line_point(BaseLine(0.25), -2.0) == ComplexValue(-2.0, -0.25));
  CHECK_THROWS_AS(BaseLine(0.0), Error);
  CHECK_THROWS_AS(BaseLine(-1.0), Error);
}

TEST_CASE("rectification map parameters", "[contour]") {
  CHECK(RectificationMap::from_kappa(5).M() == 2);
  CHECK(RectificationMap::from_M(3).kappa() == 7);
  CHECK_THROWS_AS(RectificationMap::from_kappa(2), Error);
  CHECK_THROWS_AS(RectificationMap::from_kappa(0), Error);
}

TEST_CASE("rectify_anchor", "[contour]") {
  const auto k1 = RectificationMap::from_kappa(1);
  const auto k3 = RectificationMap::from_kappa(3);
  CHECK(std::abs(rectify_anchor(k1, BaseLine(0.25)) - ComplexValue(0.0, -0.25)) < 1e-15);
  CHECK(std::abs(rectify_anchor(k3, BaseLine(0.25)) - ComplexValue(0.0, -0.446612685248639125575)) < 1e-15);
  CHECK(std::abs(rectify_anchor(k3, BaseLine(0.4)) - ComplexValue(0.0, -0.748929903261980853855)) < 1e-15);

  for (int kappa : {1, 3, 5, 7, 9}) {
    for (double eps : {0.05, 0.25, 0.4, 1.3}) {
      const auto x0 = rectify_anchor(RectificationMap::from_kappa(kappa), BaseLine(eps));
      CHECK(x0.real() == 0.0);
      CHECK(x0.imag() < 0.0);
    }
  }
}

TEST_CASE("map_derivative", "[contour]") {
  const auto k1 = RectificationMap::from_kappa(1);
  const auto k3 = RectificationMap::from_kappa(3);
  SECTION("identity map") {
    const ComplexValue z(0.7, -0.25);
    CHECK(std::abs(map_derivative(k1, z, k1.nearest_root(z, z)) - 1.0) < 1e-15);
  }
  SECTION("kappa = 3 at the anchor") {
    const ComplexValue z(0.0, -0.25);
    const ComplexValue d = map_derivative(k3, z, rectify_anchor(k3, BaseLine(0.25)));
    CHECK(d.real() == Catch::Approx(1.89578065170413768359).epsilon(1e-14));
    CHECK(std::abs(d.imag()) < 1e-15);
  }
  SECTION("origin is singular") { CHECK_THROWS_AS(map_derivative(k3, ComplexValue(1.0, 0.0), 0.0), Error); }
  SECTION("agrees with central differences along a trace") {
    for (int kappa : {3, 5}) {
      const auto c = trace(kappa, 0.25, -3.0, 3.0);
      const double h = 1e-4;
      double worst = 0.0;
      for (std::size_t i = 1; i + 1 < c.size(); i += 7) {
        const double s = c[i].s;
        const ComplexValue fd = (c.x_at(s + h) - c.x_at(s - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - c[i].dxdz) / std::max(1.0, std::abs(c[i].dxdz)));
      }
      INFO("kappa=" << kappa);
      CHECK(worst < 1e-6);
    }
  }
}

TEST_CASE("trace_contour basics", "[contour]") {
  SECTION("anchor sample equals rectify_anchor") {
    const auto c = trace(3, 0.25, -8.0, 8.0);
    const auto i = c.anchor_index();
    REQUIRE(i < c.size());
    CHECK(c[i].x == rectify_anchor(c.map(), c.line()));
    CHECK(c[i].sheet == 0);
    CHECK(c.s_min() == -8.0);
    CHECK(c.s_max() == 8.0);
  }
  SECTION("asymmetric range") {
    const auto c = trace(3, 0.25, -1.5, 4.0);
    CHECK(c.s_min() == -1.5);
    CHECK(c.s_max() == 4.0);
    CHECK(c.anchor_index() < c.size());
  }
  SECTION("kappa = 1 coincides with the base line") {
    const auto c = trace(1, 0.25, -5.0, 5.0);
    for (const auto& p : c.samples()) CHECK(std::abs(p.x - p.z) < 1e-12);
  }
  SECTION("invalid ranges") {
    CHECK_THROWS_AS(trace(3, 0.25, 0.0, 8.0), Error);
    CHECK_THROWS_AS(trace(3, 0.25, -8.0, -1.0), Error);
  }
  SECTION("critical proximity") {
    try {
      trace(3, 0.34062502, -8.0, 8.0);
      FAIL("expected CriticalProximity");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::CriticalProximity);
    }
    CHECK_NOTHROW(trace(3, 0.3406, -8.0, 8.0));
  }
  SECTION("refinement exhaustion") {
    SamplingPolicy p;
    p.base_step = 1.0;
    p.max_depth = 0;
    try {
      trace(3, 0.25, -8.0, 8.0, p);
      FAIL("expected RefinementExhausted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::RefinementExhausted);
    }
  }
}

TEST_CASE("traced contours satisfy the map invariants", "[contour][property]") {
  struct Case {
    int kappa;
    double eps;
  };
  for (auto [kappa, eps] : {Case{3, 0.25}, Case{3, 0.4}, Case{5, 0.3}, Case{7, 0.2}, Case{9, 0.11}}) {
    INFO("kappa=" << kappa << " eps=" << eps);
    const auto c = trace(kappa, eps, -6.0, 6.0);
    const auto& policy = c.policy();
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto& p = c[i];
      const ComplexValue w = c.map().radicand(p.z);
      CHECK(std::abs(p.x * p.x + w) < 1e-10 * std::max(1.0, std::abs(w)));
      CHECK(p.z == base_line_point(c.line(), p.s));
      if (i > 0) {
        const auto& q = c[i - 1];
        const double scale = std::min(detail::local_scale(p.x), detail::local_scale(q.x));
        CHECK(std::abs(p.x - q.x) <= policy.max_jump * scale);
      }
    }
    CHECK(max_mirror_defect(c) < 1e-9);
  }
}

TEST_CASE("asymptotic direction parallels the real axis", "[contour]") {
  const auto c = trace(3, 0.25, -20.0, 20.0);
  const ComplexValue d = c.back().dxdz;
  CHECK(std::abs(d.imag() / d.real()) < 0.1);
}

TEST_CASE("sheet counter is resolution independent", "[contour][property]") {
  struct Case {
    int kappa;
    double eps;
  };
  for (auto [kappa, eps] : {Case{3, 0.25}, Case{3, 0.4}, Case{5, 0.3}, Case{5, 0.497}, Case{7, 0.2}}) {
    SamplingPolicy coarse;
    SamplingPolicy fine;
    fine.base_step = coarse.base_step / 2.0;
    fine.max_jump = coarse.max_jump / 2.0;
    const auto a = trace(kappa, eps, -8.0, 8.0, coarse);
    const auto b = trace(kappa, eps, -8.0, 8.0, fine);
    INFO("kappa=" << kappa << " eps=" << eps);
    CHECK(a.front().sheet == b.front().sheet);
    CHECK(a.back().sheet == b.back().sheet);
    CHECK(a.front().sheet == -a.back().sheet);
    CHECK(std::abs(a.back().x - b.back().x) < 1e-9 * std::abs(a.back().x));
  }
}

TEST_CASE("contour CSV export", "[contour][io]") {
  const auto c = trace(3, 0.25, -1.0, 1.0);
  std::ostringstream os;
  write_contour_csv(os, c);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "s,re_z,im_z,re_x,im_x,sheet");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    std::istringstream fields(line);
    std::string f;
    std::getline(fields, f, ',');
    const double s = std::stod(f);
    CHECK(s == c[rows - 1].s);
    for (int k = 0; k < 2; ++k) std::getline(fields, f, ',');
    std::getline(fields, f, ',');
    CHECK(std::stod(f) == c[rows - 1].x.real());
  }
  CHECK(rows == c.size());
}
