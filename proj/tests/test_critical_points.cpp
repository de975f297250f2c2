#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "support/table1.hpp"
#include "toboggan/critical_points.hpp"

using namespace toboggan;
using toboggan::testing::kTable1;
using toboggan::testing::matches_printed;

namespace {

// Independent route: (eps + i s)^2 = exp(i theta) - 1 = 2 sin(theta/2) exp(i (theta/2 + pi/2)).
struct PolarRoot {
  double epsilon, s_abs;
};

PolarRoot polar_root(int M, int m) {
  const double theta = 2.0 * std::numbers::pi * m / (2.0 * M + 1.0);
  const double r = std::sqrt(2.0 * std::sin(0.5 * theta));
  const double arg = 0.25 * theta + 0.25 * std::numbers::pi;
  return {r * std::cos(arg), r * std::sin(arg)};
}

const CriticalShift& row_with_m(const std::vector<CriticalShift>& rows, int m) {
  for (const auto& r : rows) {
    if (r.m == m) return r;
  }
  FAIL("missing m = " << m);
  return rows.front();
}

}  // namespace

TEST_CASE("critical_table reproduces the printed transition parameters", "[critical]") {
  for (const auto& printed : kTable1) {
    const auto rows = critical_table(printed.M);
    const auto& r = row_with_m(rows, printed.m);
    INFO("M=" << printed.M << " m=" << printed.m);
    const double eps_printed = std::stod(std::string(printed.epsilon));
    CHECK(std::abs(r.epsilon - eps_printed) / eps_printed < 1e-15);
    CHECK(matches_printed(r.B, printed.B));
    CHECK(matches_printed(r.s_abs, printed.s_abs));
    CHECK(matches_printed(r.phi, printed.phi));
  }
}

TEST_CASE("critical_table examples", "[critical]") {
  SECTION("M = 1") {
    const auto rows = critical_table(1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].m == 1);
    CHECK(rows[0].epsilon == Catch::Approx(0.34062501931660664017).epsilon(1e-15));
  }
  SECTION("M = 2 is sorted by epsilon with m retained") {
    const auto rows = critical_table(2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].m == 2);
    CHECK(rows[0].epsilon == Catch::Approx(0.21574989943840034163).epsilon(1e-15));
    CHECK(rows[1].m == 1);
    CHECK(rows[1].epsilon == Catch::Approx(0.49223342986833679823).epsilon(1e-15));
  }
  SECTION("M = 6, m = 6") {
    const auto r = critical_shift(6, 6);
    CHECK(r.epsilon == Catch::Approx(0.085076232785825555735).epsilon(1e-15));
    CHECK(matches_printed(r.phi, "0.06042"));
  }
  SECTION("ordinal lookup") {
    CHECK(critical_by_ordinal(2, 1).m == 2);
    CHECK(critical_by_ordinal(2, 2).m == 1);
    CHECK_THROWS_AS(critical_by_ordinal(2, 3), Error);
  }
  SECTION("invalid M") { CHECK_THROWS_AS(critical_table(0), Error); }
}

TEST_CASE("record invariants hold for every M up to 64", "[critical][property]") {
  for (int M = 1; M <= 64; ++M) {
    const auto rows = critical_table(M);
    REQUIRE(rows.size() == static_cast<std::size_t>(M));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      INFO("M=" << M << " m=" << r.m);
      CHECK(std::abs(r.s_abs * r.s_abs - r.epsilon * r.epsilon - r.A) < 1e-14);
      CHECK(std::abs(2.0 * r.s_abs * r.epsilon - r.B) < 1e-14);
      CHECK(std::abs(r.A - (1.0 - std::cos(r.theta))) < 1e-15);
      CHECK(r.B >= 0.0);
      CHECK(r.epsilon > 0.0);
      if (i > 0) CHECK(rows[i - 1].epsilon <= r.epsilon);

      const auto oracle = polar_root(M, r.m);
      CHECK(std::abs(r.epsilon - oracle.epsilon) < 1e-14);
      CHECK(std::abs(r.s_abs - oracle.s_abs) < 1e-14);
    }
  }
}

TEST_CASE("angle follows (2(M-m)+1) pi / (4(2M+1)) for M <= 6", "[critical][property]") {
  for (int M = 1; M <= 6; ++M) {
    for (const auto& r : critical_table(M)) {
      const double closed = (2.0 * (M - r.m) + 1.0) * std::numbers::pi / (4.0 * (2.0 * M + 1.0));
      CHECK(std::abs(r.phi - closed) < 1e-12);
    }
  }
}

TEST_CASE("flip_residual", "[critical]") {
  SECTION("every printed row") {
    for (const auto& printed : kTable1) CHECK(flip_residual(critical_shift(printed.M, printed.m)) < 1e-12);
  }
  SECTION("M = 1 closed form is exact") { CHECK(flip_residual(critical_shift(1, 1)) < 1e-14); }
  SECTION("perturbed record") {
    auto r = critical_shift(1, 1);
    r.epsilon += 1e-3;
    CHECK(flip_residual(r) > 1e-4);
  }
}

TEST_CASE("nearest_critical", "[critical]") {
  SECTION("kappa = 3") {
    const auto n = nearest_critical(3, 0.34);
    REQUIRE(n.shift);
    CHECK(n.distance == Catch::Approx(0.34062501931660664017 - 0.34).epsilon(1e-12));
    CHECK(n.distance == Catch::Approx(0.000625).margin(1e-6));
  }
  SECTION("kappa = 5 near the first flip") {
    const auto n = nearest_critical(5, 0.2152);
    REQUIRE(n.shift);
    CHECK(n.shift->m == 2);
    CHECK(n.distance == Catch::Approx(0.00055).margin(1e-6));
  }
  SECTION("kappa = 1 has no flips") {
    const auto n = nearest_critical(1, 0.3);
    CHECK_FALSE(n.shift);
    CHECK(std::isinf(n.distance));
  }
  SECTION("even kappa rejected") { CHECK_THROWS_AS(nearest_critical(4, 0.3), Error); }
}

TEST_CASE("critical CSV carries 20 significant digits on epsilon", "[critical][io]") {
  std::ostringstream os;
  write_critical_csv(os, critical_table(1));
  const std::string text = os.str();
  CHECK(text.rfind("M,m,B,epsilon,s_abs,phi\n", 0) == 0);
  // 20 digits of the nearest double, which agree with the printed value to 16.
  CHECK(text.find(",0.3406250193166066") != std::string::npos);
  std::istringstream in(text);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  // fields: M, m, B, epsilon, ...
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) pos = row.find(',', pos) + 1;
  const std::string eps = row.substr(pos, row.find(',', pos) - pos);
  std::size_t digits = 0;
  for (char ch : eps) digits += (ch >= '0' && ch <= '9') ? 1 : 0;
  CHECK(digits == 21);  // leading zero plus 20 significant digits
}
