// Reference-generator and determinism-infrastructure tests.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "indilab/reference.hpp"
#include "indilab/rng.hpp"

using namespace indilab;
using namespace indilab::reference;
using Eigen::VectorXd;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ============================================================================
// step / constant
// ============================================================================

TEST_CASE("step reference switches at the start time", "[reference]") {
  ReferenceSignal r = ReferenceSignal::step(0.2, 0.5);
  REQUIRE(r.eval(0.0).y == 0.0);
  REQUIRE(r.eval(0.4999).y == 0.0);
  REQUIRE(r.eval(0.5).y == 0.2);
  REQUIRE(r.eval(4.0).y == 0.2);
  REQUIRE(r.eval(0.5).ydot == 0.0);
  REQUIRE(r.eval(2.0).ydot == 0.0);
}

TEST_CASE("constant reference holds its level from t=0", "[reference]") {
  ReferenceSignal r = ReferenceSignal::constant(0.3);
  REQUIRE(r.eval(0.0).y == 0.3);
  REQUIRE(r.eval(10.0).y == 0.3);
  REQUIRE(r.eval(0.0).ydot == 0.0);
}

TEST_CASE("zero reference", "[reference]") {
  ReferenceSignal r = ReferenceSignal::zero();
  REQUIRE(r.eval(1.0).y == 0.0);
  REQUIRE(r.eval(1.0).ydot == 0.0);
}

// ============================================================================
// smooth doublet
// ============================================================================

TEST_CASE("doublet: plateau levels and timing", "[reference][doublet]") {
  // amp 0.2, start 0.5, plateau 1.0, edge 0.2:
  //   0 | rise .5-.7 | +A .7-1.7 | fall 1.7-1.9 | -A 1.9-2.9 | rise 2.9-3.1 | 0
  ReferenceSignal r = ReferenceSignal::smooth_doublet(0.2, 0.5, 1.0, 0.2);
  REQUIRE(r.eval(0.0).y == 0.0);
  REQUIRE(r.eval(0.49).y == 0.0);
  REQUIRE(r.eval(0.7).y == Catch::Approx(0.2).margin(1e-15));
  REQUIRE(r.eval(1.2).y == Catch::Approx(0.2).margin(1e-15));
  REQUIRE(r.eval(1.9).y == Catch::Approx(-0.2).margin(1e-15));
  REQUIRE(r.eval(2.4).y == Catch::Approx(-0.2).margin(1e-15));
  REQUIRE(r.eval(3.1).y == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(r.eval(4.0).y == 0.0);
  // plateaus have zero slope
  REQUIRE(r.eval(1.2).ydot == 0.0);
  REQUIRE(r.eval(2.4).ydot == 0.0);
}

TEST_CASE("doublet: edge midpoints hit the closed-form values",
          "[reference][doublet]") {
  ReferenceSignal r = ReferenceSignal::smooth_doublet(0.2, 0.5, 1.0, 0.2);
  // first edge midpoint t=0.6: y = A/2, ydot = A*pi/(2*Te)
  REQUIRE(r.eval(0.6).y == Catch::Approx(0.1).epsilon(1e-13));
  REQUIRE(r.eval(0.6).ydot == Catch::Approx(0.2 * kPi / 0.4).epsilon(1e-13));
  // second edge midpoint t=1.8: y = 0, ydot = -2A*pi/(2*Te)
  REQUIRE(r.eval(1.8).y == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(r.eval(1.8).ydot == Catch::Approx(-0.4 * kPi / 0.4).epsilon(1e-13));
  // third edge midpoint t=3.0: y = -A/2, ydot = +A*pi/(2*Te)
  REQUIRE(r.eval(3.0).y == Catch::Approx(-0.1).epsilon(1e-13));
  REQUIRE(r.eval(3.0).ydot == Catch::Approx(0.2 * kPi / 0.4).epsilon(1e-13));
}

TEST_CASE("doublet is C1: value and slope continuous at every joint",
          "[reference][doublet]") {
  ReferenceSignal r = ReferenceSignal::smooth_doublet(0.2, 0.5, 1.0, 0.2);
  const double joints[6] = {0.5, 0.7, 1.7, 1.9, 2.9, 3.1};
  const double eps = 1e-9;
  for (double tj : joints) {
    const auto lo = r.eval(tj - eps), hi = r.eval(tj + eps);
    REQUIRE(std::abs(hi.y - lo.y) < 1e-7);
    REQUIRE(std::abs(hi.ydot - lo.ydot) < 1e-6);
  }
}

TEST_CASE("doublet derivative matches a central difference away from joints",
          "[reference][doublet]") {
  ReferenceSignal r = ReferenceSignal::smooth_doublet(0.2, 0.5, 1.0, 0.2);
  const double h = 1e-6;
  for (double t : {0.55, 0.62, 1.75, 1.84, 2.95, 3.04, 1.3, 2.2}) {
    const double fd = (r.eval(t + h).y - r.eval(t - h).y) / (2.0 * h);
    REQUIRE(fd == Catch::Approx(r.eval(t).ydot).margin(1e-6));
  }
}

TEST_CASE("doublet derivative integrates back to the value", "[reference][doublet]") {
  ReferenceSignal r = ReferenceSignal::smooth_doublet(0.2, 0.5, 1.0, 0.2);
  const double h = 1e-4;
  double acc = 0.0;
  double worst = 0.0;
  for (double t = 0.0; t < 4.0; t += h) {
    acc += 0.5 * h * (r.eval(t).ydot + r.eval(t + h).ydot);
    worst = std::max(worst, std::abs(acc - r.eval(t + h).y));
  }
  REQUIRE(worst < 1e-6);
}

TEST_CASE("doublet with zero edge duration degenerates to hard switching",
          "[reference][doublet]") {
  ReferenceSignal r = ReferenceSignal::smooth_doublet(0.2, 0.5, 1.0, 0.0);
  REQUIRE(r.eval(0.4999).y == 0.0);
  REQUIRE(r.eval(0.5).y == 0.2);
  REQUIRE(r.eval(1.4999).y == 0.2);
  REQUIRE(r.eval(1.5).y == -0.2);
  REQUIRE(r.eval(2.4999).y == -0.2);
  REQUIRE(r.eval(2.5).y == 0.0);
  for (double t = 0.0; t <= 4.0; t += 0.01) REQUIRE(r.eval(t).ydot == 0.0);
}

TEST_CASE("doublet validates parameters", "[reference][errors]") {
  REQUIRE_THROWS_AS(ReferenceSignal::smooth_doublet(0.2, 0.5, -1.0, 0.2),
                    ConfigError);
  REQUIRE_THROWS_AS(ReferenceSignal::smooth_doublet(0.2, 0.5, 1.0, -0.2),
                    ConfigError);
  const double nan = std::nan("");
  REQUIRE_THROWS_AS(ReferenceSignal::smooth_doublet(nan, 0.5, 1.0, 0.2),
                    ConfigError);
}

// ============================================================================
// table
// ============================================================================

TEST_CASE("table reference interpolates linearly and holds the ends",
          "[reference][table]") {
  ReferenceSignal r = ReferenceSignal::table({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
  REQUIRE(r.eval(0.5).y == Catch::Approx(0.5).epsilon(1e-15));
  REQUIRE(r.eval(0.5).ydot == Catch::Approx(1.0).epsilon(1e-15));
  REQUIRE(r.eval(1.5).y == Catch::Approx(0.5).epsilon(1e-15));
  REQUIRE(r.eval(1.5).ydot == Catch::Approx(-1.0).epsilon(1e-15));
  // knot lands in the following segment
  REQUIRE(r.eval(1.0).y == Catch::Approx(1.0).epsilon(1e-15));
  REQUIRE(r.eval(1.0).ydot == Catch::Approx(-1.0).epsilon(1e-15));
  // hold flat outside
  REQUIRE(r.eval(-1.0).y == 0.0);
  REQUIRE(r.eval(-1.0).ydot == 0.0);
  REQUIRE(r.eval(3.0).y == 0.0);
  REQUIRE(r.eval(3.0).ydot == 0.0);
}

TEST_CASE("table validates its knots", "[reference][table][errors]") {
  REQUIRE_THROWS_AS(ReferenceSignal::table({0.0, 1.0}, {0.0}), ConfigError);
  REQUIRE_THROWS_AS(ReferenceSignal::table({0.0}, {1.0}), ConfigError);
  REQUIRE_THROWS_AS(ReferenceSignal::table({0.0, 0.0}, {0.0, 1.0}), ConfigError);
  REQUIRE_THROWS_AS(ReferenceSignal::table({1.0, 0.5}, {0.0, 1.0}), ConfigError);
  REQUIRE_THROWS_AS(ReferenceSignal::table({0.0, std::nan("")}, {0.0, 1.0}),
                    ConfigError);
}

// ============================================================================
// bank
// ============================================================================

TEST_CASE("reference bank routes one signal per channel", "[reference][bank]") {
  ReferenceBank bank =
      ReferenceBank::single(3, 1, ReferenceSignal::step(0.2, 0.5));
  VectorXd y, ydot;
  bank.eval(1.0, y, ydot);
  REQUIRE(y.size() == 3);
  REQUIRE(y[0] == 0.0);
  REQUIRE(y[1] == 0.2);
  REQUIRE(y[2] == 0.0);
  REQUIRE(ydot.cwiseAbs().maxCoeff() == 0.0);

  ReferenceBank z = ReferenceBank::zeros(2);
  z.eval(3.0, y, ydot);
  REQUIRE(y.size() == 2);
  REQUIRE(y.cwiseAbs().maxCoeff() == 0.0);

  REQUIRE_THROWS_AS(ReferenceBank::single(2, 2, ReferenceSignal::zero()),
                    ConfigError);
  REQUIRE_THROWS_AS(ReferenceBank::zeros(0), ConfigError);
}

// ============================================================================
// gaussian stream
// ============================================================================

TEST_CASE("gaussian stream is bitwise reproducible for a given seed", "[rng]") {
  rng::GaussianStream a(42), b(42), c(43);
  bool any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double xa = a.next(), xb = b.next(), xc = c.next();
    REQUIRE(xa == xb);
    if (xa != xc) any_diff = true;
  }
  REQUIRE(any_diff);
}

TEST_CASE("gaussian stream has standard-normal moments", "[rng]") {
  rng::GaussianStream g(7);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = g.next();
    REQUIRE(std::isfinite(x));
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.015);
  REQUIRE(std::abs(std::sqrt(var) - 1.0) < 0.01);
}

// ============================================================================
// fnv-1a 64
// ============================================================================

TEST_CASE("fnv1a64 matches the published test vectors", "[rng][hash]") {
  REQUIRE(rng::fnv1a64("") == 0xcbf29ce484222325ull);
  REQUIRE(rng::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  REQUIRE(rng::fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("fnv1a64_hex renders fixed-width lowercase hex", "[rng][hash]") {
  REQUIRE(rng::fnv1a64_hex("") == "cbf29ce484222325");
  REQUIRE(rng::fnv1a64_hex("foobar") == "85944171f73967e8");
  REQUIRE(rng::fnv1a64_hex("indilab") == "2d5bf0ffc101b374");
  REQUIRE(rng::fnv1a64_hex("x").size() == 16);
}
