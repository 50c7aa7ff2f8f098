#include "chainrec/cocycle.hpp"
#include "chainrec/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace chainrec;

namespace {

Vec v2(double x, double y) { return Vec{{x, y}}; }

Mat m2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

Mat diag2(double a, double b) { return m2(a, 0, 0, b); }

PeriodicCocycle constant(const Mat& m, std::size_t period) { return PeriodicCocycle(std::vector<Mat>(period, m)); }

const double kLambdaU = (3 + std::sqrt(5.0)) / 2;

PeriodicOrbit orbit_of(std::vector<Vec> pts) {
  PeriodicOrbit o;
  o.period = pts.size();
  o.points = std::move(pts);
  return o;
}

}  // namespace

TEST_SUITE("cocycle") {
  TEST_CASE("cocycle_from_orbit") {
    const System cat = make_system("cat_map");
    const PeriodicCocycle fixed = cocycle_from_orbit(cat, orbit_of({v2(0, 0)}));
    CHECK(fixed.period() == 1);
    CHECK(fixed.at(0) == m2(2, 1, 1, 1));
    CHECK(std::abs(fixed.bound() - kLambdaU) < 1e-12);

    const PeriodicCocycle two = cocycle_from_orbit(cat, orbit_of({v2(0.2, 0.4), v2(0.8, 0.6)}));
    CHECK(two.period_product() == m2(5, 3, 3, 2));

    const System id = make_system("identity", {{"d", 3}});
    const PeriodicCocycle ic = cocycle_from_orbit(id, orbit_of({Vec::Zero(3), Vec::Constant(3, 0.5)}));
    CHECK(ic.bound() == 1.0);
    CHECK(ic.at(1) == Mat::Identity(3, 3));

    CHECK_THROWS_AS(PeriodicCocycle({m2(1, 1, 1, 1)}), Error);
    CHECK_THROWS_AS(PeriodicCocycle(std::vector<Mat>{}), Error);
  }

  TEST_CASE("exact periodic exponents") {
    const double l = std::log(kLambdaU);
    CHECK(l == doctest::Approx(0.9624236501).epsilon(1e-10));
    const LyapunovSpectrum s = exponents_periodic(constant(m2(2, 1, 1, 1), 1));
    REQUIRE(s.exponents.size() == 2);
    CHECK(std::abs(s.exponents[0] + 0.9624236501) < 1e-9);
    CHECK(std::abs(s.exponents[1] - 0.9624236501) < 1e-9);
    CHECK(s.source == SpectrumSource::exact_periodic);

    const LyapunovSpectrum z = exponents_periodic(PeriodicCocycle({diag2(2, 0.5), diag2(0.5, 2)}));
    CHECK(std::abs(z.exponents[0]) < 1e-15);
    CHECK(std::abs(z.exponents[1]) < 1e-15);

    const System cat = make_system("cat_map");
    const LyapunovSpectrum p2 =
        exponents_periodic(cocycle_from_orbit(cat, orbit_of({v2(0.2, 0.4), v2(0.8, 0.6)})));
    CHECK(std::abs(p2.exponents[0] + l) < 1e-9);
    CHECK(std::abs(p2.exponents[1] - l) < 1e-9);

    // rotation: complex pair of modulus one
    const double a = 0.7;
    const LyapunovSpectrum r = exponents_periodic(constant(m2(std::cos(a), -std::sin(a), std::sin(a), std::cos(a)), 3));
    CHECK(std::abs(r.exponents[0]) < 1e-12);
    CHECK(std::abs(r.eigenvalues[0].imag()) > 0.1);
  }

  TEST_CASE("contraction at the period") {
    CHECK(check_contraction_at_period(constant(0.25 * Mat::Identity(2, 2), 8), 1).holds);
    const PeriodicCocycle half = constant(0.5 * Mat::Identity(2, 2), 8);
    const Verdict n1 = check_contraction_at_period(half, 1);
    CHECK_FALSE(n1.holds);
    CHECK(n1.margin == doctest::Approx(8 * std::log(2.0) - 8));
    const Verdict n2 = check_contraction_at_period(half, 2);
    CHECK(n2.holds);
    CHECK(n2.margin == doctest::Approx(8 * std::log(2.0) - 4));
    for (int n = 1; n <= 8; ++n) CHECK_FALSE(check_contraction_at_period(constant(Mat::Identity(2, 2), 8), n).holds);
    CHECK_THROWS_AS(check_contraction_at_period(half, 0), Error);
    CHECK_THROWS_AS(check_contraction_at_period(half, 9), Error);
    // floor block count: tau = 5, N = 2 uses two blocks against e^{-5/2}
    const PeriodicCocycle five = constant(0.5 * Mat::Identity(1, 1), 5);
    CHECK(check_contraction_at_period(five, 2).margin == doctest::Approx(4 * std::log(2.0) - 2.5));
  }

  TEST_CASE("domination") {
    const PeriodicCocycle cat = constant(m2(2, 1, 1, 1), 1);
    const auto split = stable_unstable_splitting(cat);
    REQUIRE(split);
    CHECK(split->dim_e == 1);
    const Verdict v = check_domination(cat, *split, 1);
    CHECK(v.holds);
    CHECK(v.margin == doctest::Approx(2 * std::log(kLambdaU) - 1).epsilon(1e-10));
    CHECK(v.margin == doctest::Approx(std::log(0.3679 / 0.1459)).epsilon(1e-3));

    const PeriodicCocycle d = constant(diag2(1, 0.5), 1);
    const SplittingSpec s = SplittingSpec::constant(Mat(v2(0, 1)), Mat(v2(1, 0)), 1);
    CHECK_FALSE(check_domination(d, s, 1).holds);
    CHECK(check_domination(d, s, 2).holds);

    const SplittingSpec swapped = SplittingSpec::constant(Mat(v2(1, 0)), Mat(v2(0, 1)), 1);
    CHECK_FALSE(check_domination(d, swapped, 1).holds);
    CHECK_FALSE(check_domination(d, swapped, 5).holds);
    SplittingSpec cat_swap = *split;
    std::swap(cat_swap.e, cat_swap.f);
    CHECK_FALSE(check_domination(cat, cat_swap, 1).holds);

    const SplittingSpec bad = SplittingSpec::constant(Mat(v2(1, 1)), Mat(v2(1, 0)), 1);
    try {
      (void)check_domination(d, bad, 1);
      FAIL("expected a non-invariance error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
    }
  }

  TEST_CASE("Pliss points") {
    std::vector<Mat> steps;
    for (double s : {0.125, 0.125, 0.125, 2.0}) steps.push_back(Mat::Constant(1, 1, s));
    const PlissReport r = pliss_points(PeriodicCocycle(steps), 1);
    CHECK(r.indices == std::vector<std::size_t>{0, 1});
    CHECK(r.proportion == 0.5);

    const PlissReport all = pliss_points(constant(Mat::Constant(1, 1, 0.25), 6), 1);
    CHECK(all.indices.size() == 6);
    CHECK(all.proportion == 1.0);

    CHECK(pliss_points(constant(Mat::Identity(2, 2), 4), 1).indices.empty());
    CHECK(pliss_points(constant(Mat::Identity(2, 2), 4), 2).indices.empty());

    // tau = 3 padded to lcm(3, 2) = 6
    const PlissReport padded = pliss_points(constant(Mat::Constant(1, 1, 0.25), 3), 2);
    CHECK(padded.padded_period == 6);
    CHECK(padded.indices.size() == 3);
  }

  TEST_CASE("QR spectra") {
    const System cat = make_system("cat_map");
    const LyapunovSpectrum q = lyapunov_qr(cat, v2(0.1234, 0.5678), 10000);
    CHECK(q.source == SpectrumSource::qr_estimate);
    CHECK(std::abs(q.exponents[0] + 0.9624236501) < 1e-3);
    CHECK(std::abs(q.exponents[1] - 0.9624236501) < 1e-3);
    CHECK(q.iterations == 10000);

    const System lin = make_system("linear_torus", {{"matrix", {{3, 1}, {2, 1}}}});
    const LyapunovSpectrum ql = lyapunov_qr(lin, v2(0.3, 0.1), 10000, 100);
    const LyapunovSpectrum ex = exponents_periodic(constant(m2(3, 1, 2, 1), 1));
    CHECK(std::abs(ql.exponents[0] - ex.exponents[0]) < 1e-6);
    CHECK(std::abs(ql.exponents[1] - ex.exponents[1]) < 1e-6);

    const System morse = make_system("morse_gradient_t1");
    const LyapunovSpectrum qm = lyapunov_qr(morse, v2(0.5001, 0.4999), 200);
    const double target = -4 * std::numbers::pi * std::numbers::pi;
    for (double l : qm.exponents) CHECK(std::abs(l - target) < 0.05 * std::abs(target));

    const System id = make_system("identity", {{"d", 2}});
    const LyapunovSpectrum qi = lyapunov_qr(id, v2(0.3, 0.3), 100);
    CHECK(qi.exponents == std::vector<double>{0.0, 0.0});

    CHECK_THROWS_AS(lyapunov_qr(cat, v2(0, 0), 50, 10), Error);
  }

  TEST_CASE("classification") {
    const System cat = make_system("cat_map");
    const ChainClass cls;
    const ClassClassification c = classify_class(cat, cls, {orbit_of({v2(0, 0)})});
    CHECK(c.verdict == "saddle, index 1");
    REQUIRE(c.orbits.size() == 1);
    CHECK(c.orbits[0].dominated_at == 1);
    CHECK(c.orbits[0].index == 1);

    const System morse = make_system("morse_gradient_t1");
    CHECK(classify_class(morse, cls, {orbit_of({v2(0.5, 0.5)})}).verdict == "sink");
    CHECK(classify_class(morse, cls, {orbit_of({v2(0.0, 0.0)})}).verdict == "source");
    CHECK(classify_class(morse, cls, {orbit_of({v2(0.5, 0.0)})}).verdict == "saddle, index 1");
    CHECK(classify_class(morse, cls, {orbit_of({v2(0.5, 0.5)}), orbit_of({v2(0.5, 0.0)})}).verdict ==
          "mixed-index");

    const System id = make_system("identity", {{"d", 2}});
    CHECK(classify_class(id, cls, {orbit_of({v2(0.3, 0.3)})}).verdict == "nonuniform");
    CHECK(classify_class(id, cls, {}).verdict == "unclassified: no periodic data");
  }

  TEST_CASE("perturbation checkers") {
    const PeriodicCocycle rot = constant(m2(0, -1, 1, 0), 1);
    const PeriodicCocycle near = constant(m2(0.01, -1, 1, 0.01), 1);
    CHECK(cocycle_distance(rot, rot) == 0.0);
    const PerturbationCheck pos = check_positive_exponent(rot, near, 0.05);
    CHECK(pos.is_perturbation);
    CHECK(pos.conclusion);
    CHECK(pos.holds());
    CHECK_FALSE(check_positive_exponent(rot, near, 1e-3).is_perturbation);
    CHECK_FALSE(check_positive_exponent(rot, rot, 0.1).conclusion);

    const PeriodicCocycle cat = constant(m2(2, 1, 1, 1), 1);
    const PeriodicCocycle cat2 = constant(m2(2.001, 1, 1, 1), 1);
    CHECK(check_real_simple_spectrum(cat, cat2, 0.01).holds());
    CHECK_FALSE(check_real_simple_spectrum(rot, rot, 0.01).conclusion);

    CHECK(check_real_equal_modulus(rot, constant(Mat::Identity(2, 2), 1), 2.0).holds());
    CHECK_FALSE(check_real_equal_modulus(rot, rot, 1.0).conclusion);
    CHECK_FALSE(check_real_equal_modulus(cat, cat, 1.0).conclusion);

    CHECK_THROWS_AS(cocycle_distance(rot, constant(Mat::Identity(2, 2), 2)), Error);
  }
}
