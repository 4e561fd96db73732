#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "jumpom/models.hpp"

using namespace jumpom;

namespace {

Box box1(double lo, double hi, int n = 161) { return Box{make_vec({lo}), make_vec({hi}), n}; }

const std::string kG = "0.25/(abs(z)*sqrt(abs(z)))*exp(-z^2)";

}  // namespace

TEST_CASE("bump density is normalized and bounded") {
  const auto b = JumpSizeDensity::bump(1, 1.0);
  boost::math::quadrature::tanh_sinh<double> ts;
  const double I = ts.integrate([&](double z) { return b(make_vec({z})); }, -1.0, 1.0);
  CHECK(I == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b(make_vec({1.0})) == 0.0);
  CHECK(b(make_vec({1.3})) == 0.0);
  CHECK(b.at_zero() == doctest::Approx(b.max_value()));
  // ν_J(z) = c exp(-1/(1-z²)) has derivative -2z/(1-z²)² ν_J(z).
  const double z = 0.4;
  CHECK(b.gradient(make_vec({z}))(0) ==
        doctest::Approx(-2.0 * z / std::pow(1 - z * z, 2) * b(make_vec({z}))).epsilon(1e-12));
}

TEST_CASE("truncated Gaussian normalization against adaptive quadrature") {
  const auto g = JumpSizeDensity::truncated_gaussian(1, 0.5, 1.0);
  const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double z) { return g(make_vec({z})); }, -1.0, 1.0, 15, 1e-15);
  CHECK(std::fabs(I - 1.0) < 1e-10);
  CHECK(std::fabs(g.audit_integral() - 1.0) < 1e-10);

  const auto shifted = JumpSizeDensity::truncated_gaussian(1, 0.4, 1.0, make_vec({0.3}));
  const double J = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double z) { return shifted(make_vec({z})); }, -1.0, 1.0, 15, 1e-15);
  CHECK(std::fabs(J - 1.0) < 1e-10);
  CHECK_THROWS_AS(JumpSizeDensity::truncated_gaussian(1, 0.4, 1.0, make_vec({1.0})), Error);
}

TEST_CASE("2D bump integrates to one") {
  const auto b = JumpSizeDensity::bump(2, 0.7);
  CHECK(std::fabs(b.audit_integral() - 1.0) < 1e-10);
  CHECK(b(make_vec({0.5, 0.5})) == 0.0);
  CHECK(b(make_vec({0.3, -0.2})) > 0.0);
}

TEST_CASE("finite-activity validation") {
  const auto ok = FiniteActivityModel::from_strings(1, {"-x"}, 1.0, "1", JumpSizeDensity::bump(1, 1.0));
  const auto rep = validate_finite_model(ok, box1(-4, 4));
  CHECK(rep.passed());

  const auto bad = FiniteActivityModel::from_strings(1, {"-x"}, 1.0, "sin(x)", JumpSizeDensity::bump(1, 1.0));
  const auto r2 = validate_finite_model(bad, box1(-4, 4));
  CHECK_FALSE(r2.passed());
  const CheckResult* c = r2.find("rate_positive");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->passed);
  REQUIRE(c->witness.size() == 1);
  CHECK(std::sin(c->witness[0]) <= 0.0);

  // A support wider than a quarter of the box is rejected.
  const auto wide = FiniteActivityModel::from_strings(1, {"0"}, 1.0, "1", JumpSizeDensity::bump(1, 1.5));
  CHECK_FALSE(validate_finite_model(wide, box1(-2, 2)).find("jump_support_within_quarter_box")->passed);

  // λ = 0 only with the relaxation.
  const auto zero = FiniteActivityModel::from_strings(1, {"0"}, 1.0, "0", JumpSizeDensity::bump(1, 0.5));
  CHECK_FALSE(validate_finite_model(zero, box1(-3, 3)).passed());
  CHECK(validate_finite_model(zero, box1(-3, 3), {true}).passed());

  const auto zero_sigma = FiniteActivityModel::from_strings(1, {"0"}, 0.0, "1", JumpSizeDensity::bump(1, 0.5));
  CHECK_FALSE(validate_finite_model(zero_sigma, box1(-3, 3)).find("sigma_positive")->passed);
  CHECK_FALSE(validate_finite_model(ok, box1(-4, 4)).to_text().empty());
}

TEST_CASE("symbolic fields match finite differences") {
  const auto m = FiniteActivityModel::from_strings(2, {"-x1 + 0.3*x2^2", "sin(x1)*x2"}, 0.5, "1 + 0.2*tanh(x1*x2)",
                                                   JumpSizeDensity::bump(2, 0.5));
  const Vec x = make_vec({0.4, -0.7});
  const double h = 1e-6;
  const Mat J = m.drift_jacobian(x);
  const Vec gl = m.rate_gradient(x);
  const Mat H = m.rate_hessian(x);
  for (int k = 0; k < 2; ++k) {
    Vec e = Vec::Zero(2);
    e(k) = h;
    const Vec db = (m.drift(x + e) - m.drift(x - e)) / (2 * h);
    CHECK(J(0, k) == doctest::Approx(db(0)).epsilon(1e-7));
    CHECK(J(1, k) == doctest::Approx(db(1)).epsilon(1e-7));
    CHECK(gl(k) == doctest::Approx((m.rate(x + e) - m.rate(x - e)) / (2 * h)).epsilon(1e-7));
    const Vec dg = (m.rate_gradient(x + e) - m.rate_gradient(x - e)) / (2 * h);
    CHECK(H(0, k) == doctest::Approx(dg(0)).epsilon(1e-6));
    CHECK(H(1, k) == doctest::Approx(dg(1)).epsilon(1e-6));
    const double ddiv = (m.drift_divergence(x + e) - m.drift_divergence(x - e)) / (2 * h);
    CHECK(m.drift_divergence_gradient(x)(k) == doctest::Approx(ddiv).epsilon(1e-6));
  }
  CHECK(m.drift_divergence(x) == doctest::Approx(J.trace()));
  CHECK(m.with_scaled_rate(2.0).rate(x) == doctest::Approx(2.0 * m.rate(x)));
}

TEST_CASE("model construction errors") {
  CHECK_THROWS_AS(FiniteActivityModel::from_strings(1, {"-y"}, 1.0, "1", JumpSizeDensity::bump(1, 1.0)), Error);
  CHECK_THROWS_AS(FiniteActivityModel::from_strings(2, {"-x1"}, 1.0, "1", JumpSizeDensity::bump(2, 1.0)), Error);
  CHECK_THROWS_AS(FiniteActivityModel::from_strings(1, {"-x"}, 1.0, "1", JumpSizeDensity::bump(2, 1.0)), Error);
  CHECK_THROWS_AS(JumpSizeDensity::bump(3, 1.0), Error);
}

TEST_CASE("infinite-activity validation examples") {
  InfiniteValidationGrid grid;
  const auto stable = InfiniteActivityModel::from_expressions("-x", 1.0, "z", kG, kG, 0.5);
  const auto r1 = validate_infinite_model(stable, grid, 0.4);
  CHECK(r1.passed());
  // f(z) = g(z)|z|^{1+α} → α/2 at the origin.
  CHECK(r1.find("power_law_ratio_bounded")->max_value == doctest::Approx(0.25).epsilon(1e-3));

  const auto tanh_map =
      InfiniteActivityModel::from_expressions("-x", 1.0, "z*(1 + 0.5*tanh(x))", kG, kG, 0.5);
  const auto r2 = validate_infinite_model(tanh_map, grid, 0.4);
  CHECK(r2.find("dz_bounded_below")->passed);
  CHECK(r2.find("dz_bounded_below")->min_value >= 0.5 - 1e-3);

  const std::string nu = "(1 + 0.5*sin(x))/1.5*" + kG;
  const auto modulated = InfiniteActivityModel::from_expressions("-x", 1.0, "z", nu, kG, 0.5);
  CHECK(validate_infinite_model(modulated, grid, 0.4).find("dominated_by_g")->passed);

  const auto too_big = InfiniteActivityModel::from_expressions("-x", 1.0, "z", "2*" + kG, kG, 0.5);
  CHECK_FALSE(validate_infinite_model(too_big, grid, 0.4).find("dominated_by_g")->passed);

  const auto degenerate = InfiniteActivityModel::from_expressions("-x", 1.0, "z*tanh(x)", kG, kG, 0.5);
  CHECK_FALSE(validate_infinite_model(degenerate, grid, 0.1).find("dz_bounded_below")->passed);

  const auto shifted = InfiniteActivityModel::from_expressions("-x", 1.0, "z + 0.1", kG, kG, 0.5);
  CHECK_FALSE(validate_infinite_model(shifted, grid, 0.1).find("jump_map_vanishes_at_zero")->passed);
}

TEST_CASE("embedding a finite-activity model") {
  const auto jump = JumpSizeDensity::truncated_gaussian(1, 0.3, 0.8, make_vec({0.2}));
  const auto f = FiniteActivityModel::from_strings(1, {"-x"}, 0.7, "1 + 0.5*sin(x)", jump);
  const auto e = InfiniteActivityModel::embed(f);
  CHECK(e.is_embedded());
  CHECK(e.support_radius() == 0.8);
  CHECK(e.jump_map(0.3, 0.25) == 0.25);
  CHECK(e.intensity(0.3, 0.25) == doctest::Approx(f.rate(make_vec({0.3})) * jump(make_vec({0.25}))));

  // Drift picks up λ(x) ∫_{|z|<1} z ν_J(z) dz.
  const double m1 = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double z) { return z * jump(make_vec({z})); }, -0.8, 0.8, 15, 1e-15);
  for (double x : {-1.0, 0.0, 0.9}) {
    const double lam = 1 + 0.5 * std::sin(x);
    CHECK(e.drift(x) == doctest::Approx(-x + lam * m1).epsilon(1e-10));
  }
  const auto two_d = FiniteActivityModel::from_strings(2, {"0", "0"}, 1.0, "1", JumpSizeDensity::bump(2, 0.5));
  CHECK_THROWS_AS(InfiniteActivityModel::embed(two_d), Error);
}
