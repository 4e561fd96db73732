#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "jumpom/quadrature.hpp"

using namespace jumpom;

TEST_CASE("Gauss-Legendre is exact for degree 2n-1") {
  for (int n : {1, 2, 5, 16}) {
    const auto r = gauss_legendre(n, -0.5, 2.0);
    const int deg = 2 * n - 1;
    const double got = r.integrate([&](double x) { return std::pow(x, deg); });
    const double exact = (std::pow(2.0, deg + 1) - std::pow(-0.5, deg + 1)) / (deg + 1);
    CHECK(got == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("weights sum to the interval length and nodes are inside") {
  const auto r = gauss_legendre(64, 0.0, 3.0);
  double w = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    w += r.weights[i];
    CHECK(r.nodes[i] > 0.0);
    CHECK(r.nodes[i] < 3.0);
  }
  CHECK(w == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("composite and geometric rules against adaptive Gauss-Kronrod") {
  auto f = [](double x) { return std::exp(-x) * std::sin(3 * x); };
  const double ref = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 4.0, 15, 1e-14);
  CHECK(composite_gauss_legendre(8, 8, 0.0, 4.0).integrate(f) == doctest::Approx(ref).epsilon(1e-12));

  // |z|^{-1/2} near zero: geometric panels resolve it, equal panels do not.
  auto g = [](double z) { return 1.0 / std::sqrt(z); };
  const double exact = 2.0 * (1.0 - std::sqrt(1e-8));
  CHECK(geometric_gauss_legendre(30, 8, 1e-8, 1.0).integrate(g) == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("invalid sizes are rejected") {
  CHECK_THROWS(gauss_legendre(0));
  CHECK_THROWS(geometric_gauss_legendre(4, 4, 0.0, 1.0));
}
