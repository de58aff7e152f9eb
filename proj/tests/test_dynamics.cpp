#include "doctest.h"

#include <cmath>
#include <random>

#include "igac/dynamics.hpp"

using namespace igac;

namespace {

Vector vec(std::initializer_list<double> v) { return ParamPoint(v).coords(); }

OdeTolerances tight() {
  OdeTolerances t;
  t.abs_tol = 1e-14;
  t.rel_tol = 1e-12;
  return t;
}

// Family of Gaussian-manifold geodesics indexed by lambda at fixed xi.
std::function<GeodesicState(double)> gaussian_family(int blocks, double xi) {
  return [=](double lam) { return gaussian_product_state(blocks, GaussianGeodesicParams{xi, lam, 0.0}, 0.0); };
}

double relative_gap(const MetricField& f, const ParamPoint& p, const Vector& a, const Vector& b) {
  return jacobi_intensity(f, p, a - b) / jacobi_intensity(f, p, b);
}

}  // namespace

TEST_CASE("closed-form Gaussian geodesic") {
  const GaussianGeodesicParams p{2.0 * std::sqrt(2.0), 1.0, 0.0};
  const auto [mu0, s0] = analytic_gaussian_geodesic(p, 0.0);
  CHECK(mu0 == doctest::Approx(2.0));
  CHECK(s0 == doctest::Approx(1.414214).epsilon(1e-6));
  const auto [mu_inf, s_inf] = analytic_gaussian_geodesic(p, 40.0);
  CHECK(mu_inf == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(s_inf < 1e-15);

  SUBCASE("satisfies the geodesic equations") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> tau(-5.0, 10.0);
    const GaussianGeodesicParams q{1.3, 0.7, 0.4};
    for (int i = 0; i < 100; ++i) {
      const double t = tau(rng), h = 1e-5;
      const GeodesicState s = analytic_gaussian_state(q, t);
      const Vector acc =
          (analytic_gaussian_state(q, t + h).velocity - analytic_gaussian_state(q, t - h).velocity) / (2 * h);
      const double mu_d = s.velocity[0], s_d = s.velocity[1], sig = s.point[1];
      const double scale = std::max(std::abs(acc[0]), std::abs(acc[1])) + std::abs(s_d * s_d / sig) + 1e-300;
      CHECK(std::abs(acc[0] - 2.0 / sig * mu_d * s_d) / scale < 1e-8);
      CHECK(std::abs(acc[1] - s_d * s_d / sig + mu_d * mu_d / (2.0 * sig)) / scale < 1e-8);
    }
  }

  SUBCASE("velocity is the derivative of position") {
    const double t = 0.8, h = 1e-6;
    const Vector fd =
        (analytic_gaussian_state(p, t + h).point.coords() - analytic_gaussian_state(p, t - h).point.coords()) / (2 * h);
    CHECK((fd - analytic_gaussian_state(p, t).velocity).norm() < 1e-8);
  }

  SUBCASE("bounded for all forward times") {
    for (double t = 0.0; t <= 100.0; t += 0.5) {
      const auto [mu, s] = analytic_gaussian_geodesic(p, t);
      CHECK(std::isfinite(mu));
      CHECK(s > 0.0);
      CHECK(std::isfinite(s));
    }
  }
  CHECK_THROWS_AS(analytic_gaussian_geodesic({-1.0, 1.0, 0.0}, 0.0), DomainError);
}

TEST_CASE("geodesic integration") {
  SUBCASE("straight lines in flat space") {
    const auto tr =
        integrate_geodesic(euclidean_metric(2), GeodesicState{0.0, ParamPoint{1.0, -2.0}, vec({0.3, 0.7})}, 5.0);
    for (std::size_t k = 0; k < tr.size(); ++k)
      CHECK((tr.states[k].point.coords() - (vec({1.0, -2.0}) + tr.grid[k] * vec({0.3, 0.7}))).norm() < 1e-10);
  }

  SUBCASE("exponential model") {
    const double v = 0.6;
    const auto tr =
        integrate_geodesic(analytic_metric(exponential_family()), GeodesicState{0.0, ParamPoint{1.0}, vec({v})}, 6.0);
    for (std::size_t k = 0; k < tr.size(); ++k)
      CHECK(tr.states[k].point[0] == doctest::Approx(std::exp(v * tr.grid[k])).epsilon(1e-8));
  }

  SUBCASE("Gaussian block against the closed form") {
    const MetricField f = analytic_metric(gaussian_product_family(1));
    const GaussianGeodesicParams p{1.5, 0.8, 0.0};
    const auto tr = integrate_geodesic(f, analytic_gaussian_state(p, 0.0), 5.0);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const GeodesicState s = analytic_gaussian_state(p, tr.grid[k]);
      CHECK((tr.states[k].point.coords() - s.point.coords()).lpNorm<Eigen::Infinity>() < 1e-6);
    }
    CHECK(max_speed_drift(f, tr) < 1e-6);
  }

  SUBCASE("reversibility") {
    const MetricField f = analytic_metric(correlated_gaussian_family(0.4));
    const GeodesicState s0{0.0, ParamPoint{0.1, 1.0, -0.2, 0.8}, vec({0.3, -0.1, 0.2, 0.15})};
    const auto fwd = integrate_geodesic(f, s0, 3.0);
    const GeodesicState turned{0.0, fwd.states.back().point, -fwd.states.back().velocity};
    const auto back = integrate_geodesic(f, turned, 3.0);
    CHECK((back.states.back().point.coords() - s0.point.coords()).norm() < 1e-6);
    CHECK((back.states.back().velocity + s0.velocity).norm() < 1e-6);
    CHECK(max_speed_drift(f, fwd) < 1e-6);
  }

  SUBCASE("leaving the domain is a truncation") {
    const MetricField half = explicit_metric(
        1, [](const Vector&) { return Matrix(Matrix::Identity(1, 1)); }, Domain{{Interval{0.0, kInf}}}, "half-line");
    try {
      integrate_geodesic(half, GeodesicState{0.0, ParamPoint{1.0}, vec({-1.0})}, 3.0);
      FAIL("expected TruncationError");
    } catch (const TruncationError& e) {
      CHECK(e.last_valid_tau() == doctest::Approx(1.0).epsilon(1e-3));
    }
  }

  SUBCASE("step underflow is a stiffness failure") {
    OdeTolerances t = tight();
    t.min_step = 0.05;
    CHECK_THROWS_AS(integrate_geodesic(analytic_metric(gaussian_product_family(1)),
                                       analytic_gaussian_state({1.0, 3.0, 0.0}, 0.0), 5.0, t),
                    StiffnessError);
  }

  SUBCASE("dense output between grid points") {
    const auto tr =
        integrate_geodesic(euclidean_metric(1), GeodesicState{0.0, ParamPoint{0.0}, vec({2.0})}, 1.0, {}, 11);
    CHECK(tr.position_at(0.55)[0] == doctest::Approx(1.1));
  }
}

TEST_CASE("Jacobi fields") {
  CHECK(isotropic_jacobi(-1.0, 1.0, 1.0) == doctest::Approx(1.1752011936438014));
  CHECK(isotropic_jacobi(-0.3, 2.0, 0.0) == 0.0);
  CHECK(isotropic_jacobi(-4.0, 2.0, 1.0) == doctest::Approx(3.626860407847019));
  CHECK_THROWS_AS(isotropic_jacobi(0.0, 1.0, 1.0), UnsupportedError);

  SUBCASE("intensity") {
    CHECK(jacobi_intensity(euclidean_metric(2), ParamPoint{0, 0}, vec({3, 4})) == doctest::Approx(5.0));
    const MetricField block = analytic_metric(gaussian_product_family(1));
    CHECK(jacobi_intensity(block, ParamPoint{0.0, 2.0}, vec({2, 0})) == doctest::Approx(1.0));
    const Vector j = vec({0.3, -1.2});
    for (double c : {-2.5, 0.1, 7.0})
      CHECK(jacobi_intensity(block, ParamPoint{0.4, 0.9}, c * j) ==
            doctest::Approx(std::abs(c) * jacobi_intensity(block, ParamPoint{0.4, 0.9}, j)));
    CHECK(jacobi_intensity(block, ParamPoint{0.4, 0.9}, vec({0, 0})) == 0.0);
  }

  SUBCASE("flat space spreads linearly") {
    const auto base = integrate_geodesic(euclidean_metric(2), GeodesicState{0.0, ParamPoint{0, 0}, vec({1, 0})}, 4.0);
    const auto tr = integrate_jlc(euclidean_metric(2), base, JacobiField{vec({0, 0}), vec({0.2, 0.5})});
    for (std::size_t k = 0; k < tr.size(); ++k) CHECK((tr.jacobi[k].j - tr.grid[k] * vec({0.2, 0.5})).norm() < 1e-10);
  }

  SUBCASE("constant curvature block follows the sinh law") {
    const MetricField block = analytic_metric(gaussian_product_family(1));
    // Unit-speed geodesic with an orthogonal unit initial rate of spread.
    const auto base = integrate_geodesic(block, GeodesicState{0.0, ParamPoint{0.0, 1.0}, vec({1.0, 0.0})}, 4.0);
    const auto tr = integrate_jlc(block, base, JacobiField{vec({0, 0}), vec({0, 1.0 / std::sqrt(2.0)})});
    for (std::size_t k = 0; k < tr.size(); ++k)
      CHECK(std::abs(tr.intensity[k] - isotropic_jacobi(-0.5, 1.0, tr.grid[k])) < 1e-4);
  }

  SUBCASE("linearized equation agrees with neighbouring geodesics") {
    const MetricField f = analytic_metric(gaussian_product_family(3));
    const double lam = 0.5, xi = 2.0 * std::sqrt(2.0) * lam;
    const auto family = gaussian_family(3, xi);
    const auto grid = uniform_grid(0.0, 3.0, 61);
    const auto fd = jacobi_from_family(f, family, lam, 1e-4, grid, tight());
    const auto base = integrate_geodesic(f, family(lam), grid, tight());
    const auto jlc = integrate_jlc(f, base, fd.front(), tight());
    for (std::size_t k = 1; k < grid.size(); ++k)
      CHECK(relative_gap(f, jlc.states[k].point, jlc.jacobi[k].j, fd[k].j) < 1e-3);

    SUBCASE("central differences converge at second order") {
      const auto coarse = jacobi_from_family(f, family, lam, 0.04, grid, tight());
      const auto fine = jacobi_from_family(f, family, lam, 0.02, grid, tight());
      const std::size_t k = grid.size() - 1;
      const double e1 = (coarse[k].j - jlc.jacobi[k].j).norm();
      const double e2 = (fine[k].j - jlc.jacobi[k].j).norm();
      CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    }
  }

  SUBCASE("a family with no dependence on the parameter has zero field") {
    const MetricField f = analytic_metric(gaussian_product_family(1));
    const auto out = jacobi_from_family(
        f, [](double) { return analytic_gaussian_state({1.0, 0.5, 0.0}, 0.0); }, 1.0, 1e-3, uniform_grid(0, 2, 11));
    for (const auto& j : out) CHECK(j.j.norm() == 0.0);
  }
}

TEST_CASE("Lyapunov-like exponent") {
  std::vector<double> t, y, c;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.2 * i);
    y.push_back(3.0 * std::exp(0.5 * t.back()));
    c.push_back(2.0);
  }
  CHECK(estimate_lambda_j(t, y) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(estimate_lambda_j(t, c)) < 1e-12);
  CHECK_THROWS_AS(estimate_lambda_j({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1}), DomainError);

  SUBCASE("growth rate of the Jacobi field on the 6-dim Gaussian manifold") {
    const MetricField f = analytic_metric(gaussian_product_family(3));
    for (double lam : {0.3, 0.5}) {
      const double xi = 2.0 * std::sqrt(2.0) * lam;
      const auto family = gaussian_family(3, xi);
      const auto grid = uniform_grid(0.0, 10.0 / lam, 201);
      const auto j0 = jacobi_from_family(f, family, lam, 1e-4, {0.0, 1e-3}, tight()).front();
      const auto base = integrate_geodesic(f, family(lam), grid, tight());
      const auto tr = integrate_jlc(f, base, j0, tight());
      CHECK(estimate_lambda_j(tr.grid, tr.intensity) == doctest::Approx(lam).epsilon(0.05));
    }
  }
}
