#include "doctest.h"

#include <cmath>
#include <random>

#include "igac/geometry.hpp"

using namespace igac;

namespace {

Domain half_plane() { return Domain{{Interval{}, Interval{0.0, kInf}}}; }

// Gaussian block metric without exact derivatives, so every path runs through finite differences.
MetricField fd_gaussian_block() {
  return explicit_metric(
      2,
      [](const Vector& x) {
        Matrix g = Matrix::Zero(2, 2);
        g(0, 0) = 1.0 / (x[1] * x[1]);
        g(1, 1) = 2.0 / (x[1] * x[1]);
        return g;
      },
      half_plane(), "gaussian-block-fd");
}

Vector vec(std::initializer_list<double> v) { return ParamPoint(v).coords(); }

}  // namespace

TEST_CASE("Fisher metric by quadrature") {
  const Matrix g = fisher_metric(*gaussian_product_family(1), ParamPoint{0.4, 1.0}).matrix;
  CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g(1, 1) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(g(0, 1)) < 1e-10);
  CHECK(fisher_metric(*exponential_family(), ParamPoint{2.0}).matrix(0, 0) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(fisher_metric(*wigner_dyson_family(), ParamPoint{1.0}).matrix(0, 0) == doctest::Approx(4.0).epsilon(1e-9));

  SUBCASE("product family assembled from factors") {
    const auto inst = GaussianProductModel{1, {0, 1, 2}, {1, 2, 0.5}}.instance();
    const Matrix g6 = fisher_metric(*inst.family, inst.params).matrix;
    CHECK(g6(3, 3) == doctest::Approx(2.0 / 4.0).epsilon(1e-9));
    CHECK(g6(5, 5) == doctest::Approx(8.0).epsilon(1e-9));
    CHECK(std::abs(g6(0, 3)) < 1e-12);
  }
}

TEST_CASE("closed-form metrics") {
  const Matrix gc = analytic_metric(correlated_gaussian_family(0.0)).matrix(vec({0.1, 1.2, -0.3, 0.7}));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(gc(i, j) == 0.0);

  const Matrix gi = analytic_metric(integrable_composite_family()).matrix(vec({2.0, 4.0}));
  CHECK(gi(0, 0) == doctest::Approx(0.25));
  CHECK(gi(1, 1) == doctest::Approx(1.0 / 16));
  CHECK(gi(0, 1) == 0.0);

  const Matrix gch = analytic_metric(chaotic_composite_family()).matrix(vec({2.0, 0.5, 3.0}));
  CHECK(gch(0, 0) == doctest::Approx(1.0));
  CHECK(gch(1, 1) == doctest::Approx(1.0 / 9));
  CHECK(gch(2, 2) == doctest::Approx(2.0 / 9));

  CHECK_THROWS_AS(analytic_metric(uniform_family({{0.0, 1.0}})), UnsupportedError);
}

TEST_CASE("analytic and quadrature metrics agree") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(0.4, 2.5), real(-1.5, 1.5);
  const std::vector<std::pair<FamilyPtr, std::function<Vector()>>> cases = {
      {gaussian_product_family(1), [&] { return vec({real(rng), pos(rng)}); }},
      {correlated_gaussian_family(0.6), [&] { return vec({real(rng), pos(rng), real(rng), pos(rng)}); }},
      {exponential_family(), [&] { return vec({pos(rng)}); }},
      {weibull_family(), [&] { return vec({pos(rng), 0.8 + pos(rng)}); }},
      {wigner_dyson_family(), [&] { return vec({pos(rng)}); }},
      {integrable_composite_family(), [&] { return vec({pos(rng), pos(rng)}); }},
      {chaotic_composite_family(), [&] { return vec({pos(rng), real(rng), pos(rng)}); }},
  };
  for (const auto& [family, draw] : cases) {
    const MetricField a = analytic_metric(family);
    const MetricField q = quadrature_metric(family);
    for (int k = 0; k < 5; ++k) {
      const Vector x = draw();
      CHECK((a.matrix(x) - q.matrix(x)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("metric is invariant under a parameter-independent change of microvariable") {
  const auto expo = exponential_family();
  for (double theta : {0.5, 1.0, 2.5}) {
    const auto pf = pushforward(expo, ParamPoint{theta}, MonotoneMap::power_law(0.7, 2.0));
    const double a = fisher_metric(*expo, ParamPoint{theta}).matrix(0, 0);
    const double b = fisher_metric(*pf, ParamPoint{theta}).matrix(0, 0);
    CHECK(std::abs(a - b) < 1e-6);
  }
}

TEST_CASE("Christoffel symbols") {
  const double s = 1.7;
  for (const MetricField& f : {analytic_metric(gaussian_product_family(1)), fd_gaussian_block()}) {
    const Tensor3 G = christoffel(f, ParamPoint{0.3, s}).gamma;
    const double tol = f.has_exact_derivatives() ? 1e-14 : 1e-8;
    CHECK(std::abs(G(0, 0, 1) + 1.0 / s) < tol);
    CHECK(std::abs(G(0, 1, 0) + 1.0 / s) < tol);
    CHECK(std::abs(G(1, 0, 0) - 0.5 / s) < tol);
    CHECK(std::abs(G(1, 1, 1) + 1.0 / s) < tol);
    CHECK(std::abs(G(0, 0, 0)) < tol);
    CHECK(std::abs(G(1, 0, 1)) < tol);
  }
  CHECK(christoffel(euclidean_metric(3), ParamPoint{1.0, -2.0, 5.0}).gamma.max_abs() < 1e-9);
  CHECK(christoffel(analytic_metric(exponential_family()), ParamPoint{2.0}).gamma(0, 0, 0) == doctest::Approx(-0.5));

  SUBCASE("lower-index symmetry on a non-diagonal metric") {
    const Tensor3 G =
        christoffel(analytic_metric(correlated_gaussian_family(0.4)), ParamPoint{0.1, 1.3, 0.2, 0.8}).gamma;
    for (int r = 0; r < 4; ++r)
      for (int m = 0; m < 4; ++m)
        for (int v = 0; v < 4; ++v) CHECK(G(r, m, v) == doctest::Approx(G(r, v, m)));
  }
}

TEST_CASE("scalar curvature of the built-in manifolds") {
  for (int l = 1; l <= 3; ++l) {
    const auto family = gaussian_product_family(3 * l);
    Vector x(6 * l);
    for (int i = 0; i < 3 * l; ++i) x.segment(2 * i, 2) << 0.1 * i, 0.5 + 0.2 * i;
    CHECK(curvature(analytic_metric(family), ParamPoint(x)).scalar == doctest::Approx(-3.0 * l).epsilon(1e-10));
  }
  // Symbolic computation of this metric gives R = -2 for every admissible r.
  for (double r : {-0.9, -0.5, 0.0, 0.5, 0.9})
    CHECK(curvature(analytic_metric(correlated_gaussian_family(r)), ParamPoint{0.2, 1.1, -0.4, 0.6}).scalar ==
          doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(std::abs(curvature(analytic_metric(exponential_family()), ParamPoint{1.3}).scalar) < 1e-12);
  CHECK(curvature(analytic_metric(integrable_composite_family()), ParamPoint{1.0, 2.0}).scalar == doctest::Approx(0.0));
  CHECK(curvature(analytic_metric(chaotic_composite_family()), ParamPoint{1.0, 0.0, 2.0}).scalar ==
        doctest::Approx(-1.0));

  SUBCASE("finite-difference route") {
    CHECK(curvature(fd_gaussian_block(), ParamPoint{0.3, 1.2}).scalar == doctest::Approx(-1.0).epsilon(1e-5));
    const MetricField cg = analytic_metric(correlated_gaussian_family(0.5));
    const MetricField cg_fd = explicit_metric(4, [cg](const Vector& x) { return cg.matrix(x); }, cg.domain(), "cg-fd");
    CHECK(curvature(cg_fd, ParamPoint{0.2, 1.1, -0.4, 0.6}).scalar == doctest::Approx(-2.0).epsilon(1e-4));
    const MetricField g6 = analytic_metric(gaussian_product_family(3));
    const MetricField g6_fd = explicit_metric(6, [g6](const Vector& x) { return g6.matrix(x); }, g6.domain(), "g6-fd");
    CHECK(curvature(g6_fd, ParamPoint{0.0, 1.0, 0.5, 1.5, -1.0, 0.8}).scalar == doctest::Approx(-3.0).epsilon(1e-4));
  }
}

TEST_CASE("curvature tensor symmetries") {
  const auto b = curvature(analytic_metric(correlated_gaussian_family(0.3)), ParamPoint{0.2, 1.1, -0.4, 0.6});
  const int n = 4;
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          CHECK(std::abs(b.riemann_lower(a, c, r, s) + b.riemann_lower(a, c, s, r)) < 1e-6);
          CHECK(std::abs(b.riemann_lower(a, c, r, s) + b.riemann_lower(c, a, r, s)) < 1e-6);
          CHECK(std::abs(b.riemann_lower(a, c, r, s) - b.riemann_lower(r, s, a, c)) < 1e-6);
        }
  CHECK((b.ricci - b.ricci.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(b.scalar == doctest::Approx((inverse_metric(b.metric).cwiseProduct(b.ricci)).sum()));
}

TEST_CASE("projective Weyl tensor") {
  for (const MetricField& f : {analytic_metric(gaussian_product_family(1)), fd_gaussian_block(),
                               analytic_metric(integrable_composite_family())}) {
    CHECK(curvature(f, ParamPoint{0.4, 1.3}).weyl_projective.max_abs() < 1e-6);
  }
  const auto b = curvature(analytic_metric(gaussian_product_family(3)), ParamPoint{0.0, 1.0, 0.5, 1.5, -1.0, 0.8});
  CHECK(b.weyl_projective.max_abs() > 0.01);
}

TEST_CASE("sectional curvature") {
  const MetricField block = analytic_metric(gaussian_product_family(1));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 10; ++k) {
    const Vector a = vec({nd(rng), nd(rng)}), b = vec({nd(rng), nd(rng)});
    CHECK(sectional_curvature(block, ParamPoint{0.2, 0.9}, a, b) == doctest::Approx(-0.5).epsilon(1e-10));
  }
  CHECK(std::abs(sectional_curvature(euclidean_metric(3), ParamPoint{0, 0, 0}, vec({1, 0, 0}), vec({1, 1, 0}))) <
        1e-12);
  CHECK_THROWS_AS(sectional_curvature(block, ParamPoint{0.2, 0.9}, vec({1, 2}), vec({2, 4})), DomainError);

  SUBCASE("independent of the spanning basis") {
    const MetricField cg = analytic_metric(correlated_gaussian_family(0.3));
    const auto bundle = curvature(cg, ParamPoint{0.2, 1.1, -0.4, 0.6});
    const Vector a = vec({1.0, 0.3, -0.2, 0.5}), b = vec({0.1, -1.0, 0.4, 0.2});
    const double k0 = sectional_curvature(bundle, a, b);
    for (int k = 0; k < 5; ++k) {
      const double p = nd(rng), q = nd(rng), r = nd(rng), s = nd(rng);
      if (std::abs(p * s - q * r) < 0.1) continue;
      CHECK(sectional_curvature(bundle, p * a + q * b, r * a + s * b) == doctest::Approx(k0).epsilon(1e-9));
    }
  }

  SUBCASE("sum over orthonormal pairs equals the scalar") {
    const MetricField g6 = analytic_metric(gaussian_product_family(3));
    const auto bundle = curvature(g6, ParamPoint{0.0, 1.0, 0.5, 1.5, -1.0, 0.8});
    // Orthonormalize a random basis with respect to g.
    Matrix basis = Matrix::Random(6, 6);
    for (int i = 0; i < 6; ++i) {
      Vector v = basis.col(i);
      for (int j = 0; j < i; ++j) v -= basis.col(j).dot(bundle.metric * v) * basis.col(j);
      basis.col(i) = v / std::sqrt(v.dot(bundle.metric * v));
    }
    double sum = 0.0;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (i != j) sum += sectional_curvature(bundle, basis.col(i), basis.col(j));
    CHECK(sum == doctest::Approx(bundle.scalar).epsilon(1e-4));
  }
}

TEST_CASE("Killing residual") {
  const MetricField block = analytic_metric(gaussian_product_family(1));
  const ParamPoint p{0.7, 1.4};
  CHECK(killing_residual(euclidean_metric(2), ParamPoint{0.3, 0.4}, [](const Vector&) { return vec({1, 0}); })
            .cwiseAbs()
            .maxCoeff() < 1e-9);
  CHECK(killing_residual(block, p, [](const Vector&) { return vec({1, 0}); }).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(killing_residual(block, p, [](const Vector& x) { return x; }).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(killing_residual(block, p, [](const Vector&) { return vec({0, 1}); }).cwiseAbs().maxCoeff() > 0.1);
}

TEST_CASE("pullback metrics") {
  const MetricField expo = analytic_metric(exponential_family());
  const double zeta = 0.8;
  Reparametrization to_phi{1, [=](const Vector& x) { return vec({4.0 * x[0] * x[0] * zeta / kPi}); },
                           [=](const Vector& x) { return Matrix::Constant(1, 1, 8.0 * x[0] * zeta / kPi); },
                           Domain{{Interval{0.0, kInf}}}};
  const MetricField wd = pullback_metric(expo, to_phi);
  for (double phi : {0.3, 1.0, 2.7}) CHECK(std::abs(wd.matrix(vec({phi}))(0, 0) - 4.0 / (phi * phi)) < 1e-10);

  Reparametrization identity{2, [](const Vector& x) { return x; },
                             [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); }, half_plane()};
  const MetricField block = analytic_metric(gaussian_product_family(1));
  const MetricField same = pullback_metric(block, identity);
  CHECK((same.matrix(vec({0.3, 1.2})) - block.matrix(vec({0.3, 1.2}))).cwiseAbs().maxCoeff() < 1e-12);

  Reparametrization log_chart{1, [](const Vector& u) { return vec({std::exp(u[0])}); },
                              [](const Vector& u) { return Matrix::Constant(1, 1, std::exp(u[0])); },
                              Domain::unbounded(1)};
  CHECK(pullback_metric(expo, log_chart).matrix(vec({1.3}))(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("scalar curvature is invariant") {
    // (mu, sigma) = (a + b, exp(s)) mixes coordinates and stretches sigma.
    Reparametrization mix{2, [](const Vector& x) { return vec({x[0] + x[1], std::exp(x[1])}); },
                          [](const Vector& x) {
                            Matrix j(2, 2);
                            j << 1.0, 1.0, 0.0, std::exp(x[1]);
                            return j;
                          },
                          Domain::unbounded(2)};
    const MetricField pulled = pullback_metric(block, mix);
    CHECK(curvature(pulled, ParamPoint{0.2, 0.1}).scalar == doctest::Approx(-1.0).epsilon(1e-4));
  }

  SUBCASE("singular Jacobian rejected") {
    Reparametrization flat{1, [](const Vector& x) { return vec({1.0 + x[0] * x[0] * x[0]}); },
                           [](const Vector& x) { return Matrix::Constant(1, 1, 3.0 * x[0] * x[0]); },
                           Domain::unbounded(1)};
    CHECK_THROWS_AS(pullback_metric(expo, flat).matrix(vec({0.0})), SingularMetricError);
  }
}

TEST_CASE("domain guard and error reporting") {
  const MetricField fd = fd_gaussian_block();
  CHECK_THROWS_AS(curvature(fd, ParamPoint{0.0, 5e-7}), DomainError);
  CHECK_THROWS_AS(christoffel(fd, ParamPoint{0.0, -1.0}), DomainError);
  CHECK_THROWS_AS(curvature(analytic_metric(gaussian_product_family(1)), ParamPoint{0.0, -1.0}), DomainError);
  // Exact derivatives stay accurate close to the boundary.
  CHECK(curvature(analytic_metric(gaussian_product_family(1)), ParamPoint{0.0, 1e-7}).scalar ==
        doctest::Approx(-1.0).epsilon(1e-8));

  const MetricField degenerate =
      explicit_metric(2, [](const Vector&) { return Matrix(Matrix::Zero(2, 2)); }, Domain::unbounded(2), "zero");
  CHECK_THROWS_AS(christoffel(degenerate, ParamPoint{0.0, 0.0}), SingularMetricError);
}
