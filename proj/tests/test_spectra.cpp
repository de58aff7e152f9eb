#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <sstream>

#include "igac/quadrature.hpp"
#include "igac/spectra.hpp"

using namespace igac;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double pdf_moment(const LsdModel& m, int k) {
  QuadratureSpec q;
  q.rel_tol = 1e-12;
  q.abs_tol = 1e-14;
  return integrate([&](double t) { return Vector::Constant(1, std::pow(t, k) * lsd_pdf(m, t)); }, 0.0, 60.0, q)
      .value[0];
}

}  // namespace

TEST_CASE("Hamiltonian examples") {
  const auto e1 = eigenvalues(build_hamiltonian({1, 1.0, 0.0})).eigenvalues;
  REQUIRE(e1.size() == 2);
  CHECK(e1[0] == doctest::Approx(-1.0));
  CHECK(e1[1] == doctest::Approx(1.0));

  const auto e2 = eigenvalues(build_hamiltonian({2, 0.0, 0.0})).eigenvalues;
  const std::vector<double> expect{-1, -1, 1, 1};
  REQUIRE(e2.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(e2[i] - expect[i]) < 1e-12);

  SUBCASE("Hermitian and traceless") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> f(-2.0, 2.0);
    for (int n = 1; n <= 7; ++n) {
      const auto h = build_hamiltonian({n, f(rng), f(rng)});
      CHECK(h.rows() == (1 << n));
      CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
      CHECK(std::abs(h.trace()) < 1e-12);
    }
  }

  SUBCASE("single-site field term") {
    // hy alone on one site: eigenvalues of hy * sigma_y.
    const auto h = build_hamiltonian({1, 0.0, 0.7});
    CHECK(h(1, 0) == std::complex<double>(0.0, 0.7));
    CHECK(h(0, 1) == std::complex<double>(0.0, -0.7));
  }

  SUBCASE("invalid sizes") {
    CHECK_THROWS_AS(build_hamiltonian({0, 1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(build_hamiltonian({kMaxSites + 1, 1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(build_hamiltonian({3, std::nan(""), 1.0}), DomainError);
  }

  SUBCASE("presets") {
    const auto r = preset_chain("regular", 6);
    CHECK(r.hx == 0.0);
    CHECK(r.hy == 2.0);
    const auto c = preset_chain("chaotic", 6);
    CHECK(c.hx == 1.0);
    CHECK(c.hy == 1.0);
    CHECK_THROWS_AS(preset_chain("mixed", 6), DomainError);
  }
}

TEST_CASE("parity blocks") {
  const auto b2 = parity_split({2, 0.3, 0.4});
  CHECK(b2.even.rows() == 3);
  CHECK(b2.odd.rows() == 1);

  for (int n : {3, 6, 7}) {
    CAPTURE(n);
    const SpinChainSpec spec{n, 1.0, 1.0};
    const auto blocks = parity_split(spec);
    CHECK(blocks.even.rows() == ((1 << n) + (1 << ((n + 1) / 2))) / 2);
    CHECK((blocks.even - blocks.even.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((blocks.odd - blocks.odd.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    auto merged = eigenvalues(blocks.even).eigenvalues;
    const auto odd = eigenvalues(blocks.odd).eigenvalues;
    merged.insert(merged.end(), odd.begin(), odd.end());
    std::sort(merged.begin(), merged.end());
    const auto full = eigenvalues(build_hamiltonian(spec)).eigenvalues;
    REQUIRE(merged.size() == full.size());
    for (std::size_t i = 0; i < full.size(); ++i) CHECK(std::abs(merged[i] - full[i]) < 1e-9);
  }
}

TEST_CASE("Hermitian eigensolver") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 1, 2;
  const auto s = eigenvalues(d);
  CHECK(s.eigenvalues == std::vector<double>{1, 2, 3});

  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  ComplexMatrix a(64, 64);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) a(i, j) = {g(rng), g(rng)};
  const ComplexMatrix h = 0.5 * (a + a.adjoint());
  const auto ev = eigenvalues(h).eigenvalues;
  CHECK(std::is_sorted(ev.begin(), ev.end()));
  CHECK(std::accumulate(ev.begin(), ev.end(), 0.0) == doctest::Approx(h.trace().real()).epsilon(1e-8).scale(1.0));

  ComplexMatrix bad = h;
  bad(0, 1) += 1e-6;
  CHECK_THROWS_AS(eigenvalues(bad), DomainError);
}

TEST_CASE("unfolding") {
  UnfoldOptions all;
  all.central_fraction = 1.0;
  all.min_levels = 2;
  const auto s = unfold(Spectrum{{0, 1, 3}, Sector::Full}, all);
  REQUIRE(s.spacings.size() == 2);
  CHECK(s.spacings[0] == doctest::Approx(2.0 / 3.0));
  CHECK(s.spacings[1] == doctest::Approx(4.0 / 3.0));

  std::vector<double> ladder;
  for (int i = 0; i < 100; ++i) ladder.push_back(0.25 * i - 3.0);
  for (double x : unfold(Spectrum{ladder, Sector::Full}).spacings) CHECK(x == doctest::Approx(1.0));

  std::mt19937_64 rng(12);
  std::exponential_distribution<double> ex(3.0);
  std::vector<double> poisson{0.0};
  for (int i = 1; i < 5000; ++i) poisson.push_back(poisson.back() + ex(rng));
  const auto sp = unfold(Spectrum{poisson, Sector::Full});
  CHECK(std::abs(mean(sp.spacings) - 1.0) < 1e-10);
  CHECK(ks_statistic(sp.spacings, {LsdKind::Poisson, 0.0}) < 0.05);

  std::vector<double> doubled;
  for (int i = 0; i < 80; ++i) doubled.push_back(static_cast<double>(i / 2));
  for (const auto& opt : {UnfoldOptions{}, UnfoldOptions::chain()}) {
    const auto z = unfold(Spectrum{doubled, Sector::Full}, opt);
    CHECK(std::count(z.spacings.begin(), z.spacings.end(), 0.0) == 32);
    CHECK(std::abs(mean(z.spacings) - 1.0) < 1e-10);
  }
  CHECK_THROWS_AS(unfold(Spectrum{std::vector<double>(40, 1.0), Sector::Full}), DomainError);

  SUBCASE("staircase unfolding flattens a varying density") {
    std::vector<double> curved;
    for (int i = 0; i < 400; ++i) curved.push_back(std::sinh(3.0 * (i / 399.0 - 0.5)));
    const auto flat = unfold(Spectrum{curved, Sector::Full}, UnfoldOptions::chain());
    for (double x : flat.spacings) CHECK(x == doctest::Approx(1.0).epsilon(1e-2));
    const auto raw = unfold(Spectrum{curved, Sector::Full});
    CHECK(*std::max_element(raw.spacings.begin(), raw.spacings.end()) > 1.3);
    CHECK(to_string(unfold_method_from_string("staircase")) == "staircase");
    CHECK_THROWS_AS(unfold_method_from_string("spline"), DomainError);
  }

  CHECK_THROWS_AS(unfold(Spectrum{std::vector<double>(20, 0.0), Sector::Full}), DomainError);
}

TEST_CASE("level-spacing surmises") {
  const std::vector<LsdModel> models{{LsdKind::Poisson, 0.0}, {LsdKind::GOE, 0.0},   {LsdKind::GUE, 0.0},
                                     {LsdKind::GSE, 0.0},     {LsdKind::Brody, 0.0}, {LsdKind::Brody, 0.5},
                                     {LsdKind::Brody, 1.0},   {LsdKind::Brody, 1.2}};
  for (const auto& m : models) {
    CAPTURE(to_string(m.kind));
    CAPTURE(m.beta);
    CHECK(std::abs(pdf_moment(m, 0) - 1.0) < 1e-8);
    CHECK(std::abs(pdf_moment(m, 1) - 1.0) < 1e-8);
    for (double t : {0.0, 0.3, 1.0, 2.5})
      CHECK(lsd_cdf(m, t) ==
            doctest::Approx(
                1.0 -
                [&] {
                  QuadratureSpec q;
                  q.rel_tol = 1e-12;
                  return integrate([&](double u) { return Vector::Constant(1, lsd_pdf(m, u)); }, t, 60.0, q).value[0];
                }())
                .epsilon(1e-9)
                .scale(1.0));
  }

  CHECK(lsd_pdf({LsdKind::Brody, 0.0}, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-14));
  CHECK(brody_gamma(1.0) == doctest::Approx(kPi / 4.0).epsilon(1e-14));
  for (int i = 0; i <= 500; ++i) {
    const double t = 0.01 * i;
    CHECK(std::abs(lsd_pdf({LsdKind::Brody, 1.0}, t) - lsd_pdf({LsdKind::GOE, 0.0}, t)) < 1e-12);
  }
  CHECK(lsd_pdf({LsdKind::GUE, 0.0}, 1.0) == doctest::Approx(32.0 / (kPi * kPi) * std::exp(-4.0 / kPi)));

  CHECK_THROWS_AS(lsd_pdf({LsdKind::Brody, 1.5}, 1.0), DomainError);
  CHECK_THROWS_AS(lsd_pdf({LsdKind::Brody, -0.1}, 1.0), DomainError);
  CHECK_THROWS_AS(lsd_pdf({LsdKind::GOE, 0.0}, -1.0), DomainError);
  CHECK(lsd_kind_from_string("gse") == LsdKind::GSE);
  CHECK_THROWS_AS(lsd_kind_from_string("goe2"), DomainError);
}

TEST_CASE("sampling and Brody maximum likelihood") {
  const auto s0 = sample_lsd({LsdKind::Brody, 0.0}, 1, 5000);
  const auto sg = sample_lsd({LsdKind::GOE, 0.0}, 2, 5000);
  const auto s5 = sample_lsd({LsdKind::Brody, 0.5}, 3, 5000);
  CHECK(sample_lsd({LsdKind::GOE, 0.0}, 2, 5000) == sg);
  CHECK(std::abs(mean(sg) - 1.0) < 0.03);

  CHECK(fit_brody({s0}).beta < 0.1);
  const double bg = fit_brody({sg}).beta;
  CHECK(bg >= 0.9);
  CHECK(bg <= 1.1);
  const double b5 = fit_brody({s5}).beta;
  CHECK(b5 >= 0.4);
  CHECK(b5 <= 0.6);

  SUBCASE("degenerate spacings are counted, not fitted") {
    auto with_zeros = sg;
    for (int i = 0; i < 50; ++i) with_zeros[i] = 0.0;
    const auto f = fit_brody({with_zeros});
    CHECK(f.degeneracies == 50);
    CHECK(f.used == 4950);
    CHECK(std::isfinite(f.log_likelihood));
  }
  CHECK_THROWS_AS(fit_brody({std::vector<double>(50, 1.0)}), DomainError);
  CHECK_THROWS_AS(fit_brody({std::vector<double>(500, 0.0)}), DomainError);
}

TEST_CASE("Kolmogorov-Smirnov distance") {
  const LsdModel poisson{LsdKind::Poisson, 0.0};
  std::vector<double> quantiles;
  for (int i = 0; i < 1000; ++i) quantiles.push_back(-std::log(1.0 - (i + 0.5) / 1000.0));
  CHECK(ks_statistic(quantiles, poisson) <= 0.5e-3 + 1e-12);

  auto sg = sample_lsd({LsdKind::GOE, 0.0}, 5, 5000);
  const double d = ks_statistic(sg, poisson);
  CHECK(d >= 0.15);
  std::shuffle(sg.begin(), sg.end(), std::mt19937_64(1));
  CHECK(ks_statistic(sg, poisson) == d);
  CHECK_THROWS_AS(ks_statistic({}, poisson), DomainError);
}

TEST_CASE("Ising chain regime separation at n = 10") {
  const auto reg = analyze_chain(preset_chain("regular", 10));
  const auto cha = analyze_chain(preset_chain("chaotic", 10));
  CHECK(reg.larger().beta <= 0.35);
  CHECK(cha.larger().beta >= 0.6);
  CHECK(cha.larger().dimension == 528);
  CHECK(cha.larger().ks_goe < cha.larger().ks_poisson);
  CHECK(std::abs(mean(cha.even_spacings.spacings) - 1.0) < 1e-10);

  const auto serial = analyze_chain(preset_chain("chaotic", 10), UnfoldOptions::chain(), 1);
  CHECK(serial.larger().beta == cha.larger().beta);

  std::ostringstream os;
  write_spectrum_csv(os, cha.even);
  CHECK(os.str().rfind("index,energy\n", 0) == 0);
}
