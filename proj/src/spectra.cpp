#include "igac/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <ostream>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

namespace igac {
namespace {

using cd = std::complex<double>;

struct Amplitude {
  std::uint32_t state;
  cd value;
};

// H|s> as a list of (s', <s'|H|s>).
std::vector<Amplitude> apply_h(const SpinChainSpec& spec, std::uint32_t s) {
  std::vector<Amplitude> out;
  out.reserve(2 * spec.n);
  for (int j = 0; j + 1 < spec.n; ++j) out.push_back({s ^ (3u << j), cd(1.0, 0.0)});
  for (int j = 0; j < spec.n; ++j) {
    const bool up = (s >> j) & 1u;
    const cd c(spec.hx, up ? -spec.hy : spec.hy);
    if (c != cd(0.0, 0.0)) out.push_back({s ^ (1u << j), c});
  }
  return out;
}

std::uint32_t reflect(std::uint32_t s, int n) {
  std::uint32_t r = 0;
  for (int j = 0; j < n; ++j)
    if ((s >> j) & 1u) r |= 1u << (n - 1 - j);
  return r;
}

struct SectorBasis {
  // Each basis vector has one or two components with real coefficients.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> vectors;
  std::vector<int> index;      // state -> basis vector, -1 if none
  std::vector<double> weight;  // state -> coefficient in that vector
};

void build_sectors(int n, SectorBasis& even, SectorBasis& odd) {
  const std::uint32_t dim = 1u << n;
  even.index.assign(dim, -1);
  odd.index.assign(dim, -1);
  even.weight.assign(dim, 0.0);
  odd.weight.assign(dim, 0.0);
  const double h = 1.0 / std::sqrt(2.0);
  for (std::uint32_t s = 0; s < dim; ++s) {
    const std::uint32_t r = reflect(s, n);
    if (r < s) continue;
    if (r == s) {
      even.index[s] = static_cast<int>(even.vectors.size());
      even.weight[s] = 1.0;
      even.vectors.push_back({{s, 1.0}});
    } else {
      even.index[s] = even.index[r] = static_cast<int>(even.vectors.size());
      even.weight[s] = even.weight[r] = h;
      even.vectors.push_back({{s, h}, {r, h}});
      odd.index[s] = odd.index[r] = static_cast<int>(odd.vectors.size());
      odd.weight[s] = h;
      odd.weight[r] = -h;
      odd.vectors.push_back({{s, h}, {r, -h}});
    }
  }
}

ComplexMatrix project(const SpinChainSpec& spec, const SectorBasis& b) {
  const int d = static_cast<int>(b.vectors.size());
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (int col = 0; col < d; ++col)
    for (const auto& [s, c] : b.vectors[col])
      for (const Amplitude& a : apply_h(spec, s)) {
        const int row = b.index[a.state];
        if (row >= 0) m(row, col) += b.weight[a.state] * c * a.value;
      }
  return m;
}

double brody_log_pdf(double beta, double gamma, double theta) {
  return std::log((beta + 1.0) * gamma) + beta * std::log(theta) - gamma * std::pow(theta, beta + 1.0);
}

double brody_log_likelihood(double beta, const std::vector<double>& x) {
  const double gamma = brody_gamma(beta);
  double acc = 0.0;
  for (double v : x) acc += brody_log_pdf(beta, gamma, v);
  return acc;
}

// Least-squares Legendre fit of the counting function N(E) = index, evaluated
// at the levels themselves.
std::vector<double> staircase_levels(const std::vector<double>& e, int degree) {
  const std::size_t m = e.size();
  const double lo = e.front(), hi = e.back();
  if (!(hi > lo)) throw DomainError("unfold: fully degenerate spectrum");
  Matrix basis(static_cast<Eigen::Index>(m), degree + 1);
  Vector count(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const double x = 2.0 * (e[i] - lo) / (hi - lo) - 1.0;
    basis(i, 0) = 1.0;
    basis(i, 1) = x;
    for (int k = 1; k < degree; ++k) basis(i, k + 1) = ((2 * k + 1) * x * basis(i, k) - k * basis(i, k - 1)) / (k + 1);
    count[i] = static_cast<double>(i);
  }
  const Vector coef = basis.colPivHouseholderQr().solve(count);
  const Vector fitted = basis * coef;
  return std::vector<double>(fitted.data(), fitted.data() + fitted.size());
}

}  // namespace

void SpinChainSpec::validate() const {
  if (n < 1 || n > kMaxSites) throw DomainError("spin chain: n must lie in [1, 12]");
  if (!std::isfinite(hx) || !std::isfinite(hy)) throw DomainError("spin chain: fields must be finite");
}

SpinChainSpec preset_chain(const std::string& name, int n) {
  SpinChainSpec s;
  s.n = n;
  if (name == "regular") {
    s.hx = 0.0;
    s.hy = 2.0;
  } else if (name == "chaotic") {
    s.hx = 1.0;
    s.hy = 1.0;
  } else {
    throw DomainError("unknown spin chain preset: " + name);
  }
  s.validate();
  return s;
}

ComplexMatrix build_hamiltonian(const SpinChainSpec& spec) {
  spec.validate();
  const std::uint32_t dim = 1u << spec.n;
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (std::uint32_t s = 0; s < dim; ++s)
    for (const Amplitude& a : apply_h(spec, s)) h(a.state, s) += a.value;
  return h;
}

ParityBlocks parity_split(const SpinChainSpec& spec) {
  spec.validate();
  SectorBasis even, odd;
  build_sectors(spec.n, even, odd);
  return ParityBlocks{project(spec, even), project(spec, odd)};
}

std::string to_string(Sector s) {
  switch (s) {
    case Sector::Full:
      return "full";
    case Sector::ParityEven:
      return "parity-even";
    case Sector::ParityOdd:
      return "parity-odd";
  }
  return "full";
}

Spectrum eigenvalues(const ComplexMatrix& h, Sector sector) {
  if (h.rows() != h.cols()) throw DomainError("eigenvalues: matrix must be square");
  Spectrum out;
  out.sector = sector;
  if (h.rows() == 0) return out;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw DomainError("eigenvalues: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalues: eigensolver failed");
  const Vector& ev = solver.eigenvalues();
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  return out;
}

Spectrum eigenvalues(const Matrix& h, Sector sector) { return eigenvalues(ComplexMatrix(h.cast<cd>()), sector); }

std::string to_string(UnfoldMethod m) { return m == UnfoldMethod::Staircase ? "staircase" : "global-mean"; }

UnfoldMethod unfold_method_from_string(const std::string& s) {
  if (s == "staircase") return UnfoldMethod::Staircase;
  if (s == "global-mean") return UnfoldMethod::GlobalMean;
  throw DomainError("unknown unfolding method '" + s + "'");
}

SpacingSample unfold(const Spectrum& spectrum, const UnfoldOptions& options) {
  const auto& e = spectrum.eigenvalues;
  if (!(options.central_fraction > 0.0 && options.central_fraction <= 1.0))
    throw DomainError("unfold: central fraction must lie in (0, 1]");
  if (e.size() < std::max<std::size_t>(options.min_levels, 2)) throw DomainError("unfold: too few levels");
  if (!std::is_sorted(e.begin(), e.end())) throw DomainError("unfold: eigenvalues must be sorted");

  std::vector<double> levels = e;
  if (options.method == UnfoldMethod::Staircase) {
    if (options.staircase_degree < 1 || static_cast<std::size_t>(options.staircase_degree) + 1 >= e.size())
      throw DomainError("unfold: staircase degree out of range");
    levels = staircase_levels(e, options.staircase_degree);
  }

  const std::size_t keep = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(options.central_fraction * static_cast<double>(e.size()))));
  const std::size_t first = (e.size() - keep) / 2;
  SpacingSample out;
  out.spacings.reserve(keep - 1);
  for (std::size_t i = first + 1; i < first + keep; ++i) {
    const double s = e[i] == e[i - 1] ? 0.0 : levels[i] - levels[i - 1];
    if (s < 0.0) throw NumericalError("unfold: staircase fit is not monotone");
    out.spacings.push_back(s);
  }
  const double mean =
      std::accumulate(out.spacings.begin(), out.spacings.end(), 0.0) / static_cast<double>(out.spacings.size());
  if (!(mean > 0.0)) throw DomainError("unfold: fully degenerate spectrum");
  for (double& s : out.spacings) s /= mean;
  return out;
}

std::string to_string(LsdKind k) {
  switch (k) {
    case LsdKind::Poisson:
      return "poisson";
    case LsdKind::GOE:
      return "goe";
    case LsdKind::GUE:
      return "gue";
    case LsdKind::GSE:
      return "gse";
    case LsdKind::Brody:
      return "brody";
  }
  return "poisson";
}

LsdKind lsd_kind_from_string(const std::string& s) {
  for (LsdKind k : {LsdKind::Poisson, LsdKind::GOE, LsdKind::GUE, LsdKind::GSE, LsdKind::Brody})
    if (to_string(k) == s) return k;
  throw DomainError("unknown level-spacing model: " + s);
}

void LsdModel::validate() const {
  if (kind == LsdKind::Brody && !(beta >= 0.0 && beta <= kBrodyBetaMax))
    throw DomainError("Brody beta must lie in [0, 1.2]");
}

double brody_gamma(double beta) { return std::pow(std::tgamma((beta + 2.0) / (beta + 1.0)), beta + 1.0); }

double lsd_pdf(const LsdModel& model, double theta) {
  model.validate();
  if (!(theta >= 0.0)) throw DomainError("lsd_pdf: theta must be nonnegative");
  switch (model.kind) {
    case LsdKind::Poisson:
      return std::exp(-theta);
    case LsdKind::GOE:
      return 0.5 * kPi * theta * std::exp(-0.25 * kPi * theta * theta);
    case LsdKind::GUE:
      return 32.0 / (kPi * kPi) * theta * theta * std::exp(-4.0 * theta * theta / kPi);
    case LsdKind::GSE:
      return std::pow(2.0, 18) / (std::pow(3.0, 6) * kPi * kPi * kPi) * std::pow(theta, 4) *
             std::exp(-64.0 * theta * theta / (9.0 * kPi));
    case LsdKind::Brody: {
      const double b = model.beta, g = brody_gamma(b);
      if (theta == 0.0) return b == 0.0 ? g : 0.0;
      return (b + 1.0) * g * std::pow(theta, b) * std::exp(-g * std::pow(theta, b + 1.0));
    }
  }
  return 0.0;
}

double lsd_cdf(const LsdModel& model, double theta) {
  model.validate();
  if (theta <= 0.0) return 0.0;
  switch (model.kind) {
    case LsdKind::Poisson:
      return -std::expm1(-theta);
    case LsdKind::GOE:
      return -std::expm1(-0.25 * kPi * theta * theta);
    case LsdKind::GUE:
      return boost::math::gamma_p(1.5, 4.0 * theta * theta / kPi);
    case LsdKind::GSE:
      return boost::math::gamma_p(2.5, 64.0 * theta * theta / (9.0 * kPi));
    case LsdKind::Brody:
      return -std::expm1(-brody_gamma(model.beta) * std::pow(theta, model.beta + 1.0));
  }
  return 0.0;
}

std::vector<double> sample_lsd(const LsdModel& model, std::uint64_t seed, std::size_t count) {
  model.validate();
  if (count == 0) throw DomainError("sample_lsd: count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out(count);
  for (double& x : out) {
    const double u = unif(rng);
    const double e = -std::log1p(-u);  // Exp(1) variate
    switch (model.kind) {
      case LsdKind::Poisson:
        x = e;
        break;
      case LsdKind::GOE:
        x = std::sqrt(4.0 * e / kPi);
        break;
      case LsdKind::GUE:
        x = std::sqrt(kPi * boost::math::gamma_p_inv(1.5, u) / 4.0);
        break;
      case LsdKind::GSE:
        x = std::sqrt(9.0 * kPi * boost::math::gamma_p_inv(2.5, u) / 64.0);
        break;
      case LsdKind::Brody:
        x = std::pow(e / brody_gamma(model.beta), 1.0 / (model.beta + 1.0));
        break;
    }
  }
  return out;
}

BrodyFit fit_brody(const SpacingSample& sample, double tolerance) {
  if (sample.spacings.size() < 100) throw DomainError("fit_brody: need at least 100 spacings");
  BrodyFit fit;
  std::vector<double> used;
  used.reserve(sample.spacings.size());
  for (double s : sample.spacings) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("fit_brody: spacings must be finite and nonnegative");
    if (s < kDegenerateSpacing)
      ++fit.degeneracies;
    else
      used.push_back(s);
  }
  if (used.empty()) throw DomainError("fit_brody: degenerate sample");
  fit.used = used.size();

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = kBrodyBetaMax;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = brody_log_likelihood(c, used), fd = brody_log_likelihood(d, used);
  while (b - a > tolerance) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = brody_log_likelihood(c, used);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = brody_log_likelihood(d, used);
    }
  }
  // The maximum may sit on a bracket end.
  double best = 0.5 * (a + b), best_ll = brody_log_likelihood(best, used);
  for (double edge : {0.0, kBrodyBetaMax}) {
    const double ll = brody_log_likelihood(edge, used);
    if (ll > best_ll) best = edge, best_ll = ll;
  }
  fit.beta = best;
  fit.log_likelihood = best_ll;
  return fit;
}

double ks_statistic(const std::vector<double>& sample, const LsdModel& model) {
  if (sample.empty()) throw DomainError("ks_statistic: empty sample");
  std::vector<double> x = sample;
  std::sort(x.begin(), x.end());
  const double m = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = lsd_cdf(model, x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / m - f, f - static_cast<double>(i) / m});
  }
  return std::clamp(d, 0.0, 1.0);
}

FitReport fit_spectrum(const SpinChainSpec& spec, const Spectrum& spectrum, const SpacingSample& sample) {
  FitReport r;
  r.spec = spec;
  r.sector = spectrum.sector;
  r.dimension = spectrum.eigenvalues.size();
  const BrodyFit b = fit_brody(sample);
  r.beta = b.beta;
  r.log_likelihood = b.log_likelihood;
  r.degeneracies = b.degeneracies;
  r.ks_poisson = ks_statistic(sample.spacings, LsdModel{LsdKind::Poisson, 0.0});
  r.ks_goe = ks_statistic(sample.spacings, LsdModel{LsdKind::GOE, 0.0});
  return r;
}

ChainAnalysis analyze_chain(const SpinChainSpec& spec, const UnfoldOptions& options, int threads) {
  spec.validate();
  const ParityBlocks blocks = parity_split(spec);
  ChainAnalysis out;
  if (threads > 1) {
    auto odd = std::async(std::launch::async, [&] { return eigenvalues(blocks.odd, Sector::ParityOdd); });
    out.even = eigenvalues(blocks.even, Sector::ParityEven);
    out.odd = odd.get();
  } else {
    out.even = eigenvalues(blocks.even, Sector::ParityEven);
    out.odd = eigenvalues(blocks.odd, Sector::ParityOdd);
  }
  out.even_spacings = unfold(out.even, options);
  out.odd_spacings = unfold(out.odd, options);
  out.even_fit = fit_spectrum(spec, out.even, out.even_spacings);
  out.odd_fit = fit_spectrum(spec, out.odd, out.odd_spacings);
  return out;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  os << "index,energy\n";
  char buf[64];
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, s.eigenvalues[i]);
    os << buf;
  }
}

void write_spacings_csv(std::ostream& os, const SpacingSample& s) {
  os << "index,spacing\n";
  char buf[64];
  for (std::size_t i = 0; i < s.spacings.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, s.spacings[i]);
    os << buf;
  }
}

}  // namespace igac
