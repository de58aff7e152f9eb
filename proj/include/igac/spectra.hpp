#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igac/core.hpp"

namespace igac {

using ComplexMatrix = Eigen::MatrixXcd;

/// Open Ising chain H = sum_j X_j X_{j+1} + sum_j (hx X_j + hy Y_j). Bit j of a
/// basis index is site j; Y|0> = i|1>.
struct SpinChainSpec {
  int n = 2;
  double hx = 0.0;
  double hy = 0.0;

  void validate() const;
};

inline constexpr int kMaxSites = 12;

/// Named presets: "regular" is H(0, 2), "chaotic" is H(1, 1).
SpinChainSpec preset_chain(const std::string& name, int n);

ComplexMatrix build_hamiltonian(const SpinChainSpec& spec);

/// Site-reflection (j <-> n-1-j) symmetry blocks.
struct ParityBlocks {
  ComplexMatrix even;
  ComplexMatrix odd;
};
ParityBlocks parity_split(const SpinChainSpec& spec);

enum class Sector { Full, ParityEven, ParityOdd };
std::string to_string(Sector s);

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  Sector sector = Sector::Full;
};

/// Eigenvalues of a Hermitian matrix. Throws DomainError when the input is
/// not Hermitian to 1e-10 (relative to its largest entry).
Spectrum eigenvalues(const ComplexMatrix& h, Sector sector = Sector::Full);
Spectrum eigenvalues(const Matrix& h, Sector sector = Sector::Full);

enum class UnfoldMethod {
  GlobalMean,  // raw spacings divided by their mean
  Staircase,   // levels mapped through a Legendre fit of the counting function first
};

struct UnfoldOptions {
  double central_fraction = 0.8;  // fraction of the sorted levels kept, centred
  std::size_t min_levels = 32;
  UnfoldMethod method = UnfoldMethod::GlobalMean;
  int staircase_degree = 9;

  /// Settings used for chain analysis, where the density of states varies
  /// strongly across the band.
  static UnfoldOptions chain() {
    UnfoldOptions o;
    o.method = UnfoldMethod::Staircase;
    return o;
  }
};

std::string to_string(UnfoldMethod m);
UnfoldMethod unfold_method_from_string(const std::string& s);

struct SpacingSample {
  std::vector<double> spacings;  // mean 1
};

SpacingSample unfold(const Spectrum& spectrum, const UnfoldOptions& options = {});

enum class LsdKind { Poisson, GOE, GUE, GSE, Brody };
std::string to_string(LsdKind k);
LsdKind lsd_kind_from_string(const std::string& s);

struct LsdModel {
  LsdKind kind = LsdKind::Poisson;
  double beta = 0.0;  // Brody only, in [0, 1.2]

  void validate() const;
};

inline constexpr double kBrodyBetaMax = 1.2;

/// Brody normalization constant Gamma((beta+2)/(beta+1))^(beta+1).
double brody_gamma(double beta);

double lsd_pdf(const LsdModel& model, double theta);
double lsd_cdf(const LsdModel& model, double theta);
std::vector<double> sample_lsd(const LsdModel& model, std::uint64_t seed, std::size_t count);

struct BrodyFit {
  double beta = 0.0;
  double log_likelihood = 0.0;
  std::size_t used = 0;
  std::size_t degeneracies = 0;  // spacings below the cutoff, excluded from the likelihood
};

inline constexpr double kDegenerateSpacing = 1e-10;

/// Maximum-likelihood Brody parameter on [0, 1.2] by golden-section search.
BrodyFit fit_brody(const SpacingSample& sample, double tolerance = 1e-4);

/// Kolmogorov-Smirnov distance between the empirical CDF and the model CDF.
double ks_statistic(const std::vector<double>& sample, const LsdModel& model);

struct FitReport {
  SpinChainSpec spec;
  Sector sector = Sector::Full;
  std::size_t dimension = 0;
  double beta = 0.0;
  double log_likelihood = 0.0;
  double ks_poisson = 0.0;
  double ks_goe = 0.0;
  std::size_t degeneracies = 0;
};

struct ChainAnalysis {
  Spectrum even;
  Spectrum odd;
  SpacingSample even_spacings;
  SpacingSample odd_spacings;
  FitReport even_fit;
  FitReport odd_fit;

  const FitReport& larger() const { return even.eigenvalues.size() >= odd.eigenvalues.size() ? even_fit : odd_fit; }
};

FitReport fit_spectrum(const SpinChainSpec& spec, const Spectrum& spectrum, const SpacingSample& sample);

/// Diagonalizes both parity sectors (concurrently when threads > 1) and fits each.
ChainAnalysis analyze_chain(const SpinChainSpec& spec, const UnfoldOptions& options = UnfoldOptions::chain(),
                            int threads = 2);

void write_spectrum_csv(std::ostream& os, const Spectrum& s);
void write_spacings_csv(std::ostream& os, const SpacingSample& s);

}  // namespace igac
