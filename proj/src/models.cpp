#include "igac/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace igac {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Mass beyond this many e-folds is below 1e-30.
constexpr double kTailEfolds = 70.0;
constexpr double kGaussianHalfWidth = 12.0;

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Wigner-Dyson draw with mean spacing phi, by inverting the CDF.
double draw_wigner_dyson(double phi, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  return 2.0 * phi / std::sqrt(kPi) * std::sqrt(-std::log1p(-u));
}

double wigner_dyson_log_density(double phi, double y) {
  if (y < 0.0) return kNegInf;
  if (y == 0.0) return kNegInf;
  return std::log(kPi * y / (2.0 * phi * phi)) - kPi * y * y / (4.0 * phi * phi);
}

double wigner_dyson_cutoff(double phi) {
  // exp(-pi y^2 / 4 phi^2) < exp(-70) well inside 40 phi.
  return 40.0 * phi;
}

class GaussianProductFamily final : public DensityFamily {
 public:
  explicit GaussianProductFamily(int blocks) : blocks_(blocks) {
    if (blocks < 1) throw DomainError("gaussian product: need at least one block");
  }

  std::string name() const override { return blocks_ == 1 ? "gaussian" : "gaussian-product"; }
  int chart_dim() const override { return 2 * blocks_; }
  int sample_dim() const override { return blocks_; }
  Domain domain() const override {
    Domain d = Domain::unbounded(chart_dim());
    for (int b = 0; b < blocks_; ++b) d.bounds[2 * b + 1].lo = 0.0;
    return d;
  }

  double log_density(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    double acc = 0.0;
    for (int b = 0; b < blocks_; ++b) {
      const double mu = p[2 * b];
      const double sigma = p[2 * b + 1];
      const double z = (x[b] - mu) / sigma;
      acc += -0.5 * kLog2Pi - std::log(sigma) - 0.5 * z * z;
    }
    return acc;
  }

  Vector score(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    Vector s(chart_dim());
    for (int b = 0; b < blocks_; ++b) {
      const double mu = p[2 * b];
      const double sigma = p[2 * b + 1];
      const double dx = x[b] - mu;
      s[2 * b] = dx / (sigma * sigma);
      s[2 * b + 1] = (dx * dx - sigma * sigma) / (sigma * sigma * sigma);
    }
    return s;
  }

  Vector draw(const ParamPoint& p, std::mt19937_64& rng) const override {
    Vector x(blocks_);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int b = 0; b < blocks_; ++b) x[b] = p[2 * b] + p[2 * b + 1] * normal(rng);
    return x;
  }

  std::vector<Interval> integration_box(const ParamPoint& p) const override {
    std::vector<Interval> box(blocks_);
    for (int b = 0; b < blocks_; ++b)
      box[b] = {p[2 * b] - kGaussianHalfWidth * p[2 * b + 1], p[2 * b] + kGaussianHalfWidth * p[2 * b + 1]};
    return box;
  }

  std::vector<Factor> factors() const override {
    if (blocks_ == 1) return {};
    std::vector<Factor> out;
    auto single = std::make_shared<GaussianProductFamily>(1);
    for (int b = 0; b < blocks_; ++b) out.push_back(Factor{single, {2 * b, 2 * b + 1}, {b}});
    return out;
  }

  std::optional<ClosedFormMetric> closed_form_metric() const override {
    const int n = chart_dim();
    return make_closed_form(n, [n](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      std::vector<T> g(n * n, T(0.0));
      for (int b = 0; b < n / 2; ++b) {
        const T inv_var = T(1.0) / (x[2 * b + 1] * x[2 * b + 1]);
        g[(2 * b) * n + 2 * b] = inv_var;
        g[(2 * b + 1) * n + 2 * b + 1] = T(2.0) * inv_var;
      }
      return g;
    });
  }

 private:
  int blocks_;
};

class CorrelatedGaussianFamily final : public DensityFamily {
 public:
  explicit CorrelatedGaussianFamily(double r) : r_(r) {
    if (!(std::abs(r) < 1.0 - 1e-3)) throw DomainError("correlated gaussian: |r| must be < 1 - 1e-3");
  }

  std::string name() const override { return "correlated-gaussian"; }
  int chart_dim() const override { return 4; }
  int sample_dim() const override { return 2; }
  Domain domain() const override {
    Domain d = Domain::unbounded(4);
    d.bounds[1].lo = 0.0;
    d.bounds[3].lo = 0.0;
    return d;
  }
  double correlation() const { return r_; }

  double log_density(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    const double u = (x[0] - p[0]) / p[1];
    const double v = (x[1] - p[2]) / p[3];
    const double one_m_r2 = 1.0 - r_ * r_;
    const double q = u * u - 2.0 * r_ * u * v + v * v;
    return -kLog2Pi - std::log(p[1] * p[3]) - 0.5 * std::log(one_m_r2) - q / (2.0 * one_m_r2);
  }

  Vector score(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    const double sx = p[1];
    const double sy = p[3];
    const double u = (x[0] - p[0]) / sx;
    const double v = (x[1] - p[2]) / sy;
    const double one_m_r2 = 1.0 - r_ * r_;
    const double gu = (u - r_ * v) / one_m_r2;
    const double gv = (v - r_ * u) / one_m_r2;
    Vector s(4);
    s << gu / sx, -1.0 / sx + u * gu / sx, gv / sy, -1.0 / sy + v * gv / sy;
    return s;
  }

  Vector draw(const ParamPoint& p, std::mt19937_64& rng) const override {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    Vector x(2);
    x << p[0] + p[1] * z1, p[2] + p[3] * (r_ * z1 + std::sqrt(1.0 - r_ * r_) * z2);
    return x;
  }

  std::vector<Interval> integration_box(const ParamPoint& p) const override {
    return {{p[0] - kGaussianHalfWidth * p[1], p[0] + kGaussianHalfWidth * p[1]},
            {p[2] - kGaussianHalfWidth * p[3], p[2] + kGaussianHalfWidth * p[3]}};
  }

  std::optional<ClosedFormMetric> closed_form_metric() const override {
    const double r = r_;
    return make_closed_form(4, [r](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      const T sx = x[1];
      const T sy = x[3];
      const double den = r * r - 1.0;
      std::vector<T> g(16, T(0.0));
      g[0 * 4 + 0] = T(-1.0 / den) / (sx * sx);
      g[1 * 4 + 1] = T(-(2.0 - r * r) / den) / (sx * sx);
      g[2 * 4 + 2] = T(-1.0 / den) / (sy * sy);
      g[3 * 4 + 3] = T(-(2.0 - r * r) / den) / (sy * sy);
      const T cross = T(1.0) / (sx * sy);
      g[0 * 4 + 2] = g[2 * 4 + 0] = T(r / den) * cross;
      g[1 * 4 + 3] = g[3 * 4 + 1] = T(r * r / den) * cross;
      return g;
    });
  }

 private:
  double r_;
};

class ExponentialFamily final : public DensityFamily {
 public:
  std::string name() const override { return "exponential"; }
  int chart_dim() const override { return 1; }
  int sample_dim() const override { return 1; }
  Domain domain() const override { return Domain{{Interval{0.0, kInf}}}; }

  double log_density(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    if (x[0] < 0.0) return kNegInf;
    return -std::log(p[0]) - x[0] / p[0];
  }
  Vector score(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    return Vector::Constant(1, (x[0] - p[0]) / (p[0] * p[0]));
  }
  Vector draw(const ParamPoint& p, std::mt19937_64& rng) const override {
    return Vector::Constant(1, std::exponential_distribution<double>(1.0 / p[0])(rng));
  }
  std::vector<Interval> integration_box(const ParamPoint& p) const override { return {{0.0, kTailEfolds * p[0]}}; }
  std::optional<ClosedFormMetric> closed_form_metric() const override {
    return make_closed_form(1, [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      return std::vector<T>{T(1.0) / (x[0] * x[0])};
    });
  }
};

class WeibullFamily final : public DensityFamily {
 public:
  std::string name() const override { return "weibull"; }
  int chart_dim() const override { return 2; }
  int sample_dim() const override { return 1; }
  Domain domain() const override { return Domain{{Interval{0.0, kInf}, Interval{0.0, kInf}}}; }

  double log_density(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    const double y = x[0];
    if (y <= 0.0) return kNegInf;
    const double scale = p[0];
    const double shape = p[1];
    const double t = y / scale;
    return std::log(shape / scale) + (shape - 1.0) * std::log(t) - std::pow(t, shape);
  }
  Vector score(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    const double scale = p[0];
    const double shape = p[1];
    const double lt = std::log(x[0] / scale);
    const double z = std::exp(shape * lt);
    Vector s(2);
    s << shape / scale * (z - 1.0), 1.0 / shape + lt * (1.0 - z);
    return s;
  }
  Vector draw(const ParamPoint& p, std::mt19937_64& rng) const override {
    return Vector::Constant(1, std::weibull_distribution<double>(p[1], p[0])(rng));
  }
  std::vector<Interval> integration_box(const ParamPoint& p) const override {
    return {{0.0, p[0] * std::pow(kTailEfolds, 1.0 / p[1])}};
  }
  std::optional<ClosedFormMetric> closed_form_metric() const override {
    return make_closed_form(2, [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      constexpr double one_m_gamma = 1.0 - std::numbers::egamma;
      constexpr double shape_info = std::numbers::pi * std::numbers::pi / 6.0 + one_m_gamma * one_m_gamma;
      const T scale = x[0];
      const T shape = x[1];
      std::vector<T> g(4);
      g[0] = shape * shape / (scale * scale);
      g[1] = g[2] = T(-one_m_gamma) / scale;
      g[3] = T(shape_info) / (shape * shape);
      return g;
    });
  }
};

class WignerDysonFamily final : public DensityFamily {
 public:
  std::string name() const override { return "wigner-dyson"; }
  int chart_dim() const override { return 1; }
  int sample_dim() const override { return 1; }
  Domain domain() const override { return Domain{{Interval{0.0, kInf}}}; }

  double log_density(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    return wigner_dyson_log_density(p[0], x[0]);
  }
  Vector score(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    const double phi = p[0];
    return Vector::Constant(1, -2.0 / phi + kPi * x[0] * x[0] / (2.0 * phi * phi * phi));
  }
  Vector draw(const ParamPoint& p, std::mt19937_64& rng) const override {
    return Vector::Constant(1, draw_wigner_dyson(p[0], rng));
  }
  std::vector<Interval> integration_box(const ParamPoint& p) const override {
    return {{0.0, wigner_dyson_cutoff(p[0])}};
  }
  std::optional<ClosedFormMetric> closed_form_metric() const override {
    return make_closed_form(1, [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      return std::vector<T>{T(4.0) / (x[0] * x[0])};
    });
  }
};

class IntegrableCompositeFamily final : public DensityFamily {
 public:
  std::string name() const override { return "integrable"; }
  int chart_dim() const override { return 2; }
  int sample_dim() const override { return 2; }
  Domain domain() const override { return Domain{{Interval{0.0, kInf}, Interval{0.0, kInf}}}; }

  double log_density(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    if (x[0] < 0.0 || x[1] < 0.0) return kNegInf;
    return -std::log(p[0] * p[1]) - (x[0] / p[0] + x[1] / p[1]);
  }
  Vector score(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    Vector s(2);
    s << (x[0] - p[0]) / (p[0] * p[0]), (x[1] - p[1]) / (p[1] * p[1]);
    return s;
  }
  Vector draw(const ParamPoint& p, std::mt19937_64& rng) const override {
    Vector x(2);
    x[0] = std::exponential_distribution<double>(1.0 / p[0])(rng);
    x[1] = std::exponential_distribution<double>(1.0 / p[1])(rng);
    return x;
  }
  std::vector<Interval> integration_box(const ParamPoint& p) const override {
    return {{0.0, kTailEfolds * p[0]}, {0.0, kTailEfolds * p[1]}};
  }
  std::vector<Factor> factors() const override {
    auto e = exponential_family();
    return {Factor{e, {0}, {0}}, Factor{e, {1}, {1}}};
  }
  std::optional<ClosedFormMetric> closed_form_metric() const override {
    return make_closed_form(2, [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      return std::vector<T>{T(1.0) / (x[0] * x[0]), T(0.0), T(0.0), T(1.0) / (x[1] * x[1])};
    });
  }
};

class ChaoticCompositeFamily final : public DensityFamily {
 public:
  std::string name() const override { return "chaotic"; }
  int chart_dim() const override { return 3; }
  int sample_dim() const override { return 2; }
  Domain domain() const override { return Domain{{Interval{0.0, kInf}, Interval{}, Interval{0.0, kInf}}}; }

  double log_density(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    const double wd = wigner_dyson_log_density(p[0], x[0]);
    if (wd == kNegInf) return kNegInf;
    const double z = (x[1] - p[1]) / p[2];
    return wd - 0.5 * kLog2Pi - std::log(p[2]) - 0.5 * z * z;
  }
  Vector score(const ParamPoint& p, const Vector& x) const override {
    require_domain(p);
    const double mu_a = p[0];
    const double sigma = p[2];
    const double dx = x[1] - p[1];
    Vector s(3);
    s << -2.0 / mu_a + kPi * x[0] * x[0] / (2.0 * mu_a * mu_a * mu_a), dx / (sigma * sigma),
        (dx * dx - sigma * sigma) / (sigma * sigma * sigma);
    return s;
  }
  Vector draw(const ParamPoint& p, std::mt19937_64& rng) const override {
    Vector x(2);
    x[0] = draw_wigner_dyson(p[0], rng);
    x[1] = p[1] + p[2] * std::normal_distribution<double>(0.0, 1.0)(rng);
    return x;
  }
  std::vector<Interval> integration_box(const ParamPoint& p) const override {
    return {{0.0, wigner_dyson_cutoff(p[0])}, {p[1] - kGaussianHalfWidth * p[2], p[1] + kGaussianHalfWidth * p[2]}};
  }
  std::vector<Factor> factors() const override {
    return {Factor{wigner_dyson_family(), {0}, {0}}, Factor{gaussian_product_family(1), {1, 2}, {1}}};
  }
  std::optional<ClosedFormMetric> closed_form_metric() const override {
    return make_closed_form(3, [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      const T inv_var = T(1.0) / (x[2] * x[2]);
      std::vector<T> g(9, T(0.0));
      g[0] = T(4.0) / (x[0] * x[0]);
      g[4] = inv_var;
      g[8] = T(2.0) * inv_var;
      return g;
    });
  }
};

class UniformFamily final : public DensityFamily {
 public:
  explicit UniformFamily(std::vector<Interval> box) : box_(std::move(box)) {
    log_volume_ = 0.0;
    for (const auto& iv : box_) {
      if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.hi > iv.lo))
        throw DomainError("uniform: box must be finite and non-degenerate");
      log_volume_ += std::log(iv.hi - iv.lo);
    }
  }

  std::string name() const override { return "uniform"; }
  int chart_dim() const override { return 0; }
  int sample_dim() const override { return static_cast<int>(box_.size()); }
  Domain domain() const override { return Domain{}; }

  double log_density(const ParamPoint&, const Vector& x) const override {
    for (int i = 0; i < sample_dim(); ++i)
      if (x[i] < box_[i].lo || x[i] > box_[i].hi) return kNegInf;
    return -log_volume_;
  }
  Vector score(const ParamPoint&, const Vector&) const override { return Vector(0); }
  Vector draw(const ParamPoint&, std::mt19937_64& rng) const override {
    Vector x(sample_dim());
    for (int i = 0; i < sample_dim(); ++i) x[i] = box_[i].lo + (box_[i].hi - box_[i].lo) * uniform01(rng);
    return x;
  }
  std::vector<Interval> integration_box(const ParamPoint&) const override { return box_; }

 private:
  std::vector<Interval> box_;
  double log_volume_ = 0.0;
};

class PushforwardFamily final : public DensityFamily {
 public:
  PushforwardFamily(FamilyPtr base, MonotoneMap map) : base_(std::move(base)), map_(std::move(map)) {}

  std::string name() const override { return "pushforward(" + base_->name() + ")"; }
  int chart_dim() const override { return base_->chart_dim(); }
  int sample_dim() const override { return 1; }
  Domain domain() const override { return base_->domain(); }

  double log_density(const ParamPoint& p, const Vector& y) const override {
    if (!map_.codomain.contains(y[0])) return kNegInf;
    const double x = map_.inverse(y[0]);
    const double lp = base_->log_density(p, Vector::Constant(1, x));
    if (lp == kNegInf) return kNegInf;
    return lp - std::log(std::abs(map_.derivative(x)));
  }
  Vector score(const ParamPoint& p, const Vector& y) const override {
    // The Jacobian factor is parameter independent, so the score is pulled back unchanged.
    return base_->score(p, Vector::Constant(1, map_.inverse(y[0])));
  }
  Vector draw(const ParamPoint& p, std::mt19937_64& rng) const override {
    return Vector::Constant(1, map_.forward(base_->draw(p, rng)[0]));
  }
  std::vector<Interval> integration_box(const ParamPoint& p) const override {
    const Interval b = base_->integration_box(p)[0];
    const double lo = clamp_forward(b.lo);
    const double hi = clamp_forward(b.hi);
    return {{std::min(lo, hi), std::max(lo, hi)}};
  }
  std::optional<ClosedFormMetric> closed_form_metric() const override { return base_->closed_form_metric(); }

 private:
  double clamp_forward(double x) const {
    // Box ends may sit on the map's domain boundary (e.g. x = 0 for a power law).
    if (x <= map_.domain.lo) return map_.codomain.contains(map_.forward(x)) ? map_.forward(x) : map_.codomain.lo;
    return map_.forward(x);
  }

  FamilyPtr base_;
  MonotoneMap map_;
};

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Vector> DensityFamily::sample(const ParamPoint& params, std::uint64_t seed, std::size_t count) const {
  if (count == 0) throw DomainError(name() + ": sample count must be positive");
  require_domain(params);
  std::mt19937_64 rng(seed);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw(params, rng));
  return out;
}

double DensityFamily::density(const ParamPoint& params, const Vector& x) const {
  const double lp = log_density(params, x);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

void DensityFamily::require_domain(const ParamPoint& params) const {
  if (params.chart_dim() != chart_dim())
    throw DomainError(name() + ": expected " + std::to_string(chart_dim()) + " parameters, got " +
                      std::to_string(params.chart_dim()));
  if (!domain().contains(params.coords())) throw DomainError(name() + ": parameters outside domain");
}

FamilyPtr gaussian_product_family(int blocks) { return std::make_shared<GaussianProductFamily>(blocks); }
FamilyPtr correlated_gaussian_family(double r) { return std::make_shared<CorrelatedGaussianFamily>(r); }
FamilyPtr exponential_family() { return std::make_shared<ExponentialFamily>(); }
FamilyPtr weibull_family() { return std::make_shared<WeibullFamily>(); }
FamilyPtr wigner_dyson_family() { return std::make_shared<WignerDysonFamily>(); }
FamilyPtr integrable_composite_family() { return std::make_shared<IntegrableCompositeFamily>(); }
FamilyPtr chaotic_composite_family() { return std::make_shared<ChaoticCompositeFamily>(); }
FamilyPtr uniform_family(std::vector<Interval> box) { return std::make_shared<UniformFamily>(std::move(box)); }

ModelInstance GaussianProductModel::instance() const {
  if (l < 1) throw DomainError("gaussian product: l must be positive");
  const auto count = static_cast<std::size_t>(3 * l);
  if (means.size() != count || stds.size() != count)
    throw DomainError("gaussian product: means and stds need 3l entries");
  Vector c(2 * count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(stds[i] > 0.0)) throw DomainError("gaussian product: stds must be positive");
    c[2 * i] = means[i];
    c[2 * i + 1] = stds[i];
  }
  return {gaussian_product_family(3 * l), ParamPoint(c)};
}

ModelInstance CorrelatedGaussianModel::instance() const {
  ModelInstance m{correlated_gaussian_family(r), ParamPoint{mu_x, sigma_x, mu_y, sigma_y}};
  m.family->require_domain(m.params);
  return m;
}

ModelInstance ExponentialModel::instance() const {
  ModelInstance m{exponential_family(), ParamPoint{theta}};
  m.family->require_domain(m.params);
  return m;
}

ModelInstance WeibullModel::instance() const {
  ModelInstance m{weibull_family(), ParamPoint{lambda_scale, shape_n}};
  m.family->require_domain(m.params);
  return m;
}

ModelInstance WignerDysonModel::instance() const {
  ModelInstance m{wigner_dyson_family(), ParamPoint{phi}};
  m.family->require_domain(m.params);
  return m;
}

ModelInstance IntegrableComposite::instance() const {
  ModelInstance m{integrable_composite_family(), ParamPoint{mu_A, mu_B}};
  m.family->require_domain(m.params);
  return m;
}

ModelInstance ChaoticComposite::instance() const {
  ModelInstance m{chaotic_composite_family(), ParamPoint{mu_A_p, mu_B_p, sigma_B_p}};
  m.family->require_domain(m.params);
  return m;
}

// ---------------------------------------------------------------------------

MonotoneMap MonotoneMap::identity() {
  return MonotoneMap{[](double x) { return x; }, [](double y) { return y; }, [](double) { return 1.0; }, Interval{},
                     Interval{}};
}

MonotoneMap MonotoneMap::power_law(double zeta, double n) {
  if (!(zeta > 0.0) || !(n > 0.0)) throw DomainError("power_law: zeta and n must be positive");
  return MonotoneMap{[=](double x) { return std::pow(x / zeta, 1.0 / n); },
                     [=](double y) { return zeta * std::pow(y, n); },
                     [=](double x) { return std::pow(x / zeta, 1.0 / n - 1.0) / (n * zeta); }, Interval{0.0, kInf},
                     Interval{0.0, kInf}};
}

FamilyPtr pushforward(const FamilyPtr& family, const ParamPoint& params, const MonotoneMap& map) {
  if (family->sample_dim() != 1) throw UnsupportedError("pushforward: only univariate microstates are supported");
  family->require_domain(params);

  // Probe invertibility on the interior of the base support.
  const Interval box = family->integration_box(params)[0];
  constexpr int kProbes = 257;
  int sign = 0;
  for (int i = 1; i < kProbes; ++i) {
    const double x = box.lo + (box.hi - box.lo) * i / kProbes;
    if (!map.domain.contains(x)) throw UnsupportedError("pushforward: map undefined on the family support");
    const double d = map.derivative(x);
    if (!(std::isfinite(d)) || d == 0.0) throw UnsupportedError("pushforward: map derivative vanishes on support");
    const int s = d > 0 ? 1 : -1;
    if (sign != 0 && s != sign) throw UnsupportedError("pushforward: map is not monotone (derivative changes sign)");
    sign = s;
    const double back = map.inverse(map.forward(x));
    if (std::abs(back - x) > 1e-10 * std::max(1.0, std::abs(x)))
      throw UnsupportedError("pushforward: inverse does not undo forward");
  }
  return std::make_shared<PushforwardFamily>(family, map);
}

// ---------------------------------------------------------------------------

QuadratureResult expectation(const DensityFamily& family, const ParamPoint& params,
                             const std::function<Vector(const Vector&)>& f, const QuadratureSpec& quadrature) {
  family.require_domain(params);
  if (family.sample_dim() > 2)
    throw UnsupportedError(family.name() + ": direct quadrature limited to two microvariables");
  const auto box = family.integration_box(params);
  return integrate_box(
      [&](const Vector& x) {
        const double lp = family.log_density(params, x);
        Vector v = f(x);
        if (lp == kNegInf) return Vector(Vector::Zero(v.size()));
        return Vector(std::exp(lp) * v);
      },
      box, quadrature);
}

NormalizationReport normalization_integral(const DensityFamily& family, const ParamPoint& params,
                                           const QuadratureSpec& quadrature) {
  family.require_domain(params);
  const int d = family.sample_dim();
  NormalizationReport rep;
  rep.mean = Vector::Zero(d);
  rep.std = Vector::Zero(d);

  if (d > 2) {
    const auto parts = family.factors();
    if (parts.empty()) throw UnsupportedError(family.name() + ": no factorization for high-dimensional quadrature");
    rep.integral = 1.0;
    for (const auto& part : parts) {
      Vector sub(part.chart_indices.size());
      for (std::size_t i = 0; i < part.chart_indices.size(); ++i) sub[i] = params[part.chart_indices[i]];
      const auto r = normalization_integral(*part.family, ParamPoint(sub), quadrature);
      rep.integral *= r.integral;
      rep.error += r.error;
      for (std::size_t i = 0; i < part.sample_indices.size(); ++i) {
        rep.mean[part.sample_indices[i]] = r.mean[i];
        rep.std[part.sample_indices[i]] = r.std[i];
      }
    }
    return rep;
  }

  const auto raw = expectation(
      family, params,
      [d](const Vector& x) {
        Vector v(1 + 2 * d);
        v[0] = 1.0;
        for (int i = 0; i < d; ++i) {
          v[1 + i] = x[i];
          v[1 + d + i] = x[i] * x[i];
        }
        return v;
      },
      quadrature);
  rep.integral = raw.value[0];
  rep.error = raw.error;
  for (int i = 0; i < d; ++i) {
    rep.mean[i] = raw.value[1 + i] / rep.integral;
    const double second = raw.value[1 + d + i] / rep.integral;
    rep.std[i] = std::sqrt(std::max(0.0, second - rep.mean[i] * rep.mean[i]));
  }
  return rep;
}

double relative_entropy(const DensityFamily& p_family, const ParamPoint& p_params, const DensityFamily& m_family,
                        const ParamPoint& m_params, const QuadratureSpec& quadrature) {
  if (p_family.sample_dim() != m_family.sample_dim())
    throw DomainError("relative_entropy: microstate dimensions differ");
  bool divergent = false;
  const auto r = expectation(
      p_family, p_params,
      [&](const Vector& x) {
        const double lp = p_family.log_density(p_params, x);
        if (lp == kNegInf) return Vector(Vector::Zero(1));
        const double lm = m_family.log_density(m_params, x);
        if (lm == kNegInf) {
          divergent = true;
          return Vector(Vector::Zero(1));
        }
        return Vector(Vector::Constant(1, lp - lm));
      },
      quadrature);
  if (divergent) throw QuadratureError("relative_entropy: reference vanishes where p > 0 (divergent integral)", kInf);
  return -r.value[0];
}

double relative_entropy(const DensityFamily& p_family, const ParamPoint& p_params, const QuadratureSpec& quadrature) {
  p_family.require_domain(p_params);
  const auto reference = uniform_family(p_family.integration_box(p_params));
  return relative_entropy(p_family, p_params, *reference, ParamPoint{}, quadrature);
}

}  // namespace igac
