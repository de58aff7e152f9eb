#include "igac/io.hpp"

#include <set>

namespace igac {
namespace {

using Fields = std::vector<std::pair<std::string, Json>>;

// Copies known fields from params (or their defaults) into a resolved object.
Json resolve_params(const Json& params, const Fields& defaults, const std::string& family) {
  if (!params.is_object()) throw DomainError(family + ": params must be an object");
  std::set<std::string> known;
  Json out = Json::object();
  for (const auto& [key, def] : defaults) {
    known.insert(key);
    out[key] = params.contains(key) ? params.at(key) : def;
  }
  for (const auto& [key, value] : params.items())
    if (!known.count(key)) throw DomainError(family + ": unknown parameter '" + key + "'");
  return out;
}

double num(const Json& p, const std::string& key) {
  const Json& v = p.at(key);
  if (!v.is_number()) throw DomainError("parameter '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> nums(const Json& p, const std::string& key) {
  const Json& v = p.at(key);
  if (!v.is_array()) throw DomainError("parameter '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw DomainError("parameter '" + key + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string canonical_family(std::string name) {
  static const std::vector<std::pair<std::string, std::string>> aliases{
      {"GaussianProductModel", "gaussian-product"},
      {"gaussian", "gaussian-product"},
      {"CorrelatedGaussianModel", "correlated-gaussian"},
      {"ExponentialModel", "exponential"},
      {"WeibullModel", "weibull"},
      {"WignerDysonModel", "wigner-dyson"},
      {"IntegrableComposite", "integrable"},
      {"ChaoticComposite", "chaotic"}};
  for (const auto& [alias, canon] : aliases)
    if (name == alias) return canon;
  return name;
}

}  // namespace

ModelDescriptor model_from_json(const Json& descriptor) {
  if (!descriptor.is_object() || !descriptor.contains("family") || !descriptor.at("family").is_string())
    throw DomainError("model descriptor needs a string 'family'");
  for (const auto& [key, value] : descriptor.items())
    if (key != "family" && key != "params") throw DomainError("model descriptor: unknown key '" + key + "'");
  const std::string family = canonical_family(descriptor.at("family").get<std::string>());
  const Json params = descriptor.contains("params") ? descriptor.at("params") : Json::object();

  ModelDescriptor out;
  Json p;
  if (family == "gaussian-product") {
    const Json l_json = params.contains("l") ? params.at("l") : Json(1);
    if (!l_json.is_number_integer() || l_json.get<long>() < 1) throw DomainError("gaussian-product: l must be >= 1");
    const auto l = l_json.get<int>();
    p = resolve_params(
        params, {{"l", l}, {"means", std::vector<double>(3 * l, 0.0)}, {"stds", std::vector<double>(3 * l, 1.0)}},
        family);
    out.instance = GaussianProductModel{l, nums(p, "means"), nums(p, "stds")}.instance();
  } else if (family == "correlated-gaussian") {
    p = resolve_params(params, {{"mu_x", 0.0}, {"mu_y", 0.0}, {"sigma_x", 1.0}, {"sigma_y", 1.0}, {"r", 0.0}}, family);
    out.instance =
        CorrelatedGaussianModel{num(p, "mu_x"), num(p, "mu_y"), num(p, "sigma_x"), num(p, "sigma_y"), num(p, "r")}
            .instance();
  } else if (family == "exponential") {
    p = resolve_params(params, {{"theta", 1.0}}, family);
    out.instance = ExponentialModel{num(p, "theta")}.instance();
  } else if (family == "weibull") {
    p = resolve_params(params, {{"lambda_scale", 1.0}, {"shape_n", 2.0}}, family);
    out.instance = WeibullModel{num(p, "lambda_scale"), num(p, "shape_n")}.instance();
  } else if (family == "wigner-dyson") {
    p = resolve_params(params, {{"phi", 1.0}}, family);
    out.instance = WignerDysonModel{num(p, "phi")}.instance();
  } else if (family == "integrable") {
    p = resolve_params(params, {{"mu_A", 1.0}, {"mu_B", 1.0}}, family);
    out.instance = IntegrableComposite{num(p, "mu_A"), num(p, "mu_B")}.instance();
  } else if (family == "chaotic") {
    p = resolve_params(params, {{"mu_A_p", 1.0}, {"mu_B_p", 0.0}, {"sigma_B_p", 1.0}}, family);
    out.instance = ChaoticComposite{num(p, "mu_A_p"), num(p, "mu_B_p"), num(p, "sigma_B_p")}.instance();
  } else {
    throw DomainError("unknown model family '" + family + "'");
  }
  out.resolved = Json{{"family", family}, {"params", p}};
  return out;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const Matrix& m) {
  Json a = Json::array();
  for (int i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
  return a;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw DomainError(what + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DomainError(what + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json curvature_report(const CurvatureBundle& bundle, const std::vector<SectionalSample>& sectional) {
  Json samples = Json::array();
  for (const auto& s : sectional) samples.push_back(Json{{"a", to_json(s.a)}, {"b", to_json(s.b)}, {"K", s.k}});
  return Json{{"point", to_json(bundle.point.coords())},
              {"metric", to_json(bundle.metric)},
              {"scalar", bundle.scalar},
              {"ricci", to_json(bundle.ricci)},
              {"sectional_samples", samples},
              {"weyl_max_abs", bundle.weyl_projective.max_abs()}};
}

Json to_json(const GrowthFit& fit, const Classification& classification) {
  return Json{{"model", to_string(fit.model)},
              {"slope", fit.slope},
              {"coefficient", fit.coefficient},
              {"intercepts", {{"linear", fit.intercept_linear}, {"logarithmic", fit.intercept_log}}},
              {"rms_linear", fit.rms_linear},
              {"rms_log", fit.rms_log},
              {"window", {fit.window_lo, fit.window_hi}},
              {"points", fit.points},
              {"classification", to_string(classification.regime)},
              {"residual_ratio", classification.margin}};
}

Json to_json(const FitReport& r) {
  return Json{{"n", r.spec.n},
              {"hx", r.spec.hx},
              {"hy", r.spec.hy},
              {"sector", to_string(r.sector)},
              {"dimension", r.dimension},
              {"beta", r.beta},
              {"log_likelihood", r.log_likelihood},
              {"ks_poisson", r.ks_poisson},
              {"ks_goe", r.ks_goe},
              {"degeneracies", r.degeneracies}};
}

}  // namespace igac
