#include "igac/cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "igac/dynamics.hpp"

namespace igac::cli {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kSubcommands{"geometry", "geodesic", "jacobi", "ige", "spectrum"};

// Accessors that reject wrong types with DomainError instead of json exceptions.
double get_num(const Json& obj, const std::string& key, double def) {
  if (!obj.contains(key) || obj.at(key).is_null()) return def;
  if (!obj.at(key).is_number()) throw DomainError("'" + key + "' must be a number");
  const double v = obj.at(key).get<double>();
  if (!std::isfinite(v)) throw DomainError("'" + key + "' must be finite");
  return v;
}

long get_int(const Json& obj, const std::string& key, long def) {
  if (!obj.contains(key) || obj.at(key).is_null()) return def;
  if (!obj.at(key).is_number_integer()) throw DomainError("'" + key + "' must be an integer");
  return obj.at(key).get<long>();
}

std::string get_str(const Json& obj, const std::string& key, const std::string& def) {
  if (!obj.contains(key) || obj.at(key).is_null()) return def;
  if (!obj.at(key).is_string()) throw DomainError("'" + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

Json section(const Json& raw, const std::string& key) {
  if (!raw.contains(key) || raw.at(key).is_null()) return Json::object();
  if (!raw.at(key).is_object()) throw DomainError("'" + key + "' must be an object");
  return raw.at(key);
}

void reject_unknown(const Json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw DomainError(where + ": unknown key '" + key + "'");
}

Json resolve_tolerances(const Json& raw, double abs_def, double rel_def) {
  const Json t = section(raw, "tolerances");
  reject_unknown(t, {"abs", "rel"}, "tolerances");
  const double a = get_num(t, "abs", abs_def), r = get_num(t, "rel", rel_def);
  if (a < 0.0 || r < 0.0 || (a == 0.0 && r == 0.0)) throw DomainError("tolerances must be nonnegative and not both 0");
  return Json{{"abs", a}, {"rel", r}};
}

Json resolve_grid(const Json& raw, double tau_def, long points_def, long points_min) {
  const Json g = section(raw, "grid");
  reject_unknown(g, {"tau_max", "points"}, "grid");
  const double tau = get_num(g, "tau_max", tau_def);
  const long pts = get_int(g, "points", points_def);
  if (!(tau > 0.0)) throw DomainError("grid.tau_max must be positive");
  if (pts < points_min) throw DomainError("grid.points must be at least " + std::to_string(points_min));
  return Json{{"tau_max", tau}, {"points", pts}};
}

// Model plus optional explicit chart point; returns the resolved pair.
void resolve_model(const Json& raw, Json& out) {
  if (!raw.contains("model")) throw DomainError("a model descriptor is required");
  const ModelDescriptor md = model_from_json(raw.at("model"));
  out["model"] = md.resolved;
  Vector point = md.instance.params.coords();
  if (raw.contains("point") && !raw.at("point").is_null()) point = vector_from_json(raw.at("point"), "point");
  if (point.size() != md.instance.family->chart_dim())
    throw DomainError("point must have " + std::to_string(md.instance.family->chart_dim()) + " coordinates");
  if (!md.instance.family->domain().contains(point)) throw DomainError("point lies outside the model's domain");
  out["point"] = to_json(point);
}

Json resolve_geodesic_section(const Json& raw, int dim) {
  const Json g = section(raw, "geodesic");
  reject_unknown(g, {"lambda", "velocity"}, "geodesic");
  Json out{{"lambda", get_num(g, "lambda", 1.0)}};
  if (!(out["lambda"].get<double>() > 0.0)) throw DomainError("geodesic.lambda must be positive");
  if (g.contains("velocity") && !g.at("velocity").is_null()) {
    const Vector v = vector_from_json(g.at("velocity"), "geodesic.velocity");
    if (v.size() != dim) throw DomainError("geodesic.velocity has the wrong dimension");
    out["velocity"] = to_json(v);
  } else {
    out["velocity"] = nullptr;
  }
  return out;
}

// Closed-form Gaussian geodesic moved onto (mu0, sigma0) by the isometry
// (mu, sigma) -> (a mu + b, a sigma).
Vector gaussian_block_velocity(double sigma0, double lam) {
  const GeodesicState cf = analytic_gaussian_state({2.0 * std::sqrt(2.0) * lam, lam, 0.0}, 0.0);
  const double a = sigma0 / cf.point[1];
  return a * cf.velocity;
}

GeodesicState initial_state(const Json& config) {
  const std::string family = config["model"]["family"].get<std::string>();
  const ParamPoint point(vector_from_json(config["point"], "point"));
  const Json& g = config["geodesic"];
  const double lam = g["lambda"].get<double>();
  if (!g["velocity"].is_null()) return GeodesicState{0.0, point, vector_from_json(g["velocity"], "velocity")};

  const Vector& x = point.coords();
  Vector v(x.size());
  if (family == "gaussian-product") {
    for (int b = 0; b < x.size() / 2; ++b) v.segment(2 * b, 2) = gaussian_block_velocity(x[2 * b + 1], lam);
  } else if (family == "chaotic") {
    v[0] = lam * x[0];
    v.segment(1, 2) = gaussian_block_velocity(x[2], lam);
  } else if (family == "integrable" || family == "exponential" || family == "wigner-dyson") {
    v = lam * x;
  } else {
    throw DomainError(family + ": no default initial velocity; set geodesic.velocity");
  }
  return GeodesicState{0.0, point, v};
}

OdeTolerances ode_tolerances(const Json& config) {
  OdeTolerances t;
  t.abs_tol = config["tolerances"]["abs"].get<double>();
  t.rel_tol = config["tolerances"]["rel"].get<double>();
  return t;
}

std::vector<double> config_grid(const Json& config) {
  return uniform_grid(0.0, config["grid"]["tau_max"].get<double>(), config["grid"]["points"].get<int>());
}

MetricField config_field(const Json& config) {
  const ModelDescriptor md = model_from_json(config["model"]);
  const std::string kind = config.contains("metric") ? config["metric"].get<std::string>() : "analytic";
  if (kind == "quadrature") return quadrature_metric(md.instance.family);
  return analytic_metric(md.instance.family);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

template <typename Writer>
void write_csv(const fs::path& path, Writer&& writer) {
  std::ostringstream os;
  writer(os);
  write_text(path, os.str());
}

Json run_geometry(const Json& config, const fs::path& dir) {
  const MetricField field = config_field(config);
  const ParamPoint point(vector_from_json(config["point"], "point"));
  const CurvatureBundle bundle = curvature(field, point);
  const int n = field.chart_dim();

  std::vector<SectionalSample> samples;
  if (n >= 2) {
    for (int i = 0; i < n && i < 6; ++i)
      for (int j = i + 1; j < n && j < 6; ++j) {
        const Vector a = Vector::Unit(n, i), b = Vector::Unit(n, j);
        samples.push_back({a, b, sectional_curvature(bundle, a, b)});
      }
    std::mt19937_64 rng(config["seed"].get<std::uint64_t>());
    std::normal_distribution<double> g;
    const long extra = config["sectional_samples"].get<long>();
    for (long k = 0; k < extra; ++k) {
      Vector a(n), b(n);
      for (int i = 0; i < n; ++i) a[i] = g(rng);
      for (int i = 0; i < n; ++i) b[i] = g(rng);
      samples.push_back({a, b, sectional_curvature(bundle, a, b)});
    }
  }
  Json report = curvature_report(bundle, samples);
  report["provenance"] = to_string(field.provenance());
  write_json(dir / "report.json", report);
  return report;
}

Json run_geodesic(const Json& config, const fs::path& dir, bool with_jacobi) {
  const MetricField field = config_field(config);
  const GeodesicState init = initial_state(config);
  const OdeTolerances tol = ode_tolerances(config);
  Trajectory traj = integrate_geodesic(field, init, config_grid(config), tol);
  Json report{{"initial_point", to_json(init.point.coords())},
              {"initial_velocity", to_json(init.velocity)},
              {"final_point", to_json(traj.states.back().point.coords())},
              {"speed2", geodesic_speed2(field, init)},
              {"max_speed_drift", max_speed_drift(field, traj)}};

  if (with_jacobi) {
    const Json& jc = config["jacobi"];
    const int n = field.chart_dim();
    JacobiField j0{Vector::Zero(n), Vector::Zero(n)};
    if (!jc["j0"].is_null()) j0.j = vector_from_json(jc["j0"], "jacobi.j0");
    if (!jc["dj0"].is_null()) {
      j0.djdtau = vector_from_json(jc["dj0"], "jacobi.dj0");
    } else {
      const Vector e = Vector::Ones(n);
      j0.djdtau = e / jacobi_intensity(field, init.point, e);
    }
    if (j0.j.size() != n || j0.djdtau.size() != n) throw DomainError("jacobi initial data has the wrong dimension");
    traj = integrate_jlc(field, traj, j0, tol);
    report["final_intensity"] = traj.intensity.back();
    report["lambda_j"] = estimate_lambda_j(traj.grid, traj.intensity, jc["tail_fraction"].get<double>());
    report["tail_fraction"] = jc["tail_fraction"];
  }
  write_csv(dir / "trajectory.csv", [&](std::ostream& os) { traj.write_csv(os); });
  write_json(dir / "report.json", report);
  return report;
}

Json run_ige_command(const Json& config, const fs::path& dir) {
  const MetricField field = config_field(config);
  const GeodesicState init = initial_state(config);
  const IgeRun r = run_ige(field, init, config["grid"]["tau_max"].get<double>(), config["grid"]["points"].get<int>(),
                           ode_tolerances(config), config["ige"]["tail_fraction"].get<double>());
  Json report = to_json(r.fit, r.regime);
  report["initial_velocity"] = to_json(init.velocity);
  write_csv(dir / "trajectory.csv", [&](std::ostream& os) { r.geodesic.write_csv(os); });
  write_csv(dir / "ige.csv", [&](std::ostream& os) { r.trace.write_csv(os); });
  write_json(dir / "report.json", report);
  return report;
}

Json run_spectrum(const Json& config, const fs::path& dir) {
  const Json& s = config["spectrum"];
  const SpinChainSpec spec{s["n"].get<int>(), s["hx"].get<double>(), s["hy"].get<double>()};
  UnfoldOptions opt = UnfoldOptions::chain();
  opt.method = unfold_method_from_string(s["unfold"].get<std::string>());
  opt.central_fraction = s["central_fraction"].get<double>();
  const ChainAnalysis a = analyze_chain(spec, opt, config["threads"].get<int>());
  const Json report{{"even", to_json(a.even_fit)}, {"odd", to_json(a.odd_fit)}, {"larger", to_json(a.larger())}};
  write_csv(dir / "spectrum_even.csv", [&](std::ostream& os) { write_spectrum_csv(os, a.even); });
  write_csv(dir / "spectrum_odd.csv", [&](std::ostream& os) { write_spectrum_csv(os, a.odd); });
  write_csv(dir / "spacings_even.csv", [&](std::ostream& os) { write_spacings_csv(os, a.even_spacings); });
  write_csv(dir / "spacings_odd.csv", [&](std::ostream& os) { write_spacings_csv(os, a.odd_spacings); });
  write_json(dir / "report.json", report);
  return report;
}

}  // namespace

Json resolve_config(const Json& input) {
  if (!input.is_object()) throw DomainError("configuration must be a JSON object");
  // A manifest is accepted as input: its config block is the configuration.
  const Json raw = input.contains("config") && input.contains("version") ? input.at("config") : input;
  if (!raw.is_object()) throw DomainError("configuration must be a JSON object");

  const std::string sub = get_str(raw, "subcommand", "");
  if (std::find(kSubcommands.begin(), kSubcommands.end(), sub) == kSubcommands.end())
    throw DomainError("subcommand must be one of geometry, geodesic, jacobi, ige, spectrum");

  Json out{{"subcommand", sub}};
  const long seed = get_int(raw, "seed", 0);
  const long threads = get_int(raw, "threads", 1);
  if (seed < 0) throw DomainError("seed must be nonnegative");
  if (threads < 1) throw DomainError("threads must be positive");
  out["seed"] = seed;
  out["threads"] = threads;

  if (sub == "spectrum") {
    reject_unknown(raw, {"subcommand", "seed", "threads", "spectrum"}, "config");
    const Json s = section(raw, "spectrum");
    reject_unknown(s, {"preset", "n", "hx", "hy", "unfold", "central_fraction"}, "spectrum");
    SpinChainSpec spec{static_cast<int>(get_int(s, "n", 10)), 1.0, 1.0};
    const std::string preset = get_str(s, "preset", "");
    if (!preset.empty()) spec = preset_chain(preset, spec.n);
    spec.hx = get_num(s, "hx", spec.hx);
    spec.hy = get_num(s, "hy", spec.hy);
    spec.validate();
    const std::string unfold = get_str(s, "unfold", "staircase");
    unfold_method_from_string(unfold);
    const double cf = get_num(s, "central_fraction", 0.8);
    if (!(cf > 0.0 && cf <= 1.0)) throw DomainError("spectrum.central_fraction must lie in (0, 1]");
    out["spectrum"] =
        Json{{"n", spec.n}, {"hx", spec.hx}, {"hy", spec.hy}, {"unfold", unfold}, {"central_fraction", cf}};
    return out;
  }

  std::vector<std::string> allowed{"subcommand", "seed", "threads", "model", "point", "metric"};
  resolve_model(raw, out);
  const std::string metric = get_str(raw, "metric", "analytic");
  if (metric != "analytic" && metric != "quadrature") throw DomainError("metric must be 'analytic' or 'quadrature'");
  out["metric"] = metric;
  const int dim = static_cast<int>(out["point"].size());

  if (sub == "geometry") {
    allowed.push_back("sectional_samples");
    const long k = get_int(raw, "sectional_samples", 8);
    if (k < 0) throw DomainError("sectional_samples must be nonnegative");
    out["sectional_samples"] = k;
  } else {
    allowed.insert(allowed.end(), {"tolerances", "grid", "geodesic"});
    out["geodesic"] = resolve_geodesic_section(raw, dim);
    if (sub == "ige") {
      allowed.push_back("ige");
      const OdeTolerances t = ige_tolerances();
      out["tolerances"] = resolve_tolerances(raw, t.abs_tol, t.rel_tol);
      out["grid"] =
          resolve_grid(raw, 20.0 / out["geodesic"]["lambda"].get<double>(), 1024, static_cast<long>(kMinTraceGrid));
      const Json ig = section(raw, "ige");
      reject_unknown(ig, {"tail_fraction"}, "ige");
      const double tf = get_num(ig, "tail_fraction", 0.5);
      if (!(tf > 0.0 && tf <= 1.0)) throw DomainError("ige.tail_fraction must lie in (0, 1]");
      out["ige"] = Json{{"tail_fraction", tf}};
    } else {
      out["tolerances"] = resolve_tolerances(raw, 1e-9, 1e-9);
      out["grid"] = resolve_grid(raw, 10.0, 201, 2);
    }
    if (sub == "jacobi") {
      allowed.push_back("jacobi");
      const Json jc = section(raw, "jacobi");
      reject_unknown(jc, {"j0", "dj0", "tail_fraction"}, "jacobi");
      Json r{{"j0", nullptr}, {"dj0", nullptr}};
      for (const char* key : {"j0", "dj0"})
        if (jc.contains(key) && !jc.at(key).is_null()) {
          const Vector v = vector_from_json(jc.at(key), std::string("jacobi.") + key);
          if (v.size() != dim) throw DomainError(std::string("jacobi.") + key + " has the wrong dimension");
          r[key] = to_json(v);
        }
      const double tf = get_num(jc, "tail_fraction", 0.5);
      if (!(tf > 0.0 && tf <= 1.0)) throw DomainError("jacobi.tail_fraction must lie in (0, 1]");
      r["tail_fraction"] = tf;
      out["jacobi"] = r;
    }
    // Fail early when no default velocity exists for this family.
    initial_state(out);
  }
  reject_unknown(raw, allowed, "config");
  return out;
}

int run(const Json& config, const fs::path& out_dir, std::ostream& err) {
  try {
    fs::create_directories(out_dir);
    write_json(out_dir / "manifest.json", Json{{"tool", kToolName}, {"version", kVersion}, {"config", config}});
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  }

  auto fail = [&](int code, const std::string& kind, const std::string& what, Json extra = Json::object()) {
    err << kind << ": " << what << "\n";
    Json report{{"status", "error"}, {"kind", kind}, {"message", what}};
    report.update(extra);
    try {
      write_json(out_dir / "report.json", report);
    } catch (const std::exception&) {
    }
    return code;
  };

  try {
    const std::string sub = config.at("subcommand").get<std::string>();
    if (sub == "geometry")
      run_geometry(config, out_dir);
    else if (sub == "geodesic")
      run_geodesic(config, out_dir, false);
    else if (sub == "jacobi")
      run_geodesic(config, out_dir, true);
    else if (sub == "ige")
      run_ige_command(config, out_dir);
    else if (sub == "spectrum")
      run_spectrum(config, out_dir);
    else
      throw DomainError("unknown subcommand '" + sub + "'");
  } catch (const TruncationError& e) {
    return fail(kNumericalFailure, "truncation", e.what(), Json{{"last_valid_tau", e.last_valid_tau()}});
  } catch (const QuadratureError& e) {
    return fail(kNumericalFailure, "quadrature", e.what(), Json{{"achieved", e.achieved()}});
  } catch (const NumericalError& e) {
    return fail(kNumericalFailure, "numerical", e.what());
  } catch (const UnsupportedError& e) {
    return fail(kInvalidConfig, "unsupported", e.what());
  } catch (const DomainError& e) {
    return fail(kInvalidConfig, "domain", e.what());
  } catch (const Json::exception& e) {
    return fail(kInvalidConfig, "config", e.what());
  } catch (const std::exception& e) {
    return fail(kIoFailure, "io", e.what());
  }
  return kOk;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Information-geometric chaos indicators: curvature, geodesics, Jacobi fields, IGE, level spacings",
               kToolName};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  struct Flags {
    std::optional<std::string> config, model, preset, unfold, metric;
    std::string out_dir = ".";
    std::optional<long> seed, threads, l, points, n, sectional;
    std::optional<double> tau_max, lambda, hx, hy, abs_tol, rel_tol, tail;
    std::optional<double> mu_a, mu_b, sigma_b, theta, phi, r, shape, scale;
    std::vector<double> point, velocity, means, stds, j0, dj0;
  } f;

  for (const auto& name : kSubcommands) {
    CLI::App* sc = app.add_subcommand(name, name + " run");
    sc->add_option("--config", f.config, "JSON configuration or manifest; flags override it");
    sc->add_option("--out-dir", f.out_dir, "output directory")->capture_default_str();
    sc->add_option("--seed", f.seed, "random seed");
    sc->add_option("--threads", f.threads, "worker threads");
    if (name == "spectrum") {
      sc->add_option("--preset", f.preset, "regular | chaotic");
      sc->add_option("--n", f.n, "chain length");
      sc->add_option("--hx", f.hx, "longitudinal field");
      sc->add_option("--hy", f.hy, "transverse field");
      sc->add_option("--unfold", f.unfold, "staircase | global-mean");
      continue;
    }
    sc->add_option("--model", f.model, "model family");
    sc->add_option("--metric", f.metric, "analytic | quadrature");
    sc->add_option("--point", f.point, "chart coordinates")->expected(1, -1);
    sc->add_option("--l", f.l, "gaussian-product: number of 3-vectors");
    sc->add_option("--means", f.means, "gaussian-product means")->expected(1, -1);
    sc->add_option("--stds", f.stds, "gaussian-product standard deviations")->expected(1, -1);
    sc->add_option("--mu-a", f.mu_a, "integrable mu_A / chaotic mu_A_p");
    sc->add_option("--mu-b", f.mu_b, "integrable mu_B / chaotic mu_B_p");
    sc->add_option("--sigma-b", f.sigma_b, "chaotic sigma_B_p");
    sc->add_option("--theta", f.theta, "exponential theta");
    sc->add_option("--phi", f.phi, "wigner-dyson phi");
    sc->add_option("--r", f.r, "correlated-gaussian r");
    sc->add_option("--scale", f.scale, "weibull lambda_scale");
    sc->add_option("--shape", f.shape, "weibull shape_n");
    if (name == "geometry") {
      sc->add_option("--sectional-samples", f.sectional, "random planes for sectional curvature");
      continue;
    }
    sc->add_option("--tau-max", f.tau_max, "end of the tau grid");
    sc->add_option("--points", f.points, "grid points");
    sc->add_option("--lambda", f.lambda, "geodesic rate for default initial velocities");
    sc->add_option("--velocity", f.velocity, "initial velocity")->expected(1, -1);
    sc->add_option("--abs-tol", f.abs_tol, "ODE absolute tolerance");
    sc->add_option("--rel-tol", f.rel_tol, "ODE relative tolerance");
    if (name == "ige") sc->add_option("--tail-fraction", f.tail, "tail window for the growth fit");
    if (name == "jacobi") {
      sc->add_option("--j0", f.j0, "initial J")->expected(1, -1);
      sc->add_option("--dj0", f.dj0, "initial dJ/dtau")->expected(1, -1);
      sc->add_option("--tail-fraction", f.tail, "tail window for the exponent fit");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInvalidConfig;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  Json raw = Json::object();
  try {
    if (f.config) {
      std::ifstream is(*f.config);
      if (!is) throw DomainError("cannot read config file " + *f.config);
      raw = Json::parse(is);
      if (raw.contains("config") && raw.contains("version")) raw = raw.at("config");
      if (!raw.is_object()) throw DomainError("config file must hold a JSON object");
    }
    if (raw.contains("subcommand") && raw.at("subcommand") != sub)
      throw DomainError("config file is for subcommand '" + raw.at("subcommand").get<std::string>() + "'");
    raw["subcommand"] = sub;
    if (f.seed) raw["seed"] = *f.seed;
    if (f.threads) raw["threads"] = *f.threads;

    auto sect = [&](const char* key) -> Json& {
      if (!raw.contains(key) || !raw[key].is_object()) raw[key] = Json::object();
      return raw[key];
    };
    if (sub == "spectrum") {
      Json& s = sect("spectrum");
      if (f.preset) {
        s.erase("hx");
        s.erase("hy");
        s["preset"] = *f.preset;
      }
      if (f.n) s["n"] = *f.n;
      if (f.hx) s["hx"] = *f.hx;
      if (f.hy) s["hy"] = *f.hy;
      if (f.unfold) s["unfold"] = *f.unfold;
    } else {
      if (f.model) {
        const bool same =
            raw.contains("model") && raw["model"].is_object() && raw["model"].value("family", "") == *f.model;
        if (!same) {
          raw["model"] = Json{{"family", *f.model}, {"params", Json::object()}};
          raw.erase("point");
        }
      }
      if (!raw.contains("model")) throw DomainError("--model or a config file with a model is required");
      Json& model = raw["model"];
      if (!model.contains("params")) model["params"] = Json::object();
      Json& p = model["params"];
      const std::string family = model.value("family", "");
      auto set = [&](const std::optional<double>& v, const char* key) {
        if (v) p[key] = *v;
      };
      if (f.l) p["l"] = *f.l;
      if (!f.means.empty()) p["means"] = f.means;
      if (!f.stds.empty()) p["stds"] = f.stds;
      if (family == "chaotic") {
        set(f.mu_a, "mu_A_p");
        set(f.mu_b, "mu_B_p");
        set(f.sigma_b, "sigma_B_p");
      } else {
        set(f.mu_a, "mu_A");
        set(f.mu_b, "mu_B");
      }
      set(f.theta, "theta");
      set(f.phi, "phi");
      set(f.r, "r");
      set(f.scale, "lambda_scale");
      set(f.shape, "shape_n");
      if (!f.point.empty()) raw["point"] = f.point;
      if (f.metric) raw["metric"] = *f.metric;
      if (f.sectional) raw["sectional_samples"] = *f.sectional;
      if (sub != "geometry") {
        if (f.tau_max) sect("grid")["tau_max"] = *f.tau_max;
        if (f.points) sect("grid")["points"] = *f.points;
        if (f.abs_tol) sect("tolerances")["abs"] = *f.abs_tol;
        if (f.rel_tol) sect("tolerances")["rel"] = *f.rel_tol;
        if (f.lambda) sect("geodesic")["lambda"] = *f.lambda;
        if (!f.velocity.empty()) sect("geodesic")["velocity"] = f.velocity;
        if (sub == "ige" && f.tail) sect("ige")["tail_fraction"] = *f.tail;
        if (sub == "jacobi") {
          if (!f.j0.empty()) sect("jacobi")["j0"] = f.j0;
          if (!f.dj0.empty()) sect("jacobi")["dj0"] = f.dj0;
          if (f.tail) sect("jacobi")["tail_fraction"] = *f.tail;
        }
      }
    }
  } catch (const Json::exception& e) {
    err << "config: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const Error& e) {
    err << "config: " << e.what() << "\n";
    return kInvalidConfig;
  }

  Json config;
  try {
    config = resolve_config(raw);
  } catch (const Json::exception& e) {
    err << "config: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const Error& e) {
    err << "config: " << e.what() << "\n";
    return kInvalidConfig;
  }
  const int code = run(config, f.out_dir, err);
  if (code == kOk) out << "wrote " << (fs::path(f.out_dir) / "report.json").string() << "\n";
  return code;
}

}  // namespace igac::cli
