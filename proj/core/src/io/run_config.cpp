#include "bifid/io/run_config.hpp"

#include <algorithm>
#include <fstream>

#include "bifid/errors.hpp"

namespace bifid::io {

namespace {

using nlohmann::json;

void check_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  check_object(j, where);
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
T field(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
T required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + "." + key + ": required");
  return field<T>(j, key, T{}, where);
}

// Re-labels errors raised by nested parsers with the enclosing field path.
template <typename F>
auto nested(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

void reject_seed(const json& j, const std::string& where) {
  if (j.is_object() && j.contains("seed")) throw ConfigError(where + ".seed: set the seed at the top level");
}

surface::DomainSpec parse_domain(const json& j, const std::string& where) {
  check_keys(j, {"dim", "points_per_dim", "lo", "hi"}, where);
  surface::DomainSpec d;
  d.dim = field(j, "dim", d.dim, where);
  d.points_per_dim = field(j, "points_per_dim", d.points_per_dim, where);
  d.lo = field(j, "lo", d.lo, where);
  d.hi = field(j, "hi", d.hi, where);
  nested(where, [&] {
    d.validate();
    return 0;
  });
  if (d.size() > 20000) throw ConfigError(where + ": domain larger than 20000 points");
  return d;
}

json domain_json(const surface::DomainSpec& d) {
  return {{"dim", d.dim}, {"points_per_dim", d.points_per_dim}, {"lo", d.lo}, {"hi", d.hi}};
}

surface::RbfKernel parse_kernel(const json& j, const std::string& where) {
  check_keys(j, {"variance", "lengthscale"}, where);
  surface::RbfKernel k;
  k.variance = field(j, "variance", k.variance, where);
  k.lengthscale = field(j, "lengthscale", k.lengthscale, where);
  nested(where, [&] {
    k.validate();
    return 0;
  });
  return k;
}

json kernel_json(const surface::RbfKernel& k) { return {{"variance", k.variance}, {"lengthscale", k.lengthscale}}; }

}  // namespace

GenSurfacesConfig GenSurfacesConfig::from_json(const json& j) {
  const std::string w = "gen_surfaces";
  reject_seed(j, w);
  check_keys(j, {"domain", "kernel", "n_train", "n_expensive", "bins", "max_attempts"}, w);
  GenSurfacesConfig c;
  auto& p = c.pool;
  if (j.contains("domain")) p.domain = parse_domain(j.at("domain"), w + ".domain");
  if (j.contains("kernel")) p.kernel = parse_kernel(j.at("kernel"), w + ".kernel");
  p.n_train = field<std::size_t>(j, "n_train", p.n_train, w);
  p.n_expensive = field(j, "n_expensive", p.n_expensive, w);
  p.bins = field(j, "bins", p.bins, w);
  p.max_attempts = field(j, "max_attempts", p.max_attempts, w);
  if (p.n_train < 1 || static_cast<nn::Index>(p.n_train) > p.domain.size()) {
    throw ConfigError(w + ".n_train: must be in [1, domain size]");
  }
  if (p.n_expensive < 1) throw ConfigError(w + ".n_expensive: must be >= 1");
  if (p.max_attempts < 1) throw ConfigError(w + ".max_attempts: must be >= 1");
  if (p.bins.empty()) throw ConfigError(w + ".bins: must not be empty");
  for (int b : p.bins) {
    if (b < 0 || b >= surface::kCorrelationBins) throw ConfigError(w + ".bins: indices must be in [0, 7]");
  }
  return c;
}

json GenSurfacesConfig::to_json() const {
  return {{"domain", domain_json(pool.domain)}, {"kernel", kernel_json(pool.kernel)}, {"n_train", pool.n_train},
          {"n_expensive", pool.n_expensive},    {"bins", pool.bins},                   {"max_attempts", pool.max_attempts}};
}

RegressionSource RegressionSource::from_json(const json& j) {
  const std::string w = "regress.source";
  reject_seed(j, w);
  check_object(j, w);
  RegressionSource s;
  const auto kind = required<std::string>(j, "kind", w);
  nested(w, [&] {
    if (kind == "trig") {
      check_keys(j, {"kind", "trig", "points"}, w);
      s.kind = Kind::Trig;
      s.trig = surface::trig_kind_from_string(field<std::string>(j, "trig", "linear", w));
      s.points = field(j, "points", s.points, w);
      if (s.points < 3) throw ConfigError("points must be >= 3");
    } else if (kind == "analytic") {
      check_keys(j, {"kind", "cheap", "expensive", "dim", "points_per_dim"}, w);
      s.kind = Kind::Analytic;
      s.cheap = surface::analytic_name_from_string(field<std::string>(j, "cheap", "HyperEllipsoid", w));
      s.expensive = surface::analytic_name_from_string(field<std::string>(j, "expensive", "Dejong", w));
      s.dim = field(j, "dim", 2, w);
      s.points_per_dim = field(j, "points_per_dim", s.points_per_dim, w);
      if (s.dim < 1 || s.points_per_dim < 2) throw ConfigError("dim must be >= 1 and points_per_dim >= 2");
    } else if (kind == "gp") {
      check_keys(j, {"kind", "domain", "kernel", "n_train"}, w);
      s.kind = Kind::Gp;
      if (j.contains("domain")) s.domain = parse_domain(j.at("domain"), "domain");
      if (j.contains("kernel")) s.kernel = parse_kernel(j.at("kernel"), "kernel");
      s.n_train = field(j, "n_train", s.n_train, w);
      if (s.n_train < 1 || s.n_train > s.domain.size()) throw ConfigError("n_train must be in [1, domain size]");
    } else if (kind == "surface" || kind == "descriptors") {
      check_keys(j, {"kind", "path"}, w);
      s.kind = kind == "surface" ? Kind::Surface : Kind::Descriptors;
      s.path = required<std::string>(j, "path", w);
    } else {
      throw ConfigError("kind: unknown value '" + kind + "' (expected trig, analytic, gp, surface or descriptors)");
    }
    return 0;
  });
  return s;
}

json RegressionSource::to_json() const {
  switch (kind) {
    case Kind::Trig:
      return {{"kind", "trig"}, {"trig", surface::to_string(trig)}, {"points", points}};
    case Kind::Analytic:
      return {{"kind", "analytic"},
              {"cheap", surface::to_string(cheap)},
              {"expensive", surface::to_string(expensive)},
              {"dim", dim},
              {"points_per_dim", points_per_dim}};
    case Kind::Gp:
      return {{"kind", "gp"}, {"domain", domain_json(domain)}, {"kernel", kernel_json(kernel)}, {"n_train", n_train}};
    case Kind::Surface:
      return {{"kind", "surface"}, {"path", path.string()}};
    case Kind::Descriptors:
      return {{"kind", "descriptors"}, {"path", path.string()}};
  }
  return {};
}

FidelityPools RegressionSource::load(std::uint64_t seed) const {
  switch (kind) {
    case Kind::Trig:
      return FidelityPools::from_pair(surface::trig_surface_pair(trig, points));
    case Kind::Analytic:
      return FidelityPools::from_pair(surface::analytic_surface_pair(cheap, expensive, dim, points_per_dim));
    case Kind::Gp:
      return FidelityPools::from_pair(
          surface::gp_sample_pair(domain, kernel, static_cast<std::size_t>(n_train), seed));
    case Kind::Surface:
      return FidelityPools::from_pair(surface::read_surface_pair(path));
    case Kind::Descriptors:
      return FidelityPools::from_descriptors(DescriptorDataset::read_csv(path));
  }
  throw ArgumentError("unknown regression source");
}

RegressConfig RegressConfig::from_json(const json& j) {
  const std::string w = "regress";
  check_keys(j, {"source", "curve"}, w);
  RegressConfig c;
  if (j.contains("source")) c.source = RegressionSource::from_json(j.at("source"));
  if (j.contains("curve")) {
    reject_seed(j.at("curve"), w + ".curve");
    c.curve = nested(w + ".curve", [&] { return LearningCurveConfig::from_json(j.at("curve")); });
  }
  return c;
}

json RegressConfig::to_json() const {
  auto curve_json = curve.to_json();
  curve_json.erase("seed");
  return {{"source", source.to_json()}, {"curve", curve_json}};
}

EvaluatorSpec EvaluatorSpec::from_json(const json& j) {
  const std::string w = "evaluator";
  check_object(j, w);
  EvaluatorSpec s;
  const auto kind = required<std::string>(j, "kind", w);
  s.cost = field(j, "cost", s.cost, w);
  if (!(s.cost > 0.0)) throw ConfigError(w + ".cost: must be positive");
  nested(w, [&] {
    if (kind == "analytic") {
      check_keys(j, {"kind", "name", "dim", "cost"}, w);
      s.kind = Kind::Analytic;
      s.name = surface::analytic_name_from_string(required<std::string>(j, "name", w));
      s.dim = field(j, "dim", s.dim, w);
      if (s.dim < 1) throw ConfigError("dim must be >= 1");
    } else if (kind == "trig") {
      check_keys(j, {"kind", "trig", "cost"}, w);
      s.kind = Kind::Trig;
      s.trig = surface::trig_kind_from_string(required<std::string>(j, "trig", w));
      s.dim = 1;
    } else if (kind == "surface" || kind == "descriptors") {
      check_keys(j, {"kind", "path", "cost"}, w);
      s.kind = kind == "surface" ? Kind::Surface : Kind::Descriptors;
      s.path = required<std::string>(j, "path", w);
    } else {
      throw ConfigError("kind: unknown value '" + kind + "' (expected analytic, trig, surface or descriptors)");
    }
    return 0;
  });
  return s;
}

json EvaluatorSpec::to_json() const {
  switch (kind) {
    case Kind::Analytic:
      return {{"kind", "analytic"}, {"name", surface::to_string(name)}, {"dim", dim}, {"cost", cost}};
    case Kind::Trig:
      return {{"kind", "trig"}, {"trig", surface::to_string(trig)}, {"cost", cost}};
    case Kind::Surface:
      return {{"kind", "surface"}, {"path", path.string()}, {"cost", cost}};
    case Kind::Descriptors:
      return {{"kind", "descriptors"}, {"path", path.string()}, {"cost", cost}};
  }
  return {};
}

campaign::Evaluator EvaluatorSpec::build(campaign::Fidelity fidelity) const {
  switch (kind) {
    case Kind::Analytic:
      return campaign::analytic_evaluator(name, dim, fidelity, cost);
    case Kind::Trig:
      return campaign::trig_evaluator(trig, fidelity, cost);
    case Kind::Surface: {
      const auto pair = surface::read_surface_pair(path);
      return campaign::lookup_evaluator(path.filename().string(), pair.domain,
                                        fidelity == campaign::Fidelity::Cheap ? pair.y_cheap : pair.y_exp, fidelity,
                                        cost);
    }
    case Kind::Descriptors: {
      const auto data = DescriptorDataset::read_csv(path).to_dataset();
      if (data.size(fidelity) == 0) throw ArgumentError(path.string() + ": no rows with the requested fidelity");
      return campaign::lookup_evaluator(path.filename().string(), data.x(fidelity), data.y(fidelity), fidelity, cost);
    }
  }
  throw ArgumentError("unknown evaluator kind");
}

OptimizeConfig OptimizeConfig::from_json(const json& j) {
  const std::string w = "optimize";
  reject_seed(j, w);
  check_keys(j,
             {"expensive", "cheap", "strategies", "target", "target_percentile", "grid_points_per_dim", "n_repeats",
              "max_expensive", "planner", "model", "rho_folds", "model_steps"},
             w);
  OptimizeConfig c;
  if (!j.contains("expensive")) throw ConfigError(w + ".expensive: required");
  c.expensive = nested(w + ".expensive", [&] { return EvaluatorSpec::from_json(j.at("expensive")); });
  if (j.contains("cheap")) c.cheap = nested(w + ".cheap", [&] { return EvaluatorSpec::from_json(j.at("cheap")); });
  if (c.cheap && c.cheap->dim != c.expensive.dim && c.cheap->kind != EvaluatorSpec::Kind::Surface &&
      c.cheap->kind != EvaluatorSpec::Kind::Descriptors) {
    throw ConfigError(w + ".cheap.dim: must match the expensive evaluator");
  }
  if (j.contains("target") == j.contains("target_percentile")) {
    throw ConfigError(w + ": set exactly one of target and target_percentile");
  }
  if (j.contains("target")) c.target = field<double>(j, "target", 0.0, w);
  if (j.contains("target_percentile")) {
    c.target_percentile = field<double>(j, "target_percentile", 1.0, w);
    if (!(*c.target_percentile >= 0.0 && *c.target_percentile <= 100.0)) {
      throw ConfigError(w + ".target_percentile: must be in [0, 100]");
    }
  }
  c.grid_points_per_dim = field(j, "grid_points_per_dim", c.grid_points_per_dim, w);
  if (c.grid_points_per_dim < 2) throw ConfigError(w + ".grid_points_per_dim: must be >= 2");
  c.n_repeats = field(j, "n_repeats", c.n_repeats, w);
  if (c.n_repeats < 2) throw ConfigError(w + ".n_repeats: must be >= 2");

  // Shared campaign settings, parsed once through the campaign parser.
  json shared = json::object();
  for (const char* key : {"max_expensive", "planner", "model", "rho_folds", "model_steps"}) {
    if (j.contains(key)) shared[key] = j.at(key);
  }
  reject_seed(shared.value("planner", json::object()), w + ".planner");
  if (!j.contains("strategies")) throw ConfigError(w + ".strategies: required");
  const auto& list = j.at("strategies");
  if (!list.is_array() || list.empty()) throw ConfigError(w + ".strategies: expected a nonempty array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string wi = w + ".strategies[" + std::to_string(i) + "]";
    check_keys(list[i], {"strategy", "r"}, wi);
    json merged = shared;
    merged["strategy"] = required<std::string>(list[i], "strategy", wi);
    if (list[i].contains("r")) merged["r"] = list[i].at("r");
    merged["target"] = 0.0;  // resolved later
    auto cfg = nested(wi, [&] { return campaign::CampaignConfig::from_json(merged); });
    if (cfg.strategy == campaign::Strategy::BoGemini && !c.cheap) {
      throw ConfigError(wi + ": bo_gemini needs optimize.cheap");
    }
    c.strategies.push_back(std::move(cfg));
  }
  return c;
}

json OptimizeConfig::to_json() const {
  json j = {{"expensive", expensive.to_json()}, {"grid_points_per_dim", grid_points_per_dim}, {"n_repeats", n_repeats}};
  if (cheap) j["cheap"] = cheap->to_json();
  if (target) j["target"] = *target;
  if (target_percentile) j["target_percentile"] = *target_percentile;
  json list = json::array();
  for (const auto& s : strategies) {
    json e = {{"strategy", campaign::to_string(s.strategy)}};
    if (s.strategy == campaign::Strategy::BoGemini) e["r"] = s.r;
    list.push_back(e);
  }
  j["strategies"] = list;
  if (!strategies.empty()) {
    const auto& s = strategies.front();
    auto planner = s.planner.to_json();
    planner.erase("seed");
    j["max_expensive"] = s.max_expensive;
    j["planner"] = planner;
    j["model"] = s.model.to_json();
    j["rho_folds"] = s.rho_folds;
    j["model_steps"] = s.model_steps;
  }
  return j;
}

double OptimizeConfig::resolve_target() const {
  if (target) return *target;
  auto ev = expensive.build(campaign::Fidelity::Expensive);
  const Matrix grid = surface::unit_grid(static_cast<int>(ev.dim()), grid_points_per_dim);
  std::vector<double> values(static_cast<std::size_t>(grid.rows()));
  std::vector<double> row(static_cast<std::size_t>(grid.cols()));
  for (nn::Index i = 0; i < grid.rows(); ++i) {
    for (nn::Index k = 0; k < grid.cols(); ++k) row[static_cast<std::size_t>(k)] = grid(i, k);
    values[static_cast<std::size_t>(i)] = ev(row);
  }
  return campaign::quantile(values, *target_percentile / 100.0);
}

RunConfig RunConfig::from_json(const json& j) {
  check_keys(j, {"seed", "out", "threads", "gen_surfaces", "regress", "optimize"}, "config");
  RunConfig c;
  c.seed = field<std::uint64_t>(j, "seed", c.seed, "config");
  c.out = field<std::string>(j, "out", c.out.string(), "config");
  c.threads = field(j, "threads", c.threads, "config");
  if (c.threads < 1) throw ConfigError("config.threads: must be >= 1");
  if (j.contains("gen_surfaces")) c.gen_surfaces = GenSurfacesConfig::from_json(j.at("gen_surfaces"));
  if (j.contains("regress")) c.regress = RegressConfig::from_json(j.at("regress"));
  if (j.contains("optimize")) c.optimize = OptimizeConfig::from_json(j.at("optimize"));
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json j = {{"seed", seed}, {"out", out.string()}, {"threads", threads}};
  if (gen_surfaces) j["gen_surfaces"] = gen_surfaces->to_json();
  if (regress) j["regress"] = regress->to_json();
  if (optimize) j["optimize"] = optimize->to_json();
  return j;
}

}  // namespace bifid::io
