// Run configuration for the command-line front end: JSON parsing with
// per-field validation, serialization, and the mapping onto solver options.
#ifndef GHMC_CONFIG_HPP
#define GHMC_CONFIG_HPP

#include "ghmc/realize.hpp"

#include <json.hpp>

#include <set>
#include <string>

namespace ghmc {

/// Invalid configuration; field() names the offending entry.
class ConfigError : public DomainError {
 public:
  ConfigError(std::string field, const std::string& what) : DomainError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Gates of the certificate report.
struct Tolerances {
  double gradient = 1e-3;            ///< sup FN gradient, relative to c1 + c2
  double tracefree = 1e-3;           ///< L2 norm of the trace-free part of c1 B1 + c2 B2
  double labourie_mismatch = 1e-3;   ///< teich distance of h(B., B.) to the target
  double monge_ampere = 1e-6;        ///< sup |log det B|
  double decomposition = 1e-8;       ///< reconstruction of c1 B1 + c2 B2
  double pairing = 1e-3;             ///< L2 pairing of the decomposition parts
  double loop_closure = 1e-5;        ///< relative to the diameter
  double equivariance = 1e-6;        ///< relative to the cocycle scale
  double relator = 1e-6;             ///< relative to the cocycle scale
  double cocycle_match = 1e-2;       ///< sup |tau1 - tau2|, relative to the cocycle scale
  double shape_determinant = 1e-2;   ///< 99th percentile of |c^2 det S - 1|
  double induced_lengths = 1e-2;     ///< marking lengths of I against c times the target
  double third_form = 1e-8;          ///< Gauss-image edge lengths against h0
  double boundary = 1e-2;            ///< boundary-function mismatch
  double support_linear = 1e-3;      ///< linearity residual of phi1 + phi2 + f
  double symmetric_teich = 1e-3;     ///< h0 against h1 when h1 = h2
  double symmetric_cocycle = 1e-3;   ///< coboundary residual of tau when h1 = h2

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct RunConfig {
  double k_plus = -1.0;
  double k_minus = -1.0;
  FNCoords h1;
  FNCoords h2;

  double target_edge = 0.1;
  double fd_step = 1e-3;
  double gradient_tol = 1e-4;
  int max_iter = 200;
  int max_remesh = 6;
  double labourie_tol = 1e-8;
  int labourie_max_iter = 60;
  double monge_ampere_tol = 1e-11;
  int monge_ampere_max_iter = 60;
  int boundary_directions = 256;
  int convexity_pairs = 10000;
  int loops = 50;

  Tolerances tolerances;
  std::uint64_t seed = 1;
  bool reciprocal_curvature = false;
  double boundary_sign = -1.0;  ///< frozen convention: phi2~ = sign * phi1~

  std::string result_path = "result.json";
  std::string report_path = "report.json";
  std::string future_surface = "future.surf";
  std::string past_surface = "past.surf";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  RealizationProblem problem() const {
    RealizationProblem p;
    p.k_plus = k_plus;
    p.k_minus = k_minus;
    p.h1 = fn_to_holonomy(h1);
    p.h2 = fn_to_holonomy(h2);
    p.target_edge = target_edge;
    p.seed = seed;
    p.reciprocal_curvature = reciprocal_curvature;
    return p;
  }

  RealizationOptions options() const {
    RealizationOptions o;
    o.minimize.fd_step = fd_step;
    o.minimize.gradient_tol = gradient_tol;
    o.minimize.max_iter = max_iter;
    o.minimize.max_remesh = max_remesh;
    o.minimize.labourie.residual_tol = labourie_tol;
    o.minimize.labourie.max_iter = labourie_max_iter;
    o.minimize.labourie.ma.tol = monge_ampere_tol;
    o.minimize.labourie.ma.max_iter = monge_ampere_max_iter;
    o.boundary_directions = boundary_directions;
    o.convexity_pairs = convexity_pairs;
    o.loops = loops;
    o.boundary_sign = boundary_sign;
    return o;
  }
};

namespace detail {

using json = nlohmann::json;

#define GHMC_TOLERANCE_FIELDS(X)                                                                       \
  X(gradient) X(tracefree) X(labourie_mismatch) X(monge_ampere) X(decomposition) X(pairing)            \
  X(loop_closure) X(equivariance) X(relator) X(cocycle_match) X(shape_determinant) X(induced_lengths) \
  X(third_form) X(boundary) X(support_linear) X(symmetric_teich) X(symmetric_cocycle)

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "config" : path, "expected an object");
  const std::set<std::string> k(known.begin(), known.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!k.count(it.key())) throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
}

inline double get_real(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

inline void read_real(const json& j, const char* key, const std::string& path, double& out) {
  if (j.contains(key)) out = get_real(j.at(key), path + "." + key);
}

inline void read_int(const json& j, const char* key, const std::string& path, int& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key, "expected an integer");
  out = v.get<int>();
}

inline void read_string(const json& j, const char* key, const std::string& path, std::string& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_string()) throw ConfigError(path + "." + key, "expected a string");
  out = j.at(key).get<std::string>();
}

inline FNCoords read_fn(const json& j, const std::string& path) {
  reject_unknown(j, path, {"lengths", "twists"});
  FNCoords c;
  for (const char* key : {"lengths", "twists"}) {
    const std::string p = path + "." + key;
    if (!j.contains(key)) throw ConfigError(p, "missing");
    const json& a = j.at(key);
    if (!a.is_array() || a.size() != 3) throw ConfigError(p, "expected an array of 3 numbers");
    for (int i = 0; i < 3; ++i) {
      const double v = get_real(a[i], p + "[" + std::to_string(i) + "]");
      (key[0] == 'l' ? c.length : c.twist)[i] = v;
    }
  }
  for (int i = 0; i < 3; ++i)
    if (!(c.length[i] > 0.0)) throw ConfigError(path + ".lengths[" + std::to_string(i) + "]", "must be positive");
  return c;
}

inline json write_fn(const FNCoords& c) {
  return json{{"lengths", c.length}, {"twists", c.twist}};
}

}  // namespace detail

/// Checks ranges; throws ConfigError naming the first offending field.
inline void validate(const RunConfig& c) {
  if (!(c.k_plus < 0.0)) throw ConfigError("problem.k_plus", "must be negative");
  if (!(c.k_minus < 0.0)) throw ConfigError("problem.k_minus", "must be negative");
  for (int i = 0; i < 3; ++i) {
    if (!(c.h1.length[i] > 0.0)) throw ConfigError("problem.h1.lengths", "must be positive");
    if (!(c.h2.length[i] > 0.0)) throw ConfigError("problem.h2.lengths", "must be positive");
  }
  if (!(c.target_edge >= 0.02 && c.target_edge <= 0.5)) throw ConfigError("resolution.target_edge", "must lie in [0.02, 0.5]");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(name, "must be positive");
  };
  positive(c.fd_step, "resolution.fd_step");
  positive(c.gradient_tol, "resolution.gradient_tol");
  positive(c.labourie_tol, "resolution.labourie_tol");
  positive(c.monge_ampere_tol, "resolution.monge_ampere_tol");
  auto count = [](int v, int lo, const char* name) {
    if (v < lo) throw ConfigError(name, "must be at least " + std::to_string(lo));
  };
  count(c.max_iter, 1, "resolution.max_iter");
  count(c.max_remesh, 0, "resolution.max_remesh");
  count(c.labourie_max_iter, 1, "resolution.labourie_max_iter");
  count(c.monge_ampere_max_iter, 1, "resolution.monge_ampere_max_iter");
  count(c.boundary_directions, 1, "resolution.boundary_directions");
  count(c.convexity_pairs, 1, "resolution.convexity_pairs");
  count(c.loops, 1, "resolution.loops");
#define GHMC_CHECK_TOL(name) positive(c.tolerances.name, "tolerances." #name);
  GHMC_TOLERANCE_FIELDS(GHMC_CHECK_TOL)
#undef GHMC_CHECK_TOL
  if (c.boundary_sign != 1.0 && c.boundary_sign != -1.0) throw ConfigError("convention.boundary_sign", "must be 1 or -1");
  for (const auto& [p, name] : {std::pair{&c.result_path, "output.result"}, {&c.report_path, "output.report"},
                                {&c.future_surface, "output.future_surface"}, {&c.past_surface, "output.past_surface"}})
    if (p->empty()) throw ConfigError(name, "must not be empty");
}

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::json;
  RunConfig c;
  detail::reject_unknown(j, "", {"problem", "resolution", "tolerances", "seed", "convention", "output"});
  if (!j.contains("problem")) throw ConfigError("problem", "missing");
  const json& p = j.at("problem");
  detail::reject_unknown(p, "problem", {"k_plus", "k_minus", "h1", "h2"});
  for (const char* key : {"k_plus", "k_minus", "h1", "h2"})
    if (!p.contains(key)) throw ConfigError(std::string("problem.") + key, "missing");
  c.k_plus = detail::get_real(p.at("k_plus"), "problem.k_plus");
  c.k_minus = detail::get_real(p.at("k_minus"), "problem.k_minus");
  c.h1 = detail::read_fn(p.at("h1"), "problem.h1");
  c.h2 = detail::read_fn(p.at("h2"), "problem.h2");

  if (j.contains("resolution")) {
    const json& r = j.at("resolution");
    detail::reject_unknown(r, "resolution",
                           {"target_edge", "fd_step", "gradient_tol", "max_iter", "max_remesh", "labourie_tol",
                            "labourie_max_iter", "monge_ampere_tol", "monge_ampere_max_iter", "boundary_directions",
                            "convexity_pairs", "loops"});
    detail::read_real(r, "target_edge", "resolution", c.target_edge);
    detail::read_real(r, "fd_step", "resolution", c.fd_step);
    detail::read_real(r, "gradient_tol", "resolution", c.gradient_tol);
    detail::read_int(r, "max_iter", "resolution", c.max_iter);
    detail::read_int(r, "max_remesh", "resolution", c.max_remesh);
    detail::read_real(r, "labourie_tol", "resolution", c.labourie_tol);
    detail::read_int(r, "labourie_max_iter", "resolution", c.labourie_max_iter);
    detail::read_real(r, "monge_ampere_tol", "resolution", c.monge_ampere_tol);
    detail::read_int(r, "monge_ampere_max_iter", "resolution", c.monge_ampere_max_iter);
    detail::read_int(r, "boundary_directions", "resolution", c.boundary_directions);
    detail::read_int(r, "convexity_pairs", "resolution", c.convexity_pairs);
    detail::read_int(r, "loops", "resolution", c.loops);
  }
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
#define GHMC_TOL_NAME(name) #name,
    detail::reject_unknown(t, "tolerances", {GHMC_TOLERANCE_FIELDS(GHMC_TOL_NAME)});
#undef GHMC_TOL_NAME
#define GHMC_READ_TOL(name) detail::read_real(t, #name, "tolerances", c.tolerances.name);
    GHMC_TOLERANCE_FIELDS(GHMC_READ_TOL)
#undef GHMC_READ_TOL
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("convention")) {
    const json& v = j.at("convention");
    detail::reject_unknown(v, "convention", {"reciprocal_curvature", "boundary_sign"});
    if (v.contains("reciprocal_curvature")) {
      if (!v.at("reciprocal_curvature").is_boolean()) throw ConfigError("convention.reciprocal_curvature", "expected a boolean");
      c.reciprocal_curvature = v.at("reciprocal_curvature").get<bool>();
    }
    detail::read_real(v, "boundary_sign", "convention", c.boundary_sign);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    detail::reject_unknown(o, "output", {"result", "report", "future_surface", "past_surface"});
    detail::read_string(o, "result", "output", c.result_path);
    detail::read_string(o, "report", "output", c.report_path);
    detail::read_string(o, "future_surface", "output", c.future_surface);
    detail::read_string(o, "past_surface", "output", c.past_surface);
  }
  validate(c);
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

inline nlohmann::json serialize_config(const RunConfig& c) {
  using detail::json;
  json t = json::object();
#define GHMC_WRITE_TOL(name) t[#name] = c.tolerances.name;
  GHMC_TOLERANCE_FIELDS(GHMC_WRITE_TOL)
#undef GHMC_WRITE_TOL
  return json{
      {"problem", {{"k_plus", c.k_plus}, {"k_minus", c.k_minus}, {"h1", detail::write_fn(c.h1)}, {"h2", detail::write_fn(c.h2)}}},
      {"resolution",
       {{"target_edge", c.target_edge},
        {"fd_step", c.fd_step},
        {"gradient_tol", c.gradient_tol},
        {"max_iter", c.max_iter},
        {"max_remesh", c.max_remesh},
        {"labourie_tol", c.labourie_tol},
        {"labourie_max_iter", c.labourie_max_iter},
        {"monge_ampere_tol", c.monge_ampere_tol},
        {"monge_ampere_max_iter", c.monge_ampere_max_iter},
        {"boundary_directions", c.boundary_directions},
        {"convexity_pairs", c.convexity_pairs},
        {"loops", c.loops}}},
      {"tolerances", t},
      {"seed", c.seed},
      {"convention", {{"reciprocal_curvature", c.reciprocal_curvature}, {"boundary_sign", c.boundary_sign}}},
      {"output",
       {{"result", c.result_path}, {"report", c.report_path}, {"future_surface", c.future_surface}, {"past_surface", c.past_surface}}}};
}

}  // namespace ghmc

#endif  // GHMC_CONFIG_HPP
