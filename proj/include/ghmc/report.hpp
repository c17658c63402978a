// Certificate report, result file and surface export for the command-line
// front end. Files are written atomically through a temporary and a rename.
#ifndef GHMC_REPORT_HPP
#define GHMC_REPORT_HPP

#include "ghmc/config.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace ghmc {

inline constexpr const char* kVersion = "1.0.0";

struct CheckEntry {
  std::string name;
  double value = 0.0;
  double gate = 0.0;
  bool gated = true;  ///< false for reported-only diagnostics
  bool less = true;   ///< pass iff value <= gate; otherwise value >= gate
  bool pass = true;
};

inline CheckEntry check_le(std::string name, double value, double gate) {
  return {std::move(name), value, gate, true, true, value <= gate};
}

inline CheckEntry check_ge(std::string name, double value, double gate) {
  return {std::move(name), value, gate, true, false, value >= gate};
}

inline CheckEntry diagnostic(std::string name, double value) { return {std::move(name), value, 0.0, false, true, true}; }

struct CertificateReport {
  std::vector<CheckEntry> entries;
  double seconds = 0.0;
  bool pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) { return !e.gated || e.pass; });
  }
};

/// Gated residuals of a realization against the configured tolerances.
inline CertificateReport certify(const RealizationResult& r, const RunConfig& cfg) {
  const Tolerances& t = cfg.tolerances;
  const RealizationProblem& p = r.problem;
  CertificateReport rep;
  auto& e = rep.entries;
  e.push_back(check_le("variational.gradient", r.minimizer.gradient_norm, t.gradient * (p.c1() + p.c2())));
  e.push_back(check_le("variational.tracefree_residual", r.potential.tracefree_residual, t.tracefree));
  e.push_back(diagnostic("variational.f_sup", r.potential.f_sup));
  e.push_back(check_le("codazzi.decomposition_reconstruction", r.potential.decomposition.reconstruction, t.decomposition));
  // the pairing is a cosine; once the trace-free part is numerically zero it is undefined
  if (r.potential.tracefree_residual > t.tracefree)
    e.push_back(check_le("codazzi.decomposition_pairing", r.potential.decomposition.pairing, t.pairing));
  else
    e.push_back(diagnostic("codazzi.decomposition_pairing", r.potential.decomposition.pairing));
  for (const auto* s : {&r.future, &r.past}) {
    const std::string side = orientation_name(s->embedding.orientation);
    e.push_back(check_le("labourie." + side + ".mismatch", s->labourie_mismatch, t.labourie_mismatch));
    e.push_back(check_le("labourie." + side + ".monge_ampere", s->ma_residual, t.monge_ampere));
    e.push_back(check_le("embedding." + side + ".loop_closure", s->embedding.loop_closure, t.loop_closure));
    e.push_back(diagnostic("embedding." + side + ".quadrature_closure", s->quadrature_closure));
    e.push_back(check_le("embedding." + side + ".equivariance", s->cocycle.equivariance, t.equivariance));
    e.push_back(check_le("embedding." + side + ".relator", s->cocycle.relator, t.relator));
    e.push_back(diagnostic("embedding." + side + ".support_identity", s->support.identity_residual));
    e.push_back(check_le("embedding." + side + ".shape_determinant_p99", s->forms.det_defect_p99, t.shape_determinant));
    e.push_back(check_ge("embedding." + side + ".shape_min_eigenvalue", s->forms.min_shape_eigenvalue, 0.0));
    e.back().pass = s->forms.min_shape_eigenvalue > 0.0;
    e.push_back(check_le("embedding." + side + ".induced_lengths", s->length_defect, t.induced_lengths));
    e.push_back(check_le("embedding." + side + ".third_form", s->forms.third_form_defect, t.third_form));
    e.push_back(check_le("embedding." + side + ".convexity_violations", s->convexity.violations, 0.0));
    e.push_back(diagnostic("embedding." + side + ".convexity_margin", s->convexity.min_margin));
    e.push_back(diagnostic("embedding." + side + ".boundary_spread", s->boundary.spread));
  }
  e.push_back(check_le("embedding.cocycle_match", r.normalization.residual, t.cocycle_match));
  e.push_back(diagnostic("embedding.closed_form_defect", r.normalization.closed_form_defect));
  e.push_back(check_le("embedding.support_linear", r.linear_residual, t.support_linear));
  e.push_back(check_le("embedding.boundary_mismatch", r.boundary_mismatch, t.boundary));
  if (cfg.h1 == cfg.h2) {
    e.push_back(check_le("symmetric.teich_h0_h1", teich_distance(r.minimizer.h0, p.h1), t.symmetric_teich));
    e.push_back(check_le("symmetric.tau_coboundary", r.tau_coboundary_residual, t.symmetric_cocycle));
  } else {
    e.push_back(diagnostic("embedding.tau_coboundary", r.tau_coboundary_residual));
  }
  rep.seconds = r.seconds;
  return rep;
}

inline nlohmann::json report_json(const CertificateReport& rep, const RunConfig& cfg) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : rep.entries) {
    nlohmann::json j{{"name", e.name}, {"value", e.value}, {"pass", e.pass}, {"gated", e.gated}};
    if (e.gated) {
      j["gate"] = e.gate;
      j["relation"] = e.less ? "<=" : ">";
    }
    entries.push_back(std::move(j));
  }
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  return {{"pass", rep.pass()},
          {"seed", cfg.seed},
          {"entries", entries},
          {"timings", {{"total_seconds", rep.seconds}}},
          {"versions", {{"ghmc", kVersion}, {"eigen", eigen.str()}, {"json", "nlohmann " + std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR)}}},
          {"input", serialize_config(cfg)}};
}

namespace detail {

inline nlohmann::json vec_json(const Vec21& v) { return nlohmann::json::array({v[0], v[1], v[2]}); }

inline nlohmann::json surface_json(const EquivariantMesh& mesh, const SurfaceResult& s) {
  nlohmann::json x = nlohmann::json::array(), phi = nlohmann::json::array();
  for (int k = 0; k < mesh.num_vertices(); ++k) {
    x.push_back(vec_json(s.embedding.x[k]));
    phi.push_back(s.support.phi.values[k]);
  }
  nlohmann::json tau = nlohmann::json::array();
  for (int k = 0; k < kNumGenerators; ++k) tau.push_back(vec_json(s.embedding.tau.col(k)));
  return {{"c", s.c}, {"orientation", orientation_name(s.embedding.orientation)}, {"u", vec_json(s.embedding.u)},
          {"tau", tau}, {"x", x}, {"phi", phi}, {"boundary", s.boundary.values}};
}

}  // namespace detail

/// Deterministic result file: everything except timings.
inline nlohmann::json result_json(const RealizationResult& r, const RunConfig& cfg, const CertificateReport& rep) {
  const EquivariantMesh& mesh = *r.minimizer.value.context->mesh;
  nlohmann::json rho = nlohmann::json::array(), tau = nlohmann::json::array(), faces = nlohmann::json::array();
  for (int k = 0; k < kNumGenerators; ++k) {
    nlohmann::json m = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) m.push_back(detail::vec_json(r.rho[k].row(i).transpose()));
    rho.push_back(m);
    tau.push_back(detail::vec_json(r.tau.col(k)));
  }
  for (const auto& f : mesh.faces()) faces.push_back({f.v[0], f.v[1], f.v[2]});
  nlohmann::json residuals = nlohmann::json::object();
  for (const auto& e : rep.entries) residuals[e.name] = e.value;
  return {{"version", kVersion},
          {"seed", cfg.seed},
          {"input", serialize_config(cfg)},
          {"pass", rep.pass()},
          {"h0", detail::write_fn(r.minimizer.h0.fn)},
          {"psi", r.minimizer.psi},
          {"x0", detail::vec_json(r.future.embedding.x0)},
          {"rho", rho},
          {"tau", tau},
          {"u1", detail::vec_json(r.future.embedding.u)},
          {"u2", detail::vec_json(r.past.embedding.u)},
          {"residuals", residuals},
          {"faces", faces},
          {"future", detail::surface_json(mesh, r.future)},
          {"past", detail::surface_json(mesh, r.past)}};
}

/// Writes through a temporary file in the same directory and renames it.
inline void write_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw Error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
  }
}

inline std::string surface_text(const EquivariantMesh& mesh, const SurfaceResult& s) {
  std::ostringstream os;
  write_surface(os, mesh, s.embedding, s.support);
  return os.str();
}

/// Surface file text for one side of a stored result.
inline std::string export_from_result(const nlohmann::json& result, const std::string& which) {
  if (which != "future" && which != "past") throw DomainError("export: --which must be future or past");
  if (!result.contains(which) || !result.contains("faces")) throw DomainError("export: result file has no surface data");
  const auto& s = result.at(which);
  const auto& x = s.at("x");
  const auto& phi = s.at("phi");
  const auto& faces = result.at("faces");
  if (x.size() != phi.size()) throw DomainError("export: vertex and support counts differ");
  std::ostringstream os;
  os << x.size() << ' ' << faces.size() << '\n';
  os.precision(17);
  for (size_t k = 0; k < x.size(); ++k)
    os << x[k][0].get<double>() << ' ' << x[k][1].get<double>() << ' ' << x[k][2].get<double>() << ' ' << phi[k].get<double>() << '\n';
  for (const auto& f : faces) os << f[0].get<int>() << ' ' << f[1].get<int>() << ' ' << f[2].get<int>() << '\n';
  return os.str();
}

}  // namespace ghmc

#endif  // GHMC_REPORT_HPP
