// Command-line front end: realize, check and export.
#include "ghmc/suites.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

enum ExitCode { kPass = 0, kCertificateFail = 2, kSolverFail = 3, kConfigInvalid = 4 };

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ghmc::ConfigError("config", "cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void print_table(const std::vector<ghmc::CheckEntry>& entries) {
  for (const auto& e : entries) {
    std::cout << std::left << std::setw(48) << e.name << ' ' << std::right << std::setw(14) << std::setprecision(6)
              << e.value << "  ";
    if (e.gated)
      std::cout << (e.less ? "<= " : ">  ") << std::setw(10) << e.gate << "  " << (e.pass ? "PASS" : "FAIL");
    else
      std::cout << std::setw(15) << "" << "info";
    std::cout << '\n';
  }
}

int run_realize(const std::string& config_path) {
  ghmc::RunConfig cfg;
  try {
    cfg = ghmc::parse_config_text(read_file(config_path));
  } catch (const ghmc::ConfigError& e) {
    std::cerr << "config invalid: " << e.what() << '\n';
    return kConfigInvalid;
  }
  try {
    ghmc::RealizationOptions opt = cfg.options();
    opt.minimize.progress = [](int it, double psi, double g) {
      std::cerr << "iteration " << it << "  psi " << std::setprecision(12) << psi << "  |grad| " << std::setprecision(3) << g << '\n';
    };
    const ghmc::RealizationResult r = ghmc::realize(cfg.problem(), opt);
    const ghmc::CertificateReport rep = ghmc::certify(r, cfg);
    const auto& mesh = *r.minimizer.value.context->mesh;
    ghmc::write_atomic(cfg.result_path, ghmc::result_json(r, cfg, rep).dump(2) + "\n");
    ghmc::write_atomic(cfg.report_path, ghmc::report_json(rep, cfg).dump(2) + "\n");
    ghmc::write_atomic(cfg.future_surface, ghmc::surface_text(mesh, r.future));
    ghmc::write_atomic(cfg.past_surface, ghmc::surface_text(mesh, r.past));
    print_table(rep.entries);
    std::cout << (rep.pass() ? "certificate PASS" : "certificate FAIL") << '\n';
    return rep.pass() ? kPass : kCertificateFail;
  } catch (const ghmc::Error& e) {
    std::cerr << "solver failure\n  kind: " << (dynamic_cast<const ghmc::SolverError*>(&e) ? "solver" : "domain")
              << "\n  message: " << e.what() << "\n  config: " << config_path << "\n  seed: " << cfg.seed << '\n';
    return kSolverFail;
  }
}

int run_check(const std::string& suite, const std::string& config_path) {
  ghmc::RunConfig cfg;
  cfg.h2 = ghmc::FNCoords{{2.2, 1.8, 2.1}, {0.1, -0.3, 0.4}};
  cfg.h1 = ghmc::FNCoords{{2.0, 2.0, 2.0}, {0.3, -0.2, 0.5}};
  try {
    if (!config_path.empty()) cfg = ghmc::parse_config_text(read_file(config_path));
    if (suite != "all" && std::find(ghmc::suite_names().begin(), ghmc::suite_names().end(), suite) == ghmc::suite_names().end())
      throw ghmc::ConfigError("suite", "unknown suite '" + suite + "'");
  } catch (const ghmc::ConfigError& e) {
    std::cerr << "config invalid: " << e.what() << '\n';
    return kConfigInvalid;
  }
  try {
    const auto entries = ghmc::run_suite(suite, cfg);
    print_table(entries);
    const bool pass = std::all_of(entries.begin(), entries.end(), [](const auto& e) { return !e.gated || e.pass; });
    std::cout << "suite " << suite << (pass ? " PASS" : " FAIL") << '\n';
    return pass ? kPass : kCertificateFail;
  } catch (const ghmc::Error& e) {
    std::cerr << "solver failure\n  message: " << e.what() << '\n';
    return kSolverFail;
  }
}

int run_export(const std::string& result_path, const std::string& which, const std::string& out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(result_path));
  } catch (const std::exception& e) {
    std::cerr << "cannot read result: " << e.what() << '\n';
    return kConfigInvalid;
  }
  try {
    ghmc::write_atomic(out, ghmc::export_from_result(j, which));
  } catch (const ghmc::DomainError& e) {
    std::cerr << e.what() << '\n';
    return kConfigInvalid;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kSolverFail;
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine deformations from pairs of hyperbolic metrics on a genus-2 surface"};
  app.require_subcommand(1);
  std::string config, suite, result, which, out;

  auto* realize = app.add_subcommand("realize", "solve the realization problem and certify it");
  realize->add_option("--config", config, "JSON run configuration")->required();
  auto* check = app.add_subcommand("check", "run the invariant suite of a module");
  check->add_option("--suite", suite, "minkowski, fuchsian, mesh, codazzi, labourie, variational, embedding or all")->required();
  check->add_option("--config", config, "JSON run configuration");
  auto* exp = app.add_subcommand("export", "write a surface file from a result file");
  exp->add_option("--result", result, "result file written by realize")->required();
  exp->add_option("--which", which, "future or past")->required()->check(CLI::IsMember({"future", "past"}));
  exp->add_option("--out", out, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigInvalid;
  }
  if (*realize) return run_realize(config);
  if (*check) return run_check(suite, config);
  return run_export(result, which, out);
}
