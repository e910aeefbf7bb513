#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "freqlab/fractional.hpp"
#include "freqlab/harmonics.hpp"
#include "freqlab/runner.hpp"

namespace freqlab {

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string input;
  std::uint64_t seed = 0;
  bool quiet = false;
};

int validate_harmonics(const Flags& flags) {
  int dimension = 4;
  int l_max = 8;
  if (!flags.config.empty()) {
    const auto cfg = load_config(flags.config);
    dimension = cfg.dimension;
    l_max = cfg.l_max;
  }
  const PolarQuadrature quad(dimension);
  bool ok = true;
  auto line = [&](const std::string& what, double value, double tol) {
    const bool pass = value < tol;
    ok = ok && pass;
    if (!flags.quiet)
      std::printf("%-40s %-4s %.3e (< %.0e)\n", what.c_str(), pass ? "ok" : "FAIL", value, tol);
  };
  for (int j = 0; j <= l_max; ++j) {
    const auto modes = build_sector(dimension, j, l_max - (l_max - j) % 2);
    const std::string tag = "N=" + std::to_string(dimension) + " j=" + std::to_string(j);
    line(tag + " orthonormality", verify_orthonormality(modes, quad), 1e-10);
    double eig = 0.0, neumann = 0.0, equator = INFINITY;
    for (const auto& m : modes) {
      eig = std::max(eig, eigen_residual(m, quad));
      neumann = std::max(neumann, std::abs(m.profile_derivative(M_PI / 2)));
      equator = std::min(equator, std::abs(m.equator_value()));
    }
    line(tag + " eigen residual", eig, 1e-8);
    line(tag + " equator derivative", neumann, 1e-12);
    line(tag + " equator value (inverse)", 1.0 / equator, 1e12);
  }
  return ok ? 0 : 3;
}

int fractional_check(const Flags& flags) {
  std::ifstream in(flags.input);
  if (!in) throw IoError("cannot read mode list " + flags.input);
  std::vector<SpectralMode> modes;
  std::string row;
  int lineno = 0;
  while (std::getline(in, row)) {
    ++lineno;
    if (row.empty() || row[0] == '#') continue;
    std::replace(row.begin(), row.end(), ',', ' ');
    std::istringstream ss(row);
    SpectralMode m;
    if (!(ss >> m.xi >> m.uhat)) {
      if (lineno == 1) continue;  // header
      throw IoError("malformed row " + std::to_string(lineno) + " in " + flags.input);
    }
    modes.push_back(m);
  }
  std::ostringstream out;
  out << "xi,uhat,dtn,multiplier,rel_err\n";
  double worst = 0.0;
  for (const auto& m : modes) {
    const auto [dtn, mult] = dtn_check(m.xi, m.uhat);
    const double err = dtn_relative_error(m.xi, m.uhat);
    worst = std::max(worst, err);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", m.xi, m.uhat, dtn, mult, err);
    out << buf;
  }
  const bool pass = worst < 1e-12;
  char summary[96];
  std::snprintf(summary, sizeof summary, "modes %zu max_rel_err %.3e %s\n", modes.size(), worst,
                pass ? "PASS" : "FAIL");
  if (!flags.out.empty()) write_atomic(std::filesystem::path(flags.out) / "fractional.csv", out.str());
  if (!flags.quiet) std::cout << out.str();
  std::cout << summary;
  return pass ? 0 : 3;
}

int run_stage(const Flags& flags, bool solve_only, bool skip_blowup) {
  if (flags.config.empty()) throw IoError("--config is required");
  const auto cfg = load_config(flags.config);
  RunOptions options;
  options.seed = flags.seed;
  options.solve_only = solve_only;
  options.skip_blowup = skip_blowup;
  if (!flags.out.empty()) options.output_directory = flags.out;
  const auto report = run(cfg, options);
  if (!flags.quiet) std::cout << render_report(report_json(report));
  for (const auto& c : report.invariants)
    if (c.status == CheckStatus::fail)
      std::cerr << "invariant " << c.name << " failed: " << c.value << " vs " << c.threshold
                << (c.note.empty() ? "" : " (" + c.note + ")") << '\n';
  if (report.exit_code == 1 || report.exit_code == 2)
    for (const auto& n : report.notes) std::cerr << n << '\n';
  return report.exit_code;
}

int render(const Flags& flags) {
  std::ifstream in(flags.input);
  if (!in) throw IoError("cannot read report " + flags.input);
  std::stringstream ss;
  ss << in.rdbuf();
  std::cout << render_report(ss.str());
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Frequency-function experiments for symmetric biharmonic-type systems on the half ball"};
  app.require_subcommand(1);
  Flags flags;
  app.add_flag("--quiet,-q", flags.quiet, "Suppress the summary table");

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Experiment configuration file");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--seed", flags.seed, "Seed for randomized invariant sampling");
    sub->add_flag("--quiet,-q", flags.quiet, "Suppress the summary table");
  };
  auto* validate = app.add_subcommand("validate", "Harmonic basis self-tests (and config check)");
  common(validate);
  auto* solve = app.add_subcommand("solve", "Solve and write solution.csv");
  common(solve);
  auto* frequency = app.add_subcommand("frequency", "Solve and write the frequency trace");
  common(frequency);
  auto* blowup = app.add_subcommand("blowup", "Full pipeline including the blow-up profile");
  common(blowup);
  auto* fractional = app.add_subcommand("fractional-check", "Check the extension DtN map on a mode list");
  common(fractional);
  fractional->add_option("--input", flags.input, "CSV with columns xi,uhat")->required();
  auto* report = app.add_subcommand("report", "Render report.json as a table");
  report->add_option("--input", flags.input, "report.json path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (validate->parsed()) return validate_harmonics(flags);
    if (solve->parsed()) return run_stage(flags, true, false);
    if (frequency->parsed()) return run_stage(flags, false, true);
    if (blowup->parsed()) return run_stage(flags, false, false);
    if (fractional->parsed()) return fractional_check(flags);
    if (report->parsed()) return render(flags);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigurationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  std::cerr << app.help();
  return 1;
}

}  // namespace freqlab
