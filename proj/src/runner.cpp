#include "freqlab/runner.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace freqlab {

using ojson = nlohmann::ordered_json;

const char* to_string(Family f) {
  switch (f) {
    case Family::picard:
      return "picard";
    case Family::manufactured_A:
      return "manufactured_A";
    case Family::manufactured_B:
      return "manufactured_B";
  }
  return "?";
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::skipped:
      return "skipped";
  }
  return "?";
}

Potential ExperimentConfig::potential() const {
  Potential p;
  switch (potential_kind) {
    case Potential::Kind::zero:
      return Potential::zero();
    case Potential::Kind::constant:
      p = Potential::constant(potential_value);
      break;
    case Potential::Kind::polynomial:
      p = Potential::polynomial(potential_coefficients);
      break;
    case Potential::Kind::table:
      p = Potential::table(potential_radii, potential_values);
      break;
  }
  return from_a ? p.scaled(-2.0) : p;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<long long> parse_int(const std::string& s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  return std::nullopt;
}

std::optional<std::vector<double>> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_real(trim(item));
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"problem", {"N", "R", "sector_j", "L_max", "family"}},
      {"manufactured", {"ell", "amplitude", "k", "v_amplitude", "addon_ell", "addon_amplitude"}},
      {"potential", {"kind", "value", "coefficients", "radii", "values", "from_a"}},
      {"boundary", {}},
      {"grid", {"points", "rho_min"}},
      {"solver", {"tol", "max_iter", "damping"}},
      {"output", {"directory", "formats"}},
  };
  return s;
}

struct Parser {
  ExperimentConfig cfg;
  std::vector<std::string> violations;
  std::set<std::string> seen;
  bool have_value = false;
  bool have_coefficients = false;
  std::optional<int> addon_ell;
  std::optional<double> addon_amplitude;

  void bad(const std::string& msg) { violations.push_back(msg); }

  template <class T, class F>
  void set(const std::string& key, const std::string& value, F parse, T& target,
           const char* expected) {
    if (auto v = parse(value))
      target = static_cast<T>(*v);
    else
      bad(key + ": expected " + expected + ", got '" + value + "'");
  }

  void assign(const std::string& section, const std::string& key, const std::string& value) {
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) {
      bad("duplicate key '" + full + "'");
      return;
    }
    if (section == "boundary") {
      const auto dot = key.find('.');
      const std::string which = key.substr(0, dot);
      long long ell = -1;
      if (dot != std::string::npos) ell = parse_int(key.substr(dot + 1)).value_or(-1);
      if ((which != "p" && which != "q") || ell < 0) {
        bad("unknown key '" + full + "' (boundary keys are p.<degree> and q.<degree>)");
        return;
      }
      double v = 0.0;
      set(full, value, parse_real, v, "a real number");
      auto& datum = cfg.boundary[static_cast<int>(ell)];
      (which == "p" ? datum.p : datum.q) = v;
      return;
    }
    const auto& keys = schema().at(section);
    if (!keys.count(key)) {
      bad("unknown key '" + full + "'");
      return;
    }
    if (section == "problem") {
      if (key == "N") set(full, value, parse_int, cfg.dimension, "an integer");
      if (key == "R") set(full, value, parse_real, cfg.radius, "a real number");
      if (key == "sector_j") set(full, value, parse_int, cfg.sector, "an integer");
      if (key == "L_max") set(full, value, parse_int, cfg.l_max, "an integer");
      if (key == "family") {
        if (value == "picard")
          cfg.family = Family::picard;
        else if (value == "manufactured_A")
          cfg.family = Family::manufactured_A;
        else if (value == "manufactured_B")
          cfg.family = Family::manufactured_B;
        else
          bad(full + ": expected picard, manufactured_A or manufactured_B, got '" + value + "'");
      }
    } else if (section == "manufactured") {
      if (key == "ell") set(full, value, parse_int, cfg.ell, "an integer");
      if (key == "amplitude") set(full, value, parse_real, cfg.amplitude, "a real number");
      if (key == "k") set(full, value, parse_int, cfg.k, "an integer");
      if (key == "v_amplitude") set(full, value, parse_real, cfg.v_amplitude, "a real number");
      if (key == "addon_ell") {
        int v = 0;
        set(full, value, parse_int, v, "an integer");
        addon_ell = v;
      }
      if (key == "addon_amplitude") {
        double v = 0.0;
        set(full, value, parse_real, v, "a real number");
        addon_amplitude = v;
      }
    } else if (section == "potential") {
      if (key == "kind") {
        if (value == "zero")
          cfg.potential_kind = Potential::Kind::zero;
        else if (value == "constant")
          cfg.potential_kind = Potential::Kind::constant;
        else if (value == "polynomial")
          cfg.potential_kind = Potential::Kind::polynomial;
        else if (value == "table")
          cfg.potential_kind = Potential::Kind::table;
        else
          bad(full + ": expected zero, constant, polynomial or table, got '" + value + "'");
      }
      if (key == "value") {
        set(full, value, parse_real, cfg.potential_value, "a real number");
        have_value = true;
      }
      if (key == "coefficients") {
        set(full, value, parse_list, cfg.potential_coefficients, "a list of reals");
        have_coefficients = true;
      }
      if (key == "radii") set(full, value, parse_list, cfg.potential_radii, "a list of reals");
      if (key == "values") set(full, value, parse_list, cfg.potential_values, "a list of reals");
      if (key == "from_a") set(full, value, parse_bool, cfg.from_a, "true or false");
    } else if (section == "grid") {
      if (key == "points") set(full, value, parse_int, cfg.grid_points, "an integer");
      if (key == "rho_min") set(full, value, parse_real, cfg.rho_min, "a real number");
    } else if (section == "solver") {
      if (key == "tol") set(full, value, parse_real, cfg.solver.tol, "a real number");
      if (key == "max_iter") set(full, value, parse_int, cfg.solver.max_iter, "an integer");
      if (key == "damping") set(full, value, parse_real, cfg.solver.damping, "a real number");
    } else if (section == "output") {
      if (key == "directory") cfg.output_directory = value;
      if (key == "formats") {
        cfg.write_csv = cfg.write_json = false;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          item = trim(item);
          if (item == "csv")
            cfg.write_csv = true;
          else if (item == "json")
            cfg.write_json = true;
          else
            bad(full + ": unknown format '" + item + "' (csv, json)");
        }
      }
    }
  }

  void validate() {
    auto& c = cfg;
    if (c.dimension < kMinDimension)
      bad("problem.N: dimension must exceed 3 (got " + std::to_string(c.dimension) + ")");
    if (!(c.radius > 0.0)) bad("problem.R: radius must be positive");
    if (c.sector < 0) bad("problem.sector_j: sector must be non-negative");
    if (c.l_max < c.sector)
      bad("problem.L_max: must be at least sector_j");
    else if ((c.l_max - c.sector) % 2 != 0)
      bad("problem.L_max: L_max - sector_j must be even (only equator-symmetric modes, degree - "
          "sector even, are admitted)");
    if (c.l_max > kMaxDegree) bad("problem.L_max: above the supported maximum degree");

    auto in_sector = [&](int ell, const std::string& key) {
      if (ell < c.sector || (ell - c.sector) % 2 != 0)
        bad(key + ": degree " + std::to_string(ell) + " is not an equator-symmetric mode of sector " +
            std::to_string(c.sector) + " (degree - sector must be even and non-negative)");
    };
    if (c.family == Family::manufactured_A) in_sector(c.ell, "manufactured.ell");
    if (c.family == Family::manufactured_B) in_sector(c.k, "manufactured.k");
    if (addon_ell || addon_amplitude) {
      if (c.family != Family::manufactured_B)
        bad("manufactured.addon_*: the harmonic addon only applies to manufactured_B");
      if (addon_ell && *addon_ell < 0) bad("manufactured.addon_ell: must be non-negative");
      c.addon = HarmonicAddon{addon_ell.value_or(0), addon_amplitude.value_or(0.0)};
    }
    if (c.family != Family::picard && c.potential_kind != Potential::Kind::zero)
      bad("potential.kind: manufactured families are exact only for h = 0");

    switch (c.potential_kind) {
      case Potential::Kind::zero:
        break;
      case Potential::Kind::constant:
        if (!have_value) bad("potential.value: required for a constant potential");
        break;
      case Potential::Kind::polynomial:
        if (!have_coefficients || c.potential_coefficients.empty())
          bad("potential.coefficients: required for a polynomial potential");
        break;
      case Potential::Kind::table:
        if (c.potential_radii.size() < 2 || c.potential_radii.size() != c.potential_values.size())
          bad("potential.radii/values: need matching lists of length >= 2");
        else
          for (std::size_t i = 1; i < c.potential_radii.size(); ++i)
            if (!(c.potential_radii[i] > c.potential_radii[i - 1])) {
              bad("potential.radii: must increase strictly");
              break;
            }
        break;
    }

    if (c.family == Family::picard) {
      for (const auto& [ell, d] : c.boundary)
        if (ell > c.l_max)
          bad("boundary: degree " + std::to_string(ell) + " exceeds L_max");
        else
          in_sector(ell, "boundary." + std::to_string(ell));
    } else if (!c.boundary.empty()) {
      bad("boundary: data only apply to the picard family");
    }

    if (c.grid_points < 16 || c.grid_points > 200000)
      bad("grid.points: must lie in [16, 200000]");
    if (!(c.rho_min > 1e-8 && c.rho_min < 1e-2)) bad("grid.rho_min: must lie in (1e-8, 1e-2)");
    if (!(c.solver.tol > 0.0)) bad("solver.tol: must be positive");
    if (c.solver.max_iter < 1) bad("solver.max_iter: must be positive");
    if (!(c.solver.damping > 0.0 && c.solver.damping <= 1.0))
      bad("solver.damping: must lie in (0, 1]");
    if (!c.write_csv && !c.write_json) bad("output.formats: select at least one of csv, json");

    if (violations.empty() && c.family == Family::picard && c.potential_kind != Potential::Kind::zero) {
      const double coupling = c.potential().sup_norm(c.radius) * c.radius;
      const double bound = coupling_threshold(c.dimension, c.sector, c.solver.coupling_fraction);
      if (!(coupling < bound))
        bad("potential: ||h|| R = " + std::to_string(coupling) +
            " is outside the perturbative range (< " + std::to_string(bound) + ")");
    }
  }
};

}  // namespace

ConfigParseResult parse_config_text(const std::string& text) {
  Parser p;
  std::stringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        p.bad(where + "malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section)) {
        p.bad(where + "unknown section [" + section + "]");
        section = "?";
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      p.bad(where + "expected key = value");
      continue;
    }
    if (section.empty()) {
      p.bad(where + "key outside of any section");
      continue;
    }
    if (section == "?") continue;
    p.assign(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  p.validate();
  ConfigParseResult out;
  out.violations = std::move(p.violations);
  if (out.violations.empty()) out.config = std::move(p.cfg);
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  auto r = parse_config_text(text);
  if (!r.config) {
    std::string msg = "invalid configuration:";
    for (const auto& v : r.violations) msg += "\n  " + v;
    throw ConfigurationError(msg);
  }
  return *r.config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read configuration " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_canonical(const ExperimentConfig& c) {
  ojson j;
  j["N"] = c.dimension;
  j["R"] = c.radius;
  j["sector_j"] = c.sector;
  j["L_max"] = c.l_max;
  j["family"] = to_string(c.family);
  j["ell"] = c.ell;
  j["amplitude"] = c.amplitude;
  j["k"] = c.k;
  j["v_amplitude"] = c.v_amplitude;
  if (c.addon) j["addon"] = {c.addon->ell, c.addon->amplitude};
  j["potential"] = {{"kind", to_string(c.potential_kind)},
                    {"value", c.potential_value},
                    {"coefficients", c.potential_coefficients},
                    {"radii", c.potential_radii},
                    {"values", c.potential_values},
                    {"from_a", c.from_a}};
  ojson b = ojson::object();
  for (const auto& [ell, d] : c.boundary) b[std::to_string(ell)] = {d.p, d.q};
  j["boundary"] = b;
  j["grid"] = {c.grid_points, c.rho_min};
  j["solver"] = {c.solver.tol, c.solver.max_iter, c.solver.damping};
  return j.dump();
}

std::string config_digest(const ExperimentConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config_canonical(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " into place");
  }
}

std::filesystem::path resolve_output_directory(const ExperimentConfig& config,
                                               const RunOptions& options) {
  if (options.output_directory) return *options.output_directory;
  if (!config.output_directory.empty()) return config.output_directory;
  if (const char* env = std::getenv("FREQLAB_OUT"); env && *env) return env;
  return "freqlab-out";
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void check(RunReport& r, const std::string& name, bool ok, double value, double threshold,
           std::string note = {}) {
  r.invariants.push_back(
      {name, ok ? CheckStatus::pass : CheckStatus::fail, value, threshold, std::move(note)});
}

void skip(RunReport& r, const std::string& name, std::string note) {
  r.invariants.push_back({name, CheckStatus::skipped, 0.0, 0.0, std::move(note)});
}

// Minimal vanishing order over both components of every mode.
double min_component_order(const SolutionExpansion& e) {
  double order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (const auto* f : {&e.phi[i], &e.phi_tilde[i]}) {
      try {
        order = std::min(order, vanishing_order(*f));
      } catch (const EstimationError&) {
      }
    }
  }
  return order;
}

SolutionExpansion build_solution(const ExperimentConfig& c, RunReport& report) {
  const auto grid = make_grid(c.radius, c.grid_points, c.rho_min);
  switch (c.family) {
    case Family::manufactured_A:
      return manufactured_A(grid, c.dimension, c.ell, c.amplitude, c.sector);
    case Family::manufactured_B:
      return manufactured_B(grid, c.dimension, c.k, c.v_amplitude, c.addon, c.sector);
    case Family::picard: {
      PicardProblem p;
      p.grid = grid;
      p.dimension = c.dimension;
      p.sector = c.sector;
      p.l_max = c.l_max;
      p.potential = c.potential();
      p.boundary = c.boundary;
      auto [e, rep] = picard_solve(p, c.solver);
      report.picard = rep;
      return std::move(e);
    }
  }
  throw ConfigurationError("unknown family");
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void frequency_and_blowup(const ExperimentConfig& c, const RunOptions& options,
                          const SolutionExpansion& e, RunReport& report,
                          const std::filesystem::path& dir) {
  const bool picard = c.family == Family::picard;
  FrequencyTrace trace;
  try {
    trace = compute_trace(e);
  } catch (const DegenerateMassError& ex) {
    check(report, "H_positive", false, 0.0, 0.0, ex.what());
    return;
  }
  if (c.write_csv) {
    std::ostringstream csv;
    write_trace_csv(csv, trace);
    write_atomic(dir / "trace.csv", csv.str());
    report.trace_file = dir / "trace.csv";
  }

  check(report, "H_positive", min_mass(trace) > 0.0, min_mass(trace), 0.0);
  const double hp_tol = picard ? 1e-4 : 1e-6;
  const double hp = *std::max_element(trace.res_Hprime.begin(), trace.res_Hprime.end());
  check(report, "Hprime_identity", hp < hp_tol, hp, hp_tol);

  // Pohozaev identities at 10 seeded interior radii.
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(1, trace.r.size() - 1);
  double p1 = 0.0, p2 = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto i = pick(rng);
    p1 = std::max(p1, trace.res_pohozaev1[i]);
    p2 = std::max(p2, trace.res_pohozaev2[i]);
  }
  const double poh_tol = picard ? 1e-4 : 1e-7;
  check(report, "pohozaev_1", p1 < poh_tol, p1, poh_tol);
  check(report, "pohozaev_2", p2 < poh_tol, p2, poh_tol);

  check(report, "limit_nonnegative", min_frequency_small(trace) > -0.05,
        min_frequency_small(trace), -0.05);
  const auto C = quasi_monotonicity_constant(trace);
  check(report, "quasi_monotonicity", C.has_value(), C.value_or(-1.0), 100.0,
        C ? "C = " + fmt17(*C) : "no constant in {0, 1, 10, 100}");

  try {
    report.gamma = extract_gamma(trace);
  } catch (const ClassificationError& ex) {
    check(report, "gamma_integer", false, 0.0, 1e-2, ex.what());
    return;
  }
  const auto& g = *report.gamma;
  check(report, "gamma_integer", g.distance < 1e-2, g.distance, 1e-2);
  check(report, "gamma_estimators_agree", g.estimator_gap < kEstimatorAgreementTol,
        g.estimator_gap, kEstimatorAgreementTol);
  const double dbl = doubling_error(e, trace, g.ell);
  check(report, "doubling", dbl < 0.05, dbl, 0.05);
  const double order = min_component_order(e);
  check(report, "order_consistency", std::abs(order - g.ell) < 0.5, order, g.ell);

  if (options.skip_blowup) return;

  try {
    report.profile = alpha_coefficients(e, g.ell);
    const auto limit = rescaling_limit(e, g.ell);
    report.agreement_rel_err = agreement_error(*report.profile, limit);
    const double tol = picard ? 1e-2 : 1e-4;
    check(report, "blowup_agreement", report.agreement_rel_err < tol, report.agreement_rel_err,
          tol);
    check(report, "profile_nontrivial", report.profile->norm > 1e-8, report.profile->norm, 1e-8);
  } catch (const Error& ex) {
    check(report, "blowup_agreement", false, 0.0, 0.0, ex.what());
    return;
  }
  if (c.write_json) {
    write_atomic(dir / "profile.json",
                 profile_json(*report.profile, g.gamma_fit, *report.uc, report.agreement_rel_err));
    report.profile_file = dir / "profile.json";
  }
}

}  // namespace

RunReport run(const ExperimentConfig& c, const RunOptions& options) {
  RunReport report;
  report.started = utc_now();
  report.config_digest = config_digest(c);
  report.family = c.family;
  report.seed = options.seed;
  const auto dir = resolve_output_directory(c, options);
  report.output_directory = dir;

  auto finish = [&](int code) {
    report.exit_code = code;
    report.finished = utc_now();
    if (code != 1) {
      try {
        write_atomic(dir / "report.json", report_json(report));
      } catch (const IoError& ex) {
        report.notes.push_back(ex.what());
        report.exit_code = 1;
      }
    }
    return report;
  };

  try {
    SolutionExpansion e;
    try {
      e = build_solution(c, report);
    } catch (const ConvergenceError& ex) {
      report.picard = ex.report();
      report.notes.push_back(ex.what());
      return finish(2);
    }
    if (c.write_csv) {
      std::ostringstream csv;
      write_solution_csv(csv, e);
      write_atomic(dir / "solution.csv", csv.str());
      report.solution_file = dir / "solution.csv";
    }

    const double res = max_residual(e);
    const double res_tol = c.family == Family::picard ? 10.0 * c.solver.tol : 1e-10;
    check(report, "ode_residual", res < res_tol, res, res_tol);
    if (c.family == Family::picard) {
      double worst = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        const auto it = c.boundary.find(e.modes[i].degree());
        const BoundaryDatum d = it == c.boundary.end() ? BoundaryDatum{} : it->second;
        const std::size_t last = e.grid().size() - 1;
        worst = std::max({worst, std::abs(e.phi[i][last] - d.p), std::abs(e.phi_tilde[i][last] - d.q)});
      }
      check(report, "boundary_match", worst <= 1e-12, worst, 1e-12);
    }

    report.uc = uc_probe(e, 10);
    check(report, "uc_dichotomy", report.uc->classification != UcClass::violation,
          report.uc->u_order, 10.0, report.uc->note);

    if (!options.solve_only) {
      if (report.uc->classification == UcClass::trivial) {
        report.notes.push_back(
            "trivial solution: H vanishes identically (degenerate mass), frequency and blow-up "
            "stages skipped");
        skip(report, "frequency", "degenerate mass");
      } else {
        frequency_and_blowup(c, options, e, report, dir);
      }
    }
  } catch (const IoError& ex) {
    report.notes.push_back(ex.what());
    return finish(1);
  }

  const bool failed = std::any_of(report.invariants.begin(), report.invariants.end(),
                                  [](const auto& i) { return i.status == CheckStatus::fail; });
  return finish(failed ? 3 : 0);
}

std::string report_json(const RunReport& r) {
  ojson j;
  j["config_digest"] = r.config_digest;
  j["family"] = to_string(r.family);
  j["seed"] = r.seed;
  j["exit_code"] = r.exit_code;
  j["output_directory"] = r.output_directory.string();
  j["solution_file"] = r.solution_file ? ojson(r.solution_file->string()) : ojson(nullptr);
  j["trace_file"] = r.trace_file ? ojson(r.trace_file->string()) : ojson(nullptr);
  j["profile_file"] = r.profile_file ? ojson(r.profile_file->string()) : ojson(nullptr);
  if (r.picard) {
    j["picard"] = {{"iterations", r.picard->iterations},
                   {"final_delta", r.picard->final_delta},
                   {"converged", r.picard->converged},
                   {"damped", r.picard->damped},
                   {"contraction_estimates", r.picard->contraction_estimates}};
  } else {
    j["picard"] = nullptr;
  }
  if (r.gamma) {
    j["gamma"] = {{"gamma_fit", r.gamma->gamma_fit},
                  {"ell", r.gamma->ell},
                  {"distance", r.gamma->distance},
                  {"slope_gamma", r.gamma->slope_gamma},
                  {"estimator_gap", r.gamma->estimator_gap}};
  } else {
    j["gamma"] = nullptr;
  }
  if (r.profile) {
    j["profile"] = {{"ell", r.profile->ell},
                    {"sectors", r.profile->sectors},
                    {"alpha", r.profile->alphas},
                    {"alpha_prime", r.profile->alpha_primes},
                    {"profile_norm", r.profile->norm},
                    {"multiplicity", r.profile->multiplicity},
                    {"agreement_rel_err", r.agreement_rel_err}};
  } else {
    j["profile"] = nullptr;
  }
  if (r.uc) {
    j["uc"] = {{"classification", to_string(r.uc->classification)},
               {"u_order", std::isfinite(r.uc->u_order) ? ojson(r.uc->u_order) : ojson("inf")},
               {"floor", kUcFloor},
               {"order_margin", kUcOrderMargin},
               {"note", r.uc->note}};
  } else {
    j["uc"] = nullptr;
  }
  ojson inv = ojson::array();
  for (const auto& c : r.invariants)
    inv.push_back({{"name", c.name},
                   {"status", to_string(c.status)},
                   {"value", c.value},
                   {"threshold", c.threshold},
                   {"note", c.note}});
  j["invariants"] = inv;
  j["notes"] = r.notes;
  j["timestamps"] = {{"started", r.started}, {"finished", r.finished}};
  return j.dump(2) + "\n";
}

std::string render_report(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(std::string("report is not valid JSON: ") + ex.what());
  }
  std::ostringstream out;
  auto str = [](const ojson& v) -> std::string {
    if (v.is_null()) return "-";
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  };
  out << "config digest  " << str(j.value("config_digest", ojson())) << '\n';
  out << "family         " << str(j.value("family", ojson())) << '\n';
  out << "exit code      " << str(j.value("exit_code", ojson())) << '\n';
  if (j.contains("picard") && !j["picard"].is_null())
    out << "picard         iterations " << str(j["picard"]["iterations"]) << ", delta "
        << str(j["picard"]["final_delta"]) << ", converged " << str(j["picard"]["converged"])
        << '\n';
  if (j.contains("gamma") && !j["gamma"].is_null())
    out << "gamma          " << str(j["gamma"]["gamma_fit"]) << " (l = " << str(j["gamma"]["ell"])
        << ")\n";
  if (j.contains("profile") && !j["profile"].is_null())
    out << "profile        alpha " << str(j["profile"]["alpha"]) << ", alpha' "
        << str(j["profile"]["alpha_prime"]) << ", norm " << str(j["profile"]["profile_norm"])
        << '\n';
  if (j.contains("uc") && !j["uc"].is_null())
    out << "uc probe       " << str(j["uc"]["classification"]) << '\n';
  out << '\n';
  char line[256];
  std::snprintf(line, sizeof line, "%-26s %-8s %-24s %s\n", "invariant", "status", "value",
                "threshold");
  out << line;
  for (const auto& c : j.value("invariants", ojson::array())) {
    std::snprintf(line, sizeof line, "%-26s %-8s %-24s %s\n", str(c["name"]).c_str(),
                  str(c["status"]).c_str(), str(c["value"]).c_str(), str(c["threshold"]).c_str());
    out << line;
  }
  for (const auto& n : j.value("notes", ojson::array())) out << "note: " << str(n) << '\n';
  return out.str();
}

}  // namespace freqlab
