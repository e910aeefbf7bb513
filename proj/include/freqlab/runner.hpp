#pragma once

// Experiment configuration, the solve -> frequency -> blow-up pipeline with
// its invariant checks, and persistence of the results.
//
// Configuration files are flat INI-style text:
//
//   [problem]    N, R, sector_j, L_max, family (picard|manufactured_A|manufactured_B)
//   [manufactured] ell, amplitude, k, v_amplitude, addon_ell, addon_amplitude
//   [potential]  kind (zero|constant|polynomial|table), value, coefficients,
//                radii, values, from_a
//   [boundary]   p.<l> = phi_l(R), q.<l> = phit_l(R)
//   [grid]       points, rho_min
//   [solver]     tol, max_iter, damping
//   [output]     directory, formats (csv, json)
//
// '#' and ';' start comments.  Lists are comma separated.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "freqlab/blowup.hpp"
#include "freqlab/frequency.hpp"
#include "freqlab/solver.hpp"

namespace freqlab {

enum class Family { picard, manufactured_A, manufactured_B };

const char* to_string(Family f);

struct ExperimentConfig {
  // [problem]
  int dimension = 4;
  double radius = 1.0;
  int sector = 0;
  int l_max = 8;
  Family family = Family::picard;
  // [manufactured]
  int ell = 0;
  double amplitude = 1.0;
  int k = 0;
  double v_amplitude = 1.0;
  std::optional<HarmonicAddon> addon;
  // [potential]
  Potential::Kind potential_kind = Potential::Kind::zero;
  double potential_value = 0.0;
  std::vector<double> potential_coefficients;
  std::vector<double> potential_radii;
  std::vector<double> potential_values;
  /// Parameters describe the weight a; the coupling is h = -2a.
  bool from_a = false;
  // [boundary]
  std::map<int, BoundaryDatum> boundary;
  // [grid]
  int grid_points = kDefaultGridPoints;
  double rho_min = kDefaultRho;
  // [solver]
  PicardOptions solver;
  // [output]
  std::string output_directory;
  bool write_csv = true;
  bool write_json = true;

  /// The coupling h after applying from_a.
  Potential potential() const;
};

struct ConfigParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> violations;
};

/// Parses and validates; collects every violation instead of stopping at
/// the first one.
ConfigParseResult parse_config_text(const std::string& text);

/// parse_config_text, throwing ConfigurationError listing all violations.
ExperimentConfig parse_config(const std::string& text);

/// Reads a file and parses it; throws IoError when unreadable.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form of a configuration (used for the digest).
std::string config_canonical(const ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical form, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

class IoError : public Error {
 public:
  using Error::Error;
};

/// Writes through a temporary file in the same directory and renames it
/// into place, so the final path never holds a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

enum class CheckStatus { pass, fail, skipped };

const char* to_string(CheckStatus s);

struct InvariantCheck {
  std::string name;
  CheckStatus status = CheckStatus::skipped;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct RunReport {
  std::string config_digest;
  Family family = Family::picard;
  std::uint64_t seed = 0;
  std::filesystem::path output_directory;
  std::optional<std::filesystem::path> trace_file;
  std::optional<std::filesystem::path> solution_file;
  std::optional<std::filesystem::path> profile_file;
  std::optional<PicardReport> picard;
  std::optional<BlowupProfile> profile;
  std::optional<GammaEstimate> gamma;
  std::optional<UcResult> uc;
  double agreement_rel_err = 0.0;
  std::vector<InvariantCheck> invariants;
  std::vector<std::string> notes;
  std::string started;
  std::string finished;
  int exit_code = 0;
};

struct RunOptions {
  std::uint64_t seed = 0;
  /// Overrides the configured output directory.
  std::optional<std::filesystem::path> output_directory;
  /// Stop after the solve stage.
  bool solve_only = false;
  /// Stop after the frequency stage.
  bool skip_blowup = false;
};

/// Output directory resolution: explicit option, then the config, then
/// $FREQLAB_OUT, then "freqlab-out".
std::filesystem::path resolve_output_directory(const ExperimentConfig& config,
                                               const RunOptions& options);

/// Runs the pipeline and writes solution.csv, trace.csv, profile.json and
/// report.json.  Exit codes: 0 all checks pass, 1 I/O failure, 2 Picard
/// non-convergence, 3 invariant violation.
RunReport run(const ExperimentConfig& config, const RunOptions& options = {});

std::string report_json(const RunReport& report);

/// Human-readable table for a report.json document.
std::string render_report(const std::string& report_json_text);

/// Command-line entry point (subcommands validate, solve, frequency, blowup,
/// fractional-check, report).
int cli_main(int argc, char** argv);

}  // namespace freqlab
