#pragma once

#include "zakharov/solvers.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace zakharov {

using Json = nlohmann::ordered_json;

/// Process exit codes of the command-line runner.
enum ExitCode : int
{
  ExitOk = 0,
  ExitValidation = 2,
  ExitSolverFailure = 3,
  ExitClaimViolation = 4
};

/// One experiment. Parsed from a JSON object whose keys mirror these fields;
/// unknown keys anywhere are rejected.
struct ExperimentConfig
{
  std::string task = "solve"; ///< spectrum, solve, multiplicity, nonexist, compare, verify, sweep
  DomainSpec domain;
  ModelParams params;
  SolverConfig solver;
  int k_max = 4;                      ///< eigenpairs computed alongside every task
  std::string method = "auto";        ///< solve: auto, mountain_pass, nehari, e2_global
  int window = 0;                     ///< multiplicity: k with lambda_k < kappa - omegaSq < lambda_{k+1}; 0 = detect
  int trials = 50;                    ///< nonexist: random starts
  std::string suite = "identities";   ///< verify: identities, spectrum, fibering, theorems
  std::string axis;                   ///< sweep: omegaSq, kappa, n, sigma
  std::vector<double> values;         ///< sweep values
  bool write_fields = true;           ///< dump solution CSVs
  std::filesystem::path output_dir = "zakharov-out";
};

/// Throws ValidationError naming the offending key.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& file);

/// Canonical JSON of the physical and numerical settings (no output_dir).
Json config_json(const ExperimentConfig& cfg);

/// FNV-1a 64-bit hash of the canonical config dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Outcome of one run: the record written to `<task>.json` and the exit code.
/// Everything except record["timing"] is a deterministic function of the
/// config.
struct RunOutcome
{
  Json record;
  int exit_code = ExitOk;
};

/// Runs the configured task and writes its outputs below cfg.output_dir.
/// Validation problems surface as ValidationError, numerical failures as
/// SolverError; run_safely maps them to exit codes.
RunOutcome run(const ExperimentConfig& cfg);

/// run() with exceptions mapped onto the exit-code contract; the message is
/// stored in record["error"].
RunOutcome run_safely(const ExperimentConfig& cfg);

/// Worker count for sweeps: ZAKHAROV_THREADS if set (must be a positive
/// integer), else the number of logical cores.
int worker_count();

Json to_json(const SolveReport& r, bool with_trace = true);
Json to_json(const Spectrum& s);
Json to_json(const NonexistenceCertificate& c);

/// CSV dump with header "x,u" or "x,y,u", nodes in grid order.
void write_field_csv(const Field& u, const std::filesystem::path& file);

/// Reads a field written by write_field_csv back onto `spec`.
Field read_field_csv(const DomainSpec& spec, const std::filesystem::path& file);

} // namespace zakharov
