#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace learnrate::cli {

inline constexpr int kSchemaVersion = 1;

// Everything needed to reproduce a run. Echoed into every output file.
struct RunConfig {
  std::string subcommand;  // spectrum | learn | harmonic | stable | scaling
  std::string family = "uniform";
  double beta = 0.0;
  std::vector<double> overlaps;  // wrong-set overlaps for family=empirical
  std::size_t n = 100;
  std::vector<std::size_t> n_grid;
  double delta = 0.01;
  std::size_t trials = 0;  // 0 = subcommand default, resolved by validate()
  std::uint64_t seed = 1;
  std::string method = "both";    // learn/scaling: memoryless | fullmem | both
  bool exact = true;              // learn: exact/analytic or simulated
  std::string estimator = "spectral-exact";  // scaling
  double alpha = 0.5;             // stable
  double tol = 0.0;               // harmonic: LLN band, 0 = skip
  bool selfcheck = false;         // harmonic: n vs 4n KS and transform check
  unsigned jobs = 1;
  std::string format = "csv";
  std::string output;   // empty = stdout
  std::string dump;     // raw sample dump (harmonic, stable)
  std::string summary;  // JSON fit summary (scaling)

  nlohmann::json to_json() const;
  // Missing keys keep their defaults.
  static RunConfig from_json(const nlohmann::json& j);
};

// Throws std::invalid_argument with an actionable message; fills defaults.
void validate(RunConfig& config);

struct Table {
  std::vector<std::string> columns;
  std::vector<nlohmann::json> rows;  // each row is a JSON array
};

// Runs the subcommand and returns its result table (side files such as
// dumps and summaries are written here too).
Table execute(const RunConfig& config);

// `#`-prefixed metadata lines (schema version, config echo), the column
// header, then rows. Doubles are printed with 17 significant digits.
void write_csv(std::ostream& out, const RunConfig& config, const Table& table);
void write_json(std::ostream& out, const RunConfig& config, const Table& table);

struct ParsedCsv {
  int schema_version = 0;
  nlohmann::json config;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

ParsedCsv read_csv(std::istream& in);

// Full command-line entry point. Exit codes: 0 success, 1 runtime or I/O
// failure, 2 invalid usage.
int main_entry(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err);

}  // namespace learnrate::cli
