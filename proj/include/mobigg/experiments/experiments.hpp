#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mobigg::experiments {

enum class ExperimentKind {
  Detect,
  Cover,
  Perc,
  Broadcast,
  Sausage,
  Couple,
  Density,
  Calibrate,
};

ExperimentKind kind_from_string(const std::string& name);
std::string kind_to_string(ExperimentKind kind);

/// Raised on schema violations (unknown kind, bad key, missing key, value
/// out of range). The CLI maps this to exit code 2.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A validated experiment request. `parameters` holds the flat key-value
/// config; validation against the kind's schema happens before any
/// simulation starts.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Sausage;
  std::map<std::string, std::string> parameters;
  std::string output_path;
  std::uint64_t seed = 0;
};

/// Check the parameters against the kind's schema and fill defaults.
/// Throws ValidationError on unknown keys, missing keys, or bad values.
std::map<std::string, std::string> validate_spec(const ExperimentSpec& spec);

/// Parse `key = value` lines ('#' comments, blank lines ignored).
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

using Cell = std::variant<std::int64_t, double, bool, std::string>;

struct ResultTable {
  std::vector<std::string> schema;          // ordered column names
  std::vector<std::vector<Cell>> rows;      // every row has every column
  std::string metadata_json;                // spec echo, version, timings

  void add_row(std::vector<Cell> row);
};

std::string format_cell(const Cell& cell);

/// CSV body: header row plus one line per row, RFC-4180-style quoting,
/// '.' decimal separator, '\n' line ends. Byte-identical for identical
/// (seed, spec) regardless of thread count.
std::string csv_body(const ResultTable& table);

struct RunOptions {
  unsigned threads = 1;
};

/// Validate, dispatch to the target module, and collect per-trial rows.
ResultTable run_experiment(const ExperimentSpec& spec,
                           const RunOptions& options = {});

/// Write `<path>` (CSV) and `<path>.meta.json`. If the table was produced by
/// a failed run (see run_experiment_to_files), metadata carries the status.
void write_result(const ResultTable& table, const std::string& path);

/// run + write; on mid-run failure writes whatever rows exist with
/// status=incomplete in the metadata and rethrows.
ResultTable run_experiment_to_files(const ExperimentSpec& spec,
                                    const RunOptions& options = {});

/// Pooled summary of tables with identical schemas: per numeric column the
/// row-weighted mean and standard error. Inputs are folded in a canonical
/// content order, so permuting them yields byte-identical output.
ResultTable aggregate(const std::vector<ResultTable>& tables);

extern const char* kVersion;

}  // namespace mobigg::experiments
