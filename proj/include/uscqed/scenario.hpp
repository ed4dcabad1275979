#pragma once
// Scenario configs, the canonical figure scenarios and their serialization.
//
// A config is one JSON document; the schema is described in README.md.
// Outputs are a data file (<id>.csv or <id>.json) and a metadata sidecar
// (<id>.meta.json) in the output directory.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "uscqed/dynamics.hpp"
#include "uscqed/model.hpp"
#include "uscqed/spectrum.hpp"

namespace uscqed {

/// Library version recorded in every metadata sidecar.
const char* version();

enum class ScenarioMode { spectrum_sweep, free_evolution, driven_evolution, gap_search, supermode_profile };
enum class OutputFormat { csv, json };

std::string to_string(ScenarioMode mode);
ScenarioMode parse_scenario_mode(std::string_view text);
std::string to_string(OutputFormat format);
OutputFormat parse_output_format(std::string_view text);

/// Grid over omega_q (spectrum_sweep) or the central detuning (supermode_profile).
struct SweepSpec {
  double min = 0.0;
  double max = 0.0;
  Index points = 0;
  int n_levels = 8;
  /// spectrum_sweep only: a second phase pair whose levels are emitted as w<i>0_alt.
  std::optional<std::vector<double>> alternate_phases;

  std::vector<double> grid() const;
};

struct GapSpec {
  LevelPair levels;
  double min = 0.0;
  double max = 0.0;
  double tolerance = 1e-6;
  int coarse_points = 201;
};

struct InitSpec {
  std::string label = "vac";
  bool dressed = false;
};

/// Sets area_scale so the pulse is a pi pulse from the initial state to `to`.
struct CalibrationSpec {
  std::string to;
  bool dressed = true;
};

struct PulseConfig {
  PulseSpec pulse;
  std::optional<CalibrationSpec> calibration;
};

struct TimeSpec {
  double t_max = 0.0;
  double dt = 0.0;  // sampling step (free), integration step with 0 = automatic (driven)
  Index output_stride = 1;
};

struct OutputSpec {
  std::string path = ".";
  OutputFormat format = OutputFormat::csv;
};

struct ScenarioConfig {
  std::string scenario_id;
  std::string description;
  ScenarioMode mode = ScenarioMode::spectrum_sweep;
  SystemParams system;
  Basis basis = Basis::supermode;
  std::optional<SweepSpec> sweep;
  std::optional<GapSpec> gap;
  InitSpec init;
  std::optional<PulseConfig> pulse;
  std::optional<TimeSpec> time;
  std::vector<ObservableSpec> observables;
  OutputSpec output;
};

/// Every problem found in a config, each prefixed with its field path.
class ValidationError : public ConfigError {
 public:
  explicit ValidationError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses and checks a JSON config, filling defaults. Throws ValidationError
/// listing all problems, including JSON syntax errors.
ScenarioConfig validate_config(std::string_view text);
/// Fully resolved config as JSON; validate_config accepts it back unchanged.
std::string config_to_json(const ScenarioConfig& config, int indent = 2);

struct CatalogEntry {
  std::string id;
  std::string figure;
  std::string description;
};

std::vector<CatalogEntry> list_scenarios();
bool is_canonical(std::string_view id);
/// Throws ConfigError for an unknown id.
ScenarioConfig canonical_scenario(std::string_view id);

/// Named numeric columns of equal length; the first column is the abscissa.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // [column][row]

  Index rows() const { return data.empty() ? 0 : static_cast<Index>(data.front().size()); }
  /// Throws std::out_of_range for an unknown name.
  const std::vector<double>& column(const std::string& name) const;
};

struct SeriesSummary {
  std::string name;
  double max = 0.0;
  double time_of_max = 0.0;
  double mean = 0.0;
};

struct RunMetadata {
  std::string scenario_id;
  ScenarioMode mode = ScenarioMode::spectrum_sweep;
  std::string version;
  int n_max = 0;
  bool n_max_auto = false;
  Basis basis = Basis::supermode;
  std::optional<double> dt;
  std::optional<double> tau;
  std::optional<double> t0;
  std::optional<double> area_scale;
  std::optional<double> carrier;
  std::optional<std::string> carrier_directive;
  std::vector<double> relative_levels;  // w_i0 at the run's parameters (dynamics modes)
  std::optional<double> norm_drift;
  std::optional<Index> retained_states;
  std::vector<std::pair<std::string, double>> values;       // mode-specific results
  std::vector<std::pair<std::string, std::string>> labels;  // mode-specific text
  std::vector<SeriesSummary> summaries;                     // per trajectory column
  double wall_time = 0.0;
  std::string config_json;  // resolved config
};

struct ScenarioResult {
  Table table;
  RunMetadata metadata;
};

/// Runs the computation without touching the file system.
ScenarioResult compute_scenario(const ScenarioConfig& config);

struct RunOptions {
  std::optional<std::string> out_dir;     // overrides output.path
  std::optional<OutputFormat> format;     // overrides output.format
  std::optional<int> n_max;               // overrides system.n_max and disables auto truncation
  bool deterministic = false;             // leave wall time out of the metadata
};

struct RunOutput {
  ScenarioResult result;
  std::string data_path;
  std::string metadata_path;
};

/// Applies the overrides of `options` to a config.
ScenarioConfig apply_overrides(ScenarioConfig config, const RunOptions& options);

/// compute_scenario plus the data file and metadata sidecar. When the
/// computation fails the sidecar still records the error before it is
/// rethrown. Throws IoError when a file cannot be written.
RunOutput run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// CSV with a snake_case header and 12 significant digits per value.
std::string format_csv(const Table& table);
/// {"columns": [...], "data": {name: [...]}} with the same rounding as the CSV.
std::string format_table_json(const Table& table, int indent = 2);
std::string format_metadata(const RunMetadata& metadata, bool include_wall_time = true, int indent = 2);

/// Parses a CSV written by format_csv; throws ConfigError naming missing or malformed columns.
Table parse_csv(std::string_view text, const std::vector<std::string>& required = {});

/// Reads a whole file; throws IoError.
std::string read_text_file(const std::string& path);

}  // namespace uscqed
