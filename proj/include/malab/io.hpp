#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "malab/capacity.hpp"
#include "malab/energy.hpp"
#include "malab/errors.hpp"
#include "malab/ma.hpp"
#include "malab/models.hpp"
#include "malab/profiles.hpp"
#include "malab/solver.hpp"

namespace malab {

using Json = nlohmann::json;

/// Configuration or input document that does not match its schema.
class SchemaViolation : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
    const char* kind() const noexcept override { return "SchemaViolation"; }
};

/// %.17g; non-finite values print as inf, -inf and nan.
std::string format_double(double value);

/// JSON text with every number printed through format_double (non-finite
/// numbers become the strings "inf", "-inf", "nan"). Two-space indentation.
std::string dump_json(const Json& value);

/// Number from JSON, accepting the non-finite strings written by dump_json.
double json_number(const Json& value);

Json to_json(const Profile& profile);
Profile profile_from_json(const Json& value);

/// {base: Profile, offset: [...], offset_slope_minus_inf, offset_slope_plus_inf}
Json to_json(const RelativeProfile& phi);
RelativeProfile relative_profile_from_json(const Json& value);

/// {kind, normalization: "raw" | "unit-volume", resolution?, t_scale?, t_shift?}
Json model_descriptor(const KahlerModel& model);
KahlerModel model_from_json(const Json& value);
/// Model from its kind name ("radial-p2", "product-p1p1", "toric-p1p1") with defaults.
KahlerModel model_from_name(const std::string& name, int resolution = 64);

/// {kind: "1d" | "2d", grid, grid2?, density, atoms: [{loc, mass}], total_mass, volume}
Json to_json(const MaMeasure& measure);
MaMeasure measure_from_json(const Json& value);

Json to_json(const SolveResult& result);
Json to_json(const Verdict& verdict);
Json to_json(const EnergyReport& report);
Json to_json(const CapacityCurve& curve);

/// Comma-separated table; numbers through format_double.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    /// Starts a new row.
    CsvTable& row();
    CsvTable& add(double value);
    CsvTable& add(long long value);
    CsvTable& add(int value) { return add(static_cast<long long>(value)); }
    CsvTable& add(std::size_t value) { return add(static_cast<long long>(value)); }
    CsvTable& add(const std::string& text);
    CsvTable& add(const char* text) { return add(std::string(text)); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Measure CDF at the grid nodes: t,cdf (one-dimensional measures only).
std::string cdf_csv(const MaMeasure& measure);
/// One row per capacity threshold with the bound families and their margins.
std::string capacity_csv(const CapacityCurve& curve);
/// One row per schedule level: level,width,energy,target_energy,consistency.
std::string solve_trace_csv(const SolveResult& result);
/// One row per Newton step.
std::string newton_trace_csv(const SolveResult& result);

enum class Command { Solve, Energy, Capacity, Verify, Examples };
std::string to_string(Command command);
Command command_from_string(const std::string& text);

/// Validated run configuration. Flags override file values.
struct RunConfig {
    Command command = Command::Verify;
    std::string model = "radial-p2";
    int resolution = 64;
    double t_scale = 1.0;
    double t_shift = 0.0;
    Normalization normalization = Normalization::Raw;
    std::uint64_t seed = 0;
    int size = 200;
    /// Empty: the command default (p = 1, or p = 1 and 2 for verify).
    std::vector<double> p_values;
    double tolerance = 1e-7;
    std::string out = "malab_out";
    /// Input document (target measure for solve, profile for energy and capacity).
    std::optional<std::string> input;
    /// Example id for `examples` (empty: every example).
    std::string example_id;
    /// Check ids for `verify`; unset means every registered check.
    std::optional<std::vector<std::string>> checks;
    /// Approximation schedule for `solve`.
    std::string approximation = "none";
};

/// Parses and validates a configuration document; throws SchemaViolation.
RunConfig run_config_from_json(const Json& value);
Json to_json(const RunConfig& config);

/// Reads a whole file; throws InvalidInput when it cannot be opened.
std::string read_file(const std::string& path);
/// Writes a whole file, creating parent directories; throws Error on failure.
void write_file(const std::string& path, const std::string& contents);
/// Parses a JSON file; syntax errors become SchemaViolation.
Json read_json_file(const std::string& path);

}  // namespace malab
