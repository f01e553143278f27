#include "malab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace malab {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char text[40];
    std::snprintf(text, sizeof text, "%.17g", value);
    return text;
}

namespace {

void write_json(std::ostringstream& out, const Json& value, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (value.type()) {
        case Json::value_t::number_float: {
            const double x = value.get<double>();
            if (std::isfinite(x)) {
                out << format_double(x);
            } else {
                out << '"' << format_double(x) << '"';
            }
            return;
        }
        case Json::value_t::object: {
            if (value.empty()) {
                out << "{}";
                return;
            }
            out << "{\n";
            bool first = true;
            for (auto it = value.begin(); it != value.end(); ++it) {
                if (!first) out << ",\n";
                first = false;
                out << pad << Json(it.key()).dump() << ": ";
                write_json(out, it.value(), depth + 1);
            }
            out << '\n' << close_pad << '}';
            return;
        }
        case Json::value_t::array: {
            if (value.empty()) {
                out << "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            const bool flat = std::all_of(value.begin(), value.end(),
                                          [](const Json& v) { return v.is_primitive(); });
            if (flat) {
                out << '[';
                bool first = true;
                for (const auto& v : value) {
                    if (!first) out << ", ";
                    first = false;
                    write_json(out, v, depth + 1);
                }
                out << ']';
                return;
            }
            out << "[\n";
            bool first = true;
            for (const auto& v : value) {
                if (!first) out << ",\n";
                first = false;
                out << pad;
                write_json(out, v, depth + 1);
            }
            out << '\n' << close_pad << ']';
            return;
        }
        default:
            out << value.dump();
    }
}

const Json& field(const Json& object, const char* key) {
    if (!object.is_object()) throw SchemaViolation("expected a JSON object");
    const auto it = object.find(key);
    if (it == object.end()) throw SchemaViolation(std::string("missing field '") + key + "'");
    return *it;
}

std::vector<double> number_list(const Json& value, const char* what) {
    if (!value.is_array()) throw SchemaViolation(std::string("'") + what + "' must be an array");
    std::vector<double> out;
    out.reserve(value.size());
    for (const auto& v : value) out.push_back(json_number(v));
    return out;
}

Json number_array(const std::vector<double>& values) {
    Json out = Json::array();
    for (double v : values) out.push_back(v);
    return out;
}

std::string text_field(const Json& value, const char* what) {
    if (!value.is_string()) throw SchemaViolation(std::string("'") + what + "' must be a string");
    return value.get<std::string>();
}

void reject_unknown(const Json& object, const std::set<std::string>& known, const char* what) {
    for (auto it = object.begin(); it != object.end(); ++it) {
        if (!known.count(it.key())) {
            throw SchemaViolation(std::string("unknown field '") + it.key() + "' in " + what);
        }
    }
}

std::string csv_escape(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string dump_json(const Json& value) {
    std::ostringstream out;
    write_json(out, value, 0);
    out << '\n';
    return out.str();
}

double json_number(const Json& value) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        const auto text = value.get<std::string>();
        if (text == "inf") return kInf;
        if (text == "-inf") return -kInf;
        if (text == "nan") return std::nan("");
    }
    throw SchemaViolation("expected a number, got " + value.dump());
}

Json to_json(const Profile& profile) {
    return Json{{"grid", number_array(profile.grid())},
                {"values", number_array(profile.values())},
                {"slope_minus_inf", profile.slope_minus_inf()},
                {"slope_plus_inf", profile.slope_plus_inf()},
                {"slope_cap", profile.slope_cap()}};
}

Profile profile_from_json(const Json& value) {
    return Profile(number_list(field(value, "grid"), "grid"), number_list(field(value, "values"), "values"),
                   json_number(field(value, "slope_minus_inf")), json_number(field(value, "slope_plus_inf")),
                   json_number(field(value, "slope_cap")));
}

Json to_json(const RelativeProfile& phi) {
    return Json{{"base", to_json(phi.base())},
                {"offset", number_array(phi.offset())},
                {"offset_slope_minus_inf", phi.offset_slope_minus_inf()},
                {"offset_slope_plus_inf", phi.offset_slope_plus_inf()},
                {"sup_value", phi.sup_value()}};
}

RelativeProfile relative_profile_from_json(const Json& value) {
    return RelativeProfile(profile_from_json(field(value, "base")), number_list(field(value, "offset"), "offset"),
                           json_number(field(value, "offset_slope_minus_inf")),
                           json_number(field(value, "offset_slope_plus_inf")));
}

Json model_descriptor(const KahlerModel& model) {
    Json out{{"kind", to_string(model.kind())}, {"normalization", to_string(model.normalization())}};
    if (model.kind() == ModelKind::ToricP1P1) out["resolution"] = model.resolution();
    if (model.kind() == ModelKind::RadialP2) {
        out["t_scale"] = model.t_scale();
        out["t_shift"] = model.t_shift();
    }
    return out;
}

KahlerModel model_from_name(const std::string& name, int resolution) {
    ModelKind kind;
    try {
        kind = model_kind_from_string(name);
    } catch (const Error&) {
        throw SchemaViolation("unknown model '" + name + "' (radial-p2, product-p1p1, toric-p1p1)");
    }
    switch (kind) {
        case ModelKind::RadialP2: return radial_p2();
        case ModelKind::ProductP1P1: return product_p1p1();
        case ModelKind::ToricP1P1: return toric_p1p1(resolution);
    }
    return radial_p2();
}

KahlerModel model_from_json(const Json& value) {
    if (value.is_string()) return model_from_name(value.get<std::string>());
    reject_unknown(value, {"kind", "normalization", "resolution", "t_scale", "t_shift"}, "model");
    const auto name = text_field(field(value, "kind"), "kind");
    int resolution = 64;
    if (value.contains("resolution")) {
        if (!value["resolution"].is_number_integer()) throw SchemaViolation("'resolution' must be an integer");
        resolution = value["resolution"].get<int>();
    }
    KahlerModel model = model_from_name(name, resolution);
    if (model.kind() == ModelKind::RadialP2 && (value.contains("t_scale") || value.contains("t_shift"))) {
        const double t_scale = value.contains("t_scale") ? json_number(value["t_scale"]) : 1.0;
        const double t_shift = value.contains("t_shift") ? json_number(value["t_shift"]) : 0.0;
        model = radial_p2(t_scale, t_shift);
    }
    if (value.contains("normalization")) {
        const auto text = text_field(value["normalization"], "normalization");
        Normalization normalization;
        try {
            normalization = normalization_from_string(text);
        } catch (const Error&) {
            throw SchemaViolation("normalization must be \"raw\" or \"unit-volume\"");
        }
        model = model.with_normalization(normalization);
    }
    return model;
}

Json to_json(const MaMeasure& measure) {
    Json atoms = Json::array();
    for (const auto& atom : measure.atoms) atoms.push_back(Json{{"loc", atom.location}, {"mass", atom.mass}});
    Json out{{"kind", measure.kind == MeasureKind::OneD ? "1d" : "2d"},
             {"grid", number_array(measure.grid)},
             {"density", number_array(measure.density)},
             {"atoms", atoms},
             {"total_mass", measure.total_mass},
             {"volume", measure.volume}};
    if (measure.kind == MeasureKind::TwoD) out["grid2"] = number_array(measure.grid2);
    return out;
}

MaMeasure measure_from_json(const Json& value) {
    MaMeasure measure;
    const auto kind = text_field(field(value, "kind"), "kind");
    if (kind == "1d") {
        measure.kind = MeasureKind::OneD;
    } else if (kind == "2d") {
        measure.kind = MeasureKind::TwoD;
        measure.grid2 = number_list(field(value, "grid2"), "grid2");
    } else {
        throw SchemaViolation("measure kind must be \"1d\" or \"2d\"");
    }
    measure.grid = number_list(field(value, "grid"), "grid");
    measure.density = number_list(field(value, "density"), "density");
    const auto& atoms = field(value, "atoms");
    if (!atoms.is_array()) throw SchemaViolation("'atoms' must be an array");
    for (const auto& atom : atoms) {
        measure.atoms.push_back({text_field(field(atom, "loc"), "loc"), json_number(field(atom, "mass"))});
    }
    measure.total_mass = json_number(field(value, "total_mass"));
    if (value.contains("volume")) measure.volume = json_number(value["volume"]);
    const std::size_t expected =
        measure.kind == MeasureKind::OneD ? measure.grid.size() : measure.grid.size() * measure.grid2.size();
    if (measure.density.size() != expected) throw SchemaViolation("density length does not match the grid");
    measure.check();
    return measure;
}

Json to_json(const Verdict& verdict) {
    return Json{{"finiteness", to_string(verdict.finiteness)},
                {"levels", number_array(verdict.levels)},
                {"values", number_array(verdict.values)},
                {"increment_ratio", verdict.increment_ratio},
                {"relative_increment", verdict.relative_increment}};
}

Json to_json(const SolveResult& result) {
    Json out{{"scheme", to_string(result.scheme)},
             {"verdict", to_string(result.verdict)},
             {"message", result.message},
             {"residual", result.residual},
             {"schedule", number_array(result.schedule)},
             {"energy_trace", number_array(result.energy_trace)},
             {"target_energy_trace", number_array(result.target_energy_trace)},
             {"consistency_trace", number_array(result.consistency_trace)},
             {"newton_steps", result.newton_steps},
             {"projection_distance", result.projection_distance}};
    if (result.profile.size() > 0) out["profile"] = to_json(result.profile);
    if (result.profile_y.size() > 0) out["profile_y"] = to_json(result.profile_y);
    if (result.grid.grid_size() > 0) {
        out["grid"] = Json{{"axis1", number_array(result.grid.axis1())},
                           {"axis2", number_array(result.grid.axis2())},
                           {"values", number_array(result.grid.values())},
                           {"offset", number_array(result.grid_offset)}};
    }
    return out;
}

Json to_json(const EnergyReport& report) {
    return Json{{"p", report.p},
                {"shift", report.shift},
                {"sup_value", report.sup_value},
                {"E_p_full", report.E_p_full},
                {"E_p_mixed", number_array({report.E_p_mixed[0], report.E_p_mixed[1], report.E_p_mixed[2]})},
                {"gradient_energy", report.gradient_energy},
                {"e_p", report.e_p},
                {"sobolev_norm", report.sobolev_norm},
                {"in_E", to_json(report.in_E)},
                {"in_E1", to_json(report.in_E1)},
                {"in_Ep", to_json(report.in_Ep)},
                {"naive_Lp", to_json(report.naive_Lp)}};
}

Json to_json(const CapacityCurve& curve) {
    Json out{{"p", curve.p},
             {"thresholds", number_array(curve.thresholds)},
             {"values", number_array(curve.values)},
             {"fitted_exponent", curve.fitted_exponent},
             {"C_phi", curve.C_phi},
             {"inverse_square_margin", number_array(curve.inverse_square_margin)},
             {"sublevel_mass_margin", number_array(curve.sublevel_mass_margin)},
             {"doubling_margin", number_array(curve.doubling_margin)},
             {"scaling_margin", number_array(curve.scaling_margin)}};
    if (curve.sandwich.applicable) {
        out["sandwich"] = Json{{"lower", curve.sandwich.lower},
                               {"middle", curve.sandwich.middle},
                               {"upper", curve.sandwich.upper}};
    }
    return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row() {
    rows_.emplace_back();
    return *this;
}

CsvTable& CsvTable::add(double value) {
    if (rows_.empty()) row();
    rows_.back().push_back(format_double(value));
    return *this;
}

CsvTable& CsvTable::add(long long value) {
    if (rows_.empty()) row();
    rows_.back().push_back(std::to_string(value));
    return *this;
}

CsvTable& CsvTable::add(const std::string& text) {
    if (rows_.empty()) row();
    rows_.back().push_back(csv_escape(text));
    return *this;
}

std::string CsvTable::str() const {
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
        out << '\n';
    };
    line(header_);
    for (const auto& cells : rows_) {
        if (cells.size() != header_.size()) throw Error("csv row width does not match the header");
        line(cells);
    }
    return out.str();
}

std::string cdf_csv(const MaMeasure& measure) {
    if (measure.kind != MeasureKind::OneD) throw InvalidInput("cdf export needs a one-dimensional measure");
    CsvTable table({"t", "cdf"});
    const auto cdf = measure.cdf();
    for (std::size_t i = 0; i < measure.grid.size(); ++i) table.row().add(measure.grid[i]).add(cdf[i]);
    return table.str();
}

std::string capacity_csv(const CapacityCurve& curve) {
    CsvTable table({"t", "capacity", "inverse_square_bound", "inverse_square_margin", "sublevel_mass_margin",
                    "doubling_margin", "scaling_margin"});
    for (std::size_t k = 0; k < curve.thresholds.size(); ++k) {
        const double t = curve.thresholds[k];
        table.row().add(t).add(curve.values[k]).add(curve.C_phi / (t * t)).add(curve.inverse_square_margin[k]);
        table.add(k < curve.sublevel_mass_margin.size() ? curve.sublevel_mass_margin[k] : std::nan(""));
        table.add(k < curve.doubling_margin.size() ? curve.doubling_margin[k] : std::nan(""));
        table.add(k < curve.scaling_margin.size() ? curve.scaling_margin[k] : std::nan(""));
    }
    return table.str();
}

std::string solve_trace_csv(const SolveResult& result) {
    CsvTable table({"level", "schedule", "energy", "target_energy", "consistency"});
    const std::size_t n = std::max({result.energy_trace.size(), result.target_energy_trace.size(),
                                    result.consistency_trace.size()});
    auto at = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : std::nan(""); };
    for (std::size_t k = 0; k < n; ++k) {
        table.row().add(k).add(at(result.schedule, k)).add(at(result.energy_trace, k));
        table.add(at(result.target_energy_trace, k)).add(at(result.consistency_trace, k));
    }
    return table.str();
}

std::string newton_trace_csv(const SolveResult& result) {
    CsvTable table({"step", "residual", "damping", "min_mass", "projection_distance"});
    for (std::size_t k = 0; k < result.newton_trace.size(); ++k) {
        const auto& step = result.newton_trace[k];
        table.row().add(k).add(step.residual).add(step.damping).add(step.min_mass).add(step.projection_distance);
    }
    return table.str();
}

std::string to_string(Command command) {
    switch (command) {
        case Command::Solve: return "solve";
        case Command::Energy: return "energy";
        case Command::Capacity: return "capacity";
        case Command::Verify: return "verify";
        case Command::Examples: return "examples";
    }
    return "verify";
}

Command command_from_string(const std::string& text) {
    for (auto c : {Command::Solve, Command::Energy, Command::Capacity, Command::Verify, Command::Examples}) {
        if (to_string(c) == text) return c;
    }
    throw SchemaViolation("unknown command '" + text + "' (solve, energy, capacity, verify, examples)");
}

RunConfig run_config_from_json(const Json& value) {
    if (!value.is_object()) throw SchemaViolation("configuration must be a JSON object");
    reject_unknown(value, {"command", "model", "seed", "size", "p", "tol", "out", "input", "id", "checks",
                           "approximation"},
                   "configuration");
    RunConfig config;
    config.command = command_from_string(text_field(field(value, "command"), "command"));
    if (value.contains("model")) {
        const auto& model = value["model"];
        if (model.is_string()) {
            config.model = model.get<std::string>();
        } else if (model.is_object()) {
            const auto built = model_from_json(model);
            config.model = to_string(built.kind());
            if (built.kind() == ModelKind::ToricP1P1) config.resolution = built.resolution();
            config.t_scale = built.t_scale();
            config.t_shift = built.t_shift();
            config.normalization = built.normalization();
        } else {
            throw SchemaViolation("'model' must be a name or a descriptor object");
        }
        model_from_name(config.model, config.resolution);
    }
    if (value.contains("seed")) {
        if (!value["seed"].is_number_integer() || value["seed"].get<long long>() < 0) {
            throw SchemaViolation("'seed' must be a non-negative integer");
        }
        config.seed = value["seed"].get<std::uint64_t>();
    }
    if (value.contains("size")) {
        if (!value["size"].is_number_integer() || value["size"].get<long long>() < 1) {
            throw SchemaViolation("'size' must be a positive integer");
        }
        config.size = value["size"].get<int>();
    }
    if (value.contains("p")) {
        const auto& p = value["p"];
        config.p_values = p.is_array() ? number_list(p, "p") : std::vector<double>{json_number(p)};
        if (config.p_values.empty()) throw SchemaViolation("'p' must not be empty");
        for (double x : config.p_values) {
            if (!(x >= 1.0) || !std::isfinite(x)) throw SchemaViolation("every p must be a finite number >= 1");
        }
    }
    if (value.contains("tol")) {
        config.tolerance = json_number(value["tol"]);
        if (!(config.tolerance > 0.0) || !std::isfinite(config.tolerance)) {
            throw SchemaViolation("'tol' must be a positive number");
        }
    }
    if (value.contains("out")) config.out = text_field(value["out"], "out");
    if (value.contains("input")) config.input = text_field(value["input"], "input");
    if (value.contains("id")) config.example_id = text_field(value["id"], "id");
    if (value.contains("checks")) {
        const auto& checks = value["checks"];
        if (!checks.is_array()) throw SchemaViolation("'checks' must be an array of check ids");
        std::vector<std::string> ids;
        for (const auto& id : checks) ids.push_back(text_field(id, "checks[]"));
        config.checks = ids;
    }
    if (value.contains("approximation")) {
        config.approximation = text_field(value["approximation"], "approximation");
        if (config.approximation != "none" && config.approximation != "mollify" &&
            config.approximation != "density-truncation") {
            throw SchemaViolation("'approximation' must be none, mollify or density-truncation");
        }
    }
    return config;
}

Json to_json(const RunConfig& config) {
    auto model = model_from_name(config.model, config.resolution);
    if (model.kind() == ModelKind::RadialP2) model = radial_p2(config.t_scale, config.t_shift);
    model = model.with_normalization(config.normalization);
    Json out{{"command", to_string(config.command)},
             {"model", model_descriptor(model)},
             {"seed", config.seed},
             {"size", config.size},
             {"tol", config.tolerance},
             {"out", config.out},
             {"approximation", config.approximation}};
    if (!config.p_values.empty()) out["p"] = number_array(config.p_values);
    if (config.input) out["input"] = *config.input;
    if (!config.example_id.empty()) out["id"] = config.example_id;
    if (config.checks) out["checks"] = *config.checks;
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& contents) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) {
        std::error_code error;
        std::filesystem::create_directories(target.parent_path(), error);
        if (error) throw Error("cannot create directory " + target.parent_path().string());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << contents;
    if (!out) throw Error("write failed for " + path);
}

Json read_json_file(const std::string& path) {
    const auto text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& error) {
        throw SchemaViolation("malformed JSON in " + path + ": " + error.what());
    }
}

}  // namespace malab
