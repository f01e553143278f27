#include "malab/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>

#include <CLI11.hpp>

#include "malab/capacity.hpp"
#include "malab/corpus.hpp"
#include "malab/energy.hpp"
#include "malab/solver.hpp"
#include "malab/verify.hpp"

namespace malab {

int verify_exit_code(const std::vector<CheckReport>& reports) {
    for (const auto& report : reports) {
        if (!report.passed()) return kExitVerifyFailures;
    }
    return kExitSuccess;
}

std::string resolve_output_dir(const RunConfig& config) {
    const char* env = std::getenv("MA_LAB_OUT");
    if (env != nullptr && *env != '\0') return env;
    return config.out;
}

KahlerModel model_for(const RunConfig& config) {
    auto model = model_from_name(config.model, config.resolution);
    if (model.kind() == ModelKind::RadialP2 && (config.t_scale != 1.0 || config.t_shift != 0.0)) {
        model = radial_p2(config.t_scale, config.t_shift);
    }
    return model.with_normalization(config.normalization);
}

namespace {

class Writer {
public:
    explicit Writer(std::string dir) : dir_(std::move(dir)) {}
    void put(const std::string& name, const std::string& contents, const std::string& citation) {
        write_file((std::filesystem::path(dir_) / name).string(), contents);
        artifacts_.push_back({name, citation});
    }
    const std::string& dir() const { return dir_; }
    std::vector<Artifact>& artifacts() { return artifacts_; }

private:
    std::string dir_;
    std::vector<Artifact> artifacts_;
};

std::vector<double> p_list(const RunConfig& config, std::vector<double> fallback) {
    return config.p_values.empty() ? fallback : config.p_values;
}

// Potential with a full Lelong number at the fixed point, sup = -1.
RelativeProfile lelong_profile(const KahlerModel& model) {
    const auto grid = model.deep_grid(true, false);
    const double scale = model.t_scale(), shift = model.t_shift();
    return model.offset_on(
        grid, [&](double t) { return -0.5 * softplus(-(t - shift) / scale) - 1.0; }, model.slope_cap(), 0.0);
}

// log|z0| - log||z|| - 1: singular along the line at infinity, sup = -1.
RelativeProfile line_profile(const KahlerModel& model) {
    const auto grid = model.deep_grid(false, true);
    return model.offset_on(
        grid, [&](double t) { return -model.reference_value(t) - 1.0; }, 0.0, -model.slope_cap());
}

const char* verdict_name(const Verdict& v) {
    switch (v.finiteness) {
        case Finiteness::Finite: return "finite";
        case Finiteness::Infinite: return "infinite";
        case Finiteness::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

// ----- solve -----

MaMeasure default_target(const KahlerModel& model, std::uint64_t seed) {
    switch (model.kind()) {
        case ModelKind::RadialP2: return random_radial_target(model, model.default_grid(), seed, false);
        case ModelKind::ToricP1P1: return random_smooth_toric_target(model, seed);
        case ModelKind::ProductP1P1: {
            const auto axis = make_grid(GridSpec{20.0, 201});
            const double shift = static_cast<double>(seed % 7) - 3.0;
            return separable_toric_target(smooth_factor_measure(axis, shift, 1.5),
                                          smooth_factor_measure(axis, -0.5 * shift, 2.5));
        }
    }
    throw InvalidInput("unknown model");
}

void run_solve(const RunConfig& config, const KahlerModel& model, Writer& writer) {
    const auto target = config.input ? measure_from_json(read_json_file(*config.input)) : default_target(model, config.seed);
    SolveRequest request;
    request.p = p_list(config, {1.0}).front();
    switch (model.kind()) {
        case ModelKind::RadialP2: request.scheme = SolveScheme::ClosedFormRadial; break;
        case ModelKind::ProductP1P1: request.scheme = SolveScheme::SeparableProduct; break;
        case ModelKind::ToricP1P1: request.scheme = SolveScheme::NewtonToric; break;
    }
    if (config.approximation == "mollify") {
        request.approximation = ApproximationMode::Mollify;
        request.schedule = default_mollification_widths();
    } else if (config.approximation == "density-truncation") {
        request.approximation = ApproximationMode::DensityTruncation;
        for (int j = 1; j <= 10; ++j) request.schedule.push_back(std::ldexp(1.0, 2 * j));
    }
    const auto result = solve(model, target, request);
    Json document = to_json(result);
    document["model"] = model_descriptor(model);
    writer.put("target.json", dump_json(to_json(target)), "target measure of the equation");
    writer.put("solve_result.json", dump_json(document),
               "solution of omega_psi^2 = mu normalized by sup psi = -1");
    writer.put("solve_trace.csv", solve_trace_csv(result),
               "energies and consistency integrals along the approximation schedule");
    if (!result.newton_trace.empty()) {
        writer.put("newton_trace.csv", newton_trace_csv(result), "residual of each damped Newton step");
    }
    if (target.kind == MeasureKind::OneD && result.profile.size() > 0) {
        writer.put("solution_cdf.csv", cdf_csv(ma_measure(model, result.profile)),
                   "cumulative distribution of the solution's Monge-Ampere measure");
    }
}

// ----- energy -----

void energy_rows(CsvTable& table, Json& details, const KahlerModel& model, const std::string& name,
                 const std::string& tag, double parameter, const RelativeProfile& phi,
                 const std::vector<double>& ps) {
    for (double p : ps) {
        const auto report = energy_report(model, phi, p);
        table.row().add(name).add(tag).add(parameter).add(p).add(report.E_p_full);
        table.add(report.E_p_mixed[0]).add(report.E_p_mixed[1]).add(report.E_p_mixed[2]);
        table.add(report.gradient_energy).add(report.e_p).add(report.sobolev_norm);
        table.add(verdict_name(report.in_E)).add(verdict_name(report.in_E1)).add(verdict_name(report.in_Ep));
        Json entry = to_json(report);
        entry["name"] = name;
        details.push_back(entry);
    }
}

void run_energy(const RunConfig& config, const KahlerModel& model, Writer& writer) {
    const auto ps = p_list(config, {1.0});
    CsvTable table({"name", "tag", "parameter", "p", "E_p_full", "E_p_omega2", "E_p_mixed", "E_p_full_check",
                    "gradient_energy", "e_p", "sobolev_norm", "in_E", "in_E1", "in_Ep"});
    Json details = Json::array();
    if (config.input) {
        const auto phi = relative_profile_from_json(read_json_file(*config.input));
        energy_rows(table, details, model, "input", "input", 0.0, phi, ps);
    } else {
        const auto corpus = generate_corpus(model, config.seed, config.size);
        for (const auto& member : corpus.members) {
            energy_rows(table, details, model, member.name, to_string(member.tag), member.parameter,
                        member.profile, ps);
        }
    }
    writer.put("energy.csv", table.str(), "weighted energies and class membership verdicts per (profile, p)");
    writer.put("energy_reports.json", dump_json(details), "energy reports with truncation scans");
}

// ----- capacity -----

void run_capacity(const RunConfig& config, const KahlerModel& model, Writer& writer) {
    if (model.kind() != ModelKind::RadialP2) throw InvalidInput("capacity curves run on the radial model");
    const double p = p_list(config, {1.0}).front();
    const auto phi = config.input ? relative_profile_from_json(read_json_file(*config.input)) : lelong_profile(model);
    const bool sandwich = std::abs(phi.sup_value() + 1.0) < 1e-12 && std::isfinite(phi.limit_minus_inf()) &&
                          std::isfinite(phi.limit_plus_inf());
    const auto curve = capacity_curve(model, phi, log_thresholds(1.0, 256.0, 25), p, sandwich);
    writer.put("capacity.csv", capacity_csv(curve), "capacity of sublevel sets with their bound families");
    writer.put("capacity.json", dump_json(to_json(curve)), "capacity curve with decay fit diagnostics");
}

// ----- verify -----

int run_verify(const RunConfig& config, const KahlerModel& model, Writer& writer) {
    const auto ids = config.checks ? *config.checks : all_check_ids();
    for (const auto& id : ids) {
        try {
            check_info(id);
        } catch (const InvalidInput& error) {
            throw SchemaViolation(error.what());
        }
    }
    VerifyOptions options;
    options.p_values = p_list(config, {1.0, 2.0});
    options.slack = config.tolerance;
    std::vector<CheckReport> reports;
    Json corpus_info{{"seed", config.seed}, {"size", config.size}};
    if (!ids.empty()) {
        const auto corpus = generate_corpus(model, config.seed, config.size);
        corpus_info["digest"] = corpus.digest();
        reports = run_checks(corpus, model, ids, options);
    }
    writer.put("verify.xml", junit_xml(reports, "malab.verify"), "inequality harness report");
    writer.put("verify.csv", reports_csv(reports), "inequality harness report");
    writer.put("corpus.json", dump_json(corpus_info), "corpus identity");
    return verify_exit_code(reports);
}

// ----- examples -----

void example_bounded(Writer& w) {
    const auto model = radial_p2();
    const auto corpus = generate_corpus(model, 0, 50);
    CsvTable table({"name", "range", "gradient_energy", "bound"});
    for (std::size_t i : corpus.indices(CorpusTag::Bounded)) {
        auto phi = corpus.members[i].profile;
        double lowest = 0.0;
        for (double v : phi.offset()) lowest = std::min(lowest, v);
        const double range = phi.sup_value() - lowest;
        if (range > 0.5) phi = scale(phi, 0.5 / range);
        double low = 0.0;
        for (double v : phi.offset()) low = std::min(low, v);
        table.row().add(corpus.members[i].name).add(phi.sup_value() - low).add(gradient_energy(model, phi)).add(0.5);
    }
    w.put("bounded_gradient.csv", table.str(),
          "bounded potentials with oscillation at most 1/2 have gradient energy at most 1/2");
}

void example_divisor_bounded(Writer& w) {
    const auto model = radial_p2();
    const auto corpus = generate_corpus(model, 0, 50);
    CsvTable table({"name", "alpha", "sup_near_divisor", "gradient_verdict", "mixed_energy"});
    for (std::size_t i : corpus.indices(CorpusTag::DivisorBounded)) {
        const auto& phi = corpus.members[i].profile;
        double near = 0.0;  // sup of |phi| over t >= 0
        for (std::size_t k = 0; k < phi.size(); ++k) {
            if (phi.grid()[k] >= 0.0) near = std::max(near, -phi.offset()[k]);
        }
        table.row().add(corpus.members[i].name).add(corpus.members[i].parameter).add(near);
        table.add(verdict_name(gradient_membership(model, phi)));
        table.add(integrate_power(phi, omega_wedge(model, phi), 1.0));
    }
    w.put("divisor_bounded.csv", table.str(),
          "potentials bounded near an ample divisor have finite mixed energy");
}

void example_line_power(Writer& w) {
    const auto model = radial_p2();
    const auto line = line_profile(model);
    CsvTable table({"alpha", "gradient_energy", "verdict", "increment_ratio", "bound_alpha"});
    for (int k = 1; k <= 18; ++k) {
        const double alpha = 0.05 * k;
        const auto power = compose_weight(line, PowerWeight{alpha});
        const auto verdict = gradient_membership(model, power);
        table.row().add(alpha).add(gradient_energy(model, power)).add(verdict_name(verdict));
        table.add(verdict.increment_ratio).add(alpha < 0.5 ? alpha * alpha / (1.0 - 2.0 * alpha) : kInf);
    }
    w.put("line_power_gradient.csv", table.str(),
          "-(-phi)^alpha with phi singular along a line has finite gradient energy iff alpha < 1/2");
}

void example_point_mass(Writer& w) {
    const auto model = radial_p2();
    const auto grid = model.default_grid();
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = model.slope_cap() * grid[i];
    const Profile cone(grid, values, model.slope_cap(), model.slope_cap(), model.slope_cap());
    const auto dirac = ma_measure(model, RelativeProfile::from_potential(model.reference_on(grid), cone));
    CsvTable anchor({"atom_at_fixed_point", "density_mass"});
    anchor.row().add(dirac.atom(location::kFixedPoint)).add(dirac.density_mass());
    w.put("point_mass_anchor.csv", anchor.str(), "the potential t/2 has Monge-Ampere measure the unit point mass");
    CsvTable table({"half_width", "mass_first", "mass_second", "deviation"});
    for (double half_width : {8.0, 16.0, 24.0}) {
        const auto witness = point_mass_witness(half_width, 41);
        table.row().add(half_width).add(witness.point_mass[0]).add(witness.point_mass[1]).add(witness.deviation);
    }
    w.put("point_mass_nonuniqueness.csv", table.str(),
          "two potentials in the finite-energy class share the point-mass measure without differing by a constant");
}

void example_lelong_capacity(Writer& w) {
    const auto model = radial_p2();
    const auto phi = lelong_profile(model);
    const auto thresholds = log_thresholds(4.0, 64.0, 17);
    const auto curve = capacity_curve(model, phi, thresholds, 1.0, false);
    w.put("lelong_capacity.csv", capacity_csv(curve),
          "capacity of sublevel sets of a potential with unit Lelong number decays like C / t^2");
    Json fit{{"fitted_exponent", fit_decay_exponent(thresholds, curve.values, 4.0, 64.0)},
             {"window", Json::array({4.0, 64.0})},
             {"expected", -2.0}};
    w.put("lelong_capacity_fit.json", dump_json(fit), "log-log decay fit of the sublevel capacity over [4, 64]");

    CsvTable sweep({"p", "alpha", "threshold", "verdict", "increment_ratio"});
    for (double p : {1.0, 2.0, 3.0}) {
        const double threshold = 2.0 / (p + 2.0);
        for (int k = -4; k <= 4; ++k) {
            const double alpha = threshold + 0.025 * k;
            const auto verdict = ep_membership(model, compose_weight(phi, PowerWeight{alpha}), p);
            sweep.row().add(p).add(alpha).add(threshold).add(verdict_name(verdict)).add(verdict.increment_ratio);
        }
    }
    w.put("lelong_power_membership.csv", sweep.str(),
          "-(-phi)^alpha lies in the weighted class of exponent p for alpha < 2/(p+2)");
}

void example_neg_log(Writer& w) {
    const auto model = radial_p2();
    const auto phi = lelong_profile(model).shifted(-1.0);
    const auto log_weight = compose_weight(phi, NegLogWeight{});
    CsvTable table({"p", "verdict", "increment_ratio", "last_energy"});
    for (double p : {1.0, 2.0, 3.0, 4.0}) {
        const auto verdict = ep_membership(model, log_weight.normalized(-1.0), p);
        table.row().add(p).add(verdict_name(verdict)).add(verdict.increment_ratio).add(verdict.values.back());
    }
    w.put("neg_log_membership.csv", table.str(),
          "-log(-phi) for phi <= -2 lies in every weighted class although it is unbounded");
}

void example_product(Writer& w) {
    const auto model = product_p1p1();
    const auto u = model.zero_on(make_grid(GridSpec{20.0, 401})).shifted(-0.5);
    // factor potential t with a unit atom at t = -inf, sup = -1
    const auto pole = model.offset_on(
        model.deep_grid(true, false), [](double t) { return -0.5 * softplus(-2.0 * t) - 1.0; }, 1.0, 0.0);
    CsvTable table({"p", "alpha", "threshold", "full_verdict", "mixed_verdict", "factor_verdict"});
    for (double p : {1.0, 2.0}) {
        const double threshold = 1.0 / (p + 1.0);
        for (double delta : {-0.1, -0.05, 0.05, 0.1}) {
            const double alpha = threshold + delta;
            const auto v = compose_weight(pole, PowerWeight{alpha}).normalized(-0.5);
            std::vector<double> full, mixed, factor;
            const auto levels = default_levels();
            for (double k : levels) {
                const auto energies = product_energies(model, u, truncate(v, k), p);
                full.push_back(energies.against_full);
                mixed.push_back(energies.against_mixed);
                factor.push_back(energies.factor_v);
            }
            table.row().add(p).add(alpha).add(threshold);
            table.add(verdict_name(classify_sequence(levels, full)));
            table.add(verdict_name(classify_sequence(levels, mixed)));
            table.add(verdict_name(classify_sequence(levels, factor)));
        }
    }
    w.put("product_integrability.csv", table.str(),
          "on a product of lines, u(x) + v(y) is p-integrable for its measure iff v is for its factor measure");
}

struct ExampleEntry {
    ExampleInfo info;
    std::function<void(Writer&)> body;
};

const std::vector<ExampleEntry>& examples() {
    static const std::vector<ExampleEntry> list = {
        {{"bounded-gradient", "bounded potentials have finite gradient energy"}, example_bounded},
        {{"divisor-bounded", "potentials bounded near an ample divisor have finite gradient energy"},
         example_divisor_bounded},
        {{"line-power-threshold", "powers of a potential singular along a line and the 1/2 threshold"},
         example_line_power},
        {{"point-mass-nonuniqueness", "the point mass has many solutions in the finite-energy class"},
         example_point_mass},
        {{"lelong-capacity-law", "capacity decay and weighted classes for a unit Lelong number"},
         example_lelong_capacity},
        {{"neg-log-weight", "the negative-log weight stays in every weighted class"}, example_neg_log},
        {{"product-integrability", "integrability of split potentials on a product of lines"}, example_product},
    };
    return list;
}

void run_examples(const RunConfig& config, Writer& writer) {
    bool matched = false;
    Json ran = Json::array();
    for (const auto& entry : examples()) {
        if (!config.example_id.empty() && entry.info.id != config.example_id) continue;
        matched = true;
        entry.body(writer);
        ran.push_back(entry.info.id);
    }
    if (!matched) throw SchemaViolation("unknown example id '" + config.example_id + "'");
    Json files = Json::object();
    for (const auto& artifact : writer.artifacts()) files[artifact.file] = artifact.citation;
    writer.put("manifest.json", dump_json(Json{{"examples", ran}, {"files", files}}),
               "map from output file to the statement it reproduces");
}

}  // namespace

const std::vector<ExampleInfo>& example_registry() {
    static const std::vector<ExampleInfo> infos = [] {
        std::vector<ExampleInfo> out;
        for (const auto& entry : examples()) out.push_back(entry.info);
        return out;
    }();
    return infos;
}

RunOutcome run(const RunConfig& config) {
    RunOutcome outcome;
    outcome.out_dir = resolve_output_dir(config);
    Writer writer(outcome.out_dir);
    const auto model = model_for(config);
    switch (config.command) {
        case Command::Solve: run_solve(config, model, writer); break;
        case Command::Energy: run_energy(config, model, writer); break;
        case Command::Capacity: run_capacity(config, model, writer); break;
        case Command::Verify: outcome.exit_code = run_verify(config, model, writer); break;
        case Command::Examples: run_examples(config, writer); break;
    }
    writer.put("config.json", dump_json(to_json(config)), "configuration of this run");
    outcome.artifacts = writer.artifacts();
    return outcome;
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void print_error(std::ostream& out, const std::string& kind, const std::string& message) {
    out << Json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monge-Ampere lab: solve, energy, capacity, verify, examples"};
    std::string command, config_path, model, out_dir, input, id, checks, approximation;
    std::uint64_t seed = 0;
    int size = 0, resolution = 0;
    std::vector<double> ps;
    double tol = 0.0;
    app.add_option("command", command, "solve | energy | capacity | verify | examples")->required();
    app.add_option("--config", config_path, "JSON configuration file (flags override it)");
    app.add_option("--model", model, "radial-p2 | product-p1p1 | toric-p1p1");
    app.add_option("--resolution", resolution, "toric grid resolution");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--size", size, "corpus size");
    app.add_option("--p", ps, "weight exponents")->delimiter(',');
    app.add_option("--tol", tol, "relative slack of the inequality checks");
    app.add_option("--out", out_dir, "output directory (MA_LAB_OUT overrides)");
    app.add_option("--input", input, "input JSON (target measure or profile)");
    app.add_option("--id", id, "example id");
    app.add_option("--checks", checks, "comma-separated check ids (empty for none)");
    app.add_option("--approximation", approximation, "none | mollify | density-truncation");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitSuccess;
    } catch (const CLI::ParseError& error) {
        print_error(out, "SchemaViolation", error.what());
        return kExitSchemaViolation;
    }

    try {
        Json document = config_path.empty() ? Json::object() : read_json_file(config_path);
        if (!document.is_object()) throw SchemaViolation("configuration must be a JSON object");
        document["command"] = command;
        if (app.count("--model")) document["model"] = model;
        if (app.count("--seed")) document["seed"] = seed;
        if (app.count("--size")) document["size"] = size;
        if (app.count("--p")) document["p"] = ps;
        if (app.count("--tol")) document["tol"] = tol;
        if (app.count("--out")) document["out"] = out_dir;
        if (app.count("--input")) document["input"] = input;
        if (app.count("--id")) document["id"] = id;
        if (app.count("--checks")) document["checks"] = split_list(checks);
        if (app.count("--approximation")) document["approximation"] = approximation;
        auto config = run_config_from_json(document);
        if (app.count("--resolution")) {
            if (resolution < 16) throw SchemaViolation("'resolution' must be at least 16");
            config.resolution = resolution;
        }
        const auto outcome = run(config);
        Json files = Json::array();
        for (const auto& artifact : outcome.artifacts) files.push_back(artifact.file);
        out << Json{{"status", outcome.exit_code == kExitSuccess ? "ok" : "verify_failures"},
                    {"out", outcome.out_dir},
                    {"files", files}}
                   .dump()
            << '\n';
        return outcome.exit_code;
    } catch (const Error& error) {
        print_error(out, error.kind(), error.what());
        err << "malab: " << error.what() << '\n';
        return kExitSchemaViolation;
    } catch (const std::exception& error) {
        print_error(out, "Error", error.what());
        err << "malab: " << error.what() << '\n';
        return kExitSchemaViolation;
    }
}

}  // namespace malab
