// Acceptance gate: one PASS/FAIL line per criterion.
//   malab_acceptance                 all criteria
//   malab_acceptance --criterion N   a single criterion
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "malab/capacity.hpp"
#include "malab/corpus.hpp"
#include "malab/energy.hpp"
#include "malab/ma.hpp"
#include "malab/models.hpp"
#include "malab/solver.hpp"
#include "malab/verify.hpp"

using namespace malab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double value) {
    char text[64];
    std::snprintf(text, sizeof text, pattern, value);
    return text;
}

double half_softplus(double t) { return 0.5 * (t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t))); }

// Unit Lelong number at the fixed point: t/2 - psi_FS - 1.
RelativeProfile point_singular(const KahlerModel& model) {
    return model.offset_on(
        model.deep_grid(true, false), [](double t) { return -0.5 * softplus(-t) - 1.0; }, 0.5, 0.0);
}

// -psi_FS - 1: singular along the line at infinity.
RelativeProfile line_singular(const KahlerModel& model) {
    return model.offset_on(
        model.deep_grid(false, true), [&](double t) { return -model.reference_value(t) - 1.0; }, 0.0, -0.5);
}

std::string summarize(const std::vector<CheckReport>& reports, int& failures) {
    std::ostringstream out;
    for (const auto& report : reports) {
        failures += report.failures;
        out << report.id << "=" << report.failures << "/" << report.instances << " ";
    }
    return out.str();
}

// ----------------------------------------------------------------------------

Outcome mass_normalization() {
    Outcome outcome{true, ""};
    const auto radial = radial_p2().with_normalization(Normalization::UnitVolume);
    const double radial_error =
        std::abs(ma_measure(radial, radial.zero_on(radial.default_grid())).normalized().total_mass - 1.0);

    const auto product = product_p1p1().with_normalization(Normalization::UnitVolume);
    const auto axis = make_grid(GridSpec{20.0, 401});
    const double product_error =
        std::abs(ma_measure(product, product.zero_on(axis), product.zero_on(axis)).normalized().total_mass - 1.0);

    const auto toric = toric_p1p1(64).with_normalization(Normalization::UnitVolume);
    const auto nodes = toric.toric_axis();
    std::vector<double> values;
    for (double t1 : nodes) {
        for (double t2 : nodes) values.push_back(toric.reference_value(t1) + toric.reference_value(t2));
    }
    const double toric_error = std::abs(ma_measure(toric, ToricGrid(nodes, nodes, values)).normalized().total_mass - 1.0);

    outcome.pass = radial_error <= 1e-10 && product_error <= 1e-6 && toric_error <= 1e-6;
    outcome.detail = "radial |m-1|=" + fmt("%.3g", radial_error) + " (<=1e-10), product " + fmt("%.3g", product_error) +
                     " (<=1e-6), toric 64^2 " + fmt("%.3g", toric_error) + " (<=1e-6)";
    return outcome;
}

Outcome dirac_anchor() {
    const auto model = radial_p2();
    const auto grid = model.default_grid();
    std::vector<double> values;
    for (double t : grid) values.push_back(0.5 * t);
    const Profile cone(grid, values, 0.5, 0.5, 0.5);
    const auto measure = ma_measure(model, RelativeProfile::from_potential(model.reference_on(grid), cone));
    int nonzero_atoms = 0;
    for (const auto& atom : measure.atoms) nonzero_atoms += atom.mass != 0.0 ? 1 : 0;
    const double atom = measure.atom(location::kFixedPoint);
    Outcome outcome;
    outcome.pass = nonzero_atoms == 1 && std::abs(atom - 1.0) <= 1e-12 && measure.density_mass() == 0.0;
    outcome.detail = "atoms=" + std::to_string(nonzero_atoms) + " mass at fixed point=" + fmt("%.17g", atom) +
                     " density mass=" + fmt("%.3g", measure.density_mass());
    return outcome;
}

Outcome gradient_threshold() {
    const auto model = radial_p2();
    const auto line = line_singular(model);
    Outcome outcome{true, ""};
    std::ostringstream detail;
    for (double alpha : {0.30, 0.40, 0.49}) {
        const auto verdict = gradient_membership(model, compose_weight(line, PowerWeight{alpha}));
        const double beta = alpha / 2.0;
        const double energy = gradient_energy(model, compose_weight(line, PowerWeight{beta}));
        const double bound = beta * beta / (1.0 - 2.0 * beta) + 1e-6;
        const bool ok = verdict.finite() && energy <= bound;
        outcome.pass = outcome.pass && ok;
        detail << "a=" << alpha << ":" << to_string(verdict.finiteness) << ",grad(b)=" << fmt("%.4g", energy)
               << "<=" << fmt("%.4g", bound) << " ";
    }
    for (double alpha : {0.51, 0.60}) {
        const auto verdict = gradient_membership(model, compose_weight(line, PowerWeight{alpha}));
        outcome.pass = outcome.pass && verdict.finiteness == Finiteness::Infinite;
        detail << "a=" << alpha << ":" << to_string(verdict.finiteness) << " ";
    }
    outcome.detail = detail.str();
    return outcome;
}

// Capacity of {t <= upper} from the steepest line leaving (upper, psi_FS(upper) - 1)
// below psi_FS; independent of the library's envelope code.
double interval_capacity_oracle(double upper) {
    double best = 0.5;
    for (double step = 1e-4, t = upper + step; t < upper + 2000.0; t += step, step *= 1.0005) {
        best = std::min(best, (half_softplus(t) - half_softplus(upper) + 1.0) / (t - upper));
    }
    return 4.0 * best * best;
}

Outcome capacity_law() {
    const auto model = radial_p2();
    const auto phi = point_singular(model);
    const auto thresholds = log_thresholds(4.0, 64.0, 17);
    const auto curve = capacity_curve(model, phi, thresholds, 1.0, false);
    const double fitted = fit_decay_exponent(thresholds, curve.values, 4.0, 64.0);

    // oracle: the sublevel set is {t < T(s)} with softplus(-T) = 2(s - 1)
    std::vector<double> continuum;
    double worst_node_error = 0.0;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        const double s = thresholds[k];
        continuum.push_back(interval_capacity_oracle(-std::log(std::expm1(2.0 * (s - 1.0)))));
        double last_node = -kInf;
        const auto mask = sublevel_mask(phi, s);
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) last_node = phi.grid()[i];
        }
        const double at_node = interval_capacity_oracle(last_node);
        worst_node_error = std::max(worst_node_error, std::abs(curve.values[k] / at_node - 1.0));
    }
    const double oracle_fit = fit_decay_exponent(thresholds, continuum, 4.0, 64.0);

    const auto corpus = generate_corpus(model, 0, 200);
    int failures = 0;
    const auto reports = run_checks(corpus, model, {"capacity_inverse_square"});
    const auto summary = summarize(reports, failures);

    Outcome outcome;
    outcome.pass = std::abs(fitted + 2.0) <= 0.1 && failures == 0;
    outcome.detail = "fitted exponent " + fmt("%.4f", fitted) + " (target -2 +- 0.1); closed-form capacity exponent " +
                     fmt("%.4f", oracle_fit) + "; curve vs oracle rel err " + fmt("%.2g", worst_node_error) +
                     "; C_phi/t^2 bound on 200 profiles: " + summary;
    return outcome;
}

Outcome weighted_threshold_sweep() {
    const auto model = radial_p2();
    const auto phi = point_singular(model);
    Outcome outcome{true, ""};
    std::ostringstream detail;
    for (double p : {1.0, 2.0, 3.0}) {
        const double threshold = 2.0 / (p + 2.0);
        double last_finite = -kInf, first_infinite = kInf;
        bool ordered = true;
        bool seen_infinite = false;
        for (int k = -4; k <= 4; ++k) {
            const double alpha = threshold + 0.025 * k;
            const auto verdict = ep_membership(model, compose_weight(phi, PowerWeight{alpha}), p);
            if (verdict.finite()) {
                last_finite = std::max(last_finite, alpha);
                if (seen_infinite) ordered = false;
            } else if (verdict.finiteness == Finiteness::Infinite) {
                first_infinite = std::min(first_infinite, alpha);
                seen_infinite = true;
            }
        }
        const bool ok = ordered && last_finite >= threshold - 0.05 - 1e-12 && first_infinite <= threshold + 0.05 + 1e-12 &&
                        last_finite < first_infinite;
        outcome.pass = outcome.pass && ok;
        detail << "p=" << p << ": finite up to " << fmt("%.4f", last_finite) << ", infinite from "
               << fmt("%.4f", first_infinite) << " (2/(p+2)=" << fmt("%.4f", threshold) << ") ";
    }
    outcome.detail = detail.str();
    return outcome;
}

Outcome inequality_suite() {
    const auto model = radial_p2();
    const auto corpus = generate_corpus(model, 0, 500);
    VerifyOptions options;
    options.pair_count = 500;
    options.slack = 1e-7;
    const std::vector<std::string> ids{"mixed_energy_order_p1",     "gradient_below_energy",   "energy_order_p",
                                       "ordered_pair_mixed_energy", "ordered_pair_full_energy", "comparison_principle",
                                       "sublevel_mass_vs_capacity", "capacity_doubling",        "capacity_sandwich"};
    int failures = 0;
    const auto reports = run_checks(corpus, model, ids, options);
    Outcome outcome;
    outcome.detail = summarize(reports, failures);
    outcome.pass = failures == 0 && reports.size() == ids.size();
    for (const auto& report : reports) outcome.pass = outcome.pass && report.instances > 0;
    return outcome;
}

struct RefinementLevel {
    double cdf_residual = 0.0;
    double interior_density_error = 0.0;
};

RefinementLevel refinement_level(int resolution) {
    const auto model = toric_p1p1(resolution);
    const auto problem = manufactured_toric_problem(model, {1.0, 1.3, 0.8, 2.0});
    const auto sampled =
        ma_measure(model, ToricGrid(problem.target.grid, problem.target.grid2, problem.exact_values));
    const auto sampled_cdf = sampled.cdf(), target_cdf = problem.target.cdf();
    RefinementLevel level;
    const auto n = static_cast<std::size_t>(resolution);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t k = i * n + j;
            level.cdf_residual = std::max(level.cdf_residual, std::abs(sampled_cdf[k] - target_cdf[k]));
            const double u = (i + 0.5) / resolution, v = (j + 0.5) / resolution;
            if (u > 0.25 && u < 0.75 && v > 0.25 && v < 0.75) {
                const double relative = std::abs(sampled.density[k] - problem.target.density[k]) * resolution * resolution;
                level.interior_density_error = std::max(level.interior_density_error, relative);
            }
        }
    }
    return level;
}

Outcome solver_round_trip() {
    const auto radial = radial_p2();
    const auto grid = radial.default_grid();
    double worst_radial = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        worst_radial = std::max(worst_radial, solve_radial(radial, random_radial_target(radial, grid, seed, false)).residual);
    }

    const auto toric = toric_p1p1(64);
    SolveRequest request;
    request.scheme = SolveScheme::NewtonToric;
    double worst_toric = 0.0;
    bool all_solved = true;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto result = solve_newton_toric(toric, random_smooth_toric_target(toric, seed), request);
        worst_toric = std::max(worst_toric, result.residual);
        all_solved = all_solved && result.verdict == SolveVerdict::Solved;
    }

    const auto coarse = refinement_level(32), middle = refinement_level(64), fine = refinement_level(128);
    const double global_order = std::min(std::log2(coarse.cdf_residual / middle.cdf_residual),
                                         std::log2(middle.cdf_residual / fine.cdf_residual));
    const double interior_order = std::min(std::log2(coarse.interior_density_error / middle.interior_density_error),
                                           std::log2(middle.interior_density_error / fine.interior_density_error));

    Outcome outcome;
    outcome.pass = worst_radial <= 1e-8 && all_solved && worst_toric <= 1e-5 && global_order >= 1.5 &&
                   interior_order >= 1.8;
    outcome.detail = "radial max residual " + fmt("%.3g", worst_radial) + " (<=1e-8); toric 64^2 max residual " +
                     fmt("%.3g", worst_toric) + " (<=1e-5); refinement 32/64/128 cdf residual " +
                     fmt("%.3g", coarse.cdf_residual) + "/" + fmt("%.3g", middle.cdf_residual) + "/" +
                     fmt("%.3g", fine.cdf_residual) + " order " + fmt("%.2f", global_order) +
                     " (>=1.5), interior density order " + fmt("%.2f", interior_order) + " (>=1.8)";
    return outcome;
}

Outcome uniqueness() {
    const auto toric = toric_p1p1(32);
    const auto axis = toric.toric_axis();
    double worst_toric = 0.0;
    bool toric_ok = true;
    const double centers[3][2] = {{-0.5, 0.8}, {1.2, -1.0}, {0.0, 0.3}};
    for (const auto& center : centers) {
        const auto target = separable_toric_target(smooth_factor_measure(axis, center[0], 1.3),
                                                   smooth_factor_measure(axis, center[1], 2.2));
        const auto separable = solve_separable(toric, target);
        SolveRequest request;
        request.scheme = SolveScheme::NewtonToric;
        request.marginal_start = false;
        const auto newton = solve_newton_toric(toric, target, request);
        const auto record = uniqueness_check(toric, separable.grid, newton.grid, 1e-5);
        worst_toric = std::max(worst_toric, record.deviation);
        toric_ok = toric_ok && record.pass;
    }

    const auto radial = radial_p2();
    const auto corpus = generate_corpus(radial, 0, 50);
    double worst_radial = 0.0;
    bool radial_ok = true;
    for (std::size_t i : corpus.bounded_indices()) {
        const auto& phi = corpus.members[i].profile;
        const auto solved = solve_radial(radial, ma_measure(radial, phi));
        const auto record = uniqueness_check(radial, phi, solved.profile, 1e-5);
        worst_radial = std::max(worst_radial, record.deviation);
        radial_ok = radial_ok && record.pass;
    }

    const auto witness = point_mass_witness(16.0, 41);
    const bool witness_ok = std::abs(witness.point_mass[0] - 1.0) <= 1e-5 &&
                            std::abs(witness.point_mass[1] - 1.0) <= 1e-5 && witness.deviation >= 0.1;
    Outcome outcome;
    outcome.pass = toric_ok && radial_ok && witness_ok;
    outcome.detail = "separable vs Newton deviation " + fmt("%.3g", worst_toric) +
                     " (<=1e-5); radial closed form vs source deviation " + fmt("%.3g", worst_radial) +
                     "; point mass: masses " + fmt("%.8f", witness.point_mass[0]) + "/" +
                     fmt("%.8f", witness.point_mass[1]) + " with non-constant difference " +
                     fmt("%.4f", witness.deviation);
    return outcome;
}

Outcome continuity() {
    const auto model = radial_p2();
    const auto corpus = generate_corpus(model, 0, 200);
    VerifyOptions options;
    options.extra_chains = std::max(0, 50 - static_cast<int>(corpus.chains.size()));
    int failures = 0;
    const auto reports = run_checks(corpus, model, {"weighted_measure_continuity", "triple_continuity"}, options);
    Outcome outcome;
    outcome.detail = "chains=" + std::to_string(corpus.chains.size() + options.extra_chains) + " " +
                     summarize(reports, failures);
    for (const auto& report : reports) outcome.detail += "[" + report.detail + "] ";
    outcome.pass = failures == 0 && reports.size() == 2 && corpus.chains.size() + options.extra_chains >= 50;
    return outcome;
}

Outcome fitted_constants() {
    const auto model = radial_p2();
    const auto corpus = generate_corpus(model, 0, 500);
    int failures = 0;
    const auto reports = run_checks(corpus, model,
                                    {"fitted_energy_domination", "fitted_bounded_measure_domination",
                                     "fitted_capacity_domination", "fitted_hoelder_domination"});
    Outcome outcome;
    outcome.detail = summarize(reports, failures);
    outcome.pass = failures == 0 && reports.size() == 4;
    for (const auto& report : reports) outcome.pass = outcome.pass && report.instances > 0;
    return outcome;
}

struct Criterion {
    int number;
    const char* title;
    double budget_seconds;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {1, "mass normalization", 1.0, mass_normalization},
        {2, "point mass anchor", 1.0, dirac_anchor},
        {3, "gradient threshold for powers of a line singularity", 10.0, gradient_threshold},
        {4, "capacity decay law", 60.0, capacity_law},
        {5, "weighted class threshold sweep", 120.0, weighted_threshold_sweep},
        {6, "inequality suite", 300.0, inequality_suite},
        {7, "solver round trip and refinement", 600.0, solver_round_trip},
        {8, "uniqueness up to constants", 120.0, uniqueness},
        {9, "continuity along decreasing chains", 120.0, continuity},
        {10, "fitted-constant checks", 300.0, fitted_constants},
    };
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int k = 1; k < argc; ++k) {
        const std::string arg = argv[k];
        if (arg == "--criterion" && k + 1 < argc) {
            only = std::atoi(argv[++k]);
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
            return 2;
        }
    }
    if (only < 0 || only > static_cast<int>(criteria().size())) {
        std::fprintf(stderr, "criterion must be between 1 and %zu\n", criteria().size());
        return 2;
    }
    bool all_pass = true;
    for (const auto& criterion : criteria()) {
        if (only != 0 && criterion.number != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& error) {
            outcome = {false, std::string("exception: ") + error.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds <= criterion.budget_seconds;
        const bool pass = outcome.pass && in_time;
        all_pass = all_pass && pass;
        std::printf("criterion %d %s: %s [%.2fs / %.0fs budget] %s\n", criterion.number, criterion.title,
                    pass ? "PASS" : "FAIL", seconds, criterion.budget_seconds, outcome.detail.c_str());
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
