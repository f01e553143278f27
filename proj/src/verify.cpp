#include "malab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "malab/capacity.hpp"
#include "malab/energy.hpp"
#include "malab/errors.hpp"
#include "malab/ma.hpp"
#include "malab/solver.hpp"

namespace malab {

const std::vector<std::string>& in_scope_topics() {
    static const std::vector<std::string> topics = {
        "gradient_class",           // potentials with square-integrable gradient
        "monge_ampere_operator",    // definition, continuity and capacity decay
        "finite_energy_class",      // finite self-energy class and uniqueness
        "weighted_energy_classes",  // weighted energies, convergence in capacity
        "equation_solving",         // approximation scheme for the equation
        "sublevel_capacity",        // comparison principle and capacity of sublevel sets
    };
    return topics;
}

const std::vector<CheckInfo>& check_registry() {
    static const std::vector<CheckInfo> registry = {
        {"power_family_gradient_threshold", "gradient_class",
         "-(-phi)^alpha with phi singular along a line has finite gradient energy exactly for "
         "alpha < 1/2, bounded by alpha^2/(1-2alpha)", false},
        {"mixed_measure_probability", "gradient_class",
         "for potentials with square-integrable gradient the mixed measure is a probability "
         "measure integrating the other potential", false},
        {"gradient_class_convex", "gradient_class",
         "the square-integrable-gradient class is star-shaped and convex", false},
        {"gradient_class_maximum", "gradient_class",
         "the maximum of two potentials with square-integrable gradient stays in the class", false},
        {"capacity_inverse_square", "monge_ampere_operator",
         "Cap(phi < -t) <= C_phi / t^2 with C_phi = int phi^2 omega^2 + 4 int (-phi) omega^omega_phi + 2",
         false},
        {"increasing_sequence_continuity", "monge_ampere_operator",
         "increasing sequences converge in the Sobolev norm and their measures converge", false},
        {"energy_convergence_controls_gradient", "monge_ampere_operator",
         "along decreasing chains the gradient distance to the limit is controlled by the "
         "mixed-energy gap, so energy convergence gives Sobolev convergence", false},
        {"weighted_measure_continuity", "finite_energy_class",
         "(-phi_j) omega_{phi_j}^2 converges weakly along decreasing chains with bounded energy",
         false},
        {"mixed_energy_order_p1", "finite_energy_class",
         "int (-phi) omega^2 <= int (-phi) omega^omega_phi <= int (-phi) omega_phi^2", false},
        {"cross_energy_p1", "finite_energy_class",
         "int (-u) omega_phi ^ omega_psi <= 6M and int (-phi) omega_phi ^ omega_psi <= 4M", false},
        {"gradient_below_energy", "finite_energy_class",
         "int dphi ^ d^c phi ^ omega_phi <= int (-phi) omega_phi^2", false},
        {"triple_continuity", "finite_energy_class",
         "(-u) omega_phi ^ omega_psi is continuous along decreasing chains", false},
        {"uniqueness_up_to_constant", "finite_energy_class",
         "two finite-energy potentials with the same measure differ by a constant", false},
        {"fitted_energy_domination", "finite_energy_class",
         "int (-phi) dmu <= C_mu (int (-phi) omega_phi^2)^(1/2) for mu the measure of a "
         "finite-energy potential", true},
        {"energy_order_p", "weighted_energy_classes",
         "int (-phi)^p omega^2 <= int (-phi)^p omega^omega_phi <= int (-phi)^p omega_phi^2", false},
        {"ordered_pair_mixed_energy", "weighted_energy_classes",
         "phi <= psi <= 0 gives int (-psi)^p omega^omega_psi <= (p+1) int (-phi)^p omega^omega_phi",
         false},
        {"ordered_pair_full_energy", "weighted_energy_classes",
         "phi <= psi <= 0 gives int (-psi)^p omega_psi^2 <= (p+1)^2 int (-phi)^p omega_phi^2", false},
        {"truncation_sequence_independence", "weighted_energy_classes",
         "any bounded decreasing sequence gives the same energy verdict as the canonical cutoffs",
         false},
        {"cutoff_convergence", "weighted_energy_classes",
         "canonical cutoffs converge in capacity and their weighted measures converge for q < p",
         false},
        {"maximum_stability", "weighted_energy_classes",
         "the weighted class is stable under maximum with the ordered-pair energy bound", false},
        {"cross_energy_p", "weighted_energy_classes",
         "int (-u)^p omega_phi ^ omega_psi <= (p+1)^(p/(p-1)) M for p > 1", false},
        {"weighted_gradient_bound", "weighted_energy_classes",
         "int (-phi)^(p-1) dphi ^ d^c phi ^ omega_phi <= (1/p) int (-phi)^p omega_phi^2", false},
        {"fitted_weighted_domination", "weighted_energy_classes",
         "int (-phi)^p dmu <= C (int (-phi)^p omega_phi^2)^(p/(p+1)) for mu the measure of a "
         "weighted-class potential", true},
        {"energy_limit_measure_convergence", "weighted_energy_classes",
         "bounded energies and int |phi_j - phi| omega_{phi_j}^2 -> 0 give convergence of the "
         "measures", false},
        {"schedule_energy_bound", "equation_solving",
         "along the smoothing schedule int (-phi_j)^p omega_{phi_j}^2 <= C int (-phi_j)^p dmu "
         "with one C", true},
        {"schedule_consistency", "equation_solving",
         "int |phi_j - phi| dmu_j decreases to zero along the smoothing schedule", false},
        {"fitted_bounded_measure_domination", "equation_solving",
         "int (-phi)^2 omega_u^2 <= C_0 (int (-phi)^2 omega_phi^2)^(1/2) for -1 <= u <= 0", true},
        {"comparison_principle", "sublevel_capacity",
         "int over {phi < psi} of omega_psi^2 <= int over {phi < psi} of omega_phi^2", false},
        {"sublevel_mass_vs_capacity", "sublevel_capacity",
         "omega_phi^2(phi < -t) <= t^2 Cap(phi < -t) for t >= 1", false},
        {"capacity_doubling", "sublevel_capacity",
         "Cap(phi < -2t) <= [omega^2 + (2/t) omega^omega_phi + (1/t^2) omega_phi^2](phi < -t)",
         false},
        {"scaling_competitor", "sublevel_capacity",
         "s^-2 omega_{max(phi,-s)}^2(phi < -t) <= Cap(phi < -t) for s = 2t", false},
        {"capacity_sandwich", "sublevel_capacity",
         "((p+2)/p) (int (-phi)^p omega_phi^2 - 1) <= int (-phi)^(p+2) dCap <= 2^(p+2) e_p(phi)",
         false},
        {"capacity_decay_rate", "sublevel_capacity",
         "Cap(phi < -t) (t^(p+2) - 1) <= int (-phi)^(p+2) dCap for t > 1", false},
        {"divisor_bounded_integrability", "sublevel_capacity",
         "a weighted-class potential bounded near the divisor at infinity lies in "
         "L^(p+1)(omega ^ omega_phi)", false},
        {"fitted_capacity_domination", "sublevel_capacity",
         "mu(E) <= A Cap(E)^gamma_p for mu the measure of a weighted-class potential", true},
        {"fitted_hoelder_domination", "sublevel_capacity",
         "int (-phi)^p omega_psi^2 <= A (int (-phi)^p omega_phi^2)^gamma_p for -1 <= phi <= 0, "
         "gamma_p = (1-1/p)^2 for p > 1 and 1/4 for p = 1", true},
    };
    return registry;
}

void validate_registry() {
    const auto& topics = in_scope_topics();
    std::set<std::string> seen;
    for (const auto& info : check_registry()) {
        if (std::find(topics.begin(), topics.end(), info.topic) == topics.end()) {
            throw Error("check " + info.id + " names a topic outside the scope list: " + info.topic);
        }
        if (!seen.insert(info.id).second) throw Error("duplicate check id " + info.id);
        if (info.citation.empty()) throw Error("check " + info.id + " has no citation");
    }
}

const CheckInfo& check_info(const std::string& id) {
    for (const auto& info : check_registry()) {
        if (info.id == id) return info;
    }
    throw InvalidInput("unknown check id: " + id);
}

std::vector<std::string> all_check_ids() {
    std::vector<std::string> ids;
    for (const auto& info : check_registry()) ids.push_back(info.id);
    return ids;
}

double relative_margin(double bound, double value) {
    if (std::isinf(value) && value > 0.0) return std::isinf(bound) ? 0.0 : -kInf;
    if (std::isinf(bound) && bound > 0.0) return 1.0;
    return (bound - value) / std::max(std::abs(bound), 1e-300);
}

namespace {

// Absolute floor under which differences are treated as rounding.
constexpr double kAbsoluteFloor = 1e-13;

bool violates(double bound, double value, double slack) {
    if (std::isnan(bound) || std::isnan(value)) return true;
    if (std::isinf(value) && value > 0.0) return !(std::isinf(bound) && bound > 0.0);
    if (std::isinf(bound) && bound > 0.0) return false;
    return value - bound > slack * std::max(std::abs(bound), std::abs(value)) + kAbsoluteFloor;
}

struct Tally {
    int instances = 0;
    int failures = 0;
    double worst = kInf;
    double slack = 1e-7;

    /// value <= bound.
    void bound(double upper, double value) {
        ++instances;
        worst = std::min(worst, relative_margin(upper, value));
        if (violates(upper, value, slack)) ++failures;
    }
    /// Boolean instance with its own margin.
    void flag(bool ok, double margin) {
        ++instances;
        worst = std::min(worst, margin);
        if (!ok) ++failures;
    }
    void merge(const HeldOutFit& fit) {
        instances += fit.instances;
        failures += fit.failures;
        worst = std::min(worst, fit.worst_margin);
    }
};

double gamma_exponent(double p) {
    return p > 1.0 ? (1.0 - 1.0 / p) * (1.0 - 1.0 / p) : 0.25;
}

// Ten bounded continuous invariant test functions of t.
std::vector<std::function<double(double)>> test_functions() {
    std::vector<std::function<double(double)>> out;
    out.emplace_back([](double) { return 1.0; });
    for (double c : {-20.0, -10.0, -5.0, -2.0, 0.0, 2.0, 5.0}) {
        out.emplace_back([c](double t) { return logistic(t - c); });
    }
    out.emplace_back([](double t) { return 1.0 / (1.0 + t * t / 16.0); });
    out.emplace_back([](double t) { return t / std::sqrt(1.0 + t * t); });
    return out;
}

double test_limit(const std::function<double(double)>& f, double direction) {
    return f(direction * 1e300);
}

class Context {
public:
    Context(const Corpus& corpus, const KahlerModel& model, const VerifyOptions& options)
        : corpus_(corpus), model_(model), options_(options) {
        if (model.kind() != ModelKind::RadialP2) throw InvalidInput("checks run on the radial model");
        if (corpus.members.empty()) throw InvalidInput("empty corpus");
        if (corpus.members.front().profile.grid() != corpus.grid) {
            throw InvalidInput("corpus grid does not match its members");
        }
        for (const auto& m : corpus.members) {
            if (m.profile.grid() != corpus.grid) throw InvalidInput("corpus members must share the grid");
        }
        reference_ = ma_measure(model, RelativeProfile::zero(corpus.members.front().profile.base()));
        full_.resize(corpus.members.size());
        wedge_.resize(corpus.members.size());
        curves_.resize(corpus.members.size());
        steps_.resize(corpus.members.size());
        finite_ = corpus.bounded_indices();
        for (std::size_t i = 0; i < corpus.members.size(); ++i) all_.push_back(i);
    }

    const Corpus& corpus() const { return corpus_; }
    const KahlerModel& model() const { return model_; }
    const VerifyOptions& options() const { return options_; }
    const MaMeasure& reference() const { return reference_; }
    const RelativeProfile& phi(std::size_t i) const { return corpus_.members[i].profile; }
    const std::vector<std::size_t>& finite() const { return finite_; }
    const std::vector<std::size_t>& all() const { return all_; }

    const MaMeasure& full(std::size_t i) {
        if (!full_[i]) full_[i] = ma_measure(model_, phi(i));
        return *full_[i];
    }
    const MaMeasure& wedge(std::size_t i) {
        if (!wedge_[i]) wedge_[i] = omega_wedge(model_, phi(i));
        return *wedge_[i];
    }
    const CapacityCurve& curve(std::size_t i) {
        if (!curves_[i]) curves_[i] = capacity_curve(model_, phi(i), thresholds(), 1.0, false);
        return *curves_[i];
    }
    const SublevelCapacities& steps(std::size_t i) {
        if (!steps_[i]) steps_[i] = sublevel_capacities(model_, phi(i), 1.0);
        return *steps_[i];
    }
    static const std::vector<double>& thresholds() {
        static const auto values = log_thresholds(1.0, 512.0, 10);
        return values;
    }

    const std::vector<std::pair<std::size_t, std::size_t>>& finite_pairs() {
        if (!finite_pairs_) {
            finite_pairs_ = member_pairs(finite_, options_.pair_count, options_.pair_seed + 11);
        }
        return *finite_pairs_;
    }
    const std::vector<std::pair<std::size_t, std::size_t>>& any_pairs() {
        if (!any_pairs_) any_pairs_ = member_pairs(all_, options_.pair_count, options_.pair_seed + 13);
        return *any_pairs_;
    }
    const std::vector<OrderedPair>& ordered() {
        if (!ordered_) ordered_ = ordered_pairs(corpus_, options_.pair_count, options_.pair_seed + 17);
        return *ordered_;
    }
    const std::vector<DecreasingChain>& chains() {
        if (!chains_) {
            std::vector<DecreasingChain> list;
            for (const auto& chain : corpus_.chains) {
                if (chain.members.size() >= 2) list.push_back(chain);
            }
            auto extra = decreasing_chains(model_, corpus_.seed + 7919, options_.extra_chains,
                                           options_.chain_length);
            for (auto& chain : extra) {
                chain.id += static_cast<int>(corpus_.chains.size());
                list.push_back(std::move(chain));
            }
            chains_ = std::move(list);
        }
        return *chains_;
    }
    /// Members genuinely in the weighted class for exponent p (not only bounded on the grid).
    std::vector<std::size_t> weighted_class(double p) const {
        std::vector<std::size_t> out;
        const double threshold = 2.0 / (p + 2.0) - 0.05;
        for (std::size_t i : finite_) {
            const auto& m = corpus_.members[i];
            const bool singular = m.tag == CorpusTag::AlphaFamily || m.tag == CorpusTag::DivisorBounded;
            if (!singular || m.parameter < threshold) out.push_back(i);
        }
        return out;
    }
    /// Members of the plain bounded tag.
    std::vector<std::size_t> plain_bounded() const {
        auto out = corpus_.indices(CorpusTag::Bounded);
        if (out.empty()) out = finite_;
        return out;
    }
    /// A few spread targets among `pool`.
    static std::vector<std::size_t> spread(const std::vector<std::size_t>& pool, std::size_t count) {
        std::vector<std::size_t> out;
        if (pool.empty()) return out;
        const std::size_t n = std::min(count, pool.size());
        for (std::size_t k = 0; k < n; ++k) out.push_back(pool[k * pool.size() / n]);
        return out;
    }

private:
    const Corpus& corpus_;
    const KahlerModel& model_;
    const VerifyOptions& options_;
    MaMeasure reference_;
    std::vector<std::optional<MaMeasure>> full_, wedge_;
    std::vector<std::optional<CapacityCurve>> curves_;
    std::vector<std::optional<SublevelCapacities>> steps_;
    std::vector<std::size_t> finite_, all_;
    std::optional<std::vector<std::pair<std::size_t, std::size_t>>> finite_pairs_, any_pairs_;
    std::optional<std::vector<OrderedPair>> ordered_;
    std::optional<std::vector<DecreasingChain>> chains_;
};

// Depth-scaled copy of phi with values in [-1, 0].
RelativeProfile unit_range(const RelativeProfile& phi) {
    double lowest = 0.0;
    for (double v : phi.offset()) lowest = std::min(lowest, v);
    if (lowest >= -1.0) return phi;
    return scale(phi, 1.0 / (-lowest));
}

using CheckFn = std::function<void(Context&, Tally&, CheckReport&)>;

// Powers of the potential singular along the line at infinity, on a grid reaching deep to the right.
void power_family_gradient_threshold(Context& ctx, Tally& tally, CheckReport&) {
    const auto& model = ctx.model();
    const auto grid = model.deep_grid(false, true);
    const auto line = model.offset_on(
        grid, [&](double t) { return -model.reference_value(t) - 1.0; }, 0.0, -model.slope_cap());
    auto gradient_bound = [](double alpha) { return alpha * alpha / (1.0 - 2.0 * alpha) + 1e-6; };
    for (std::size_t i : ctx.corpus().indices(CorpusTag::AlphaFamily)) {
        const double alpha = ctx.corpus().members[i].parameter;
        const auto power = compose_weight(line, PowerWeight{alpha});
        const auto verdict = gradient_membership(model, power);
        if (alpha < 0.45) {
            const auto half = compose_weight(line, PowerWeight{alpha / 2.0});
            tally.bound(gradient_bound(alpha / 2.0), gradient_energy(model, half));
            tally.bound(gradient_bound(alpha), gradient_energy(model, power));
            tally.flag(verdict.finite(), verdict.finite() ? 1.0 : -1.0);
        } else if (alpha > 0.55) {
            const bool infinite = verdict.finiteness == Finiteness::Infinite;
            tally.flag(infinite, infinite ? 1.0 : -1.0);
        }
    }
}

void mixed_measure_probability(Context& ctx, Tally& tally, CheckReport&) {
    for (const auto& [a, b] : ctx.any_pairs()) {
        const auto mixed = mixed_measure(ctx.model(), ctx.phi(a), ctx.phi(b));
        const double error = std::abs(mixed.total_mass - 1.0);
        bool nonnegative = true;
        for (double m : mixed.density) nonnegative = nonnegative && m >= -1e-15;
        tally.flag(error <= 1e-10 && nonnegative, (1e-10 - error) / 1e-10);
        const double integral = integrate_power(ctx.phi(b), ctx.wedge(a), 1.0);
        tally.flag(std::isfinite(integral), std::isfinite(integral) ? 1.0 : -kInf);
    }
}

void gradient_class_convex(Context& ctx, Tally& tally, CheckReport&) {
    const auto& model = ctx.model();
    for (const auto& [a, b] : ctx.any_pairs()) {
        const double ga = std::sqrt(gradient_energy(model, ctx.phi(a)));
        const double gb = std::sqrt(gradient_energy(model, ctx.phi(b)));
        for (double w : {0.25, 0.5, 0.75}) {
            const double mixed = std::sqrt(gradient_energy(model, blend(ctx.phi(a), ctx.phi(b), w)));
            tally.bound((1.0 - w) * ga + w * gb, mixed);
        }
        const double half = gradient_energy(model, scale(ctx.phi(a), 0.5));
        tally.bound(0.25 * ga * ga, half);
        tally.bound(half, 0.25 * ga * ga);
    }
}

void gradient_class_maximum(Context& ctx, Tally& tally, CheckReport&) {
    const auto& model = ctx.model();
    for (const auto& [a, b] : ctx.any_pairs()) {
        const auto top = max_relative(ctx.phi(a), ctx.phi(b));
        tally.bound(gradient_energy(model, ctx.phi(a)) + gradient_energy(model, ctx.phi(b)),
                    gradient_energy(model, top));
        tally.flag(dominates(top, ctx.phi(a).resampled(top.grid()), 1e-12), 1.0);
    }
}

void capacity_inverse_square(Context& ctx, Tally& tally, CheckReport&) {
    for (std::size_t i : ctx.all()) {
        const auto& curve = ctx.curve(i);
        for (std::size_t k = 0; k < curve.values.size(); ++k) {
            const double t = curve.thresholds[k];
            tally.bound(curve.C_phi / (t * t), curve.values[k]);
        }
    }
}

void increasing_sequence_continuity(Context& ctx, Tally& tally, CheckReport&) {
    const auto& model = ctx.model();
    // Shallow members only: shifting deep offsets by their gap loses every digit.
    const auto pairs = member_pairs(ctx.plain_bounded(), ctx.options().pair_count, ctx.options().pair_seed + 29);
    for (const auto& [a, b] : pairs) {
        const auto& phi = ctx.phi(a);
        double gap = 0.0;  // largest psi - phi
        for (std::size_t i = 0; i < phi.size(); ++i) gap = std::max(gap, ctx.phi(b).offset()[i] - phi.offset()[i]);
        const auto lower = ctx.phi(b).shifted(-gap);
        const double spread = sobolev_distance(model, phi, lower);
        const auto& limit_measure = ctx.full(a);
        for (int j = 1; j <= 8; ++j) {
            const double eps = std::ldexp(1.0, -j);
            const auto member = blend(phi, lower, eps);
            tally.bound(2.0 * eps, cdf_distance(ma_measure(model, member), limit_measure));
            const double distance = sobolev_distance(model, member, phi);
            tally.bound(eps * spread, distance);
            tally.bound(distance, eps * spread);
        }
    }
}

void energy_convergence_controls_gradient(Context& ctx, Tally& tally, CheckReport&) {
    const auto& model = ctx.model();
    for (const auto& chain : ctx.chains()) {
        const auto limit_wedge = omega_wedge(model, chain.limit);
        double previous_gap = kInf, first_distance = kInf, distance = 0.0;
        for (const auto& member : chain.members) {
            const auto diff = offset_difference(member, chain.limit);
            double gap = 0.0;  // int (phi_j - phi) omega ^ omega_phi
            for (std::size_t i = 0; i < diff.values.size(); ++i) gap += diff.values[i] * limit_wedge.density[i];
            const double gradient = gradient_distance(model, member, chain.limit);
            tally.bound(gap, gradient);
            tally.bound(previous_gap, gap);
            distance = sobolev_distance(model, member, chain.limit);
            if (first_distance == kInf) first_distance = distance;
            previous_gap = gap;
        }
        tally.bound(first_distance, distance);
    }
}

double weighted_integral(const MaMeasure& measure, const RelativeProfile& phi,
                         const std::function<double(double)>& test) {
    return integrate_function(
        measure, [&](double t) { return test(t) * -phi.offset_at(t); },
        test_limit(test, -1.0) * -phi.limit_minus_inf(), test_limit(test, 1.0) * -phi.limit_plus_inf());
}

void weighted_measure_continuity(Context& ctx, Tally& tally, CheckReport& report) {
    const auto tests = test_functions();
    const double tolerance = 1e-4;
    double worst_error = 0.0;
    for (const auto& chain : ctx.chains()) {
        const auto limit_measure = ma_measure(ctx.model(), chain.limit);
        std::vector<double> target;
        for (const auto& f : tests) target.push_back(weighted_integral(limit_measure, chain.limit, f));
        const auto& last = chain.members.back();
        const auto measure = ma_measure(ctx.model(), last);
        double error = 0.0;
        for (std::size_t m = 0; m < tests.size(); ++m) {
            error = std::max(error, std::abs(weighted_integral(measure, last, tests[m]) - target[m]));
        }
        worst_error = std::max(worst_error, error);
        tally.flag(error < tolerance, (tolerance - error) / tolerance);
    }
    char text[96];
    std::snprintf(text, sizeof text, "largest chain-end error %.3g against 10 test functions", worst_error);
    report.detail = text;
}

void energy_order(Context& ctx, Tally& tally, const std::vector<std::size_t>& pool, double p) {
    for (std::size_t i : pool) {
        const double e0 = integrate_power(ctx.phi(i), ctx.reference(), p);
        const double e1 = integrate_power(ctx.phi(i), ctx.wedge(i), p);
        const double e2 = integrate_power(ctx.phi(i), ctx.full(i), p);
        tally.bound(e1, e0);
        tally.bound(e2, e1);
    }
}

void mixed_energy_order_p1(Context& ctx, Tally& tally, CheckReport&) {
    energy_order(ctx, tally, ctx.finite(), 1.0);
}

void cross_energy_p1(Context& ctx, Tally& tally, CheckReport&) {
    for (const auto& [a, b] : ctx.finite_pairs()) {
        const auto data = energy_concavity_data(ctx.model(), ctx.phi(a), ctx.phi(b), 1.0);
        for (int u = 0; u < 2; ++u) {
            tally.bound(data.mixed_bound, data.cross[static_cast<std::size_t>(u)][5]);
            tally.bound(data.self_mixed_bound, data.cross[static_cast<std::size_t>(u)][5]);
        }
    }
}

void gradient_below_energy(Context& ctx, Tally& tally, CheckReport&) {
    for (std::size_t i : ctx.finite()) {
        tally.bound(integrate_power(ctx.phi(i), ctx.full(i), 1.0),
                    gradient_current_mass(ctx.model(), ctx.phi(i), ctx.phi(i), 0.0));
    }
}

void triple_continuity(Context& ctx, Tally& tally, CheckReport& report) {
    const auto& chains = ctx.chains();
    const auto& model = ctx.model();
    double worst = 0.0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        const auto& first = chains[c];
        const auto& second = chains[(c + 1) % chains.size()];
        const std::size_t length = std::min(first.members.size(), second.members.size());
        const double limit =
            integrate_power(first.limit, mixed_measure(model, first.limit, second.limit), 1.0);
        double initial = 0.0, final_error = 0.0;
        for (std::size_t j = 0; j < length; ++j) {
            const auto measure = mixed_measure(model, first.members[j], second.members[j]);
            const double error = std::abs(integrate_power(first.members[j], measure, 1.0) - limit);
            if (j == 0) initial = error;
            final_error = error;
        }
        const double relative = final_error / std::max(limit, 1e-300);
        worst = std::max(worst, relative);
        tally.flag(final_error <= initial && relative <= 1e-4, (1e-4 - relative) / 1e-4);
    }
    char text[80];
    std::snprintf(text, sizeof text, "largest relative chain-end error %.3g", worst);
    report.detail = text;
}

void uniqueness_up_to_constant(Context& ctx, Tally& tally, CheckReport& report) {
    double worst = 0.0;
    for (std::size_t i : Context::spread(ctx.finite(), 40)) {
        const auto solved = solve_radial(ctx.model(), ctx.full(i));
        const auto record = uniqueness_check(ctx.model(), ctx.phi(i), solved.profile);
        worst = std::max(worst, record.deviation);
        tally.flag(record.pass, (record.tolerance - record.deviation) / record.tolerance);
    }
    char text[64];
    std::snprintf(text, sizeof text, "largest deviation %.3g", worst);
    report.detail = text;
}

// Targets of the fitted checks: measures of weighted-class members.
std::vector<std::size_t> fit_targets(Context& ctx, double p) {
    return Context::spread(ctx.weighted_class(p), 5);
}

void fitted_energy_domination(Context& ctx, Tally& tally, CheckReport& report) {
    const auto probes = ctx.plain_bounded();
    for (std::size_t target : fit_targets(ctx, 1.0)) {
        const auto& mu = ctx.full(target);
        std::vector<double> values, scales;
        for (std::size_t i : probes) {
            values.push_back(integrate_power(ctx.phi(i), mu, 1.0));
            scales.push_back(std::sqrt(integrate_power(ctx.phi(i), ctx.full(i), 1.0)));
        }
        const auto fit = held_out_fit(values, scales, ctx.options().fit_margin, ctx.options().slack);
        tally.merge(fit);
        report.fitted_constant = std::max(report.fitted_constant, fit.constant);
    }
}

void energy_order_p(Context& ctx, Tally& tally, CheckReport&) {
    for (double p : ctx.options().p_values) energy_order(ctx, tally, ctx.finite(), p);
}

void ordered_pair_mixed_energy(Context& ctx, Tally& tally, CheckReport&) {
    const auto& model = ctx.model();
    for (const auto& pair : ctx.ordered()) {
        const auto lower_wedge = omega_wedge(model, pair.lower);
        const auto upper_wedge = omega_wedge(model, pair.upper);
        for (double p : ctx.options().p_values) {
            tally.bound((p + 1.0) * integrate_power(pair.lower, lower_wedge, p),
                        integrate_power(pair.upper, upper_wedge, p));
        }
    }
}

void ordered_pair_full_energy(Context& ctx, Tally& tally, CheckReport&) {
    const auto& model = ctx.model();
    for (const auto& pair : ctx.ordered()) {
        const auto& lower_full = ctx.full(pair.lower_index);
        const auto upper_full = ma_measure(model, pair.upper);
        for (double p : ctx.options().p_values) {
            tally.bound((p + 1.0) * (p + 1.0) * integrate_power(pair.lower, lower_full, p),
                        integrate_power(pair.upper, upper_full, p));
        }
    }
}

std::vector<std::size_t> singular_members(Context& ctx) {
    std::vector<std::size_t> out;
    for (std::size_t i : ctx.finite()) {
        const auto tag = ctx.corpus().members[i].tag;
        if (tag == CorpusTag::AlphaFamily || tag == CorpusTag::DivisorBounded) out.push_back(i);
    }
    return out;
}

void truncation_sequence_independence(Context& ctx, Tally& tally, CheckReport&) {
    const auto& model = ctx.model();
    const auto probes = ctx.plain_bounded();
    const auto members = Context::spread(singular_members(ctx), 40);
    for (std::size_t n = 0; n < members.size(); ++n) {
        const auto& phi = ctx.phi(members[n]);
        const auto& chi = ctx.phi(probes[n % probes.size()]);
        double depth = 0.0;
        for (double v : chi.offset()) depth = std::max(depth, -v);
        for (double p : ctx.options().p_values) {
            std::vector<double> canonical, alternative;
            const auto levels = default_levels();
            for (double k : levels) {
                const auto cut = truncate(phi, k + depth);
                const auto other = max_relative(phi, chi.shifted(-k));
                const double bound = lp_energy(model, cut, p);
                const double value = lp_energy(model, other, p);
                tally.bound((p + 1.0) * (p + 1.0) * bound, value);
                canonical.push_back(lp_energy(model, truncate(phi, k), p));
                alternative.push_back(value);
            }
            const auto first = classify_sequence(levels, canonical);
            const auto second = classify_sequence(levels, alternative);
            const bool contradict =
                (first.finiteness == Finiteness::Finite && second.finiteness == Finiteness::Infinite) ||
                (first.finiteness == Finiteness::Infinite && second.finiteness == Finiteness::Finite);
            tally.flag(!contradict, contradict ? -1.0 : 1.0);
        }
    }
}

void cutoff_convergence(Context& ctx, Tally& tally, CheckReport& report) {
    const auto& model = ctx.model();
    const double p = 2.0, q = 1.0;
    double worst = 0.0;
    for (std::size_t i : ctx.corpus().indices(CorpusTag::AlphaFamily)) {
        if (ctx.corpus().members[i].parameter >= 2.0 / (p + 2.0) - 0.05) continue;
        const auto& phi = ctx.phi(i);
        const double limit = integrate_power(phi, ctx.full(i), q);
        double first_error = kInf, previous_cap = kInf;
        double error = 0.0;
        for (double k : default_levels()) {
            const auto cut = truncate(phi, k);
            error = std::abs(lp_energy(model, cut, q) - limit);
            if (first_error == kInf) first_error = error;
            const auto set = sublevel_mask(phi, k);
            const bool empty = std::none_of(set.begin(), set.end(), [](char c) { return c != 0; });
            const double cap = empty ? 0.0 : capacity(model, phi.base(), set);
            tally.bound(previous_cap, cap);
            previous_cap = cap;
        }
        tally.bound(first_error, error);
        const double relative = error / std::max(limit, 1e-300);
        worst = std::max(worst, relative);
        tally.flag(relative <= 1e-3, (1e-3 - relative) / 1e-3);
    }
    char text[80];
    std::snprintf(text, sizeof text, "largest relative energy gap at the last cutoff %.3g", worst);
    report.detail = text;
}

void maximum_stability(Context& ctx, Tally& tally, CheckReport&) {
    const auto& model = ctx.model();
    const auto pairs = member_pairs(ctx.all(), std::min(ctx.options().pair_count, 200),
                                    ctx.options().pair_seed + 19);
    for (double p : ctx.options().p_values) {
        const auto members = ctx.weighted_class(p);
        if (members.empty()) continue;
        for (std::size_t n = 0; n < pairs.size(); ++n) {
            const std::size_t a = members[pairs[n].first % members.size()];
            const std::size_t b = pairs[n].second;
            const auto top = max_relative(ctx.phi(a), ctx.phi(b));
            const auto verdict = ep_membership(model, top, p);
            tally.flag(verdict.finiteness != Finiteness::Infinite,
                       verdict.finiteness == Finiteness::Infinite ? -1.0 : 1.0);
            tally.bound((p + 1.0) * (p + 1.0) * integrate_power(ctx.phi(a), ctx.full(a), p),
                        lp_energy(model, top, p));
        }
    }
}

void cross_energy_p(Context& ctx, Tally& tally, CheckReport&) {
    for (double p : ctx.options().p_values) {
        if (p <= 1.0) continue;
        for (const auto& [a, b] : ctx.finite_pairs()) {
            const auto data = energy_concavity_data(ctx.model(), ctx.phi(a), ctx.phi(b), p);
            for (int u = 0; u < 2; ++u) tally.bound(data.mixed_bound, data.cross[static_cast<std::size_t>(u)][5]);
        }
    }
}

void weighted_gradient_bound(Context& ctx, Tally& tally, CheckReport&) {
    for (double p : ctx.options().p_values) {
        for (std::size_t i : ctx.finite()) {
            tally.bound(integrate_power(ctx.phi(i), ctx.full(i), p) / p,
                        gradient_current_mass(ctx.model(), ctx.phi(i), ctx.phi(i), p - 1.0));
        }
    }
}

void fitted_weighted_domination(Context& ctx, Tally& tally, CheckReport& report) {
    const auto probes = ctx.plain_bounded();
    for (double p : ctx.options().p_values) {
        for (std::size_t target : fit_targets(ctx, p)) {
            const auto& mu = ctx.full(target);
            std::vector<double> values, scales;
            for (std::size_t i : probes) {
                values.push_back(integrate_power(ctx.phi(i), mu, p));
                scales.push_back(std::pow(integrate_power(ctx.phi(i), ctx.full(i), p), p / (p + 1.0)));
            }
            const auto fit = held_out_fit(values, scales, ctx.options().fit_margin, ctx.options().slack);
            tally.merge(fit);
            report.fitted_constant = std::max(report.fitted_constant, fit.constant);
        }
    }
}

void energy_limit_measure_convergence(Context& ctx, Tally& tally, CheckReport& report) {
    const auto& model = ctx.model();
    double worst = 0.0;
    for (const auto& chain : ctx.chains()) {
        const auto limit_measure = ma_measure(model, chain.limit);
        const double limit_energy = integrate_power(chain.limit, limit_measure, 1.0);
        double first_l1 = kInf, l1 = 0.0, distance = 0.0;
        for (const auto& member : chain.members) {
            const auto measure = ma_measure(model, member);
            tally.bound(4.0 * limit_energy, integrate_power(member, measure, 1.0));
            const auto diff = offset_difference(member, chain.limit);
            l1 = 0.0;
            for (std::size_t i = 0; i < diff.values.size(); ++i) l1 += std::abs(diff.values[i]) * measure.density[i];
            if (first_l1 == kInf) first_l1 = l1;
            distance = cdf_distance(measure, limit_measure);
        }
        tally.bound(first_l1, l1);
        worst = std::max(worst, distance);
        tally.flag(distance <= 1e-4, (1e-4 - distance) / 1e-4);
    }
    char text[80];
    std::snprintf(text, sizeof text, "largest chain-end measure distance %.3g", worst);
    report.detail = text;
}

struct ScheduledSolve {
    std::size_t target = 0;
    double p = 1.0;
    SolveResult result;
};

std::vector<ScheduledSolve> scheduled_solves(Context& ctx) {
    std::vector<ScheduledSolve> out;
    for (double p : ctx.options().p_values) {
        for (std::size_t target : Context::spread(ctx.weighted_class(p), 6)) {
            SolveRequest request;
            request.p = p;
            request.approximation = ApproximationMode::Mollify;
            request.schedule = default_mollification_widths();
            out.push_back({target, p, solve_radial_scheduled(ctx.model(), ctx.full(target), request)});
        }
    }
    return out;
}

void schedule_energy_bound(Context& ctx, Tally& tally, CheckReport& report) {
    for (const auto& solve : scheduled_solves(ctx)) {
        const auto& r = solve.result;
        const auto fit = held_out_fit(r.energy_trace, r.target_energy_trace, ctx.options().fit_margin,
                                      ctx.options().slack);
        tally.merge(fit);
        report.fitted_constant = std::max(report.fitted_constant, fit.constant);
    }
}

// Decay evidence on a finite schedule: every step decreases and the last value
// is at most a quarter of the first.
void schedule_consistency(Context& ctx, Tally& tally, CheckReport& report) {
    double worst = 0.0;
    for (const auto& solve : scheduled_solves(ctx)) {
        const auto& trace = solve.result.consistency_trace;
        if (trace.size() < 2) continue;
        for (std::size_t j = 1; j < trace.size(); ++j) tally.bound(trace[j - 1], trace[j]);
        tally.bound(0.25 * trace.front(), trace.back());
        worst = std::max(worst, trace.back() / std::max(trace.front(), 1e-300));
    }
    char text[80];
    std::snprintf(text, sizeof text, "largest last-to-first consistency ratio %.3g", worst);
    report.detail = text;
}

void fitted_bounded_measure_domination(Context& ctx, Tally& tally, CheckReport& report) {
    const auto& model = ctx.model();
    const auto probes = ctx.plain_bounded();
    const auto pairs = member_pairs(probes, std::min(ctx.options().pair_count, 300),
                                    ctx.options().pair_seed + 23);
    std::vector<double> values, scales;
    for (const auto& [a, b] : pairs) {
        const auto u = unit_range(ctx.phi(b));
        values.push_back(integrate_power(ctx.phi(a), ma_measure(model, u), 2.0));
        scales.push_back(std::sqrt(integrate_power(ctx.phi(a), ctx.full(a), 2.0)));
    }
    const auto fit = held_out_fit(values, scales, ctx.options().fit_margin, ctx.options().slack);
    tally.merge(fit);
    report.fitted_constant = fit.constant;
}

void comparison_principle(Context& ctx, Tally& tally, CheckReport&) {
    for (const auto& [a, b] : ctx.finite_pairs()) {
        const auto& phi = ctx.phi(a);
        const auto& psi = ctx.phi(b);
        NodeMask set(phi.size(), 0);
        bool any = false;
        for (std::size_t i = 0; i < set.size(); ++i) {
            set[i] = phi.offset()[i] < psi.offset()[i] ? 1 : 0;
            any = any || set[i];
        }
        if (!any) continue;
        tally.bound(measure_of_nodes(ctx.full(a), set), measure_of_nodes(ctx.full(b), set));
    }
}

// Needs full Monge-Ampere mass outside the pole, so members with atoms are left out.
void sublevel_mass_vs_capacity(Context& ctx, Tally& tally, CheckReport&) {
    for (std::size_t i : ctx.finite()) {
        for (double m : ctx.curve(i).sublevel_mass_margin) tally.flag(m >= -ctx.options().slack, m);
    }
}

void capacity_doubling(Context& ctx, Tally& tally, CheckReport&) {
    for (std::size_t i : ctx.all()) {
        for (double m : ctx.curve(i).doubling_margin) tally.flag(m >= -ctx.options().slack, m);
    }
}

void scaling_competitor(Context& ctx, Tally& tally, CheckReport&) {
    for (std::size_t i : ctx.all()) {
        for (double m : ctx.curve(i).scaling_margin) tally.flag(m >= -ctx.options().slack, m);
    }
}

void capacity_sandwich(Context& ctx, Tally& tally, CheckReport&) {
    for (std::size_t i : ctx.finite()) {
        const auto& phi = ctx.phi(i);
        if (std::abs(phi.sup_value() + 1.0) > 1e-9) continue;
        for (double p : ctx.options().p_values) {
            const double energy = integrate_power(phi, ctx.full(i), p);
            const double e_p = energy + 2.0 * integrate_power(phi, ctx.wedge(i), p + 1.0) +
                               integrate_power(phi, ctx.reference(), p + 2.0);
            const double middle = capacity_moment(ctx.steps(i), p + 2.0);
            tally.bound(middle, ((p + 2.0) / p) * (energy - 1.0));
            tally.bound(std::pow(2.0, p + 2.0) * e_p, middle);
        }
    }
}

void capacity_decay_rate(Context& ctx, Tally& tally, CheckReport&) {
    for (std::size_t i : ctx.finite()) {
        const auto& steps = ctx.steps(i);
        for (double p : ctx.options().p_values) {
            const double middle = capacity_moment(steps, p + 2.0);
            for (double t : Context::thresholds()) {
                if (t <= 1.0) continue;
                tally.bound(middle, steps.at(t) * (std::pow(t, p + 2.0) - 1.0));
            }
        }
    }
}

void divisor_bounded_integrability(Context& ctx, Tally& tally, CheckReport&) {
    const auto& model = ctx.model();
    for (double p : ctx.options().p_values) {
        for (std::size_t i : ctx.corpus().indices(CorpusTag::DivisorBounded)) {
            if (ctx.corpus().members[i].parameter >= 2.0 / (p + 2.0) - 0.05) continue;
            const auto verdict = truncation_scan(ctx.phi(i), [&](const RelativeProfile& cut) {
                return integrate_power(cut, omega_wedge(model, cut), p + 1.0);
            });
            tally.flag(verdict.finiteness != Finiteness::Infinite,
                       verdict.finiteness == Finiteness::Infinite ? -1.0 : 1.0);
        }
    }
}

void fitted_capacity_domination(Context& ctx, Tally& tally, CheckReport& report) {
    const auto& model = ctx.model();
    const auto& grid = ctx.corpus().grid;
    const auto& base = ctx.phi(0).base();
    std::vector<double> caps;
    std::vector<NodeMask> sets;
    for (double upper = -30.0; upper <= 10.0 + 1e-9; upper += 2.5) {
        const double t = model.t_scale() * upper + model.t_shift();
        sets.push_back(interval_mask(grid, t));
        caps.push_back(capacity(model, base, sets.back()));
    }
    for (double p : ctx.options().p_values) {
        const double gamma = gamma_exponent(p);
        for (std::size_t target : fit_targets(ctx, p)) {
            std::vector<double> values, scales;
            for (std::size_t k = 0; k < sets.size(); ++k) {
                values.push_back(measure_of_nodes(ctx.full(target), sets[k]));
                scales.push_back(std::pow(caps[k], gamma));
            }
            const auto fit = held_out_fit(values, scales, ctx.options().fit_margin, ctx.options().slack);
            tally.merge(fit);
            report.fitted_constant = std::max(report.fitted_constant, fit.constant);
        }
    }
}

void fitted_hoelder_domination(Context& ctx, Tally& tally, CheckReport& report) {
    const auto& model = ctx.model();
    const auto probes = ctx.plain_bounded();
    std::vector<RelativeProfile> units;
    std::vector<MaMeasure> unit_measures;
    for (std::size_t i : probes) {
        units.push_back(unit_range(ctx.phi(i)));
        unit_measures.push_back(ma_measure(model, units.back()));
    }
    for (double p : ctx.options().p_values) {
        const double gamma = gamma_exponent(p);
        for (std::size_t target : fit_targets(ctx, p)) {
            std::vector<double> values, scales;
            for (std::size_t k = 0; k < units.size(); ++k) {
                values.push_back(integrate_power(units[k], ctx.full(target), p));
                scales.push_back(std::pow(integrate_power(units[k], unit_measures[k], p), gamma));
            }
            const auto fit = held_out_fit(values, scales, ctx.options().fit_margin, ctx.options().slack);
            tally.merge(fit);
            report.fitted_constant = std::max(report.fitted_constant, fit.constant);
        }
    }
}

const std::map<std::string, CheckFn>& implementations() {
    static const std::map<std::string, CheckFn> table = {
        {"power_family_gradient_threshold", power_family_gradient_threshold},
        {"mixed_measure_probability", mixed_measure_probability},
        {"gradient_class_convex", gradient_class_convex},
        {"gradient_class_maximum", gradient_class_maximum},
        {"capacity_inverse_square", capacity_inverse_square},
        {"increasing_sequence_continuity", increasing_sequence_continuity},
        {"energy_convergence_controls_gradient", energy_convergence_controls_gradient},
        {"weighted_measure_continuity", weighted_measure_continuity},
        {"mixed_energy_order_p1", mixed_energy_order_p1},
        {"cross_energy_p1", cross_energy_p1},
        {"gradient_below_energy", gradient_below_energy},
        {"triple_continuity", triple_continuity},
        {"uniqueness_up_to_constant", uniqueness_up_to_constant},
        {"fitted_energy_domination", fitted_energy_domination},
        {"energy_order_p", energy_order_p},
        {"ordered_pair_mixed_energy", ordered_pair_mixed_energy},
        {"ordered_pair_full_energy", ordered_pair_full_energy},
        {"truncation_sequence_independence", truncation_sequence_independence},
        {"cutoff_convergence", cutoff_convergence},
        {"maximum_stability", maximum_stability},
        {"cross_energy_p", cross_energy_p},
        {"weighted_gradient_bound", weighted_gradient_bound},
        {"fitted_weighted_domination", fitted_weighted_domination},
        {"energy_limit_measure_convergence", energy_limit_measure_convergence},
        {"schedule_energy_bound", schedule_energy_bound},
        {"schedule_consistency", schedule_consistency},
        {"fitted_bounded_measure_domination", fitted_bounded_measure_domination},
        {"comparison_principle", comparison_principle},
        {"sublevel_mass_vs_capacity", sublevel_mass_vs_capacity},
        {"capacity_doubling", capacity_doubling},
        {"scaling_competitor", scaling_competitor},
        {"capacity_sandwich", capacity_sandwich},
        {"capacity_decay_rate", capacity_decay_rate},
        {"divisor_bounded_integrability", divisor_bounded_integrability},
        {"fitted_capacity_domination", fitted_capacity_domination},
        {"fitted_hoelder_domination", fitted_hoelder_domination},
    };
    return table;
}

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string number(double value) {
    char text[40];
    std::snprintf(text, sizeof text, "%.17g", value);
    return text;
}

}  // namespace

HeldOutFit held_out_fit(const std::vector<double>& values, const std::vector<double>& scales,
                        double margin, double slack) {
    if (values.size() != scales.size()) throw InvalidInput("fit needs matching value and scale lists");
    HeldOutFit fit;
    double largest = 0.0;
    for (std::size_t k = 0; k < values.size(); k += 2) {
        if (scales[k] > 0.0) largest = std::max(largest, values[k] / scales[k]);
    }
    fit.constant = margin * largest;
    for (std::size_t k = 1; k < values.size(); k += 2) {
        const double bound = fit.constant * scales[k];
        ++fit.instances;
        fit.worst_margin = std::min(fit.worst_margin, relative_margin(bound, values[k]));
        if (violates(bound, values[k], slack)) ++fit.failures;
    }
    return fit;
}

std::vector<CheckReport> run_checks(const Corpus& corpus, const KahlerModel& model,
                                    const std::vector<std::string>& ids, const VerifyOptions& options) {
    validate_registry();
    for (const auto& id : ids) check_info(id);
    std::vector<CheckReport> reports;
    if (ids.empty()) return reports;
    Context ctx(corpus, model, options);
    const auto& table = implementations();
    for (const auto& info : check_registry()) {
        if (std::find(ids.begin(), ids.end(), info.id) == ids.end()) continue;
        CheckReport report;
        report.id = info.id;
        report.citation = info.citation;
        Tally tally;
        tally.slack = options.slack;
        table.at(info.id)(ctx, tally, report);
        report.instances = tally.instances;
        report.failures = tally.failures;
        report.worst_margin = tally.worst;
        reports.push_back(std::move(report));
    }
    return reports;
}

std::string junit_xml(const std::vector<CheckReport>& reports, const std::string& suite_name) {
    int failures = 0;
    for (const auto& r : reports) failures += r.passed() ? 0 : 1;
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<testsuite name=\"" << xml_escape(suite_name) << "\" tests=\"" << reports.size()
        << "\" failures=\"" << failures << "\">\n";
    for (const auto& r : reports) {
        out << "  <testcase classname=\"" << xml_escape(suite_name) << "\" name=\"" << xml_escape(r.id)
            << "\">\n";
        out << "    <properties>\n";
        out << "      <property name=\"citation\" value=\"" << xml_escape(r.citation) << "\"/>\n";
        out << "      <property name=\"instances\" value=\"" << r.instances << "\"/>\n";
        out << "      <property name=\"failures\" value=\"" << r.failures << "\"/>\n";
        out << "      <property name=\"worst_margin\" value=\"" << number(r.worst_margin) << "\"/>\n";
        out << "      <property name=\"fitted_constant\" value=\"" << number(r.fitted_constant) << "\"/>\n";
        out << "    </properties>\n";
        if (!r.passed()) {
            out << "    <failure message=\"" << r.failures << " of " << r.instances
                << " instances violated the bound\">" << xml_escape(r.detail) << "</failure>\n";
        }
        out << "  </testcase>\n";
    }
    out << "</testsuite>\n";
    return out.str();
}

std::string reports_csv(const std::vector<CheckReport>& reports) {
    std::ostringstream out;
    out << "id,citation,instances,failures,worst_margin,fitted_constant,status\n";
    for (const auto& r : reports) {
        out << r.id << ',' << csv_field(r.citation) << ',' << r.instances << ',' << r.failures << ','
            << number(r.worst_margin) << ',' << number(r.fitted_constant) << ','
            << (r.passed() ? "pass" : "fail") << '\n';
    }
    return out.str();
}

}  // namespace malab
