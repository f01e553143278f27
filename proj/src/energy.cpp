#include "malab/energy.hpp"

#include <algorithm>
#include <cmath>

#include "malab/errors.hpp"

namespace malab {

namespace {

constexpr double kStableIncrement = 1e-12;
constexpr double kFiniteRatio = 0.995;
constexpr double kInfiniteRatio = 1.005;

bool is_low_tail(const std::string& where) {
    return where == location::kFixedPoint || where == location::kPoleZero;
}

bool is_high_tail(const std::string& where) {
    return where == location::kDivisorAtInfinity || where == location::kPoleInfinity;
}

double power_of_depth(double depth, double p) {
    if (p == 0.0) return 1.0;
    if (std::isinf(depth)) return kInf;
    return std::pow(std::max(depth, 0.0), p);
}

void require_shared_grid(const RelativeProfile& phi, const MaMeasure& measure) {
    if (measure.kind != MeasureKind::OneD || measure.grid.size() != phi.size()) {
        throw InvalidInput("measure and profile must share a one-dimensional grid");
    }
}

double apply_normalization(const KahlerModel& model, double raw) {
    return model.normalization() == Normalization::UnitVolume ? raw : raw * model.volume();
}

// Dirichlet-type pairing of a piecewise-linear function with the reference form:
// radial slice (1/cap^2) sum a^2 b dt, projective-line factor (1/cap) sum a^2 dt.
double dirichlet_energy(const KahlerModel& model, const std::vector<double>& grid,
                        const std::vector<double>& slopes, double left_slope, double right_slope,
                        const Profile& base) {
    const double cap = model.slope_cap();
    const bool radial = model.kind() == ModelKind::RadialP2;
    const auto base_slopes = base.cell_slopes();
    double total = 0.0;
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        const double weight = radial ? std::max(base_slopes[i], 0.0) / cap : 1.0;
        total += slopes[i] * slopes[i] * weight * (grid[i + 1] - grid[i]);
    }
    auto tail = [&](double rate, double base_slope) {
        if (rate == 0.0) return 0.0;
        if (radial && base_slope <= 0.0) return 0.0;
        return kInf;
    };
    total += tail(left_slope, base.slope_minus_inf());
    total += tail(right_slope, base.slope_plus_inf());
    return total / cap;
}

}  // namespace

std::string to_string(Finiteness finiteness) {
    switch (finiteness) {
        case Finiteness::Finite: return "finite";
        case Finiteness::Infinite: return "infinite";
        case Finiteness::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::vector<double> default_levels() {
    std::vector<double> levels;
    for (int j = 0; j <= 10; ++j) levels.push_back(std::ldexp(1.0, j));
    return levels;
}

Verdict classify_sequence(std::vector<double> levels, std::vector<double> values) {
    if (levels.size() != values.size() || values.size() < 3) {
        throw InvalidInput("sequence classification needs at least three matched values");
    }
    Verdict verdict;
    verdict.levels = std::move(levels);
    verdict.values = std::move(values);
    const auto& v = verdict.values;
    for (double x : v) {
        if (std::isnan(x)) {
            verdict.finiteness = Finiteness::Inconclusive;
            return verdict;
        }
        if (std::isinf(x)) {
            verdict.finiteness = Finiteness::Infinite;
            verdict.increment_ratio = kInf;
            verdict.relative_increment = kInf;
            return verdict;
        }
    }
    const std::size_t n = v.size();
    const double last = std::abs(v[n - 1] - v[n - 2]);
    const double previous = std::abs(v[n - 2] - v[n - 3]);
    const double scale = std::max(1.0, std::abs(v[n - 1]));
    verdict.relative_increment = last / scale;
    if (last <= kStableIncrement * scale) {
        verdict.increment_ratio = previous > 0.0 ? last / previous : 0.0;
        verdict.finiteness = Finiteness::Finite;
        return verdict;
    }
    if (previous <= kStableIncrement * scale) {
        verdict.increment_ratio = kInf;
        verdict.finiteness = Finiteness::Inconclusive;
        return verdict;
    }
    verdict.increment_ratio = last / previous;
    if (verdict.increment_ratio < kFiniteRatio) {
        verdict.finiteness = Finiteness::Finite;
    } else if (verdict.increment_ratio > kInfiniteRatio) {
        verdict.finiteness = Finiteness::Infinite;
    }
    return verdict;
}

double integrate_function(const MaMeasure& measure, const std::function<double(double)>& f,
                          double value_at_minus_inf, double value_at_plus_inf) {
    if (measure.kind != MeasureKind::OneD) throw InvalidInput("one-dimensional measure expected");
    double total = 0.0;
    for (std::size_t i = 0; i < measure.grid.size(); ++i) {
        if (measure.density[i] > 0.0) total += f(measure.grid[i]) * measure.density[i];
    }
    for (const auto& a : measure.atoms) {
        if (a.mass <= 0.0) continue;
        if (is_low_tail(a.location)) total += value_at_minus_inf * a.mass;
        if (is_high_tail(a.location)) total += value_at_plus_inf * a.mass;
    }
    return total;
}

double integrate_power(const RelativeProfile& phi, const MaMeasure& measure, double p) {
    require_shared_grid(phi, measure);
    if (phi.sup_value() > 1e-12 * std::max(1.0, std::abs(phi.sup_value()))) {
        throw PreconditionViolated("power integrals need phi <= 0");
    }
    const auto& offset = phi.offset();
    double total = 0.0;
    for (std::size_t i = 0; i < offset.size(); ++i) {
        if (measure.density[i] > 0.0) total += power_of_depth(-offset[i], p) * measure.density[i];
    }
    for (const auto& a : measure.atoms) {
        if (a.mass <= 0.0) continue;
        if (is_low_tail(a.location)) total += power_of_depth(-phi.limit_minus_inf(), p) * a.mass;
        if (is_high_tail(a.location)) total += power_of_depth(-phi.limit_plus_inf(), p) * a.mass;
    }
    return total;
}

double lp_energy(const KahlerModel& model, const RelativeProfile& phi, double p) {
    return integrate_power(phi, ma_measure(model, phi), p);
}

double gradient_energy(const KahlerModel& model, const RelativeProfile& phi) {
    if (model.kind() == ModelKind::ToricP1P1) throw InvalidInput("gradient energy needs a 1-D model");
    return dirichlet_energy(model, phi.grid(), phi.offset_cell_slopes(),
                            phi.offset_slope_minus_inf(), phi.offset_slope_plus_inf(), phi.base());
}

double gradient_distance(const KahlerModel& model, const RelativeProfile& phi,
                         const RelativeProfile& psi) {
    if (model.kind() == ModelKind::ToricP1P1) throw InvalidInput("gradient energy needs a 1-D model");
    const auto diff = offset_difference(phi, psi);
    const auto& grid = phi.grid();
    std::vector<double> slopes(grid.size() - 1);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        slopes[i] = (diff.values[i + 1] - diff.values[i]) / (grid[i + 1] - grid[i]);
    }
    return dirichlet_energy(model, grid, slopes, diff.left_slope, diff.right_slope, phi.base());
}

OffsetDifference offset_difference(const RelativeProfile& phi, const RelativeProfile& psi) {
    if (phi.grid() != psi.grid()) throw InvalidInput("offset difference needs a shared grid");
    OffsetDifference out;
    out.values.resize(phi.size());
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = phi.offset()[i] - psi.offset()[i];
    out.left_slope = phi.offset_slope_minus_inf() - psi.offset_slope_minus_inf();
    out.right_slope = phi.offset_slope_plus_inf() - psi.offset_slope_plus_inf();
    return out;
}

namespace {

double sobolev_of(const KahlerModel& model, const Profile& base, const std::vector<double>& values,
                  double left_slope, double right_slope) {
    const auto reference = ma_measure(model, RelativeProfile::zero(base));
    const auto& grid = base.grid();
    double l2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) l2 += values[i] * values[i] * reference.density[i];
    std::vector<double> slopes(values.size() - 1);
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        slopes[i] = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
    }
    const double gradient = dirichlet_energy(model, grid, slopes, left_slope, right_slope, base);
    return std::sqrt(l2) + std::sqrt(gradient);
}

}  // namespace

double sobolev_norm(const KahlerModel& model, const RelativeProfile& phi) {
    return sobolev_of(model, phi.base(), phi.offset(), phi.offset_slope_minus_inf(),
                      phi.offset_slope_plus_inf());
}

double sobolev_distance(const KahlerModel& model, const RelativeProfile& phi,
                        const RelativeProfile& psi) {
    const auto diff = offset_difference(phi, psi);
    return sobolev_of(model, phi.base(), diff.values, diff.left_slope, diff.right_slope);
}

Verdict truncation_scan(const RelativeProfile& phi,
                        const std::function<double(const RelativeProfile&)>& functional) {
    auto levels = default_levels();
    std::vector<double> values;
    values.reserve(levels.size());
    for (double k : levels) values.push_back(functional(truncate(phi, k)));
    return classify_sequence(std::move(levels), std::move(values));
}

Verdict ep_membership(const KahlerModel& model, const RelativeProfile& phi, double p) {
    return truncation_scan(phi, [&](const RelativeProfile& bounded) { return lp_energy(model, bounded, p); });
}

Verdict gradient_membership(const KahlerModel& model, const RelativeProfile& phi) {
    return truncation_scan(phi, [&](const RelativeProfile& bounded) { return gradient_energy(model, bounded); });
}

Verdict naive_lp_membership(const KahlerModel& model, const RelativeProfile& phi, double p) {
    const auto measure = ma_measure(model, phi);
    // Mass sitting where phi = -inf makes phi non-integrable outright.
    for (const auto& a : measure.atoms) {
        const bool singular = (is_low_tail(a.location) && std::isinf(phi.limit_minus_inf())) ||
                              (is_high_tail(a.location) && std::isinf(phi.limit_plus_inf()));
        if (singular && a.mass > 0.0) {
            Verdict verdict;
            verdict.finiteness = Finiteness::Infinite;
            verdict.increment_ratio = kInf;
            verdict.relative_increment = kInf;
            return verdict;
        }
    }
    auto levels = default_levels();
    std::vector<double> values;
    const auto& offset = phi.offset();
    for (double k : levels) {
        double total = 0.0;
        for (std::size_t i = 0; i < offset.size(); ++i) {
            if (offset[i] > -k && measure.density[i] > 0.0) total += power_of_depth(-offset[i], p) * measure.density[i];
        }
        for (const auto& a : measure.atoms) {
            const double limit = is_low_tail(a.location) ? phi.limit_minus_inf() : phi.limit_plus_inf();
            if (limit > -k) total += power_of_depth(-limit, p) * a.mass;
        }
        values.push_back(total);
    }
    return classify_sequence(std::move(levels), std::move(values));
}

EnergyReport energy_report(const KahlerModel& model, const RelativeProfile& input, double p) {
    if (!(p >= 1.0)) throw InvalidInput("energy exponent must be >= 1");
    EnergyReport report;
    report.p = p;
    report.sup_value = input.sup_value();
    const RelativeProfile phi = input.sup_value() > 0.0 ? input.shifted(-input.sup_value()) : input;
    report.shift = input.sup_value() > 0.0 ? input.sup_value() : 0.0;

    const auto zero = RelativeProfile::zero(phi.base());
    const auto full = ma_measure(model, phi);
    const auto reference = ma_measure(model, zero);
    if (model.kind() == ModelKind::RadialP2) {
        const auto wedge = omega_wedge(model, phi);
        report.E_p_mixed = {integrate_power(phi, reference, p), integrate_power(phi, wedge, p),
                            integrate_power(phi, full, p)};
        report.e_p = integrate_power(phi, full, p) + 2.0 * integrate_power(phi, wedge, p + 1.0) +
                     integrate_power(phi, reference, p + 2.0);
    } else if (model.kind() == ModelKind::ProductP1P1) {
        // phi = u(x): omega ^ omega_phi = (alpha + alpha_u) (x) alpha / 2 in normalized form.
        auto mixed = [&](double q) {
            return 0.5 * (integrate_power(phi, reference, q) + integrate_power(phi, full, q));
        };
        report.E_p_mixed = {integrate_power(phi, reference, p), mixed(p), integrate_power(phi, full, p)};
        report.e_p = integrate_power(phi, full, p) + 2.0 * mixed(p + 1.0) +
                     integrate_power(phi, reference, p + 2.0);
    } else {
        throw InvalidInput("energy report needs a one-dimensional model");
    }
    for (double& e : report.E_p_mixed) e = apply_normalization(model, e);
    report.e_p = apply_normalization(model, report.e_p);
    report.E_p_full = report.E_p_mixed[2];
    report.gradient_energy = apply_normalization(model, gradient_energy(model, phi));
    report.sobolev_norm = sobolev_norm(model, phi);
    report.in_E = gradient_membership(model, phi);
    report.in_E1 = ep_membership(model, phi, 1.0);
    report.in_Ep = ep_membership(model, phi, p);
    report.naive_Lp = naive_lp_membership(model, phi, p);
    return report;
}

EnergyConcavity energy_concavity_data(const KahlerModel& model, const RelativeProfile& phi,
                                      const RelativeProfile& psi, double p) {
    if (model.kind() != ModelKind::RadialP2) throw InvalidInput("cross energies need the radial model");
    if (!(p >= 1.0)) throw InvalidInput("energy exponent must be >= 1");
    const auto zero = RelativeProfile::zero(phi.base());
    const std::array<MaMeasure, 6> measures = {
        ma_measure(model, zero),      omega_wedge(model, phi),       omega_wedge(model, psi),
        ma_measure(model, phi),       ma_measure(model, psi),        mixed_measure(model, phi, psi)};
    EnergyConcavity out;
    out.p = p;
    for (std::size_t m = 0; m < measures.size(); ++m) {
        out.cross[0][m] = integrate_power(phi, measures[m], p);
        out.cross[1][m] = integrate_power(psi, measures[m], p);
    }
    out.M = std::max(out.cross[0][3], out.cross[1][4]);
    if (p == 1.0) {
        out.mixed_bound = 6.0 * out.M;
        out.self_mixed_bound = 4.0 * out.M;
    } else {
        out.mixed_bound = std::pow(p + 1.0, p / (p - 1.0)) * out.M;
        out.self_mixed_bound = out.mixed_bound;
    }
    auto margin = [](double bound, double value) {
        if (std::isinf(value)) return std::isinf(bound) ? 0.0 : -kInf;
        return (bound - value) / std::max(bound, 1e-300);
    };
    out.worst_margin = kInf;
    for (int u = 0; u < 2; ++u) {
        out.worst_margin = std::min(out.worst_margin, margin(out.mixed_bound, out.cross[u][5]));
        out.worst_margin = std::min(out.worst_margin, margin(out.self_mixed_bound, out.cross[u][5]));
    }
    return out;
}

double product_power_integral(const RelativeProfile& u, const MaMeasure& measure_x,
                              const RelativeProfile& v, const MaMeasure& measure_y,
                              double factor, double p) {
    require_shared_grid(u, measure_x);
    require_shared_grid(v, measure_y);
    // Support points of each factor: grid nodes then the two poles.
    auto support = [](const RelativeProfile& w, const MaMeasure& m) {
        std::vector<std::pair<double, double>> points;  // (value of w, mass)
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (m.density[i] > 0.0) points.emplace_back(w.offset()[i], m.density[i]);
        }
        const double low = m.atom(location::kPoleZero) + m.atom(location::kFixedPoint);
        const double high = m.atom(location::kPoleInfinity) + m.atom(location::kDivisorAtInfinity);
        if (low > 0.0) points.emplace_back(w.limit_minus_inf(), low);
        if (high > 0.0) points.emplace_back(w.limit_plus_inf(), high);
        return points;
    };
    const auto xs = support(u, measure_x);
    const auto ys = support(v, measure_y);
    double total = 0.0;
    for (const auto& [ux, mx] : xs) {
        for (const auto& [vy, my] : ys) {
            const double depth = -(ux + vy);
            if (depth < -1e-12) throw PreconditionViolated("product power integral needs u + v <= 0");
            total += power_of_depth(depth, p) * mx * my;
        }
    }
    return factor * total;
}

ProductEnergies product_energies(const KahlerModel& model, const RelativeProfile& u,
                                 const RelativeProfile& v, double p) {
    if (model.kind() != ModelKind::ProductP1P1) throw InvalidInput("operation needs the product model");
    const auto alpha_x = ma_measure(model, RelativeProfile::zero(u.base()));
    const auto alpha_y = ma_measure(model, RelativeProfile::zero(v.base()));
    const auto alpha_u = ma_measure(model, u);
    const auto alpha_v = ma_measure(model, v);
    const double scale = model.normalization() == Normalization::UnitVolume ? 1.0 / model.volume() : 1.0;
    ProductEnergies out;
    out.against_omega_squared = scale * product_power_integral(u, alpha_x, v, alpha_y, 2.0, p);
    out.against_mixed = scale * (product_power_integral(u, alpha_x, v, alpha_v, 1.0, p) +
                                 product_power_integral(u, alpha_u, v, alpha_y, 1.0, p));
    out.against_full = scale * product_power_integral(u, alpha_u, v, alpha_v, 2.0, p);
    out.factor_v = integrate_power(v, alpha_v, p);
    return out;
}

}  // namespace malab
