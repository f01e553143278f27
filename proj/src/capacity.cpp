#include "malab/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "malab/energy.hpp"
#include "malab/errors.hpp"

namespace malab {

namespace {

constexpr double kTiny = 1e-300;

bool is_low_tail(const std::string& where) {
    return where == location::kFixedPoint || where == location::kPoleZero;
}

// Greatest convex minorant of (grid, data) with slopes in [0, cap], on the same nodes.
std::vector<double> clamped_envelope(const std::vector<double>& grid, const std::vector<double>& data,
                                     double cap) {
    const std::size_t n = grid.size();
    std::vector<std::size_t> hull;
    hull.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        while (hull.size() >= 2) {
            const std::size_t o = hull[hull.size() - 2], m = hull.back();
            const double cross = (grid[m] - grid[o]) * (data[i] - data[o]) - (data[m] - data[o]) * (grid[i] - grid[o]);
            if (cross <= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(i);
    }
    auto slope = [&](std::size_t k) {
        return (data[hull[k + 1]] - data[hull[k]]) / (grid[hull[k + 1]] - grid[hull[k]]);
    };
    std::size_t low = hull.size() - 1;
    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
        if (slope(k) >= 0.0) {
            low = k;
            break;
        }
    }
    std::size_t high = hull.size() - 1;
    for (std::size_t k = low; k + 1 < hull.size(); ++k) {
        if (slope(k) > cap) {
            high = k;
            break;
        }
    }
    const std::size_t i_low = hull[low], i_high = hull[high];
    std::vector<double> out(n);
    std::size_t segment = low;
    for (std::size_t i = 0; i < n; ++i) {
        if (i <= i_low) {
            out[i] = data[i_low];
        } else if (i >= i_high) {
            out[i] = data[i_high] + cap * (grid[i] - grid[i_high]);
        } else {
            while (hull[segment + 1] < i) ++segment;
            const std::size_t l = hull[segment], r = hull[segment + 1];
            const double w = (grid[i] - grid[l]) / (grid[r] - grid[l]);
            out[i] = (1.0 - w) * data[l] + w * data[r];
        }
    }
    return out;
}

// Monge-Ampere node masses of a convex potential given by node values and tail slopes.
std::vector<double> node_masses(const KahlerModel& model, const std::vector<double>& grid,
                                const std::vector<double>& values, double left_slope, double right_slope) {
    const double cap = model.slope_cap();
    const int exponent = model.measure_exponent();
    auto level = [&](double s) {
        const double r = std::clamp(s / cap, 0.0, 1.0);
        return exponent == 2 ? r * r : r;
    };
    std::vector<double> masses(grid.size());
    double running = level(left_slope);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = i + 1 < grid.size() ? (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]) : right_slope;
        const double next = std::max(level(s), running);
        masses[i] = next - running;
        running = next;
    }
    return masses;
}

double mass_on(const std::vector<double>& masses, const NodeMask& set) {
    double total = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (set[i]) total += masses[i];
    }
    return total;
}

std::vector<double> extremal_values(const KahlerModel& model, const Profile& base, const NodeMask& set) {
    const auto& values = base.values();
    std::vector<double> data(values.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = values[i] - (set[i] ? 1.0 : 0.0);
    return clamped_envelope(base.grid(), data, model.slope_cap());
}

void require_mask(const Profile& base, const NodeMask& set) {
    if (set.size() != base.size()) throw InvalidInput("node set does not match the grid");
    if (std::none_of(set.begin(), set.end(), [](char c) { return c != 0; })) {
        throw InvalidInput("capacity of an empty set");
    }
}

double margin(double bound, double value) {
    if (std::isinf(value)) return std::isinf(bound) ? 0.0 : -kInf;
    if (std::isinf(bound)) return 1.0;
    return (bound - value) / std::max(std::abs(bound), kTiny);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

NodeMask interval_mask(const std::vector<double>& grid, double upper) {
    NodeMask set(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) set[i] = grid[i] <= upper ? 1 : 0;
    return set;
}

NodeMask sublevel_mask(const RelativeProfile& phi, double level) {
    NodeMask set(phi.size());
    for (std::size_t i = 0; i < set.size(); ++i) set[i] = phi.offset()[i] < -level ? 1 : 0;
    return set;
}

RelativeProfile relative_extremal(const KahlerModel& model, const Profile& base, const NodeMask& set) {
    require_mask(base, set);
    const auto values = extremal_values(model, base, set);
    std::vector<double> offset(values.size());
    for (std::size_t i = 0; i < offset.size(); ++i) offset[i] = std::min(0.0, values[i] - base.values()[i]);
    return RelativeProfile(base, std::move(offset), 0.0, 0.0);
}

double capacity(const KahlerModel& model, const Profile& base, const NodeMask& set) {
    require_mask(base, set);
    const auto values = extremal_values(model, base, set);
    const auto masses = node_masses(model, base.grid(), values, base.slope_minus_inf(), base.slope_plus_inf());
    return std::min(1.0, mass_on(masses, set));
}

double measure_of_nodes(const MaMeasure& measure, const NodeMask& set) {
    if (measure.kind != MeasureKind::OneD || set.size() != measure.density.size()) {
        throw InvalidInput("node set does not match the measure");
    }
    double total = mass_on(measure.density, set);
    for (const auto& a : measure.atoms) {
        const bool low = is_low_tail(a.location);
        if ((low && set.front()) || (!low && set.back())) total += a.mass;
    }
    return total;
}

double measure_of_sublevel(const MaMeasure& measure, const RelativeProfile& phi, double level) {
    if (measure.kind != MeasureKind::OneD || measure.density.size() != phi.size()) {
        throw InvalidInput("measure does not live on the profile grid");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (phi.offset()[i] < -level) total += measure.density[i];
    }
    for (const auto& a : measure.atoms) {
        const double limit = is_low_tail(a.location) ? phi.limit_minus_inf() : phi.limit_plus_inf();
        if (limit < -level) total += a.mass;
    }
    return total;
}

double SublevelCapacities::at(double level) const {
    if (depths.empty() || level < depths.front()) return values.empty() ? 0.0 : values.front();
    const auto it = std::upper_bound(depths.begin(), depths.end(), level);
    return values[static_cast<std::size_t>(it - depths.begin()) - 1];
}

SublevelCapacities sublevel_capacities(const KahlerModel& model, const RelativeProfile& phi,
                                       double min_level) {
    std::vector<double> depths;
    for (double v : phi.offset()) {
        if (-v > min_level) depths.push_back(-v);
    }
    std::sort(depths.begin(), depths.end());
    depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
    SublevelCapacities steps;
    steps.depths.push_back(min_level);
    steps.depths.insert(steps.depths.end(), depths.begin(), depths.end());
    const auto& base = phi.base();
    for (double level : steps.depths) {
        const auto set = sublevel_mask(phi, level);
        const bool empty = std::none_of(set.begin(), set.end(), [](char c) { return c != 0; });
        steps.values.push_back(empty ? 0.0 : capacity(model, base, set));
    }
    return steps;
}

double capacity_moment(const SublevelCapacities& steps, double q) {
    if (steps.depths.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < steps.depths.size(); ++k) {
        if (steps.values[k] <= 0.0) continue;
        if (k + 1 == steps.depths.size()) return kInf;
        total += steps.values[k] * (std::pow(steps.depths[k + 1], q) - std::pow(steps.depths[k], q));
    }
    return total;
}

double fit_decay_exponent(const std::vector<double>& thresholds, const std::vector<double>& values,
                          double lo, double hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        if (thresholds[k] < lo || thresholds[k] > hi || !(values[k] > 0.0)) continue;
        const double x = std::log(thresholds[k]), y = std::log(values[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) return std::nan("");
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

double fit_top_decade(const std::vector<double>& thresholds, const std::vector<double>& values) {
    if (thresholds.empty()) return std::nan("");
    const double top = *std::max_element(thresholds.begin(), thresholds.end());
    std::vector<double> kept_t, kept_v;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        if (thresholds[k] >= top / 10.0) {
            kept_t.push_back(thresholds[k]);
            kept_v.push_back(values[k]);
        }
    }
    const std::size_t drop = kept_t.size() / 10;
    std::vector<std::size_t> order(kept_t.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return kept_t[a] < kept_t[b]; });
    std::vector<double> t, v;
    for (std::size_t k = 0; k + drop < order.size(); ++k) {
        t.push_back(kept_t[order[k]]);
        v.push_back(kept_v[order[k]]);
    }
    return fit_decay_exponent(t, v, 0.0, kInf);
}

std::vector<double> log_thresholds(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw InvalidInput("invalid threshold range");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        out[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
    }
    return out;
}

CapacityCurve capacity_curve(const KahlerModel& model, const RelativeProfile& phi,
                             const std::vector<double>& thresholds, double p, bool with_sandwich) {
    if (model.kind() != ModelKind::RadialP2) throw InvalidInput("capacity curves need the radial model");
    if (phi.sup_value() > 1e-12) throw PreconditionViolated("capacity curve needs phi <= 0");
    CapacityCurve curve;
    curve.p = p;
    curve.thresholds = thresholds;
    const auto zero = RelativeProfile::zero(phi.base());
    const auto reference = ma_measure(model, zero);
    const auto wedge = omega_wedge(model, phi);
    const auto full = ma_measure(model, phi);
    curve.C_phi = integrate_power(phi, reference, 2.0) + 4.0 * integrate_power(phi, wedge, 1.0) + 2.0;

    auto cap_at = [&](double level) {
        const auto set = sublevel_mask(phi, level);
        if (std::none_of(set.begin(), set.end(), [](char c) { return c != 0; })) return 0.0;
        return capacity(model, phi.base(), set);
    };
    for (double t : thresholds) {
        const double value = cap_at(t);
        curve.values.push_back(value);
        curve.inverse_square_margin.push_back(margin(curve.C_phi / (t * t), value));
        if (t >= 1.0) {
            curve.sublevel_mass_margin.push_back(margin(t * t * value, measure_of_sublevel(full, phi, t)));
            const double doubled = cap_at(2.0 * t);
            const double bound = measure_of_sublevel(reference, phi, t) +
                                 (2.0 / t) * measure_of_sublevel(wedge, phi, t) +
                                 measure_of_sublevel(full, phi, t) / (t * t);
            curve.doubling_margin.push_back(margin(bound, doubled));
            const double s = 2.0 * t;
            const auto truncated = truncate(phi, s);
            const double scaled = measure_of_sublevel(ma_measure(model, truncated), truncated, t) / (s * s);
            curve.scaling_margin.push_back(margin(value, scaled));
        }
    }
    curve.fitted_exponent = fit_top_decade(curve.thresholds, curve.values);

    if (with_sandwich) {
        const bool normalized = std::abs(phi.sup_value() + 1.0) <= 1e-9;
        const bool bounded = std::isfinite(phi.limit_minus_inf()) && std::isfinite(phi.limit_plus_inf());
        curve.sandwich.applicable = normalized && bounded;
        if (curve.sandwich.applicable) {
            const double energy = integrate_power(phi, full, p);
            const double e_p = energy + 2.0 * integrate_power(phi, wedge, p + 1.0) +
                               integrate_power(phi, reference, p + 2.0);
            curve.sandwich.lower = ((p + 2.0) / p) * (energy - 1.0);
            curve.sandwich.middle = capacity_moment(sublevel_capacities(model, phi, 1.0), p + 2.0);
            curve.sandwich.upper = std::pow(2.0, p + 2.0) * e_p;
        }
    }
    return curve;
}

double competitor_lower_bound(const KahlerModel& model, const Profile& base, double upper,
                              int random_count, std::uint64_t seed) {
    const auto& grid = base.grid();
    const auto& psi = base.values();
    const double cap = model.slope_cap();
    const auto set = interval_mask(grid, upper);
    require_mask(base, set);
    std::size_t edge = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (set[i]) edge = i;
    }
    auto evaluate = [&](const std::vector<double>& values) {
        const auto masses = node_masses(model, grid, values, base.slope_minus_inf(), base.slope_plus_inf());
        return mass_on(masses, set);
    };
    double best = 0.0;
    // Tangent-line family: max(psi - 1, line through the edge of K), kept below psi.
    const double s_min = edge + 1 < grid.size() ? (psi[edge + 1] - psi[edge]) / (grid[edge + 1] - grid[edge]) : cap;
    const int family = 2000;
    std::vector<double> values(grid.size());
    for (int k = 0; k <= family; ++k) {
        const double s = s_min + (cap - s_min) * k / family;
        bool admissible = true;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double line = psi[edge] - 1.0 + s * (grid[i] - grid[edge]);
            values[i] = std::max(psi[i] - 1.0, line);
            if (values[i] > psi[i] + 1e-15) {
                admissible = false;
                break;
            }
        }
        if (admissible) best = std::max(best, evaluate(values));
    }
    // Envelopes of random data between psi - 1 and psi, pinned to psi - 1 on K.
    std::mt19937_64 rng(seed);
    std::vector<double> data(grid.size());
    for (int r = 0; r < random_count; ++r) {
        const double depth = uniform01(rng);
        const double width = 0.5 + 8.0 * uniform01(rng);
        const double centre = upper + 10.0 * (uniform01(rng) - 0.3);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double bump = std::exp(-std::pow((grid[i] - centre) / width, 2));
            data[i] = set[i] ? psi[i] - 1.0 : psi[i] - depth * bump;
        }
        best = std::max(best, evaluate(clamped_envelope(grid, data, cap)));
    }
    return best;
}

}  // namespace malab
