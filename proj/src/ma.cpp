#include "malab/ma.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "malab/errors.hpp"

namespace malab {

namespace {

constexpr double kAtomThreshold = 1e-12;

bool same_axis(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
    }
    return true;
}

const char* low_tail_location(const KahlerModel& model) {
    return model.kind() == ModelKind::RadialP2 ? location::kFixedPoint : location::kPoleZero;
}

const char* high_tail_location(const KahlerModel& model) {
    return model.kind() == ModelKind::RadialP2 ? location::kDivisorAtInfinity
                                               : location::kPoleInfinity;
}

// Measure with CDF equal to the given cumulative data on cell boundaries:
// cumulative[0] is the mass at -inf, cumulative[i] (1 <= i < n) the mass of
// {t < midpoint of cell i}, cumulative[n] the mass of {t < +inf}.
MaMeasure from_cumulative(const KahlerModel& model, const std::vector<double>& grid,
                          std::vector<double> cumulative) {
    for (std::size_t i = 1; i < cumulative.size(); ++i) {
        cumulative[i] = std::max(cumulative[i], cumulative[i - 1]);
    }
    const double total = 1.0;
    if (cumulative.front() <= kAtomThreshold) cumulative.front() = 0.0;
    if (total - cumulative.back() <= kAtomThreshold) cumulative.back() = total;
    cumulative.back() = std::min(cumulative.back(), total);
    MaMeasure measure;
    measure.kind = MeasureKind::OneD;
    measure.grid = grid;
    measure.density.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        measure.density[i] = cumulative[i + 1] - cumulative[i];
    }
    if (cumulative.front() > 0.0) measure.atoms.push_back({low_tail_location(model), cumulative.front()});
    if (total - cumulative.back() > 0.0) {
        measure.atoms.push_back({high_tail_location(model), total - cumulative.back()});
    }
    measure.total_mass = total;
    measure.volume = 1.0;
    return measure;
}

void require_one_dimensional(const KahlerModel& model) {
    if (model.kind() == ModelKind::ToricP1P1) {
        throw InvalidInput("one-dimensional profile given to the toric model");
    }
}

void require_radial(const KahlerModel& model) {
    if (model.kind() != ModelKind::RadialP2) throw InvalidInput("operation needs the radial model");
}

void require_slope_cap(const KahlerModel& model, const Profile& potential) {
    if (std::abs(potential.slope_cap() - model.slope_cap()) > 1e-14 * model.slope_cap()) {
        throw InvalidInput("profile slope cap does not match the model");
    }
}

std::vector<double> rising(std::vector<double> values) {
    for (std::size_t i = 1; i < values.size(); ++i) values[i] = std::max(values[i], values[i - 1]);
    return values;
}

// Mean of x^q over a cell on which x moves linearly from a to b (a, b >= 0).
double cell_power_mean(double a, double b, double q) {
    if (q == 0.0) return 1.0;
    const double m = 0.5 * (a + b);
    if (m == 0.0) return q > 0.0 ? 0.0 : kInf;
    const double eps = (a - b) / m;
    if (std::abs(eps) < 1e-4) return std::pow(m, q) * (1.0 + q * (q - 1.0) * eps * eps / 24.0);
    if ((a == 0.0 || b == 0.0) && q <= -1.0) return kInf;
    if (q == -1.0) return (std::log(a) - std::log(b)) / (a - b);
    return (std::pow(a, q + 1.0) - std::pow(b, q + 1.0)) / ((q + 1.0) * (a - b));
}

// Integral over a half line of (start + rate s)^q ds, rate > 0.
double tail_power_integral(double start, double rate, double q) {
    if (q >= -1.0) return kInf;
    if (start <= 0.0) return kInf;
    return std::pow(start, q + 1.0) / (rate * (-q - 1.0));
}

}  // namespace

double MaMeasure::atom(const std::string& where) const {
    double mass = 0.0;
    for (const auto& a : atoms) {
        if (a.location == where) mass += a.mass;
    }
    return mass;
}

double MaMeasure::density_mass() const {
    return std::accumulate(density.begin(), density.end(), 0.0);
}

std::vector<double> MaMeasure::cdf() const {
    if (kind == MeasureKind::OneD) {
        std::vector<double> out(density.size());
        double running = atom(location::kFixedPoint) + atom(location::kPoleZero);
        for (std::size_t i = 0; i < density.size(); ++i) {
            running += density[i];
            out[i] = running;
        }
        return out;
    }
    const std::size_t n1 = grid.size(), n2 = grid2.size();
    std::vector<double> out(n1 * n2);
    const double corner = atom(location::kCorner00);
    for (std::size_t i = 0; i < n1; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n2; ++j) {
            row += density[i * n2 + j];
            out[i * n2 + j] = row + (i > 0 ? out[(i - 1) * n2 + j] : corner);
        }
    }
    return out;
}

MaMeasure MaMeasure::normalized() const {
    MaMeasure copy = *this;
    const double scale = 1.0 / volume;
    for (double& d : copy.density) d *= scale;
    for (auto& a : copy.atoms) a.mass *= scale;
    copy.total_mass *= scale;
    copy.volume = 1.0;
    return copy;
}

void MaMeasure::check() const {
    for (double d : density) {
        if (!(d >= 0.0)) throw InvalidInput("negative or non-finite node mass");
    }
    for (const auto& a : atoms) {
        if (!(a.mass >= 0.0)) throw InvalidInput("negative atom mass");
    }
    double sum = density_mass();
    for (const auto& a : atoms) sum += a.mass;
    if (std::abs(sum - total_mass) > 1e-12 * std::max(1.0, total_mass)) {
        throw InvalidInput("measure total does not match its parts");
    }
    if (kind == MeasureKind::OneD && density.size() != grid.size()) {
        throw InvalidInput("density length differs from grid");
    }
    if (kind == MeasureKind::TwoD && density.size() != grid.size() * grid2.size()) {
        throw InvalidInput("density size differs from grid");
    }
}

double cdf_distance(const MaMeasure& a, const MaMeasure& b) {
    if (a.kind != b.kind || !same_axis(a.grid, b.grid) || !same_axis(a.grid2, b.grid2)) {
        throw InvalidInput("measures live on different grids");
    }
    const auto ca = a.cdf();
    const auto cb = b.cdf();
    double worst = std::abs(a.total_mass - b.total_mass);
    for (std::size_t i = 0; i < ca.size(); ++i) worst = std::max(worst, std::abs(ca[i] - cb[i]));
    return worst;
}

NormalizedSlopes normalized_slopes(const KahlerModel& model, const Profile& potential) {
    require_slope_cap(model, potential);
    const double cap = model.slope_cap();
    NormalizedSlopes out;
    out.cells = potential.cell_slopes();
    for (double& s : out.cells) s = std::clamp(s / cap, 0.0, 1.0);
    out.minus_inf = std::clamp(potential.slope_minus_inf() / cap, 0.0, 1.0);
    out.plus_inf = std::clamp(potential.slope_plus_inf() / cap, 0.0, 1.0);
    return out;
}

MaMeasure ma_measure(const KahlerModel& model, const RelativeProfile& phi) {
    require_one_dimensional(model);
    const auto slopes = normalized_slopes(model, phi.potential());
    const int n = model.measure_exponent();
    std::vector<double> boundary;
    boundary.reserve(slopes.cells.size() + 2);
    boundary.push_back(slopes.minus_inf);
    boundary.insert(boundary.end(), slopes.cells.begin(), slopes.cells.end());
    boundary.push_back(slopes.plus_inf);
    boundary = rising(std::move(boundary));
    for (double& r : boundary) r = n == 2 ? r * r : r;
    return from_cumulative(model, phi.grid(), std::move(boundary));
}

MaMeasure mixed_measure(const KahlerModel& model, const RelativeProfile& phi,
                        const RelativeProfile& psi) {
    require_radial(model);
    if (phi.grid() != psi.grid()) throw InvalidInput("mixed measure needs a shared grid");
    const auto a = normalized_slopes(model, phi.potential());
    const auto b = normalized_slopes(model, psi.potential());
    std::vector<double> ra{a.minus_inf}, rb{b.minus_inf};
    ra.insert(ra.end(), a.cells.begin(), a.cells.end());
    rb.insert(rb.end(), b.cells.begin(), b.cells.end());
    ra.push_back(a.plus_inf);
    rb.push_back(b.plus_inf);
    ra = rising(std::move(ra));
    rb = rising(std::move(rb));
    // Polarization of the quadratic CDF r^2 is the product r_phi * r_psi.
    std::vector<double> cumulative(ra.size());
    for (std::size_t i = 0; i < ra.size(); ++i) cumulative[i] = ra[i] * rb[i];
    return from_cumulative(model, phi.grid(), std::move(cumulative));
}

MaMeasure omega_wedge(const KahlerModel& model, const RelativeProfile& phi) {
    return mixed_measure(model, phi, RelativeProfile::zero(phi.base()));
}

MaMeasure tensor_measure(const MaMeasure& x, const MaMeasure& y, double factor) {
    if (x.kind != MeasureKind::OneD || y.kind != MeasureKind::OneD) {
        throw InvalidInput("tensor product needs one-dimensional factors");
    }
    MaMeasure out;
    out.kind = MeasureKind::TwoD;
    out.grid = x.grid;
    out.grid2 = y.grid;
    out.volume = factor * x.volume * y.volume;
    const std::size_t n1 = x.grid.size(), n2 = y.grid.size();
    out.density.resize(n1 * n2);
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) out.density[i * n2 + j] = factor * x.density[i] * y.density[j];
    }
    const double x0 = x.atom(location::kPoleZero), xi = x.atom(location::kPoleInfinity);
    const double y0 = y.atom(location::kPoleZero), yi = y.atom(location::kPoleInfinity);
    const double xd = x.density_mass(), yd = y.density_mass();
    auto add = [&](const char* where, double mass) {
        if (mass > 0.0) out.atoms.push_back({where, mass});
    };
    add(location::kCorner00, factor * x0 * y0);
    add(location::kCorner0Inf, factor * x0 * yi);
    add(location::kCornerInf0, factor * xi * y0);
    add(location::kCornerInfInf, factor * xi * yi);
    add(location::kDivisorX0, factor * x0 * yd);
    add(location::kDivisorXInf, factor * xi * yd);
    add(location::kDivisorY0, factor * y0 * xd);
    add(location::kDivisorYInf, factor * yi * xd);
    out.total_mass = out.density_mass();
    for (const auto& a : out.atoms) out.total_mass += a.mass;
    return out;
}

MaMeasure ma_measure(const KahlerModel& model, const RelativeProfile& u, const RelativeProfile& v) {
    if (model.kind() != ModelKind::ProductP1P1) throw InvalidInput("operation needs the product model");
    return tensor_measure(ma_measure(model, u), ma_measure(model, v), 2.0);
}

MaMeasure mixed_measure(const KahlerModel& model, const RelativeProfile& u1,
                        const RelativeProfile& v1, const RelativeProfile& u2,
                        const RelativeProfile& v2) {
    if (model.kind() != ModelKind::ProductP1P1) throw InvalidInput("operation needs the product model");
    // (a_x + b_y) ^ (c_x + d_y) keeps only the cross terms a_x ^ d_y + c_x ^ b_y.
    const auto first = tensor_measure(ma_measure(model, u1), ma_measure(model, v2), 1.0);
    const auto second = tensor_measure(ma_measure(model, u2), ma_measure(model, v1), 1.0);
    MaMeasure out = first;
    for (std::size_t k = 0; k < out.density.size(); ++k) out.density[k] += second.density[k];
    for (const auto& a : second.atoms) {
        auto it = std::find_if(out.atoms.begin(), out.atoms.end(),
                               [&](const Atom& b) { return b.location == a.location; });
        if (it == out.atoms.end()) {
            out.atoms.push_back(a);
        } else {
            it->mass += a.mass;
        }
    }
    out.total_mass = first.total_mass + second.total_mass;
    out.volume = 2.0;
    return out;
}

MaMeasure ma_measure(const KahlerModel& model, const ToricGrid& potential) {
    if (model.kind() != ModelKind::ToricP1P1) throw InvalidInput("grid potential needs the toric model");
    const auto diagram = laguerre_diagram(potential);
    MaMeasure out;
    out.kind = MeasureKind::TwoD;
    out.grid = potential.axis1();
    out.grid2 = potential.axis2();
    out.volume = model.volume();
    out.density.resize(potential.grid_size());
    for (std::size_t k = 0; k < potential.grid_size(); ++k) out.density[k] = 2.0 * diagram.cells[k].area;
    for (std::size_t c = 0; c < potential.corners().size(); ++c) {
        const double mass = 2.0 * diagram.cells[potential.grid_size() + c].area;
        out.atoms.push_back({potential.corners()[c].location, mass});
    }
    out.total_mass = out.density_mass();
    for (const auto& a : out.atoms) out.total_mass += a.mass;
    return out;
}

MaMeasure mixed_measure(const KahlerModel& model, const ToricGrid& first, const ToricGrid& second) {
    if (first.axis1() != second.axis1() || first.axis2() != second.axis2() ||
        first.corners().size() != second.corners().size()) {
        throw InvalidInput("grid potentials must share their node set");
    }
    std::vector<double> middle(first.site_count());
    for (std::size_t k = 0; k < middle.size(); ++k) {
        middle[k] = 0.5 * (first.site_value(k) + second.site_value(k));
    }
    const auto m_mid = ma_measure(model, first.with_site_values(middle));
    const auto m_a = ma_measure(model, first);
    const auto m_b = ma_measure(model, second);
    MaMeasure out = m_mid;
    for (std::size_t k = 0; k < out.density.size(); ++k) {
        out.density[k] = 2.0 * m_mid.density[k] - 0.5 * m_a.density[k] - 0.5 * m_b.density[k];
    }
    for (std::size_t c = 0; c < out.atoms.size(); ++c) {
        out.atoms[c].mass = 2.0 * m_mid.atoms[c].mass - 0.5 * m_a.atoms[c].mass - 0.5 * m_b.atoms[c].mass;
    }
    out.total_mass = out.density_mass();
    for (const auto& a : out.atoms) out.total_mass += a.mass;
    return out;
}

double gradient_current_mass(const KahlerModel& model, const RelativeProfile& phi,
                             const RelativeProfile& psi, double weight_power) {
    require_radial(model);
    if (phi.grid() != psi.grid()) throw InvalidInput("gradient pairing needs a shared grid");
    if (weight_power != 0.0 && phi.sup_value() > 0.0) {
        throw PreconditionViolated("weighted gradient pairing needs phi <= 0");
    }
    const double cap = model.slope_cap();
    const auto& grid = phi.grid();
    const auto& offset = phi.offset();
    const auto a = phi.offset_cell_slopes();
    const auto b = psi.potential().cell_slopes();
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0 || b[i] <= 0.0) continue;
        const double mean = cell_power_mean(-offset[i], -offset[i + 1], weight_power);
        total += a[i] * a[i] * b[i] * mean * (grid[i + 1] - grid[i]);
    }
    auto tail = [&](double rate, double slope, double start) {
        if (rate == 0.0 || slope <= 0.0) return 0.0;
        if (weight_power == 0.0) return kInf;
        return rate * rate * slope * tail_power_integral(start, rate, weight_power);
    };
    total += tail(phi.offset_slope_minus_inf(), psi.potential().slope_minus_inf(), -offset.front());
    total += tail(-phi.offset_slope_plus_inf(), psi.potential().slope_plus_inf(), -offset.back());
    return total / (cap * cap);
}

}  // namespace malab
