#include "malab/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "malab/energy.hpp"
#include "malab/errors.hpp"

namespace malab {

namespace {

constexpr double kMassTolerance = 1e-10;
constexpr double kDampingFloor = 0x1.0p-20;
// Rows or columns of a truncated target lighter than this are removed before Newton.
constexpr double kNegligibleMass = 1e-10;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

// Convex potential with CDF data: slope cap * root(F) on the cell to the right of each node.
Profile profile_from_cdf(const std::vector<double>& grid, const std::vector<double>& cdf,
                         double low_atom, double cap, int exponent) {
    auto slope_of = [&](double f) {
        f = std::clamp(f, 0.0, 1.0);
        return cap * (exponent == 2 ? std::sqrt(f) : f);
    };
    // Anchored at the node closest to t = 0 so that deep extensions do not
    // swamp the core values with rounding.
    std::vector<double> values(grid.size(), 0.0);
    const auto anchor = static_cast<std::size_t>(
        std::min_element(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        grid.begin());
    for (std::size_t i = anchor; i + 1 < grid.size(); ++i) {
        values[i + 1] = values[i] + slope_of(cdf[i]) * (grid[i + 1] - grid[i]);
    }
    for (std::size_t i = anchor; i > 0; --i) {
        values[i - 1] = values[i] - slope_of(cdf[i - 1]) * (grid[i] - grid[i - 1]);
    }
    return Profile(grid, std::move(values), slope_of(low_atom), slope_of(cdf.back()), cap);
}

MaMeasure measure_from_cdf(const std::vector<double>& grid, const std::function<double(double)>& cdf,
                           double cdf_minus_inf, double cdf_plus_inf, const char* low_location,
                           const char* high_location) {
    if (grid.size() < 2) throw InvalidInput("target grid needs at least two nodes");
    MaMeasure measure;
    measure.kind = MeasureKind::OneD;
    measure.grid = grid;
    measure.density.resize(grid.size());
    double previous = std::clamp(cdf_minus_inf, 0.0, 1.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double next = i + 1 < grid.size()
                                ? std::clamp(cdf(0.5 * (grid[i] + grid[i + 1])), previous, 1.0)
                                : std::max(previous, std::clamp(cdf_plus_inf, 0.0, 1.0));
        measure.density[i] = next - previous;
        previous = next;
    }
    if (cdf_minus_inf > 0.0) measure.atoms.push_back({low_location, cdf_minus_inf});
    if (1.0 - previous > 0.0) measure.atoms.push_back({high_location, 1.0 - previous});
    measure.total_mass = 1.0;
    measure.volume = 1.0;
    return measure;
}

void require_toric(const KahlerModel& model) {
    if (model.kind() != ModelKind::ToricP1P1) throw InvalidInput("operation needs the toric model");
}

// Cell masses of the reference potential sampled on one factor axis (secant slopes).
std::vector<double> factor_reference_masses(const KahlerModel& model, const std::vector<double>& axis) {
    std::vector<double> masses(axis.size());
    double previous = 0.0;
    for (std::size_t i = 0; i < axis.size(); ++i) {
        const double next = i + 1 < axis.size()
                                ? (model.reference_value(axis[i + 1]) - model.reference_value(axis[i])) /
                                      (axis[i + 1] - axis[i])
                                : model.slope_cap();
        masses[i] = (next - previous) / model.slope_cap();
        previous = next;
    }
    return masses;
}

std::vector<double> reference_grid_values(const KahlerModel& model, const std::vector<double>& axis1,
                                          const std::vector<double>& axis2) {
    std::vector<double> values(axis1.size() * axis2.size());
    for (std::size_t i = 0; i < axis1.size(); ++i) {
        for (std::size_t j = 0; j < axis2.size(); ++j) {
            values[i * axis2.size() + j] = model.reference_value(axis1[i]) + model.reference_value(axis2[j]);
        }
    }
    return values;
}

struct Marginals {
    std::vector<double> x;
    std::vector<double> y;
};

// Factor marginals normalized to unit mass.
Marginals marginals_of(const MaMeasure& target) {
    const std::size_t n1 = target.grid.size(), n2 = target.grid2.size();
    Marginals m{std::vector<double>(n1, 0.0), std::vector<double>(n2, 0.0)};
    const double total = target.density_mass();
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            const double d = target.density[i * n2 + j] / total;
            m.x[i] += d;
            m.y[j] += d;
        }
    }
    return m;
}

std::vector<double> cumulative(const std::vector<double>& masses) {
    std::vector<double> out(masses.size());
    std::partial_sum(masses.begin(), masses.end(), out.begin());
    return out;
}

// Psi = u(t1) + v(t2) with factor measures equal to the target marginals.
ToricGrid marginal_potential(const KahlerModel& model, const MaMeasure& target) {
    const auto m = marginals_of(target);
    const auto u = profile_from_cdf(target.grid, cumulative(m.x), 0.0, model.slope_cap(), 1);
    const auto v = profile_from_cdf(target.grid2, cumulative(m.y), 0.0, model.slope_cap(), 1);
    std::vector<double> values(target.density.size());
    for (std::size_t i = 0; i < target.grid.size(); ++i) {
        for (std::size_t j = 0; j < target.grid2.size(); ++j) {
            values[i * target.grid2.size() + j] = u.values()[i] + v.values()[j];
        }
    }
    return ToricGrid(target.grid, target.grid2, std::move(values));
}

std::vector<double> cell_masses(const LaguerreDiagram& diagram, std::size_t count) {
    std::vector<double> masses(count);
    for (std::size_t k = 0; k < count; ++k) masses[k] = 2.0 * diagram.cells[k].area;
    return masses;
}

struct NewtonOutcome {
    ToricGrid potential;
    std::vector<NewtonStep> trace;
    bool converged = false;
    std::string message;
};

NewtonOutcome damped_newton(const ToricGrid& start, const std::vector<double>& target,
                            double tolerance, int max_steps) {
    NewtonOutcome out;
    out.potential = start;
    const std::size_t n = start.grid_size();
    auto diagram = laguerre_diagram(out.potential);
    auto masses = cell_masses(diagram, n);
    const double floor_mass = 0.5 * std::min(*std::min_element(target.begin(), target.end()),
                                             *std::min_element(masses.begin(), masses.end()));
    if (!(floor_mass > 0.0)) {
        out.message = "starting potential has empty cells";
        return out;
    }
    double residual = max_abs_difference(masses, target);
    for (int step = 0;; ++step) {
        if (residual <= tolerance) {
            out.converged = true;
            return out;
        }
        if (step >= max_steps) {
            out.message = "Newton step budget exhausted";
            return out;
        }
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(n * 9);
        for (std::size_t k = 1; k < n; ++k) {
            const auto tk = out.potential.site(k);
            for (const auto& facet : diagram.cells[k].facets) {
                if (facet.neighbor >= n) continue;
                const auto tj = out.potential.site(facet.neighbor);
                const double weight = 2.0 * facet.length / std::hypot(tk[0] - tj[0], tk[1] - tj[1]);
                triplets.emplace_back(static_cast<int>(k - 1), static_cast<int>(k - 1), weight);
                if (facet.neighbor > 0) {
                    triplets.emplace_back(static_cast<int>(k - 1), static_cast<int>(facet.neighbor - 1),
                                          -weight);
                }
            }
        }
        Eigen::SparseMatrix<double> laplacian(static_cast<int>(n - 1), static_cast<int>(n - 1));
        laplacian.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::VectorXd rhs(static_cast<int>(n - 1));
        for (std::size_t k = 1; k < n; ++k) rhs(static_cast<int>(k - 1)) = masses[k] - target[k];
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factorization(laplacian);
        if (factorization.info() != Eigen::Success) {
            out.message = "Newton system is singular";
            return out;
        }
        const Eigen::VectorXd direction = factorization.solve(rhs);

        bool accepted = false;
        for (double tau = 1.0; tau >= kDampingFloor; tau *= 0.5) {
            std::vector<double> values = out.potential.values();
            for (std::size_t k = 1; k < n; ++k) values[k] += tau * direction(static_cast<int>(k - 1));
            try {
                ToricGrid candidate = out.potential.with_site_values(values);
                auto candidate_diagram = laguerre_diagram(candidate);
                auto candidate_masses = cell_masses(candidate_diagram, n);
                const double min_mass = *std::min_element(candidate_masses.begin(), candidate_masses.end());
                const double candidate_residual = max_abs_difference(candidate_masses, target);
                if (min_mass >= floor_mass && candidate_residual <= (1.0 - 0.5 * tau) * residual) {
                    const auto convex = convexified_values(candidate, candidate_diagram);
                    out.trace.push_back({residual, tau, min_mass,
                                         max_abs_difference(convex, candidate.values())});
                    out.potential = std::move(candidate);
                    diagram = std::move(candidate_diagram);
                    masses = std::move(candidate_masses);
                    residual = candidate_residual;
                    accepted = true;
                    break;
                }
            } catch (const Error&) {
                // Degenerate tessellation: shorten the step.
            }
        }
        if (!accepted) {
            out.message = "damping fell below 2^-20";
            return out;
        }
    }
}

// Unit-volume energies on a grid potential.
double grid_power_energy(const std::vector<double>& offset, const std::vector<double>& masses,
                         double p, double volume) {
    double total = 0.0;
    for (std::size_t k = 0; k < offset.size(); ++k) total += std::pow(-offset[k], p) * masses[k];
    return total / volume;
}

// Target restricted to the rows and columns carrying non-negligible mass.
struct SubTarget {
    MaMeasure target;
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
};

SubTarget drop_negligible(const MaMeasure& target) {
    const auto m = marginals_of(target);
    SubTarget sub;
    for (std::size_t i = 0; i < m.x.size(); ++i) {
        if (m.x[i] > kNegligibleMass) sub.rows.push_back(i);
    }
    for (std::size_t j = 0; j < m.y.size(); ++j) {
        if (m.y[j] > kNegligibleMass) sub.cols.push_back(j);
    }
    auto& t = sub.target;
    t.kind = MeasureKind::TwoD;
    t.volume = target.volume;
    for (auto i : sub.rows) t.grid.push_back(target.grid[i]);
    for (auto j : sub.cols) t.grid2.push_back(target.grid2[j]);
    for (auto i : sub.rows) {
        for (auto j : sub.cols) t.density.push_back(target.density[i * target.grid2.size() + j]);
    }
    const double scale = target.total_mass / t.density_mass();
    for (double& d : t.density) d *= scale;
    t.total_mass = target.total_mass;
    return sub;
}

MaMeasure truncate_density(const MaMeasure& target, const MaMeasure& reference, double level) {
    // min(f, level) nu with f = d(mu / |mu|) / d nu, both normalized.
    MaMeasure out = target;
    out.atoms.clear();
    const double mu_total = target.total_mass;
    const double nu_total = reference.total_mass;
    for (std::size_t k = 0; k < out.density.size(); ++k) {
        const double nu = reference.density[k] / nu_total;
        out.density[k] = mu_total * std::min(target.density[k] / mu_total, level * nu);
    }
    const double kept = out.density_mass();
    if (!(kept > 0.0)) throw InvalidInput("truncation level removes the whole target");
    for (double& d : out.density) d *= mu_total / kept;
    return out;
}

void check_schedule(const SolveRequest& request) {
    const auto& s = request.schedule;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (!(s[j] > 0.0) || !std::isfinite(s[j])) throw InvalidInput("schedule entries must be positive");
        if (j == 0) continue;
        if (request.approximation == ApproximationMode::Mollify && !(s[j] < s[j - 1])) {
            throw InvalidInput("mollification widths must decrease strictly");
        }
        if (request.approximation == ApproximationMode::DensityTruncation && !(s[j] > s[j - 1])) {
            throw InvalidInput("truncation levels must increase strictly");
        }
    }
}

void check_total(const MaMeasure& target, double expected) {
    target.check();
    if (std::abs(target.total_mass - expected) > kMassTolerance * expected) {
        throw InvalidInput("target mass must equal the model volume");
    }
}

double abs_difference_integral(const RelativeProfile& first, const RelativeProfile& second,
                               const MaMeasure& measure) {
    double total = 0.0;
    for (std::size_t i = 0; i < first.size(); ++i) {
        total += std::abs(first.offset()[i] - second.offset()[i]) * measure.density[i];
    }
    auto tail_gap = [&](double slope_a, double slope_b, double value_a, double value_b) {
        return std::abs(slope_a - slope_b) > 0.0 ? kInf : std::abs(value_a - value_b);
    };
    for (const auto& a : measure.atoms) {
        if (a.mass <= 0.0) continue;
        const bool low = a.location == location::kFixedPoint || a.location == location::kPoleZero;
        const double gap = low ? tail_gap(first.offset_slope_minus_inf(), second.offset_slope_minus_inf(),
                                          first.offset().front(), second.offset().front())
                               : tail_gap(first.offset_slope_plus_inf(), second.offset_slope_plus_inf(),
                                          first.offset().back(), second.offset().back());
        total += gap * a.mass;
    }
    return total;
}

std::vector<double> gauss_smooth(const std::vector<double>& grid, const std::vector<double>& masses,
                                 double width) {
    const std::size_t n = grid.size();
    std::vector<double> dual(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = grid[i > 0 ? i - 1 : i];
        const double right = grid[i + 1 < n ? i + 1 : i];
        dual[i] = std::max(0.5 * (right - left), 1e-300);
    }
    std::vector<double> out(n, 0.0);
    std::vector<double> weights;
    for (std::size_t k = 0; k < n; ++k) {
        if (masses[k] == 0.0) continue;
        const auto lo = static_cast<std::size_t>(
            std::lower_bound(grid.begin(), grid.end(), grid[k] - 8.0 * width) - grid.begin());
        const auto hi = static_cast<std::size_t>(
            std::upper_bound(grid.begin(), grid.end(), grid[k] + 8.0 * width) - grid.begin());
        weights.assign(hi - lo, 0.0);
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double z = (grid[i] - grid[k]) / width;
            weights[i - lo] = std::exp(-0.5 * z * z) * dual[i];
            sum += weights[i - lo];
        }
        for (std::size_t i = lo; i < hi; ++i) out[i] += masses[k] * weights[i - lo] / sum;
    }
    return out;
}

MaMeasure reference_measure_like(const KahlerModel& model, const MaMeasure& target) {
    if (target.kind == MeasureKind::OneD) {
        const auto zero = model.zero_on(target.grid);
        return ma_measure(model, zero);
    }
    if (model.kind() == ModelKind::ToricP1P1) return toric_reference_measure(model, target.grid, target.grid2);
    const auto x = ma_measure(model, model.zero_on(target.grid));
    const auto y = ma_measure(model, model.zero_on(target.grid2));
    return tensor_measure(x, y, 2.0);
}

std::vector<double> gauss_legendre_nodes(int count, std::vector<double>& weights) {
    std::vector<double> nodes(static_cast<std::size_t>(count));
    weights.assign(static_cast<std::size_t>(count), 0.0);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < count; ++i) {
        double x = std::cos(pi * (i + 0.75) / (count + 0.5));
        double derivative = 1.0;
        for (int iteration = 0; iteration < 100; ++iteration) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= count; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            derivative = count * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / derivative;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[static_cast<std::size_t>(i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * derivative * derivative);
    }
    return nodes;
}

}  // namespace

std::string to_string(SolveScheme scheme) {
    switch (scheme) {
        case SolveScheme::ClosedFormRadial: return "closed_form_radial";
        case SolveScheme::SeparableProduct: return "separable_product";
        case SolveScheme::NewtonToric: return "newton_toric";
    }
    return "unknown";
}

SolveScheme solve_scheme_from_string(const std::string& text) {
    if (text == "closed_form_radial") return SolveScheme::ClosedFormRadial;
    if (text == "separable_product") return SolveScheme::SeparableProduct;
    if (text == "newton_toric") return SolveScheme::NewtonToric;
    throw InvalidInput("unknown solve scheme '" + text + "'");
}

std::string to_string(SolveVerdict verdict) {
    switch (verdict) {
        case SolveVerdict::Solved: return "solved";
        case SolveVerdict::Diverged: return "diverged";
        case SolveVerdict::NotInEp: return "not_in_Ep";
    }
    return "unknown";
}

std::vector<double> default_mollification_widths() {
    std::vector<double> widths;
    for (int j = 3; j <= 10; ++j) widths.push_back(std::ldexp(1.0, -j));
    return widths;
}

SolveResult solve_radial(const KahlerModel& model, const MaMeasure& target, double p) {
    if (model.kind() != ModelKind::RadialP2) throw InvalidInput("closed-form solve needs the radial model");
    if (target.kind != MeasureKind::OneD) throw InvalidInput("radial target must be one-dimensional");
    check_total(target, 1.0);
    const auto cdf = target.cdf();
    for (double f : cdf) {
        if (f < -1e-12 || f > 1.0 + 1e-12) throw NotSolvableInModel("target CDF leaves [0, 1]");
    }
    const auto base = model.reference_on(target.grid);
    const auto potential = profile_from_cdf(target.grid, cdf, target.atom(location::kFixedPoint),
                                            model.slope_cap(), model.measure_exponent());
    SolveResult result;
    result.scheme = SolveScheme::ClosedFormRadial;
    result.profile = RelativeProfile::from_potential(base, potential).normalized(-1.0);
    result.residual = cdf_distance(ma_measure(model, result.profile), target);
    const double energy = lp_energy(model, result.profile, p);
    result.energy_trace = {energy};
    result.target_energy_trace = {integrate_power(result.profile, target, p)};
    if (std::isinf(energy)) {
        result.verdict = SolveVerdict::NotInEp;
        result.message = "solution carries an infinite self energy";
    }
    return result;
}

MaMeasure mollify(const KahlerModel& model, const MaMeasure& target, double width) {
    if (!(width > 0.0)) throw InvalidInput("mollification width must be positive");
    MaMeasure out = target;
    if (target.kind == MeasureKind::OneD) {
        out.density = gauss_smooth(target.grid, target.density, width);
    } else {
        const std::size_t n1 = target.grid.size(), n2 = target.grid2.size();
        std::vector<double> column(n1), row(n2);
        for (std::size_t j = 0; j < n2; ++j) {
            for (std::size_t i = 0; i < n1; ++i) column[i] = out.density[i * n2 + j];
            column = gauss_smooth(target.grid, column, width);
            for (std::size_t i = 0; i < n1; ++i) out.density[i * n2 + j] = column[i];
        }
        for (std::size_t i = 0; i < n1; ++i) {
            std::copy_n(out.density.begin() + static_cast<long>(i * n2), n2, row.begin());
            row = gauss_smooth(target.grid2, row, width);
            std::copy(row.begin(), row.end(), out.density.begin() + static_cast<long>(i * n2));
        }
    }
    const auto reference = reference_measure_like(model, target);
    for (std::size_t k = 0; k < out.density.size(); ++k) out.density[k] += width * reference.density[k];
    double total = out.density_mass();
    for (const auto& a : out.atoms) total += a.mass;
    const double renormalizer = target.total_mass / total;
    for (double& d : out.density) d *= renormalizer;
    for (auto& a : out.atoms) a.mass *= renormalizer;
    out.total_mass = target.total_mass;
    return out;
}

SolveResult solve_radial_scheduled(const KahlerModel& model, const MaMeasure& target,
                                   const SolveRequest& request) {
    check_schedule(request);
    SolveResult final_result = solve_radial(model, target, request.p);
    if (request.approximation == ApproximationMode::None || request.schedule.empty()) return final_result;
    const auto reference = ma_measure(model, model.zero_on(target.grid));
    std::vector<double> energies, target_energies, consistency;
    for (double entry : request.schedule) {
        const MaMeasure approximant = request.approximation == ApproximationMode::Mollify
                                          ? mollify(model, target, entry)
                                          : truncate_density(target, reference, entry);
        const auto step = solve_radial(model, approximant, request.p);
        energies.push_back(step.energy_trace.front());
        target_energies.push_back(integrate_power(step.profile, target, request.p));
        consistency.push_back(abs_difference_integral(step.profile, final_result.profile, approximant));
    }
    energies.push_back(final_result.energy_trace.front());
    target_energies.push_back(final_result.target_energy_trace.front());
    final_result.energy_trace = std::move(energies);
    final_result.target_energy_trace = std::move(target_energies);
    final_result.consistency_trace = std::move(consistency);
    final_result.schedule = request.schedule;
    if (request.schedule.size() >= 3) {
        std::vector<double> approximant_energies(final_result.energy_trace.begin(),
                                                 final_result.energy_trace.end() - 1);
        if (classify_sequence(request.schedule, approximant_energies).finiteness == Finiteness::Infinite) {
            final_result.verdict = SolveVerdict::NotInEp;
            final_result.message = "energy of the approximants grows without bound";
        }
    }
    return final_result;
}

SolveResult solve_separable(const KahlerModel& model, const MaMeasure& target, double p) {
    if (model.kind() != ModelKind::ToricP1P1 && model.kind() != ModelKind::ProductP1P1) {
        throw InvalidInput("separable solve needs a two-factor model");
    }
    if (target.kind != MeasureKind::TwoD) throw InvalidInput("separable target must be two-dimensional");
    check_total(target, model.volume());
    if (target.total_mass - target.density_mass() > kMassTolerance) {
        throw NotSolvableInModel("separable solve handles atom-free targets only");
    }
    const auto m = marginals_of(target);
    const std::size_t n2 = target.grid2.size();
    double mismatch = 0.0;
    for (std::size_t i = 0; i < m.x.size(); ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            mismatch = std::max(mismatch, std::abs(target.density[i * n2 + j] - target.total_mass * m.x[i] * m.y[j]));
        }
    }
    if (mismatch > 1e-12 * target.total_mass) throw NotSolvableInModel("target is not a tensor product");

    const double cap = model.slope_cap();
    const auto u = profile_from_cdf(target.grid, cumulative(m.x), 0.0, cap, 1);
    const auto v = profile_from_cdf(target.grid2, cumulative(m.y), 0.0, cap, 1);
    auto factor_x = RelativeProfile::from_potential(model.reference_on(target.grid), u).normalized(-0.5);
    auto factor_y = RelativeProfile::from_potential(model.reference_on(target.grid2), v).normalized(-0.5);

    SolveResult result;
    result.scheme = SolveScheme::SeparableProduct;
    std::vector<double> values(target.density.size()), offset(target.density.size());
    for (std::size_t i = 0; i < m.x.size(); ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            offset[i * n2 + j] = factor_x.offset()[i] + factor_y.offset()[j];
            values[i * n2 + j] = factor_x.potential().values()[i] + factor_y.potential().values()[j];
        }
    }
    result.grid = ToricGrid(target.grid, target.grid2, std::move(values));
    const MaMeasure solved = model.kind() == ModelKind::ToricP1P1
                                 ? ma_measure(model, result.grid)
                                 : ma_measure(model, factor_x, factor_y);
    result.residual = cdf_distance(solved, target);
    result.energy_trace = {grid_power_energy(offset, solved.density, p, model.volume())};
    result.target_energy_trace = {grid_power_energy(offset, target.density, p, model.volume())};
    result.grid_offset = std::move(offset);
    result.profile = std::move(factor_x);
    result.profile_y = std::move(factor_y);
    return result;
}

std::vector<double> toric_offset(const KahlerModel& model, const ToricGrid& grid) {
    const auto reference = reference_grid_values(model, grid.axis1(), grid.axis2());
    std::vector<double> offset(grid.grid_size());
    for (std::size_t k = 0; k < offset.size(); ++k) offset[k] = grid.values()[k] - reference[k];
    const double top = *std::max_element(offset.begin(), offset.end());
    for (double& o : offset) o += -1.0 - top;
    return offset;
}

SolveResult solve_newton_toric(const KahlerModel& model, const MaMeasure& target,
                               const SolveRequest& request) {
    require_toric(model);
    if (target.kind != MeasureKind::TwoD) throw InvalidInput("toric target must be two-dimensional");
    check_total(target, model.volume());
    for (const auto& a : target.atoms) {
        if (a.mass > 0.0) {
            throw NotSolvableInModel("the grid solver represents atom-free targets only; atom at " + a.location);
        }
    }
    for (double d : target.density) {
        if (!(d > 0.0)) throw NotSolvableInModel("the grid solver needs a positive mass at every node");
    }
    check_schedule(request);

    SolveResult result;
    result.scheme = SolveScheme::NewtonToric;
    result.schedule = request.schedule;
    const bool scheduled = request.approximation != ApproximationMode::None && !request.schedule.empty();
    const auto reference = toric_reference_measure(model, target.grid, target.grid2);

    struct Level {
        SubTarget sub;
        ToricGrid solution;
    };
    std::vector<Level> levels;
    ToricGrid previous;
    auto run_level = [&](const SubTarget& sub) -> ToricGrid {
        ToricGrid start;
        const bool warm = previous.grid_size() > 0 && previous.axis1() == sub.target.grid &&
                          previous.axis2() == sub.target.grid2;
        if (warm) {
            start = previous;
        } else if (request.marginal_start) {
            start = marginal_potential(model, sub.target);
        } else {
            start = ToricGrid(sub.target.grid, sub.target.grid2,
                              reference_grid_values(model, sub.target.grid, sub.target.grid2));
        }
        auto outcome = damped_newton(start, sub.target.density, request.newton_tolerance,
                                     request.max_newton_steps);
        result.newton_trace.insert(result.newton_trace.end(), outcome.trace.begin(), outcome.trace.end());
        result.newton_steps = static_cast<int>(outcome.trace.size());
        result.projection_distance = outcome.trace.empty() ? 0.0 : outcome.trace.back().projection_distance;
        if (!outcome.converged) {
            result.verdict = SolveVerdict::Diverged;
            result.message = outcome.message;
        }
        previous = outcome.potential;
        return outcome.potential;
    };

    if (scheduled) {
        for (double entry : request.schedule) {
            const MaMeasure approximant = request.approximation == ApproximationMode::Mollify
                                              ? mollify(model, target, entry)
                                              : truncate_density(target, reference, entry);
            Level level;
            level.sub = drop_negligible(approximant);
            level.solution = run_level(level.sub);
            levels.push_back(std::move(level));
            if (result.verdict == SolveVerdict::Diverged) break;
        }
    }
    SubTarget full;
    full.target = target;
    full.rows.resize(target.grid.size());
    full.cols.resize(target.grid2.size());
    std::iota(full.rows.begin(), full.rows.end(), 0);
    std::iota(full.cols.begin(), full.cols.end(), 0);
    if (result.verdict != SolveVerdict::Diverged) {
        result.grid = run_level(full);
    } else {
        result.grid = previous;
        return result;
    }
    result.grid_offset = toric_offset(model, result.grid);
    const auto solved = ma_measure(model, result.grid);
    result.residual = cdf_distance(solved, target);

    const std::size_t n2 = target.grid2.size();
    for (const auto& level : levels) {
        const auto offset = toric_offset(model, level.solution);
        const auto masses = cell_masses(laguerre_diagram(level.solution), level.solution.grid_size());
        result.energy_trace.push_back(grid_power_energy(offset, masses, request.p, model.volume()));
        std::vector<double> restricted_target, restricted_final;
        for (auto i : level.sub.rows) {
            for (auto j : level.sub.cols) {
                restricted_target.push_back(target.density[i * n2 + j]);
                restricted_final.push_back(result.grid_offset[i * n2 + j]);
            }
        }
        result.target_energy_trace.push_back(
            grid_power_energy(offset, restricted_target, request.p, model.volume()));
        double gap = 0.0;
        for (std::size_t k = 0; k < offset.size(); ++k) {
            gap += std::abs(offset[k] - restricted_final[k]) * level.sub.target.density[k];
        }
        result.consistency_trace.push_back(gap / model.volume());
    }
    result.energy_trace.push_back(grid_power_energy(result.grid_offset, solved.density, request.p, model.volume()));
    result.target_energy_trace.push_back(
        grid_power_energy(result.grid_offset, target.density, request.p, model.volume()));
    if (scheduled && levels.size() >= 3) {
        std::vector<double> approximant_energies(result.energy_trace.begin(), result.energy_trace.end() - 1);
        if (classify_sequence(request.schedule, approximant_energies).finiteness == Finiteness::Infinite) {
            result.verdict = SolveVerdict::NotInEp;
            result.message = "energy of the approximants grows without bound";
        }
    }
    return result;
}

SolveResult solve(const KahlerModel& model, const MaMeasure& target, const SolveRequest& request) {
    switch (request.scheme) {
        case SolveScheme::ClosedFormRadial: return solve_radial_scheduled(model, target, request);
        case SolveScheme::SeparableProduct: return solve_separable(model, target, request.p);
        case SolveScheme::NewtonToric: return solve_newton_toric(model, target, request);
    }
    throw InvalidInput("unknown solve scheme");
}

MaMeasure radial_target_from_cdf(const KahlerModel& model, const std::vector<double>& grid,
                                 const std::function<double(double)>& cdf, double cdf_minus_inf,
                                 double cdf_plus_inf) {
    if (model.kind() != ModelKind::RadialP2) throw InvalidInput("radial target needs the radial model");
    return measure_from_cdf(grid, cdf, cdf_minus_inf, cdf_plus_inf, location::kFixedPoint,
                            location::kDivisorAtInfinity);
}

MaMeasure log_singular_radial_target(const KahlerModel& model, const std::vector<double>& grid) {
    const double scale = model.t_scale(), shift = model.t_shift();
    return radial_target_from_cdf(
        model, grid, [&](double t) { return 1.0 / (1.0 + softplus(-(t - shift) / scale)); }, 0.0, 1.0);
}

MaMeasure point_mass_target(const KahlerModel& model, const std::vector<double>& grid) {
    return radial_target_from_cdf(model, grid, [](double) { return 1.0; }, 1.0, 1.0);
}

MaMeasure random_radial_target(const KahlerModel& model, const std::vector<double>& grid,
                               std::uint64_t seed, bool with_atoms) {
    std::mt19937_64 rng(seed);
    const double low = with_atoms ? uniform(rng, 0.0, 0.3) : 0.0;
    const double high = with_atoms ? uniform(rng, 0.0, 0.2) : 0.0;
    std::array<double, 3> centers{}, widths{}, weights{};
    double weight_sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        centers[k] = uniform(rng, -10.0, 10.0);
        widths[k] = uniform(rng, 0.5, 3.0);
        weights[k] = uniform(rng, 0.1, 1.0);
        weight_sum += weights[k];
    }
    const double scale = model.t_scale(), shift = model.t_shift();
    auto cdf = [=](double t) {
        const double s = (t - shift) / scale;
        double mix = 0.0;
        for (int k = 0; k < 3; ++k) mix += weights[k] * logistic((s - centers[k]) / widths[k]);
        return low + (1.0 - low - high) * mix / weight_sum;
    };
    return radial_target_from_cdf(model, grid, cdf, low, 1.0 - high);
}

MaMeasure toric_reference_measure(const KahlerModel& model, const std::vector<double>& axis1,
                                  const std::vector<double>& axis2) {
    require_toric(model);
    MaMeasure x, y;
    x.grid = axis1;
    x.density = factor_reference_masses(model, axis1);
    x.total_mass = x.density_mass();
    y.grid = axis2;
    y.density = factor_reference_masses(model, axis2);
    y.total_mass = y.density_mass();
    return tensor_measure(x, y, 2.0);
}

MaMeasure random_smooth_toric_target(const KahlerModel& model, std::uint64_t seed) {
    require_toric(model);
    std::mt19937_64 rng(seed);
    std::array<std::array<double, 3>, 3> coefficients{};
    for (auto& row : coefficients) {
        for (double& c : row) c = uniform(rng, -0.35, 0.35);
    }
    const auto axis = model.toric_axis();
    auto target = toric_reference_measure(model, axis, axis);
    const double pi = std::acos(-1.0);
    const std::size_t n = axis.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v1 = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            const double v2 = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
            double exponent = 0.0;
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    if (a == 0 && b == 0) continue;
                    exponent += coefficients[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
                                std::cos(pi * a * v1) * std::cos(pi * b * v2);
                }
            }
            target.density[i * n + j] *= std::exp(exponent);
        }
    }
    const double scale = 2.0 / target.density_mass();
    for (double& d : target.density) d *= scale;
    target.total_mass = 2.0;
    target.atoms.clear();
    return target;
}

MaMeasure separable_toric_target(const MaMeasure& factor_x, const MaMeasure& factor_y) {
    return tensor_measure(factor_x.normalized(), factor_y.normalized(), 2.0);
}

MaMeasure smooth_factor_measure(const std::vector<double>& axis, double center, double width) {
    if (!(width > 0.0)) throw InvalidInput("factor width must be positive");
    return measure_from_cdf(
        axis, [=](double t) { return 0.5 * logistic(2.0 * t) + 0.5 * logistic((t - center) / width); },
        0.0, 1.0, location::kPoleZero, location::kPoleInfinity);
}

SpikeTarget spike_toric_target(const KahlerModel& model, double exponent, double depth) {
    require_toric(model);
    if (!(exponent > 0.0 && exponent < 1.0)) throw InvalidInput("spike exponent must lie in (0, 1)");
    const auto axis2 = model.toric_axis();
    std::vector<double> axis1;
    double step = 0.25;
    for (double t = axis2.front() - step; t > -depth; t -= step, step *= 1.12) axis1.push_back(t);
    axis1.push_back(-depth);
    std::reverse(axis1.begin(), axis1.end());
    axis1.insert(axis1.end(), axis2.begin(), axis2.end());

    auto marginal_cdf = [exponent](double t) { return std::pow(1.0 + softplus(-t), -exponent); };
    const auto x = measure_from_cdf(axis1, marginal_cdf, 0.0, 1.0, location::kPoleZero,
                                    location::kPoleInfinity);
    MaMeasure y;
    y.grid = axis2;
    y.density = factor_reference_masses(model, axis2);
    y.total_mass = y.density_mass();

    SpikeTarget spike;
    spike.target = tensor_measure(x, y, 2.0);
    spike.target.atoms.clear();
    spike.target.total_mass = spike.target.density_mass();
    const auto reference_x = factor_reference_masses(model, axis1);
    for (double d = 2.0; d < depth * (1.0 - 1e-12); d *= 2.0) {
        const auto node = static_cast<std::size_t>(
            std::lower_bound(axis1.begin(), axis1.end(), -d) - axis1.begin());
        spike.truncation_depths.push_back(d);
        spike.truncation_levels.push_back(x.density[node] / reference_x[node]);
    }
    return spike;
}

ManufacturedProblem manufactured_toric_problem(const KahlerModel& model,
                                               const std::array<double, 4>& weights) {
    require_toric(model);
    for (double w : weights) {
        if (!(w > 0.0)) throw InvalidInput("manufactured weights must be positive");
    }
    const auto [w00, w10, w01, w11] = weights;
    const auto axis = model.toric_axis();
    const std::size_t n = axis.size();
    std::vector<double> gl_weights;
    const auto gl_nodes = gauss_legendre_nodes(8, gl_weights);

    // Gradient of Psi* in the variables v = logistic(2 t): a rational map of the square.
    auto jacobian = [&](double a, double b) {
        const double d = w00 * (1 - a) * (1 - b) + w10 * a * (1 - b) + w01 * (1 - a) * b + w11 * a * b;
        const double d_a = -w00 * (1 - b) + w10 * (1 - b) - w01 * b + w11 * b;
        const double d_b = -w00 * (1 - a) - w10 * a + w01 * (1 - a) + w11 * a;
        const double n1 = a * (w10 * (1 - b) + w11 * b);
        const double n1_a = w10 * (1 - b) + w11 * b;
        const double n1_b = a * (w11 - w10);
        const double n2 = b * (w01 * (1 - a) + w11 * a);
        const double n2_a = b * (w11 - w01);
        const double n2_b = w01 * (1 - a) + w11 * a;
        const double x1_a = (n1_a * d - n1 * d_a) / (d * d);
        const double x1_b = (n1_b * d - n1 * d_b) / (d * d);
        const double x2_a = (n2_a * d - n2 * d_a) / (d * d);
        const double x2_b = (n2_b * d - n2 * d_b) / (d * d);
        return x1_a * x2_b - x1_b * x2_a;
    };

    ManufacturedProblem problem;
    auto& target = problem.target;
    target.kind = MeasureKind::TwoD;
    target.grid = axis;
    target.grid2 = axis;
    target.volume = 2.0;
    target.density.resize(n * n);
    const double h = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double area = 0.0;
            for (std::size_t p = 0; p < gl_nodes.size(); ++p) {
                const double a = h * (static_cast<double>(i) + 0.5 * (gl_nodes[p] + 1.0));
                for (std::size_t q = 0; q < gl_nodes.size(); ++q) {
                    const double b = h * (static_cast<double>(j) + 0.5 * (gl_nodes[q] + 1.0));
                    area += gl_weights[p] * gl_weights[q] * jacobian(a, b);
                }
            }
            target.density[i * n + j] = 2.0 * area * 0.25 * h * h;
        }
    }
    const double scale = 2.0 / target.density_mass();
    for (double& d : target.density) d *= scale;
    target.total_mass = 2.0;

    problem.exact_values.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double t1 = 2.0 * axis[i], t2 = 2.0 * axis[j];
            const std::array<double, 4> exponents{std::log(w00), std::log(w10) + t1, std::log(w01) + t2,
                                                  std::log(w11) + t1 + t2};
            const double top = *std::max_element(exponents.begin(), exponents.end());
            double sum = 0.0;
            for (double e : exponents) sum += std::exp(e - top);
            problem.exact_values[i * n + j] = 0.5 * (top + std::log(sum));
        }
    }
    return problem;
}

UniquenessRecord uniqueness_check(const KahlerModel& model, const RelativeProfile& first,
                                  const RelativeProfile& second, double tolerance,
                                  double measure_tolerance) {
    if (first.grid() != second.grid()) throw InvalidInput("uniqueness check needs a shared grid");
    UniquenessRecord record;
    record.tolerance = tolerance;
    record.measure_distance = cdf_distance(ma_measure(model, first), ma_measure(model, second));
    if (record.measure_distance > measure_tolerance) {
        throw PreconditionViolated("the two potentials have different Monge-Ampere measures");
    }
    std::vector<double> difference(first.size());
    for (std::size_t i = 0; i < difference.size(); ++i) difference[i] = first.offset()[i] - second.offset()[i];
    const double mean = std::accumulate(difference.begin(), difference.end(), 0.0) / static_cast<double>(difference.size());
    for (double d : difference) record.deviation = std::max(record.deviation, std::abs(d - mean));
    record.pass = record.deviation <= tolerance;
    return record;
}

UniquenessRecord uniqueness_check(const KahlerModel& model, const ToricGrid& first,
                                  const ToricGrid& second, double tolerance, double measure_tolerance) {
    if (first.axis1() != second.axis1() || first.axis2() != second.axis2()) {
        throw InvalidInput("uniqueness check needs a shared node set");
    }
    UniquenessRecord record;
    record.tolerance = tolerance;
    record.measure_distance = cdf_distance(ma_measure(model, first), ma_measure(model, second));
    if (record.measure_distance > measure_tolerance) {
        throw PreconditionViolated("the two potentials have different Monge-Ampere measures");
    }
    std::vector<double> difference(first.grid_size());
    for (std::size_t k = 0; k < difference.size(); ++k) difference[k] = first.values()[k] - second.values()[k];
    const double mean = std::accumulate(difference.begin(), difference.end(), 0.0) / static_cast<double>(difference.size());
    for (double d : difference) record.deviation = std::max(record.deviation, std::abs(d - mean));
    record.pass = record.deviation <= tolerance;
    return record;
}

PointMassWitness point_mass_witness(double half_width, int points) {
    if (!(half_width > 0.0) || points < 3) throw InvalidInput("witness box needs a positive size");
    std::vector<double> axis(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        axis[static_cast<std::size_t>(i)] = -half_width + 2.0 * half_width * i / (points - 1);
    }
    const std::size_t n = axis.size();
    std::vector<double> smooth(n * n), corner(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double hi = std::max(axis[i], axis[j]), lo = std::min(axis[i], axis[j]);
            smooth[i * n + j] = 0.5 * (hi + std::log1p(std::exp(lo - hi)));
            corner[i * n + j] = 0.5 * hi;
        }
    }
    const auto polygon = simplex_polygon(0.5);
    const double polygon_mass = polygon_area(polygon);
    PointMassWitness witness;
    witness.half_width = half_width;
    const std::array<const std::vector<double>*, 2> potentials{&smooth, &corner};
    for (std::size_t w = 0; w < 2; ++w) {
        const ToricGrid grid(axis, axis, *potentials[w]);
        const auto diagram = laguerre_diagram(grid, polygon);
        double near_point = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (std::max(axis[i], axis[j]) <= -0.5 * half_width) {
                    near_point += diagram.cells[i * n + j].area / polygon_mass;
                }
            }
        }
        witness.point_mass[w] = near_point;
    }
    std::vector<double> difference(n * n);
    for (std::size_t k = 0; k < difference.size(); ++k) difference[k] = smooth[k] - corner[k];
    const double mean = std::accumulate(difference.begin(), difference.end(), 0.0) / static_cast<double>(difference.size());
    for (double d : difference) witness.deviation = std::max(witness.deviation, std::abs(d - mean));
    return witness;
}

}  // namespace malab
