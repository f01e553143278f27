#pragma once

#include <cstdint>
#include <vector>

#include "malab/ma.hpp"
#include "malab/models.hpp"
#include "malab/profiles.hpp"

namespace malab {

/// Node subset of a one-dimensional grid. The first node stands for the whole
/// region to its left (down to the fixed point) and the last one for the region to its right.
using NodeMask = std::vector<char>;

/// {t <= T} on the grid.
NodeMask interval_mask(const std::vector<double>& grid, double upper);
/// {phi < -level} on phi's grid.
NodeMask sublevel_mask(const RelativeProfile& phi, double level);

/// Relative extremal function of K: the greatest omega-psh function that is
/// <= 0 everywhere and <= -1 on K. Throws InvalidInput when K is empty.
RelativeProfile relative_extremal(const KahlerModel& model, const Profile& base, const NodeMask& set);

/// Cap(K) as the Monge-Ampere mass of K for the relative extremal function.
double capacity(const KahlerModel& model, const Profile& base, const NodeMask& set);

/// Mass of a node set, with the tail atoms added when the set reaches the matching end.
double measure_of_nodes(const MaMeasure& measure, const NodeMask& set);
/// Mass of {phi < -level}; atoms count when phi's limit at their end is below -level.
double measure_of_sublevel(const MaMeasure& measure, const RelativeProfile& phi, double level);

/// Cap(phi < -t) as a step function of t: constant `values[k]` on [depths[k], depths[k+1]).
struct SublevelCapacities {
    std::vector<double> depths;
    std::vector<double> values;
    double at(double level) const;
};
/// Exact step function for every level >= min_level (one envelope per distinct node depth).
SublevelCapacities sublevel_capacities(const KahlerModel& model, const RelativeProfile& phi,
                                       double min_level = 1.0);
/// q * integral over [1, inf) of t^(q-1) Cap(phi < -t) dt for the step function.
double capacity_moment(const SublevelCapacities& steps, double q);

/// Log-log least-squares slope of values against thresholds restricted to [lo, hi];
/// zero values are skipped.
double fit_decay_exponent(const std::vector<double>& thresholds, const std::vector<double>& values,
                          double lo, double hi);
/// Fit over the top decade of the thresholds, leaving out the largest 10%.
double fit_top_decade(const std::vector<double>& thresholds, const std::vector<double>& values);

/// Geometric sequence of thresholds from lo to hi.
std::vector<double> log_thresholds(double lo, double hi, int count);

struct SandwichValues {
    double lower = 0.0;   ///< ((p+2)/p) (integral of (-phi)^p omega_phi^2 - 1)
    double middle = 0.0;  ///< integral of (-phi)^(p+2) dCap
    double upper = 0.0;   ///< 2^(p+2) e_p(phi)
    bool applicable = false;
};

struct CapacityCurve {
    std::vector<double> thresholds;
    std::vector<double> values;
    double fitted_exponent = 0.0;
    double C_phi = 0.0;  ///< integral of phi^2 omega^2 + 4 integral of (-phi) omega ^ omega_phi + 2
    /// Relative margins per threshold, (bound - value) / max(bound, tiny); negative means violated.
    std::vector<double> inverse_square_margin;  ///< Cap <= C_phi / t^2
    std::vector<double> sublevel_mass_margin;   ///< omega_phi^2(phi < -t) <= t^2 Cap(phi < -t), t >= 1
    std::vector<double> doubling_margin;        ///< Cap(phi < -2t) <= [omega^2 + 2/t omega^omega_phi + 1/t^2 omega_phi^2](phi < -t)
    std::vector<double> scaling_margin;         ///< s^-2 omega_{max(phi,-s)}^2(phi < -t) <= Cap(phi < -t), s = 2t
    double p = 1.0;
    SandwichValues sandwich;
};

/// Capacity curve of phi (sup phi <= 0 required) with all bound families evaluated.
/// The sandwich is computed only when `with_sandwich` is set (it needs the full step function).
CapacityCurve capacity_curve(const KahlerModel& model, const RelativeProfile& phi,
                             const std::vector<double>& thresholds, double p = 1.0,
                             bool with_sandwich = false);

/// Best value of integral over K of omega_u^2 over a competitor family with
/// -1 <= u <= 0: tangent-line competitors through the boundary of an interval
/// {t <= T} plus `random_count` envelopes of random admissible data.
double competitor_lower_bound(const KahlerModel& model, const Profile& base, double upper,
                              int random_count, std::uint64_t seed);

}  // namespace malab
