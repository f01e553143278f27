#pragma once

#include <string>
#include <vector>

#include "malab/models.hpp"
#include "malab/profiles.hpp"
#include "malab/toric.hpp"

namespace malab {

namespace location {
inline constexpr const char* kFixedPoint = "fixed_point_a";
inline constexpr const char* kDivisorAtInfinity = "divisor_at_infinity";
// One-dimensional factor poles.
inline constexpr const char* kPoleZero = "pole_zero";
inline constexpr const char* kPoleInfinity = "pole_infinity";
// Two-dimensional strata: first index refers to the x factor, second to y;
// "0" is t -> -inf, "inf" is t -> +inf, "*" is the whole factor.
inline constexpr const char* kCorner00 = "corner_0_0";
inline constexpr const char* kCorner0Inf = "corner_0_inf";
inline constexpr const char* kCornerInf0 = "corner_inf_0";
inline constexpr const char* kCornerInfInf = "corner_inf_inf";
inline constexpr const char* kDivisorX0 = "divisor_0_*";
inline constexpr const char* kDivisorXInf = "divisor_inf_*";
inline constexpr const char* kDivisorY0 = "divisor_*_0";
inline constexpr const char* kDivisorYInf = "divisor_*_inf";
}  // namespace location

enum class MeasureKind { OneD, TwoD };

struct Atom {
    std::string location;
    double mass = 0.0;
};

/// Node masses on a grid plus atoms on strata of the model.
struct MaMeasure {
    MeasureKind kind = MeasureKind::OneD;
    std::vector<double> grid;     ///< OneD nodes, or the first TwoD axis
    std::vector<double> grid2;    ///< second TwoD axis
    std::vector<double> density;  ///< mass carried by each node (TwoD: index i * grid2.size() + j)
    std::vector<Atom> atoms;
    double total_mass = 0.0;
    double volume = 1.0;  ///< raw model volume, used for unit-volume reporting

    double atom(const std::string& where) const;
    double density_mass() const;
    /// OneD: mass of {t <= grid[i]} including the atom at the fixed point.
    /// TwoD: mass of {t1 <= grid[i], t2 <= grid2[j]} with corner atoms placed
    /// at the matching extremes.
    std::vector<double> cdf() const;
    MaMeasure normalized() const;
    /// Throws InvalidInput when a mass is negative or the bookkeeping is off.
    void check() const;
};

/// Sup-distance of cumulative distributions; measures must share their grids.
double cdf_distance(const MaMeasure& a, const MaMeasure& b);

/// Full Monge-Ampere measure of a one-dimensional profile (radial slice or factor).
MaMeasure ma_measure(const KahlerModel& model, const RelativeProfile& phi);
/// Monge-Ampere measure of a grid potential on the toric surface.
MaMeasure ma_measure(const KahlerModel& model, const ToricGrid& potential);
/// Product surface, potential u(x) + v(y).
MaMeasure ma_measure(const KahlerModel& model, const RelativeProfile& u, const RelativeProfile& v);

/// Mixed measure of two radial profiles (polarization of the quadratic CDF).
MaMeasure mixed_measure(const KahlerModel& model, const RelativeProfile& phi,
                        const RelativeProfile& psi);
/// omega wedge omega_phi.
MaMeasure omega_wedge(const KahlerModel& model, const RelativeProfile& phi);
/// Product surface, mixed measure of u1 + v1 and u2 + v2.
MaMeasure mixed_measure(const KahlerModel& model, const RelativeProfile& u1,
                        const RelativeProfile& v1, const RelativeProfile& u2,
                        const RelativeProfile& v2);
/// Toric surface, polarization of grid potentials sharing their node set.
MaMeasure mixed_measure(const KahlerModel& model, const ToricGrid& first, const ToricGrid& second);

/// Tensor product measure of two factor measures scaled by `factor`.
MaMeasure tensor_measure(const MaMeasure& x, const MaMeasure& y, double factor);

/// Weighted gradient pairing: integral of (-phi)^weight_power d phi ^ d^c phi ^ omega_psi
/// on the radial slice. Exact for piecewise-linear data; may return +inf.
double gradient_current_mass(const KahlerModel& model, const RelativeProfile& phi,
                             const RelativeProfile& psi, double weight_power = 0.0);

/// Normalized slope data of a radial profile: cell values s/cap plus tails.
struct NormalizedSlopes {
    double minus_inf = 0.0;
    std::vector<double> cells;
    double plus_inf = 0.0;
};
NormalizedSlopes normalized_slopes(const KahlerModel& model, const Profile& potential);

}  // namespace malab
