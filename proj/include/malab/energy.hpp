#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "malab/ma.hpp"
#include "malab/models.hpp"
#include "malab/profiles.hpp"

namespace malab {

enum class Finiteness { Finite, Infinite, Inconclusive };
std::string to_string(Finiteness finiteness);

/// Outcome of scanning a functional along the levels k = 2^0 .. 2^10.
struct Verdict {
    Finiteness finiteness = Finiteness::Inconclusive;
    std::vector<double> levels;
    std::vector<double> values;
    double increment_ratio = 0.0;      ///< last increment over the previous one
    double relative_increment = 0.0;   ///< last increment over the last value
    bool finite() const { return finiteness == Finiteness::Finite; }
};

/// Truncation levels 2^0 .. 2^10.
std::vector<double> default_levels();

/// Classifies a nondecreasing-in-level sequence as bounded or divergent from
/// the decay of its increments: ratio below 0.995 is finite, above 1.005 is
/// infinite, in between inconclusive. A sequence that has stopped moving is finite.
Verdict classify_sequence(std::vector<double> levels, std::vector<double> values);

/// Integral of (-phi)^p against a one-dimensional measure on phi's grid; atoms
/// use the limit of -phi at the matching end. Requires phi <= 0.
double integrate_power(const RelativeProfile& phi, const MaMeasure& measure, double p);
/// Integral of a function of t against a one-dimensional measure (atoms
/// evaluated at the limits supplied).
double integrate_function(const MaMeasure& measure, const std::function<double(double)>& f,
                          double value_at_minus_inf, double value_at_plus_inf);

/// Integral of (-phi)^p omega_phi^2.
double lp_energy(const KahlerModel& model, const RelativeProfile& phi, double p);
/// Integral of d phi ^ d^c phi ^ omega.
double gradient_energy(const KahlerModel& model, const RelativeProfile& phi);
/// Integral of d(phi - psi) ^ d^c(phi - psi) ^ omega (shared base and grid).
double gradient_distance(const KahlerModel& model, const RelativeProfile& phi,
                         const RelativeProfile& psi);
/// L2(omega^2) norm of phi plus the L2 norm of its gradient.
double sobolev_norm(const KahlerModel& model, const RelativeProfile& phi);
/// sobolev_norm of phi - psi (shared base and grid).
double sobolev_distance(const KahlerModel& model, const RelativeProfile& phi,
                        const RelativeProfile& psi);
/// Difference of two offsets as a signed function over the shared base (not ω-psh).
struct OffsetDifference {
    std::vector<double> values;
    double left_slope = 0.0;
    double right_slope = 0.0;
};
OffsetDifference offset_difference(const RelativeProfile& phi, const RelativeProfile& psi);

/// Scans of the canonical truncations max(phi, -k).
Verdict truncation_scan(const RelativeProfile& phi,
                        const std::function<double(const RelativeProfile&)>& functional);
/// Membership in the weighted class: energies of truncations stay bounded.
Verdict ep_membership(const KahlerModel& model, const RelativeProfile& phi, double p);
/// Membership in the finite-gradient class along truncations.
Verdict gradient_membership(const KahlerModel& model, const RelativeProfile& phi);
/// phi in L^p(omega_phi^2), scanned over the sets {phi > -k}.
Verdict naive_lp_membership(const KahlerModel& model, const RelativeProfile& phi, double p);

struct EnergyReport {
    double p = 1.0;
    double shift = 0.0;  ///< constant subtracted to enforce phi <= 0
    double sup_value = 0.0;
    double E_p_full = 0.0;
    std::array<double, 3> E_p_mixed{};  ///< against omega^2, omega ^ omega_phi, omega_phi^2
    double gradient_energy = 0.0;
    double e_p = 0.0;
    double sobolev_norm = 0.0;
    Verdict in_E;
    Verdict in_E1;
    Verdict in_Ep;
    Verdict naive_Lp;
};

EnergyReport energy_report(const KahlerModel& model, const RelativeProfile& phi, double p);

/// Cross energies of two potentials, the constant M of the bounds and their margins.
struct EnergyConcavity {
    double p = 1.0;
    /// [u][measure] with u in {phi, psi} and measure in
    /// {omega^2, omega ^ omega_phi, omega ^ omega_psi, omega_phi^2, omega_psi^2, omega_phi ^ omega_psi}
    std::array<std::array<double, 6>, 2> cross{};
    double M = 0.0;            ///< max of the self energies
    double mixed_bound = 0.0;  ///< 6M for p = 1, (p+1)^{p/(p-1)} M for p > 1
    double self_mixed_bound = 0.0;  ///< 4M for p = 1, same as mixed_bound for p > 1
    double worst_margin = 0.0;      ///< minimum of bound - value (relative)
};

EnergyConcavity energy_concavity_data(const KahlerModel& model, const RelativeProfile& phi,
                                      const RelativeProfile& psi, double p);

/// Product surface: factor * integral of (-(u(x) + v(y)))^p against the tensor
/// product of two factor measures, pole atoms evaluated at the factor limits.
double product_power_integral(const RelativeProfile& u, const MaMeasure& measure_x,
                              const RelativeProfile& v, const MaMeasure& measure_y,
                              double factor, double p);

/// Energies of u(x) + v(y) on the product surface, in the model's normalization.
struct ProductEnergies {
    double against_omega_squared = 0.0;  ///< integral of (-phi)^p omega^2
    double against_mixed = 0.0;          ///< against omega ^ omega_phi
    double against_full = 0.0;           ///< against omega_phi^2
    double factor_v = 0.0;               ///< integral of (-v)^p against the factor measure of v
};
ProductEnergies product_energies(const KahlerModel& model, const RelativeProfile& u,
                                 const RelativeProfile& v, double p);

}  // namespace malab
