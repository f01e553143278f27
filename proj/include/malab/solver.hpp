#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "malab/ma.hpp"
#include "malab/models.hpp"
#include "malab/profiles.hpp"
#include "malab/toric.hpp"

namespace malab {

enum class SolveScheme { ClosedFormRadial, SeparableProduct, NewtonToric };
enum class SolveVerdict { Solved, Diverged, NotInEp };

std::string to_string(SolveScheme scheme);
SolveScheme solve_scheme_from_string(const std::string& text);
std::string to_string(SolveVerdict verdict);

/// How the singular target is approximated before the final solve.
enum class ApproximationMode {
    None,
    Mollify,           ///< Gaussian smoothing of width eps_j plus eps_j omega^2, renormalized
    DensityTruncation  ///< min(f, level_j) against normalized omega^2, renormalized
};

struct SolveRequest {
    double p = 1.0;
    SolveScheme scheme = SolveScheme::ClosedFormRadial;
    ApproximationMode approximation = ApproximationMode::None;
    /// Gaussian widths (Mollify) or density caps (DensityTruncation), in schedule order.
    std::vector<double> schedule;
    /// Newton stopping threshold on the sup-norm of node mass residuals.
    double newton_tolerance = 1e-13;
    int max_newton_steps = 60;
    /// Start Newton from the marginal solves; otherwise from the reference potential.
    bool marginal_start = true;
};

/// Widths 2^-j for j = 3..10.
std::vector<double> default_mollification_widths();

struct NewtonStep {
    double residual = 0.0;  ///< sup-norm of node mass residuals before the step
    double damping = 1.0;   ///< accepted step length
    double min_mass = 0.0;  ///< smallest cell mass after the step
    double projection_distance = 0.0;  ///< distance to the convex envelope after the step
};

struct SolveResult {
    SolveScheme scheme = SolveScheme::ClosedFormRadial;
    SolveVerdict verdict = SolveVerdict::Solved;
    std::string message;
    /// One-dimensional solution (radial) or x factor (separable).
    RelativeProfile profile;
    /// y factor of a separable solution.
    RelativeProfile profile_y;
    /// Two-dimensional potential (toric and separable schemes).
    ToricGrid grid;
    /// Offset against the reference potential at the grid nodes; sup = -1.
    std::vector<double> grid_offset;
    double residual = 0.0;  ///< CDF sup-distance between the solution's measure and the target
    /// Self energy of each approximant, then of the final solution.
    std::vector<double> energy_trace;
    /// Integral of (-phi_j)^p against the unapproximated target.
    std::vector<double> target_energy_trace;
    /// Integral of |phi_j - phi| against the approximant measure mu_j.
    std::vector<double> consistency_trace;
    std::vector<double> schedule;
    std::vector<NewtonStep> newton_trace;
    int newton_steps = 0;
    double projection_distance = 0.0;
};

/// Closed-form inversion on the radial slice: slope = cap * sqrt(F) on each cell.
/// Throws InvalidInput when the target mass is not 1 and NotSolvableInModel when
/// its CDF leaves [0, 1].
SolveResult solve_radial(const KahlerModel& model, const MaMeasure& target, double p = 1.0);

/// Radial solve along an approximation schedule, then the exact target.
SolveResult solve_radial_scheduled(const KahlerModel& model, const MaMeasure& target,
                                   const SolveRequest& request);

/// Factorized solve of a tensor-product target on the toric or product model.
/// Throws NotSolvableInModel when the target is not a tensor product.
SolveResult solve_separable(const KahlerModel& model, const MaMeasure& target, double p = 1.0);

/// Damped Newton iteration for the discrete real Monge-Ampere equation on the
/// toric model, along the requested approximation schedule.
SolveResult solve_newton_toric(const KahlerModel& model, const MaMeasure& target,
                               const SolveRequest& request);

/// Dispatch on request.scheme.
SolveResult solve(const KahlerModel& model, const MaMeasure& target, const SolveRequest& request);

// Targets.

/// Radial target with the given CDF; node i carries the mass between the
/// midpoints around it. F(-inf) becomes the atom at the fixed point and
/// 1 - F(+inf) the atom on the divisor at infinity.
MaMeasure radial_target_from_cdf(const KahlerModel& model, const std::vector<double>& grid,
                                 const std::function<double(double)>& cdf, double cdf_minus_inf,
                                 double cdf_plus_inf);
/// Target whose density near the fixed point behaves like 1/(|z|^4 (-log|z|)^2).
MaMeasure log_singular_radial_target(const KahlerModel& model, const std::vector<double>& grid);
/// Unit point mass at the fixed point.
MaMeasure point_mass_target(const KahlerModel& model, const std::vector<double>& grid);
/// Random smooth radial target: mixture of logistic CDFs, optionally with atoms.
MaMeasure random_radial_target(const KahlerModel& model, const std::vector<double>& grid,
                               std::uint64_t seed, bool with_atoms);

/// Discrete omega^2 on the toric node set (cell masses of the reference potential).
MaMeasure toric_reference_measure(const KahlerModel& model, const std::vector<double>& axis1,
                                  const std::vector<double>& axis2);
/// Smooth positive non-separable density on the toric grid, total mass 2.
MaMeasure random_smooth_toric_target(const KahlerModel& model, std::uint64_t seed);
/// 2 alpha_u (x) alpha_v for two factor measures.
MaMeasure separable_toric_target(const MaMeasure& factor_x, const MaMeasure& factor_y);
/// Factor measure on a toric axis with a logistic-mixture CDF.
MaMeasure smooth_factor_measure(const std::vector<double>& axis, double center, double width);

/// Toric target whose x marginal has CDF (1 + softplus(-t))^-exponent, an L^1
/// density against omega^2 that lies in no L^q, q > 1. The x axis is extended
/// geometrically down to t = -depth.
struct SpikeTarget {
    MaMeasure target;
    std::vector<double> truncation_levels;  ///< density caps reaching depth 2, 4, ... below depth
    std::vector<double> truncation_depths;
};
SpikeTarget spike_toric_target(const KahlerModel& model, double exponent, double depth);

/// Smooth toric potential Psi* = 1/2 log(w00 + w10 e^{2 t1} + w01 e^{2 t2} + w11 e^{2 t1 + 2 t2})
/// (non-separable unless w00 w11 = w10 w01). The target carries the exact mass of
/// each node's box between moment-cell boundaries, integrated by Gauss quadrature.
struct ManufacturedProblem {
    MaMeasure target;
    std::vector<double> exact_values;  ///< Psi* at the nodes
};
ManufacturedProblem manufactured_toric_problem(const KahlerModel& model,
                                               const std::array<double, 4>& weights);

/// Gaussian smoothing on the node grid (per axis for two-dimensional measures)
/// plus width * omega^2, rescaled to the original mass. Atoms are kept.
MaMeasure mollify(const KahlerModel& model, const MaMeasure& target, double width);

// Uniqueness.

struct UniquenessRecord {
    double measure_distance = 0.0;  ///< CDF sup-distance of the two measures
    double deviation = 0.0;         ///< sup |(psi1 - psi2) - mean|
    double tolerance = 1e-5;
    bool pass = false;
};
/// Throws PreconditionViolated when the two measures differ by more than measure_tolerance.
UniquenessRecord uniqueness_check(const KahlerModel& model, const RelativeProfile& first,
                                  const RelativeProfile& second, double tolerance = 1e-5,
                                  double measure_tolerance = 1e-8);
UniquenessRecord uniqueness_check(const KahlerModel& model, const ToricGrid& first,
                                  const ToricGrid& second, double tolerance = 1e-5,
                                  double measure_tolerance = 1e-5);

/// Two invariant potentials on the projective plane, seen in toric coordinates
/// on the box [-half_width, half_width]^2, whose measures both approach the point
/// mass at the fixed point while their difference is not constant.
struct PointMassWitness {
    double half_width = 0.0;
    /// Mass carried by sites with max(t1, t2) <= -half_width / 2, which all
    /// converge to the fixed point as the box grows.
    std::array<double, 2> point_mass{};
    double deviation = 0.0;  ///< sup |(psi1 - psi2) - mean| over the sites
};
PointMassWitness point_mass_witness(double half_width, int points);

/// Full toric potential values -> offset against the reference with sup = -1.
std::vector<double> toric_offset(const KahlerModel& model, const ToricGrid& grid);

}  // namespace malab
