#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <variant>
#include <vector>

namespace malab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative tolerance used by the discrete convexity and slope-window checks.
inline constexpr double kConvexTolerance = 1e-10;

/// Layout of a t-grid: a uniform core on [-half_width, half_width] plus optional
/// geometric extensions reaching |t| = far_left / far_right.
struct GridSpec {
    double half_width = 40.0;
    int points = 4001;
    double far_left = 0.0;   ///< 0 disables the left extension
    double far_right = 0.0;  ///< 0 disables the right extension
    double ratio = 1.01;     ///< spacing growth factor in the extensions
};

std::vector<double> make_grid(const GridSpec& spec);

/// Convex piecewise-linear function on a strictly increasing grid, extended
/// affinely beyond both ends. A tail slope of -inf (left) or +inf (right)
/// means the function is +inf outside the grid.
class ConvexPL {
public:
    ConvexPL() = default;
    ConvexPL(std::vector<double> grid, std::vector<double> values, double left_slope,
             double right_slope);

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double left_slope() const { return left_slope_; }
    double right_slope() const { return right_slope_; }
    std::size_t size() const { return grid_.size(); }

    double operator()(double t) const;
    std::vector<double> cell_slopes() const;

protected:
    std::vector<double> grid_;
    std::vector<double> values_;
    double left_slope_ = 0.0;
    double right_slope_ = 0.0;
};

/// Invariant potential profile: convex, slopes inside [0, slope_cap].
class Profile : public ConvexPL {
public:
    Profile() = default;
    /// Throws NotOmegaPsh when convexity or the slope window fails.
    Profile(std::vector<double> grid, std::vector<double> values, double slope_minus_inf,
            double slope_plus_inf, double slope_cap);

    double slope_minus_inf() const { return left_slope_; }
    double slope_plus_inf() const { return right_slope_; }
    double slope_cap() const { return slope_cap_; }

    /// Same function sampled on another grid (exact for the PL function).
    Profile resampled(const std::vector<double>& new_grid) const;

private:
    double slope_cap_ = 0.5;
};

/// Potential psi = base + offset, with the offset phi stored directly.
class RelativeProfile {
public:
    RelativeProfile() = default;
    /// Offset tail slopes are the slopes of phi beyond the grid.
    RelativeProfile(Profile base, std::vector<double> offset, double offset_slope_minus_inf,
                    double offset_slope_plus_inf);

    static RelativeProfile from_potential(const Profile& base, const Profile& potential);
    static RelativeProfile zero(const Profile& base);

    const Profile& base() const { return base_; }
    const Profile& potential() const { return potential_; }
    const std::vector<double>& offset() const { return offset_; }
    const std::vector<double>& grid() const { return base_.grid(); }
    double offset_slope_minus_inf() const { return offset_left_; }
    double offset_slope_plus_inf() const { return offset_right_; }
    double sup_value() const { return sup_value_; }
    std::size_t size() const { return offset_.size(); }

    /// Offset value at t, using the affine tails.
    double offset_at(double t) const;
    /// Offset slopes on each grid cell.
    std::vector<double> offset_cell_slopes() const;
    /// Limit of phi as t -> -inf / +inf (may be -inf).
    double limit_minus_inf() const;
    double limit_plus_inf() const;

    RelativeProfile shifted(double constant) const;
    /// Shifted so that sup phi equals target_sup.
    RelativeProfile normalized(double target_sup = -1.0) const;
    RelativeProfile resampled(const std::vector<double>& new_grid) const;

private:
    Profile base_;
    Profile potential_;
    std::vector<double> offset_;
    double offset_left_ = 0.0;
    double offset_right_ = 0.0;
    double sup_value_ = 0.0;
};

/// Greatest convex minorant of the samples with slopes clamped to [0, slope_cap].
/// Tail slopes continue the outermost cells.
Profile convex_envelope(std::vector<std::pair<double, double>> samples, double slope_cap);

/// Discrete Legendre transform; the result lives on the slope interval.
ConvexPL legendre(const ConvexPL& function);

struct PowerWeight {
    double alpha;
};
struct NegLogWeight {};
using Weight = std::variant<PowerWeight, NegLogWeight>;

/// Profile of chi(phi) for the admissible weights -(-x)^alpha and -log(-x).
RelativeProfile compose_weight(const RelativeProfile& phi, const Weight& chi);

/// Pointwise maximum of two potentials. Crossings of the affine tails beyond the
/// grid are inserted as extra nodes, so the result grid may be longer.
Profile max_profiles(const Profile& first, const Profile& second);

/// max(phi, chi) for offsets over a shared base, with tail crossings inserted.
RelativeProfile max_relative(const RelativeProfile& first, const RelativeProfile& second);

/// lambda * phi for lambda in [0, 1].
RelativeProfile scale(const RelativeProfile& phi, double lambda);

/// Canonical cutoff max(phi, -level).
RelativeProfile truncate(const RelativeProfile& phi, double level);

/// Convex combination (1 - weight) phi + weight psi over a shared base.
RelativeProfile blend(const RelativeProfile& phi, const RelativeProfile& psi, double weight);

/// True when every offset value is >= the other's (within tol), tails included.
bool dominates(const RelativeProfile& upper, const RelativeProfile& lower, double tol = 1e-12);

}  // namespace malab
