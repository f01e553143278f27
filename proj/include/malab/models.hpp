#pragma once

#include <string>
#include <vector>

#include "malab/profiles.hpp"

namespace malab {

enum class ModelKind { RadialP2, ProductP1P1, ToricP1P1 };
enum class Normalization { Raw, UnitVolume };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& text);
std::string to_string(Normalization normalization);
Normalization normalization_from_string(const std::string& text);

/// Geometry backend. One-dimensional profiles live on the radial slice of the
/// projective plane (measure exponent 2) or on a projective-line factor
/// (measure exponent 1). The log-coordinate may be reparameterized affinely,
/// t_new = t_scale * t + t_shift; masses and energies are invariant.
class KahlerModel {
public:
    ModelKind kind() const { return kind_; }
    Normalization normalization() const { return normalization_; }
    /// Cap on the slope of each one-dimensional potential.
    double slope_cap() const { return slope_cap_; }
    /// Power of the normalized slope giving the measure CDF (2 radial, 1 factor).
    int measure_exponent() const { return measure_exponent_; }
    /// Raw total mass of omega^2 (1 radial, 2 for the two-factor models).
    double volume() const { return volume_; }
    int resolution() const { return resolution_; }
    double t_scale() const { return t_scale_; }
    double t_shift() const { return t_shift_; }

    /// Reference potential of omega (per factor for the two-factor models).
    double reference_value(double t) const;
    double reference_slope(double t) const;
    /// Reference potential sampled on a grid, with exact asymptotic tails.
    Profile reference_on(const std::vector<double>& grid) const;
    RelativeProfile zero_on(const std::vector<double>& grid) const;
    /// Offset sampled from a callable on the grid.
    template <class F>
    RelativeProfile offset_on(const std::vector<double>& grid, F&& offset, double left_slope,
                              double right_slope) const {
        std::vector<double> values(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) values[i] = offset(grid[i]);
        return RelativeProfile(reference_on(grid), std::move(values), left_slope, right_slope);
    }
    /// Grid used when none is given.
    std::vector<double> default_grid() const;
    /// Grid with geometric extensions for profiles that are unbounded at either end.
    std::vector<double> deep_grid(bool left, bool right, double reach = 1e13) const;
    /// Toric node axis for the given resolution: the sampled reference has secant
    /// slopes k / N between consecutive nodes, so every moment cell has mass 1 / N.
    std::vector<double> toric_axis() const;

    KahlerModel with_normalization(Normalization normalization) const;

    friend KahlerModel radial_p2(double t_scale, double t_shift);
    friend KahlerModel product_p1p1();
    friend KahlerModel toric_p1p1(int resolution);

private:
    ModelKind kind_ = ModelKind::RadialP2;
    Normalization normalization_ = Normalization::UnitVolume;
    double slope_cap_ = 0.5;
    int measure_exponent_ = 2;
    double volume_ = 1.0;
    int resolution_ = 0;
    double t_scale_ = 1.0;
    double t_shift_ = 0.0;
};

/// Radial slice of the projective plane with the Fubini-Study form.
/// Runs a self-test of the closed-form mass constants on construction.
KahlerModel radial_p2(double t_scale = 1.0, double t_shift = 0.0);
/// Product of two projective lines, each factor carrying unit area.
KahlerModel product_p1p1();
/// Same surface with two-dimensional grid potentials; resolution >= 16.
KahlerModel toric_p1p1(int resolution);

/// Log-sum form of log(1 + e^x), stable for large |x|.
double softplus(double x);
double logistic(double x);

}  // namespace malab
