#include "malab/models.hpp"

#include <cmath>

#include "malab/errors.hpp"
#include "malab/ma.hpp"

namespace malab {

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::RadialP2: return "radial-p2";
        case ModelKind::ProductP1P1: return "product-p1p1";
        case ModelKind::ToricP1P1: return "toric-p1p1";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& text) {
    if (text == "radial-p2") return ModelKind::RadialP2;
    if (text == "product-p1p1") return ModelKind::ProductP1P1;
    if (text == "toric-p1p1") return ModelKind::ToricP1P1;
    throw InvalidInput("unknown model kind '" + text + "'");
}

std::string to_string(Normalization normalization) {
    return normalization == Normalization::Raw ? "raw" : "unit-volume";
}

Normalization normalization_from_string(const std::string& text) {
    if (text == "raw") return Normalization::Raw;
    if (text == "unit-volume") return Normalization::UnitVolume;
    throw InvalidInput("unknown normalization '" + text + "'");
}

double KahlerModel::reference_value(double t) const {
    const double s = (t - t_shift_) / t_scale_;
    if (kind_ == ModelKind::RadialP2) return 0.5 * softplus(s);
    return 0.5 * softplus(2.0 * s);
}

double KahlerModel::reference_slope(double t) const {
    const double s = (t - t_shift_) / t_scale_;
    if (kind_ == ModelKind::RadialP2) return 0.5 * logistic(s) / t_scale_;
    return logistic(2.0 * s) / t_scale_;
}

Profile KahlerModel::reference_on(const std::vector<double>& grid) const {
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = reference_value(grid[i]);
    return Profile(grid, std::move(values), 0.0, slope_cap_, slope_cap_);
}

RelativeProfile KahlerModel::zero_on(const std::vector<double>& grid) const {
    return RelativeProfile::zero(reference_on(grid));
}

std::vector<double> KahlerModel::default_grid() const {
    auto grid = make_grid(GridSpec{});
    for (double& t : grid) t = t_scale_ * t + t_shift_;
    return grid;
}

std::vector<double> KahlerModel::deep_grid(bool left, bool right, double reach) const {
    GridSpec spec;
    spec.far_left = left ? reach : 0.0;
    spec.far_right = right ? reach : 0.0;
    auto grid = make_grid(spec);
    for (double& t : grid) t = t_scale_ * t + t_shift_;
    return grid;
}

std::vector<double> KahlerModel::toric_axis() const {
    if (kind_ != ModelKind::ToricP1P1) throw InvalidInput("toric axis requested on a 1-D model");
    // Nodes whose reference secant slopes fall exactly on the moment-cell
    // boundaries k / N, so the sampled reference has uniform cell masses.
    // Built outward from the centre and mirrored, using R(-t) = R(t) - t.
    const auto n = static_cast<std::size_t>(resolution_);
    const double size = resolution_;
    std::vector<double> axis(n, 0.0);
    std::size_t start = (n - 1) / 2;
    if (n % 2 == 0) {
        const double centre = (size / 2.0 + 0.5) / size;
        start = n / 2;
        axis[start] = 0.5 * std::log(centre / (1.0 - centre));
        axis[start - 1] = -axis[start];
    }
    for (std::size_t i = start; i + 1 < n; ++i) {
        const double target = static_cast<double>(i + 1) / size;
        const double from = axis[i];
        auto excess = [&](double b) {
            return (reference_value(b) - reference_value(from)) / (b - from) - target;
        };
        double lo = from, hi = from + 1.0;
        while (excess(hi) < 0.0) hi += 1.0;
        for (int iteration = 0; iteration < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++iteration) {
            const double mid = 0.5 * (lo + hi);
            (excess(mid) < 0.0 ? lo : hi) = mid;
        }
        axis[i + 1] = 0.5 * (lo + hi);
    }
    for (std::size_t i = 0; i < start; ++i) axis[i] = -axis[n - 1 - i];
    return axis;
}

KahlerModel KahlerModel::with_normalization(Normalization normalization) const {
    KahlerModel copy = *this;
    copy.normalization_ = normalization;
    return copy;
}

KahlerModel radial_p2(double t_scale, double t_shift) {
    if (!(t_scale > 0.0)) throw InvalidInput("t_scale must be positive");
    KahlerModel model;
    model.kind_ = ModelKind::RadialP2;
    model.slope_cap_ = 0.5 / t_scale;
    model.measure_exponent_ = 2;
    model.volume_ = 1.0;
    model.t_scale_ = t_scale;
    model.t_shift_ = t_shift;

    // Self-test of the closed-form constants: omega^2 has unit mass and the
    // potential with slope cap everywhere is a unit point mass at the fixed point.
    const auto grid = model.default_grid();
    const auto reference = ma_measure(model, model.zero_on(grid));
    if (std::abs(reference.total_mass - 1.0) > 1e-10 || !reference.atoms.empty()) {
        throw Error("radial model self-test failed: reference mass");
    }
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = model.slope_cap_ * grid[i];
    const Profile cone(grid, std::move(values), model.slope_cap_, model.slope_cap_,
                       model.slope_cap_);
    const auto dirac = ma_measure(model, RelativeProfile::from_potential(model.reference_on(grid), cone));
    if (std::abs(dirac.atom(location::kFixedPoint) - 1.0) > 1e-12 || dirac.density_mass() > 1e-12) {
        throw Error("radial model self-test failed: point mass");
    }
    return model;
}

KahlerModel product_p1p1() {
    KahlerModel model;
    model.kind_ = ModelKind::ProductP1P1;
    model.slope_cap_ = 1.0;
    model.measure_exponent_ = 1;
    model.volume_ = 2.0;
    return model;
}

KahlerModel toric_p1p1(int resolution) {
    if (resolution < 16) throw InvalidInput("toric resolution must be at least 16");
    KahlerModel model;
    model.kind_ = ModelKind::ToricP1P1;
    model.slope_cap_ = 1.0;
    model.measure_exponent_ = 1;
    model.volume_ = 2.0;
    model.resolution_ = resolution;
    return model;
}

}  // namespace malab
