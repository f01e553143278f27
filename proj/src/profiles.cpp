#include "malab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "malab/errors.hpp"

namespace malab {

namespace {

constexpr double kZeroSlope = 1e-12;

void require_grid(const std::vector<double>& grid, const std::vector<double>& values) {
    if (grid.empty() || grid.size() != values.size()) {
        throw InvalidInput("grid and values must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || !std::isfinite(values[i])) {
            throw InvalidInput("non-finite grid point or value at index " + std::to_string(i));
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw InvalidInput("grid must be strictly increasing");
        }
    }
}

std::vector<double> slopes_of(const std::vector<double>& grid, const std::vector<double>& values) {
    std::vector<double> slopes(grid.size() > 0 ? grid.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        slopes[i] = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
    }
    return slopes;
}

// Scale used to turn kConvexTolerance into an absolute slope tolerance.
double slope_scale(const std::vector<double>& slopes, double left, double right) {
    double scale = 1.0;
    for (double s : slopes) scale = std::max(scale, std::abs(s));
    if (std::isfinite(left)) scale = std::max(scale, std::abs(left));
    if (std::isfinite(right)) scale = std::max(scale, std::abs(right));
    return scale;
}

void require_convex(const std::vector<double>& slopes, double left, double right, double tol) {
    double previous = left;
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        if (slopes[i] < previous - tol) {
            throw NotOmegaPsh("convexity fails at cell " + std::to_string(i));
        }
        previous = std::max(previous, slopes[i]);
    }
    if (right < previous - tol) throw NotOmegaPsh("right tail slope below last cell slope");
}

double interpolate(const std::vector<double>& grid, const std::vector<double>& values, double left,
                   double right, double t) {
    const std::size_t n = grid.size();
    if (t <= grid.front()) {
        if (t == grid.front()) return values.front();
        if (left == -kInf) return kInf;
        return values.front() + left * (t - grid.front());
    }
    if (t >= grid.back()) {
        if (t == grid.back()) return values.back();
        if (right == kInf) return kInf;
        return values.back() + right * (t - grid.back());
    }
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    const std::size_t lo = hi - 1;
    (void)n;
    const double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
    return values[lo] + w * (values[hi] - values[lo]);
}

struct MaxResult {
    std::vector<double> grid;
    std::vector<double> values;
    double left;
    double right;
};

// Nodewise maximum of two PL functions on one grid; tail crossings past the
// ends become new nodes so that the result stays exact beyond the grid.
MaxResult pointwise_max(const std::vector<double>& grid, const std::vector<double>& a,
                        double a_left, double a_right, const std::vector<double>& b,
                        double b_left, double b_right) {
    MaxResult out;
    const std::size_t n = grid.size();
    std::vector<double> core(n);
    for (std::size_t i = 0; i < n; ++i) core[i] = std::max(a[i], b[i]);

    // Left tail: the line that wins at t0 may lose further left.
    double left_slope;
    bool insert_left = false;
    double left_node = 0.0, left_value = 0.0;
    {
        const bool a_wins = a.front() >= b.front();
        const double win_v = a_wins ? a.front() : b.front();
        const double lose_v = a_wins ? b.front() : a.front();
        const double win_s = a_wins ? a_left : b_left;
        const double lose_s = a_wins ? b_left : a_left;
        if (win_s <= lose_s) {
            left_slope = win_s;
        } else {
            const double gap = (win_v - lose_v) / (win_s - lose_s);
            left_slope = lose_s;
            if (gap > 1e-9 * std::max(1.0, std::abs(grid.front()))) {
                insert_left = true;
                left_node = grid.front() - gap;
                left_value = win_v - win_s * gap;
            }
        }
    }
    double right_slope;
    bool insert_right = false;
    double right_node = 0.0, right_value = 0.0;
    {
        const bool a_wins = a.back() >= b.back();
        const double win_v = a_wins ? a.back() : b.back();
        const double lose_v = a_wins ? b.back() : a.back();
        const double win_s = a_wins ? a_right : b_right;
        const double lose_s = a_wins ? b_right : a_right;
        if (win_s >= lose_s) {
            right_slope = win_s;
        } else {
            const double gap = (win_v - lose_v) / (lose_s - win_s);
            right_slope = lose_s;
            if (gap > 1e-9 * std::max(1.0, std::abs(grid.back()))) {
                insert_right = true;
                right_node = grid.back() + gap;
                right_value = win_v + win_s * gap;
            }
        }
    }
    out.grid.reserve(n + 2);
    out.values.reserve(n + 2);
    if (insert_left) {
        out.grid.push_back(left_node);
        out.values.push_back(left_value);
    }
    out.grid.insert(out.grid.end(), grid.begin(), grid.end());
    out.values.insert(out.values.end(), core.begin(), core.end());
    if (insert_right) {
        out.grid.push_back(right_node);
        out.values.push_back(right_value);
    }
    out.left = left_slope;
    out.right = right_slope;
    return out;
}

void require_same_grid(const std::vector<double>& g1, const std::vector<double>& g2) {
    if (g1 != g2) throw InvalidInput("profiles must share a grid (resample first)");
}

}  // namespace

std::vector<double> make_grid(const GridSpec& spec) {
    if (spec.points < 2 || !(spec.half_width > 0.0)) {
        throw InvalidInput("grid needs at least 2 points and a positive half width");
    }
    if (spec.ratio < 1.0) throw InvalidInput("grid ratio must be >= 1");
    const double h = 2.0 * spec.half_width / (spec.points - 1);
    std::vector<double> core(static_cast<std::size_t>(spec.points));
    for (int i = 0; i < spec.points; ++i) {
        core[static_cast<std::size_t>(i)] = -spec.half_width + h * i;
    }
    core.back() = spec.half_width;

    auto extension = [&](double far) {
        std::vector<double> steps;
        if (far <= spec.half_width) return steps;
        double position = spec.half_width;
        double step = h;
        while (true) {
            step *= spec.ratio;
            const double next = position + step;
            if (next >= far - 0.5 * step) {
                steps.push_back(far);
                break;
            }
            steps.push_back(next);
            position = next;
        }
        return steps;
    };
    std::vector<double> grid;
    const auto left = extension(spec.far_left);
    const auto right = extension(spec.far_right);
    grid.reserve(left.size() + core.size() + right.size());
    for (auto it = left.rbegin(); it != left.rend(); ++it) grid.push_back(-*it);
    grid.insert(grid.end(), core.begin(), core.end());
    grid.insert(grid.end(), right.begin(), right.end());
    return grid;
}

ConvexPL::ConvexPL(std::vector<double> grid, std::vector<double> values, double left_slope,
                   double right_slope)
    : grid_(std::move(grid)), values_(std::move(values)), left_slope_(left_slope),
      right_slope_(right_slope) {
    require_grid(grid_, values_);
    if (std::isnan(left_slope_) || std::isnan(right_slope_) || left_slope_ == kInf ||
        right_slope_ == -kInf) {
        throw InvalidInput("invalid tail slopes");
    }
    const auto slopes = cell_slopes();
    const double tol = kConvexTolerance * slope_scale(slopes, left_slope_, right_slope_);
    require_convex(slopes, left_slope_, right_slope_, tol);
}

double ConvexPL::operator()(double t) const {
    return interpolate(grid_, values_, left_slope_, right_slope_, t);
}

std::vector<double> ConvexPL::cell_slopes() const { return slopes_of(grid_, values_); }

Profile::Profile(std::vector<double> grid, std::vector<double> values, double slope_minus_inf,
                 double slope_plus_inf, double slope_cap)
    : slope_cap_(slope_cap) {
    require_grid(grid, values);
    if (grid.size() < 2) throw InvalidInput("a profile needs at least two grid points");
    if (!(slope_cap > 0.0) || !std::isfinite(slope_cap)) {
        throw InvalidInput("slope cap must be positive and finite");
    }
    if (!std::isfinite(slope_minus_inf) || !std::isfinite(slope_plus_inf)) {
        throw InvalidInput("profile tail slopes must be finite");
    }
    const auto slopes = slopes_of(grid, values);
    const double tol = kConvexTolerance * std::max(slope_cap, 1.0);
    if (slope_minus_inf < -tol) throw NotOmegaPsh("negative slope at -inf");
    if (slope_plus_inf > slope_cap + tol) throw NotOmegaPsh("slope at +inf exceeds the cap");
    require_convex(slopes, slope_minus_inf, slope_plus_inf, tol);
    grid_ = std::move(grid);
    values_ = std::move(values);
    left_slope_ = std::clamp(slope_minus_inf, 0.0, slope_cap);
    right_slope_ = std::clamp(slope_plus_inf, 0.0, slope_cap);
}

Profile Profile::resampled(const std::vector<double>& new_grid) const {
    std::vector<double> values(new_grid.size());
    for (std::size_t i = 0; i < new_grid.size(); ++i) values[i] = (*this)(new_grid[i]);
    return Profile(new_grid, std::move(values), left_slope_, right_slope_, slope_cap_);
}

RelativeProfile::RelativeProfile(Profile base, std::vector<double> offset,
                                 double offset_slope_minus_inf, double offset_slope_plus_inf)
    : base_(std::move(base)), offset_(std::move(offset)) {
    if (offset_.size() != base_.size()) throw InvalidInput("offset length differs from base grid");
    for (double v : offset_) {
        if (!std::isfinite(v)) throw InvalidInput("non-finite offset value");
    }
    const double cap = base_.slope_cap();
    if (offset_slope_minus_inf < -kZeroSlope * cap || offset_slope_plus_inf > kZeroSlope * cap) {
        throw InvalidInput("offset must be bounded above (tail slopes point downward)");
    }
    offset_left_ = std::max(offset_slope_minus_inf, 0.0);
    offset_right_ = std::min(offset_slope_plus_inf, 0.0);
    std::vector<double> values(offset_.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = base_.values()[i] + offset_[i];
    potential_ = Profile(base_.grid(), std::move(values), base_.slope_minus_inf() + offset_left_,
                         base_.slope_plus_inf() + offset_right_, cap);
    sup_value_ = *std::max_element(offset_.begin(), offset_.end());
}

RelativeProfile RelativeProfile::from_potential(const Profile& base, const Profile& potential) {
    require_same_grid(base.grid(), potential.grid());
    std::vector<double> offset(base.size());
    for (std::size_t i = 0; i < offset.size(); ++i) {
        offset[i] = potential.values()[i] - base.values()[i];
    }
    return RelativeProfile(base, std::move(offset),
                           potential.slope_minus_inf() - base.slope_minus_inf(),
                           potential.slope_plus_inf() - base.slope_plus_inf());
}

RelativeProfile RelativeProfile::zero(const Profile& base) {
    return RelativeProfile(base, std::vector<double>(base.size(), 0.0), 0.0, 0.0);
}

double RelativeProfile::offset_at(double t) const {
    return interpolate(base_.grid(), offset_, offset_left_, offset_right_, t);
}

std::vector<double> RelativeProfile::offset_cell_slopes() const {
    return slopes_of(base_.grid(), offset_);
}

double RelativeProfile::limit_minus_inf() const {
    return offset_left_ > kZeroSlope * base_.slope_cap() ? -kInf : offset_.front();
}

double RelativeProfile::limit_plus_inf() const {
    return offset_right_ < -kZeroSlope * base_.slope_cap() ? -kInf : offset_.back();
}

RelativeProfile RelativeProfile::shifted(double constant) const {
    std::vector<double> offset = offset_;
    for (double& v : offset) v += constant;
    return RelativeProfile(base_, std::move(offset), offset_left_, offset_right_);
}

RelativeProfile RelativeProfile::normalized(double target_sup) const {
    return shifted(target_sup - sup_value_);
}

RelativeProfile RelativeProfile::resampled(const std::vector<double>& new_grid) const {
    std::vector<double> offset(new_grid.size());
    for (std::size_t i = 0; i < new_grid.size(); ++i) offset[i] = offset_at(new_grid[i]);
    return RelativeProfile(base_.resampled(new_grid), std::move(offset), offset_left_,
                           offset_right_);
}

Profile convex_envelope(std::vector<std::pair<double, double>> samples, double slope_cap) {
    if (samples.size() < 2) throw InvalidInput("convex envelope needs at least two samples");
    for (const auto& [t, y] : samples) {
        if (!std::isfinite(t) || !std::isfinite(y)) throw InvalidInput("non-finite sample");
    }
    std::sort(samples.begin(), samples.end());
    std::vector<std::pair<double, double>> points;
    points.reserve(samples.size());
    for (const auto& sample : samples) {
        if (!points.empty() && points.back().first == sample.first) {
            points.back().second = std::min(points.back().second, sample.second);
        } else {
            points.push_back(sample);
        }
    }
    if (points.size() < 2) throw InvalidInput("convex envelope needs two distinct abscissae");

    // Monotone-chain lower hull.
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < points.size(); ++i) {
        while (hull.size() >= 2) {
            const auto& o = points[hull[hull.size() - 2]];
            const auto& m = points[hull.back()];
            const auto& p = points[i];
            const double cross =
                (m.first - o.first) * (p.second - o.second) - (m.second - o.second) * (p.first - o.first);
            if (cross <= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(i);
    }
    auto hull_slope = [&](std::size_t k) {
        const auto& l = points[hull[k]];
        const auto& r = points[hull[k + 1]];
        return (r.second - l.second) / (r.first - l.first);
    };
    // First hull vertex where the slope becomes nonnegative, and the first
    // one after it where the slope exceeds the cap.
    std::size_t low = hull.size() - 1;
    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
        if (hull_slope(k) >= 0.0) {
            low = k;
            break;
        }
    }
    std::size_t high = hull.size() - 1;
    for (std::size_t k = low; k + 1 < hull.size(); ++k) {
        if (hull_slope(k) > slope_cap) {
            high = k;
            break;
        }
    }
    const double t_low = points[hull[low]].first, y_low = points[hull[low]].second;
    const double t_high = points[hull[high]].first, y_high = points[hull[high]].second;

    std::vector<double> grid(points.size()), values(points.size());
    std::size_t segment = low;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double t = points[i].first;
        grid[i] = t;
        if (t <= t_low) {
            values[i] = y_low;
        } else if (t >= t_high) {
            values[i] = y_high + slope_cap * (t - t_high);
        } else {
            while (points[hull[segment + 1]].first < t) ++segment;
            const auto& l = points[hull[segment]];
            const auto& r = points[hull[segment + 1]];
            values[i] = l.second + (r.second - l.second) * (t - l.first) / (r.first - l.first);
        }
        values[i] = std::min(values[i], points[i].second);
    }
    const double first = (values[1] - values[0]) / (grid[1] - grid[0]);
    const std::size_t n = grid.size();
    const double last = (values[n - 1] - values[n - 2]) / (grid[n - 1] - grid[n - 2]);
    return Profile(std::move(grid), std::move(values), std::clamp(first, 0.0, slope_cap),
                   std::clamp(last, 0.0, slope_cap), slope_cap);
}

ConvexPL legendre(const ConvexPL& function) {
    const auto& grid = function.grid();
    const auto& values = function.values();
    const auto slopes = function.cell_slopes();
    const std::size_t n = grid.size();
    const bool left_finite = std::isfinite(function.left_slope());
    const bool right_finite = std::isfinite(function.right_slope());

    std::vector<double> nodes;
    std::vector<double> duals;
    auto push = [&](double slope, std::size_t vertex) {
        const double value = slope * grid[vertex] - values[vertex];
        const double tol = 1e-14 * std::max(1.0, std::abs(slope));
        if (!nodes.empty() && slope <= nodes.back() + tol) return;
        nodes.push_back(slope);
        duals.push_back(value);
    };
    if (left_finite) push(function.left_slope(), 0);
    for (std::size_t k = 0; k < slopes.size(); ++k) push(slopes[k], k);
    if (right_finite) push(function.right_slope(), n - 1);

    if (nodes.empty()) {
        // A single point: its transform is the affine function slope = grid[0].
        return ConvexPL({0.0}, {-values[0]}, grid[0], grid[0]);
    }
    const double dual_left = left_finite ? -kInf : grid.front();
    const double dual_right = right_finite ? kInf : grid.back();
    return ConvexPL(std::move(nodes), std::move(duals), dual_left, dual_right);
}

RelativeProfile compose_weight(const RelativeProfile& phi, const Weight& chi) {
    std::vector<double> offset(phi.size());
    double left = 0.0, right = 0.0;
    if (const auto* power = std::get_if<PowerWeight>(&chi)) {
        const double alpha = power->alpha;
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("power weight needs alpha in [0,1]");
        if (phi.sup_value() > -1.0 + 1e-12) {
            throw PreconditionViolated("power weight requires phi <= -1");
        }
        for (std::size_t i = 0; i < offset.size(); ++i) {
            offset[i] = -std::pow(-phi.offset()[i], alpha);
        }
        if (alpha == 1.0) {
            left = phi.offset_slope_minus_inf();
            right = phi.offset_slope_plus_inf();
        }
    } else {
        if (phi.sup_value() > -2.0 + 1e-12) {
            throw PreconditionViolated("negative-log weight requires phi <= -2");
        }
        for (std::size_t i = 0; i < offset.size(); ++i) offset[i] = -std::log(-phi.offset()[i]);
    }
    // Sublinear weights flatten the tails: the composed slope tends to 0.
    return RelativeProfile(phi.base(), std::move(offset), left, right);
}

Profile max_profiles(const Profile& first, const Profile& second) {
    require_same_grid(first.grid(), second.grid());
    if (first.slope_cap() != second.slope_cap()) throw InvalidInput("slope caps differ");
    auto result = pointwise_max(first.grid(), first.values(), first.slope_minus_inf(),
                                first.slope_plus_inf(), second.values(), second.slope_minus_inf(),
                                second.slope_plus_inf());
    return Profile(std::move(result.grid), std::move(result.values), result.left, result.right,
                   first.slope_cap());
}

RelativeProfile max_relative(const RelativeProfile& first, const RelativeProfile& second) {
    require_same_grid(first.grid(), second.grid());
    auto result = pointwise_max(first.grid(), first.offset(), first.offset_slope_minus_inf(),
                                first.offset_slope_plus_inf(), second.offset(),
                                second.offset_slope_minus_inf(), second.offset_slope_plus_inf());
    if (result.grid.size() == first.size()) {
        return RelativeProfile(first.base(), std::move(result.values), result.left, result.right);
    }
    return RelativeProfile(first.base().resampled(result.grid), std::move(result.values),
                           result.left, result.right);
}

RelativeProfile scale(const RelativeProfile& phi, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("scale factor must lie in [0,1]");
    std::vector<double> offset = phi.offset();
    for (double& v : offset) v *= lambda;
    return RelativeProfile(phi.base(), std::move(offset), lambda * phi.offset_slope_minus_inf(),
                           lambda * phi.offset_slope_plus_inf());
}

RelativeProfile truncate(const RelativeProfile& phi, double level) {
    if (!(level > 0.0)) throw InvalidInput("truncation level must be positive");
    const RelativeProfile floor(phi.base(), std::vector<double>(phi.size(), -level), 0.0, 0.0);
    return max_relative(phi, floor);
}

RelativeProfile blend(const RelativeProfile& phi, const RelativeProfile& psi, double weight) {
    require_same_grid(phi.grid(), psi.grid());
    if (!(weight >= 0.0 && weight <= 1.0)) throw InvalidInput("blend weight must lie in [0,1]");
    std::vector<double> offset(phi.size());
    for (std::size_t i = 0; i < offset.size(); ++i) {
        offset[i] = (1.0 - weight) * phi.offset()[i] + weight * psi.offset()[i];
    }
    return RelativeProfile(
        phi.base(), std::move(offset),
        (1.0 - weight) * phi.offset_slope_minus_inf() + weight * psi.offset_slope_minus_inf(),
        (1.0 - weight) * phi.offset_slope_plus_inf() + weight * psi.offset_slope_plus_inf());
}

bool dominates(const RelativeProfile& upper, const RelativeProfile& lower, double tol) {
    require_same_grid(upper.grid(), lower.grid());
    for (std::size_t i = 0; i < upper.size(); ++i) {
        if (upper.offset()[i] < lower.offset()[i] - tol) return false;
    }
    return upper.offset_slope_minus_inf() <= lower.offset_slope_minus_inf() + tol &&
           upper.offset_slope_plus_inf() >= lower.offset_slope_plus_inf() - tol;
}

}  // namespace malab
