#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "malab/energy.hpp"
#include "malab/errors.hpp"
#include "malab/ma.hpp"
#include "malab/models.hpp"
#include "malab/solver.hpp"

using namespace malab;

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// sup |(a - b) - mean(a - b)|
double spread_of_difference(const std::vector<double>& a, const std::vector<double>& b) {
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(a.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i] - mean));
    return worst;
}

}  // namespace

TEST_SUITE("solver") {
    TEST_CASE("radial solve of the reference measure returns the reference") {
        const auto model = radial_p2();
        const auto grid = model.default_grid();
        const auto result = solve_radial(model, ma_measure(model, model.zero_on(grid)));
        CHECK(result.verdict == SolveVerdict::Solved);
        CHECK(result.residual <= 1e-12);
        CHECK(result.profile.sup_value() == doctest::Approx(-1.0));
        CHECK(spread_of_difference(result.profile.offset(), std::vector<double>(grid.size(), 0.0)) <= 1e-10);
    }

    TEST_CASE("radial solve recovers a potential from its own measure") {
        const auto model = radial_p2();
        const auto grid = model.default_grid();
        const auto phi = model.offset_on(
            grid, [](double t) { return -0.25 * sigmoid(2.0 * t - 1.0) - 0.04 * sigmoid(3.0 * t + 2.0) - 1.0; }, 0.0, 0.0);
        const auto result = solve_radial(model, ma_measure(model, phi));
        CHECK(result.residual <= 1e-12);
        CHECK(spread_of_difference(result.profile.offset(), phi.offset()) <= 1e-9);
    }

    TEST_CASE("point mass target gives the cone t/2") {
        const auto model = radial_p2();
        const auto grid = model.default_grid();
        const auto result = solve_radial(model, point_mass_target(model, grid));
        std::vector<double> cone_offset;
        for (double t : grid) cone_offset.push_back(-0.5 * std::log1p(std::exp(-t)));
        CHECK(spread_of_difference(result.profile.offset(), cone_offset) <= 1e-9);
        CHECK(result.profile.offset_slope_minus_inf() == doctest::Approx(0.5));
    }

    TEST_CASE("radial solve rejects measures of the wrong mass") {
        const auto model = radial_p2();
        auto target = ma_measure(model, model.zero_on(model.default_grid()));
        for (double& mass : target.density) mass *= 1.5;
        target.total_mass *= 1.5;
        CHECK_THROWS_AS(solve_radial(model, target), InvalidInput);
    }

    TEST_CASE("separable and Newton solutions of a product target agree up to a constant") {
        const auto model = toric_p1p1(24);
        const auto axis = model.toric_axis();
        const auto target =
            separable_toric_target(smooth_factor_measure(axis, -0.5, 1.2), smooth_factor_measure(axis, 0.8, 2.0));
        const auto separable = solve_separable(model, target);
        SolveRequest request;
        request.scheme = SolveScheme::NewtonToric;
        request.marginal_start = false;
        const auto newton = solve_newton_toric(model, target, request);
        CHECK(newton.verdict == SolveVerdict::Solved);
        CHECK(newton.residual <= 1e-10);
        const auto record = uniqueness_check(model, separable.grid, newton.grid);
        CHECK(record.pass);
        CHECK(record.deviation <= 1e-6);
    }

    TEST_CASE("Newton matches the manufactured smooth solution") {
        const auto model = toric_p1p1(32);
        const auto problem = manufactured_toric_problem(model, {1.0, 1.3, 0.8, 2.0});
        SolveRequest request;
        request.scheme = SolveScheme::NewtonToric;
        const auto result = solve_newton_toric(model, problem.target, request);
        CHECK(result.residual <= 1e-10);
        CHECK(result.newton_steps <= 20);
        CHECK(spread_of_difference(result.grid.values(), problem.exact_values) <= 5e-2);
    }

    TEST_CASE("Newton refuses interior point masses") {
        const auto model = toric_p1p1(16);
        auto target = random_smooth_toric_target(model, 1);
        target.atoms.push_back({location::kCorner00, 0.1});
        for (double& mass : target.density) mass *= 1.9 / 2.0;
        SolveRequest request;
        request.scheme = SolveScheme::NewtonToric;
        CHECK_THROWS(solve_newton_toric(model, target, request));
    }

    TEST_CASE("mollification keeps the total mass and smooths a point mass away") {
        const auto model = radial_p2();
        const auto grid = model.default_grid();
        const auto smooth = random_radial_target(model, grid, 4, false);
        const auto blurred = mollify(model, smooth, 0.25);
        CHECK(blurred.total_mass == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cdf_distance(blurred, smooth) <= 0.3);
        const auto widths = default_mollification_widths();
        REQUIRE(widths.size() == 8);
        CHECK(widths.front() == doctest::Approx(0.125));
        CHECK(widths.back() == doctest::Approx(std::ldexp(1.0, -10)));
    }

    TEST_CASE("scheduled radial solve converges to the exact solve") {
        const auto model = radial_p2();
        const auto grid = model.default_grid();
        const auto target = random_radial_target(model, grid, 9, false);
        SolveRequest request;
        request.approximation = ApproximationMode::Mollify;
        request.schedule = default_mollification_widths();
        const auto scheduled = solve_radial_scheduled(model, target, request);
        const auto direct = solve_radial(model, target);
        CHECK(scheduled.energy_trace.size() == request.schedule.size() + 1);
        CHECK(scheduled.energy_trace.back() == doctest::Approx(direct.energy_trace.back()).epsilon(1e-12));
        CHECK(scheduled.consistency_trace.back() <= scheduled.consistency_trace.front());
    }

    TEST_CASE("point-mass witness has two non-congruent potentials") {
        const auto witness = point_mass_witness(16.0, 41);
        CHECK(witness.point_mass[0] == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(witness.point_mass[1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(witness.deviation >= 0.1);
    }
}
