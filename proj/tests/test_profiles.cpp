#include <doctest.h>

#include <cmath>
#include <vector>

#include "malab/errors.hpp"
#include "malab/models.hpp"
#include "malab/profiles.hpp"

using namespace malab;

namespace {

std::vector<double> uniform(double lo, double hi, int count) {
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) grid[i] = lo + (hi - lo) * i / (count - 1);
    return grid;
}

// offset -c * log(1 + e^t) / 2 - 1 on the radial base; psi = (1 - c) psi_FS - 1
RelativeProfile damped_reference(const KahlerModel& model, const std::vector<double>& grid, double c) {
    return model.offset_on(
        grid, [&](double t) { return -c * 0.5 * std::log1p(std::exp(t)) - 1.0; }, 0.0, -c * 0.5);
}

}  // namespace

TEST_SUITE("profiles") {
    TEST_CASE("uniform core grid has the requested spacing and reach") {
        const auto grid = make_grid(GridSpec{10.0, 201});
        REQUIRE(grid.size() == 201);
        CHECK(grid.front() == doctest::Approx(-10.0));
        CHECK(grid.back() == doctest::Approx(10.0));
        CHECK(grid[101] - grid[100] == doctest::Approx(0.1));

        GridSpec deep{10.0, 201, 1e6, 0.0, 1.05};
        const auto extended = make_grid(deep);
        CHECK(extended.front() <= -1e6);
        CHECK(extended.back() == doctest::Approx(10.0));
        for (std::size_t i = 1; i < extended.size(); ++i) CHECK(extended[i] > extended[i - 1]);
    }

    TEST_CASE("piecewise-linear evaluation interpolates and extends affinely") {
        const ConvexPL function({0.0, 1.0, 3.0}, {0.0, 0.5, 2.5}, 0.25, 2.0);
        CHECK(function(0.5) == doctest::Approx(0.25));
        CHECK(function(2.0) == doctest::Approx(1.5));
        CHECK(function(-4.0) == doctest::Approx(-1.0));
        CHECK(function(4.0) == doctest::Approx(4.5));
        const auto slopes = function.cell_slopes();
        REQUIRE(slopes.size() == 2);
        CHECK(slopes[0] == doctest::Approx(0.5));
        CHECK(slopes[1] == doctest::Approx(1.0));
    }

    TEST_CASE("profile rejects non-convex data and slopes outside the window") {
        CHECK_THROWS_AS(Profile({0.0, 1.0, 2.0}, {0.0, 0.4, 0.5}, 0.0, 0.5, 0.5), NotOmegaPsh);
        CHECK_THROWS_AS(Profile({0.0, 1.0, 2.0}, {0.0, 0.2, 0.9}, 0.0, 0.7, 0.5), NotOmegaPsh);
        CHECK_THROWS_AS(Profile({0.0, 1.0, 2.0}, {0.0, -0.1, 0.0}, 0.0, 0.5, 0.5), NotOmegaPsh);
        CHECK_NOTHROW(Profile({0.0, 1.0, 2.0}, {0.0, 0.1, 0.4}, 0.0, 0.5, 0.5));
    }

    TEST_CASE("relative profile tracks sup, limits and normalization") {
        const auto model = radial_p2();
        const auto grid = uniform(-20.0, 20.0, 401);
        const auto phi = damped_reference(model, grid, 0.5);
        CHECK(phi.sup_value() == doctest::Approx(-1.0 - 0.25 * std::log1p(std::exp(-20.0))).epsilon(1e-12));
        CHECK(phi.limit_minus_inf() == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(std::isinf(phi.limit_plus_inf()));
        CHECK(phi.limit_plus_inf() < 0.0);

        const auto lifted = phi.normalized(-3.0);
        CHECK(lifted.sup_value() == doctest::Approx(-3.0));
        CHECK(lifted.offset()[200] - phi.offset()[200] == doctest::Approx(-3.0 - phi.sup_value()));

        const auto rebuilt = RelativeProfile::from_potential(phi.base(), phi.potential());
        for (std::size_t i = 0; i < grid.size(); i += 40) {
            CHECK(rebuilt.offset()[i] == doctest::Approx(phi.offset()[i]).epsilon(1e-12));
        }
    }

    TEST_CASE("truncation is the nodewise maximum with the level") {
        const auto model = radial_p2();
        const auto grid = uniform(-20.0, 20.0, 401);
        const auto phi = damped_reference(model, grid, 0.8);
        const auto cut = truncate(phi, 4.0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(cut.offset_at(grid[i]) == doctest::Approx(std::max(phi.offset()[i], -4.0)).epsilon(1e-12));
        }
        CHECK(cut.limit_plus_inf() == doctest::Approx(-4.0));
        CHECK(dominates(cut, phi));
    }

    TEST_CASE("maximum of two offsets dominates both and equals one of them at each node") {
        const auto model = radial_p2();
        const auto grid = uniform(-20.0, 20.0, 401);
        const auto first = damped_reference(model, grid, 0.8);
        const auto second = model.offset_on(
            grid, [](double t) { return -0.5 * std::log1p(std::exp(-t)) - 1.2; }, 0.5, 0.0);
        const auto upper = max_relative(first, second);
        CHECK(dominates(upper, first));
        CHECK(dominates(upper, second));
        for (double t : {-15.0, -3.0, 0.0, 2.5, 12.0}) {
            const double expected = std::max(first.offset_at(t), second.offset_at(t));
            CHECK(upper.offset_at(t) == doctest::Approx(expected).epsilon(1e-9));
        }
    }

    TEST_CASE("power weight maps the offset through -(-x)^alpha") {
        const auto model = radial_p2();
        const auto grid = uniform(-30.0, 30.0, 601);
        const auto phi = model.offset_on(
            grid, [](double t) { return -0.5 * std::log1p(std::exp(-t)) - 1.0; }, 0.5, 0.0);
        const auto composed = compose_weight(phi, PowerWeight{0.4});
        for (std::size_t i = 0; i < grid.size(); i += 30) {
            CHECK(composed.offset_at(grid[i]) == doctest::Approx(-std::pow(-phi.offset()[i], 0.4)).epsilon(1e-12));
        }
        const auto logged = compose_weight(phi.shifted(-1.0), NegLogWeight{});
        for (std::size_t i = 0; i < grid.size(); i += 30) {
            const double x = phi.offset()[i] - 1.0;
            CHECK(logged.offset_at(grid[i]) == doctest::Approx(-std::log(-x)).epsilon(1e-12));
        }
    }

    TEST_CASE("scale and blend act linearly on offsets") {
        const auto model = radial_p2();
        const auto grid = uniform(-20.0, 20.0, 201);
        const auto phi = damped_reference(model, grid, 0.6);
        const auto psi = damped_reference(model, grid, 0.2).shifted(-0.5);
        const auto scaled = scale(phi, 0.3);
        const auto mixed = blend(phi, psi, 0.25);
        for (std::size_t i = 0; i < grid.size(); i += 20) {
            CHECK(scaled.offset()[i] == doctest::Approx(0.3 * phi.offset()[i]));
            CHECK(mixed.offset()[i] == doctest::Approx(0.75 * phi.offset()[i] + 0.25 * psi.offset()[i]));
        }
        CHECK_THROWS(scale(phi, 1.5));
    }

    TEST_CASE("legendre transform of a sampled parabola approximates s^2 / 2") {
        const auto grid = uniform(-4.0, 4.0, 801);
        std::vector<double> values;
        for (double t : grid) values.push_back(0.5 * t * t);
        const auto conjugate = legendre(ConvexPL(grid, values, -4.0, 4.0));
        for (double s : {-3.0, -1.0, 0.0, 0.5, 2.0}) CHECK(conjugate(s) == doctest::Approx(0.5 * s * s).epsilon(1e-3));
    }

    TEST_CASE("convex envelope lies below the samples and clamps slopes") {
        std::vector<std::pair<double, double>> samples{{0.0, 1.0}, {1.0, 0.0}, {2.0, 0.6}, {3.0, 0.1}, {4.0, 5.0}};
        const auto envelope = convex_envelope(samples, 1.0);
        for (const auto& [t, v] : samples) CHECK(envelope(t) <= v + 1e-12);
        for (double slope : envelope.cell_slopes()) {
            CHECK(slope >= -1e-12);
            CHECK(slope <= 1.0 + 1e-12);
        }
    }
}
