#include <doctest.h>

#include <cmath>
#include <vector>

#include "malab/errors.hpp"
#include "malab/ma.hpp"
#include "malab/models.hpp"
#include "malab/solver.hpp"

using namespace malab;

namespace {

double half_softplus(double t) { return 0.5 * (t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t))); }

}  // namespace

TEST_SUITE("ma") {
    TEST_CASE("reference measure CDF is four times the squared secant slope") {
        const auto model = radial_p2();
        const auto grid = make_grid(GridSpec{30.0, 601});
        const auto measure = ma_measure(model, model.zero_on(grid));
        CHECK(measure.total_mass == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(measure.atoms.empty());
        const auto cdf = measure.cdf();
        for (std::size_t i = 0; i + 1 < grid.size(); i += 37) {
            const double secant = (half_softplus(grid[i + 1]) - half_softplus(grid[i])) / (grid[i + 1] - grid[i]);
            CHECK(cdf[i] == doctest::Approx(4.0 * secant * secant).epsilon(1e-9));
        }
        // continuum limit: CDF(t) = logistic(t)^2
        const double at_zero = 0.5;
        CHECK(cdf[300] == doctest::Approx(at_zero * at_zero).epsilon(0.06));
    }

    TEST_CASE("cone potential t/2 concentrates on the fixed point") {
        const auto model = radial_p2();
        const auto grid = model.default_grid();
        std::vector<double> values;
        for (double t : grid) values.push_back(0.5 * t);
        const Profile cone(grid, values, 0.5, 0.5, 0.5);
        const auto measure = ma_measure(model, RelativeProfile::from_potential(model.reference_on(grid), cone));
        CHECK(measure.atom(location::kFixedPoint) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(measure.atom(location::kDivisorAtInfinity) == doctest::Approx(0.0));
        CHECK(measure.density_mass() <= 1e-12);
    }

    TEST_CASE("tail slopes set the atoms on both ends") {
        const auto model = radial_p2();
        const auto grid = make_grid(GridSpec{20.0, 401});
        // slope 0.2 at -inf and 0.4 at +inf: atoms 4 * 0.04 and 1 - 4 * 0.16
        std::vector<double> values;
        for (double t : grid) values.push_back(0.2 * t + 0.2 * std::log1p(std::exp(t)));
        const Profile potential(grid, values, 0.2, 0.4, 0.5);
        const auto measure = ma_measure(model, RelativeProfile::from_potential(model.reference_on(grid), potential));
        CHECK(measure.atom(location::kFixedPoint) == doctest::Approx(0.16).epsilon(1e-12));
        CHECK(measure.atom(location::kDivisorAtInfinity) == doctest::Approx(0.36).epsilon(1e-12));
        CHECK(measure.total_mass == doctest::Approx(1.0).epsilon(1e-13));
    }

    TEST_CASE("mixed measure is symmetric, has unit mass and reduces to the full measure on the diagonal") {
        const auto model = radial_p2();
        const auto grid = make_grid(GridSpec{20.0, 401});
        const auto phi = model.offset_on(grid, [](double t) { return -0.2 * std::log1p(std::exp(t)) - 1.0; }, 0.0, -0.2);
        const auto psi = model.offset_on(grid, [](double t) { return -0.3 * std::log1p(std::exp(-t)) - 1.0; }, 0.3, 0.0);
        const auto forward = mixed_measure(model, phi, psi);
        const auto backward = mixed_measure(model, psi, phi);
        CHECK(forward.total_mass == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(cdf_distance(forward, backward) <= 1e-14);
        CHECK(cdf_distance(mixed_measure(model, phi, phi), ma_measure(model, phi)) <= 1e-14);
        CHECK(cdf_distance(omega_wedge(model, phi), mixed_measure(model, RelativeProfile::zero(phi.base()), phi)) <= 1e-14);
    }

    TEST_CASE("product potential u(x) + v(y) carries twice the tensor product of factor measures") {
        const auto model = product_p1p1();
        const auto axis = make_grid(GridSpec{10.0, 41});
        const auto u = model.zero_on(axis).shifted(-0.5);
        const auto v = model.offset_on(axis, [](double t) { return -0.25 * std::log1p(std::exp(2.0 * t)) - 0.5; }, 0.0, -0.5);
        const auto surface = ma_measure(model, u, v);
        const auto factor_u = ma_measure(model, u);
        const auto factor_v = ma_measure(model, v);
        CHECK(surface.total_mass == doctest::Approx(2.0).epsilon(1e-13));
        CHECK(surface.normalized().total_mass == doctest::Approx(1.0).epsilon(1e-13));
        const std::size_t i = 17, j = 25;
        CHECK(surface.density[i * axis.size() + j] ==
              doctest::Approx(2.0 * factor_u.density[i] * factor_v.density[j]).epsilon(1e-12));
    }

    TEST_CASE("toric reference measure is uniform on the secant axis") {
        const int resolution = 24;
        const auto model = toric_p1p1(resolution);
        const auto axis = model.toric_axis();
        const auto measure = toric_reference_measure(model, axis, axis);
        CHECK(measure.total_mass == doctest::Approx(2.0).epsilon(1e-12));
        for (double mass : measure.density) {
            CHECK(mass == doctest::Approx(2.0 / (resolution * resolution)).epsilon(1e-8));
        }
    }

    TEST_CASE("measure bookkeeping rejects negative masses") {
        MaMeasure measure;
        measure.grid = {0.0, 1.0};
        measure.density = {0.5, -0.1};
        measure.total_mass = 0.4;
        CHECK_THROWS_AS(measure.check(), InvalidInput);
    }
}
