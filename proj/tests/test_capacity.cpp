#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "malab/capacity.hpp"
#include "malab/errors.hpp"
#include "malab/ma.hpp"
#include "malab/models.hpp"

using namespace malab;

namespace {

double reference(double t) { return 0.5 * (t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t))); }

// Cap{t <= T}: the extremal leaves (T, psi_FS(T) - 1) along the steepest line
// staying below psi_FS, so the mass of K is 4 m^2 for that slope m.
double interval_capacity_oracle(double upper) {
    double best = 0.5;
    for (double step = 1e-4, t = upper + step; t < upper + 400.0; t += step, step *= 1.0005) {
        best = std::min(best, (reference(t) - reference(upper) + 1.0) / (t - upper));
    }
    return 4.0 * best * best;
}

}  // namespace

TEST_SUITE("capacity") {
    TEST_CASE("capacity of a ball around the fixed point matches the tangent-line oracle") {
        const auto model = radial_p2();
        const auto base = model.reference_on(model.default_grid());
        for (double upper : {-12.0, -6.0, -2.0, 0.0, 3.0}) {
            const double computed = capacity(model, base, interval_mask(base.grid(), upper));
            CHECK(computed == doctest::Approx(interval_capacity_oracle(upper)).epsilon(2e-4));
        }
    }

    TEST_CASE("capacity of the whole space is one and capacity is monotone") {
        const auto model = radial_p2();
        const auto base = model.reference_on(model.default_grid());
        NodeMask everything(base.size(), 1);
        CHECK(capacity(model, base, everything) == doctest::Approx(1.0).epsilon(1e-12));
        double previous = 0.0;
        for (double upper = -20.0; upper <= 20.0; upper += 4.0) {
            const double value = capacity(model, base, interval_mask(base.grid(), upper));
            CHECK(value >= previous);
            previous = value;
        }
        CHECK_THROWS_AS(capacity(model, base, NodeMask(base.size(), 0)), InvalidInput);
    }

    TEST_CASE("relative extremal is below zero and below minus one on the set") {
        const auto model = radial_p2();
        const auto base = model.reference_on(model.default_grid());
        const auto set = interval_mask(base.grid(), -5.0);
        const auto extremal = relative_extremal(model, base, set);
        for (std::size_t i = 0; i < set.size(); ++i) {
            CHECK(extremal.offset()[i] <= 1e-12);
            if (set[i]) CHECK(extremal.offset()[i] <= -1.0 + 1e-12);
        }
    }

    TEST_CASE("competitor families never beat the extremal") {
        const auto model = radial_p2();
        const auto base = model.reference_on(model.default_grid());
        for (double upper : {-8.0, -1.0, 4.0}) {
            const double exact = capacity(model, base, interval_mask(base.grid(), upper));
            const double competitor = competitor_lower_bound(model, base, upper, 40, 3);
            CHECK(competitor <= exact * (1.0 + 1e-12));
            CHECK(competitor >= 0.5 * exact);
        }
    }

    TEST_CASE("sublevel step function agrees with direct capacities") {
        const auto model = radial_p2();
        const auto phi = model.offset_on(
            model.deep_grid(true, false), [](double t) { return -0.5 * softplus(-t) - 1.0; }, 0.5, 0.0);
        const auto steps = sublevel_capacities(model, phi, 1.0);
        for (double level : {2.0, 5.0, 17.0}) {
            CHECK(steps.at(level) == doctest::Approx(capacity(model, phi.base(), sublevel_mask(phi, level))).epsilon(1e-12));
        }
    }

    TEST_CASE("log-log fit recovers an exact power law") {
        const auto thresholds = log_thresholds(2.0, 200.0, 21);
        REQUIRE(thresholds.size() == 21);
        CHECK(thresholds.front() == doctest::Approx(2.0));
        CHECK(thresholds.back() == doctest::Approx(200.0));
        std::vector<double> values;
        for (double t : thresholds) values.push_back(0.7 * std::pow(t, -3.0));
        CHECK(fit_decay_exponent(thresholds, values, 2.0, 200.0) == doctest::Approx(-3.0).epsilon(1e-10));
        CHECK(fit_top_decade(thresholds, values) == doctest::Approx(-3.0).epsilon(1e-10));
    }

    TEST_CASE("node-set mass counts the fixed-point atom when the set reaches it") {
        const auto model = radial_p2();
        const auto grid = model.default_grid();
        std::vector<double> values;
        for (double t : grid) values.push_back(0.5 * t);
        const auto cone = RelativeProfile::from_potential(model.reference_on(grid), Profile(grid, values, 0.5, 0.5, 0.5));
        const auto dirac = ma_measure(model, cone);
        CHECK(measure_of_nodes(dirac, interval_mask(grid, -30.0)) == doctest::Approx(1.0));
        NodeMask middle(grid.size(), 0);
        middle[grid.size() / 2] = 1;
        CHECK(measure_of_nodes(dirac, middle) == doctest::Approx(0.0));
    }
}
