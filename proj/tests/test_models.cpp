#include <doctest.h>

#include <cmath>

#include "malab/errors.hpp"
#include "malab/ma.hpp"
#include "malab/models.hpp"

using namespace malab;

TEST_SUITE("models") {
    TEST_CASE("radial reference is half of log(1 + e^t)") {
        const auto model = radial_p2();
        CHECK(model.kind() == ModelKind::RadialP2);
        CHECK(model.slope_cap() == 0.5);
        for (double t : {-30.0, -2.0, 0.0, 1.5, 40.0}) {
            const double expected = 0.5 * std::log1p(std::exp(t));
            CHECK(model.reference_value(t) == doctest::Approx(expected).epsilon(1e-14));
            CHECK(model.reference_slope(t) == doctest::Approx(0.5 / (1.0 + std::exp(-t))).epsilon(1e-14));
        }
        CHECK(model.reference_value(800.0) == doctest::Approx(400.0));
    }

    TEST_CASE("product factor reference is half of log(1 + e^{2t})") {
        const auto model = product_p1p1();
        CHECK(model.slope_cap() == 1.0);
        CHECK(model.volume() == 2.0);
        for (double t : {-5.0, 0.0, 3.0}) {
            CHECK(model.reference_value(t) == doctest::Approx(0.5 * std::log1p(std::exp(2.0 * t))).epsilon(1e-14));
        }
    }

    TEST_CASE("reparameterized radial model is the same function of the old coordinate") {
        const auto plain = radial_p2();
        const auto moved = radial_p2(2.0, 1.0);
        for (double t : {-4.0, 0.0, 3.0}) {
            CHECK(moved.reference_value(2.0 * t + 1.0) == doctest::Approx(plain.reference_value(t)).epsilon(1e-14));
        }
        CHECK(moved.slope_cap() == doctest::Approx(0.25));
    }

    TEST_CASE("toric axis has secant slopes on the moment-cell boundaries") {
        const int resolution = 32;
        const auto model = toric_p1p1(resolution);
        const auto axis = model.toric_axis();
        REQUIRE(axis.size() == static_cast<std::size_t>(resolution));
        for (std::size_t i = 0; i < axis.size(); ++i) {
            CHECK(axis[i] == doctest::Approx(-axis[axis.size() - 1 - i]).epsilon(1e-10));
        }
        // factor reference: log(1 + e^{2t}) / 2, slopes k / N between consecutive nodes
        auto reference = [](double t) { return 0.5 * std::log1p(std::exp(2.0 * t)); };
        for (std::size_t k = 0; k + 1 < axis.size(); ++k) {
            const double secant = (reference(axis[k + 1]) - reference(axis[k])) / (axis[k + 1] - axis[k]);
            CHECK(secant == doctest::Approx(static_cast<double>(k + 1) / resolution).epsilon(1e-9));
        }
        CHECK_THROWS_AS(toric_p1p1(8), InvalidInput);
        CHECK_THROWS_AS(radial_p2().toric_axis(), InvalidInput);
    }

    TEST_CASE("normalization changes reported masses but not raw volume") {
        const auto raw = toric_p1p1(16);
        const auto unit = raw.with_normalization(Normalization::UnitVolume);
        CHECK(unit.normalization() == Normalization::UnitVolume);
        CHECK(unit.volume() == raw.volume());
        CHECK(to_string(Normalization::UnitVolume) == "unit-volume");
        CHECK(normalization_from_string("raw") == Normalization::Raw);
    }

    TEST_CASE("deep grid reaches far only on the requested side") {
        const auto model = radial_p2();
        const auto left = model.deep_grid(true, false);
        CHECK(left.front() <= -1e12);
        CHECK(left.back() == doctest::Approx(40.0));
        const auto right = model.deep_grid(false, true, 1e8);
        CHECK(right.front() == doctest::Approx(-40.0));
        CHECK(right.back() >= 1e8);
    }
}
