#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <random>

#include "malab/io.hpp"
#include "malab/solver.hpp"

using namespace malab;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("io") {
    TEST_CASE("seventeen significant digits round-trip every double") {
        CHECK(format_double(0.1) == "0.10000000000000001");
        CHECK(format_double(-2.0) == "-2");
        CHECK(format_double(kInf) == "inf");
        CHECK(format_double(-kInf) == "-inf");
        CHECK(format_double(std::nan("")) == "nan");
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> exponent(-300.0, 300.0);
        for (int k = 0; k < 2000; ++k) {
            const double value = std::pow(10.0, exponent(rng)) * (k % 2 ? -1.0 : 1.0) * (1.0 + 1e-3 * k);
            CHECK(same_bits(std::strtod(format_double(value).c_str(), nullptr), value));
        }
    }

    TEST_CASE("json writer prints numbers through the double formatter") {
        const Json document{{"x", 0.1}, {"list", {1.5, kInf}}, {"n", 3}};
        const auto text = dump_json(document);
        CHECK(text.find("0.10000000000000001") != std::string::npos);
        CHECK(text.find("\"inf\"") != std::string::npos);
        CHECK(json_number(Json("-inf")) == -kInf);
        CHECK(json_number(Json::parse(text)["x"]) == 0.1);
        CHECK_THROWS_AS(json_number(Json("seven")), SchemaViolation);
    }

    TEST_CASE("relative profile survives a json round trip bit for bit") {
        const auto model = radial_p2();
        const auto phi = model.offset_on(
            model.deep_grid(true, false), [](double t) { return -0.5 * softplus(-t) - 1.0; }, 0.5, 0.0);
        const auto back = relative_profile_from_json(Json::parse(dump_json(to_json(phi))));
        REQUIRE(back.size() == phi.size());
        for (std::size_t i = 0; i < phi.size(); ++i) {
            CHECK(same_bits(back.offset()[i], phi.offset()[i]));
            CHECK(same_bits(back.grid()[i], phi.grid()[i]));
        }
        CHECK(back.offset_slope_minus_inf() == phi.offset_slope_minus_inf());
        CHECK(back.sup_value() == phi.sup_value());
    }

    TEST_CASE("measures round trip and are validated on read") {
        const auto model = toric_p1p1(16);
        const auto target = random_smooth_toric_target(model, 2);
        const auto back = measure_from_json(Json::parse(dump_json(to_json(target))));
        CHECK(back.kind == MeasureKind::TwoD);
        CHECK(back.density == target.density);
        CHECK(back.total_mass == target.total_mass);

        auto broken = to_json(target);
        broken["density"].erase(0);
        CHECK_THROWS_AS(measure_from_json(broken), SchemaViolation);
    }

    TEST_CASE("model descriptors") {
        const auto model = model_from_json(Json{{"kind", "radial-p2"}, {"t_scale", 2.0}, {"t_shift", -1.0}});
        CHECK(model.t_scale() == 2.0);
        CHECK(model.t_shift() == -1.0);
        CHECK(model_from_json(model_descriptor(toric_p1p1(20))).resolution() == 20);
        CHECK(model_from_json(Json("product-p1p1")).kind() == ModelKind::ProductP1P1);
        CHECK_THROWS_AS(model_from_json(Json{{"kind", "radial-p2"}, {"colour", 1}}), SchemaViolation);
        CHECK_THROWS_AS(model_from_name("sphere"), SchemaViolation);
    }

    TEST_CASE("run configuration schema") {
        const auto config = run_config_from_json(
            Json{{"command", "verify"}, {"seed", 3}, {"size", 50}, {"p", {1, 2, 3}}, {"tol", 1e-6}, {"checks", Json::array()}});
        CHECK(config.command == Command::Verify);
        CHECK(config.seed == 3);
        CHECK(config.p_values.size() == 3);
        REQUIRE(config.checks.has_value());
        CHECK(config.checks->empty());
        const auto again = run_config_from_json(Json::parse(dump_json(to_json(config))));
        CHECK(again.seed == config.seed);
        CHECK(again.p_values == config.p_values);

        CHECK_THROWS_AS(run_config_from_json(Json{{"command", "fly"}}), SchemaViolation);
        CHECK_THROWS_AS(run_config_from_json(Json{{"command", "solve"}, {"speed", 1}}), SchemaViolation);
        CHECK_THROWS_AS(run_config_from_json(Json{{"command", "solve"}, {"p", 0.5}}), SchemaViolation);
        CHECK_THROWS_AS(run_config_from_json(Json{{"command", "solve"}, {"seed", -1}}), SchemaViolation);
        CHECK_THROWS_AS(run_config_from_json(Json{{"command", "solve"}, {"tol", 0}}), SchemaViolation);
        CHECK_THROWS_AS(run_config_from_json(Json{{"command", "solve"}, {"approximation", "blur"}}), SchemaViolation);
        CHECK_THROWS_AS(run_config_from_json(Json::array()), SchemaViolation);
    }

    TEST_CASE("reparameterized model survives the configuration round trip") {
        const auto config = run_config_from_json(
            Json{{"command", "energy"}, {"model", {{"kind", "radial-p2"}, {"t_scale", 1.5}, {"normalization", "unit-volume"}}}});
        const auto again = run_config_from_json(to_json(config));
        CHECK(again.t_scale == 1.5);
        CHECK(again.normalization == Normalization::UnitVolume);
    }

    TEST_CASE("csv table") {
        CsvTable table({"a", "b"});
        table.row().add(0.5).add("x");
        table.row().add(kInf).add(std::size_t{3});
        CHECK(table.str() == "a,b\n0.5,x\ninf,3\n");
        CsvTable short_row({"a", "b"});
        short_row.row().add(1);
        CHECK_THROWS(short_row.str());
    }

    TEST_CASE("files and parse errors") {
        const auto dir = std::filesystem::temp_directory_path() / "malab_io_test";
        std::filesystem::remove_all(dir);
        const auto path = (dir / "nested" / "doc.json").string();
        write_file(path, "{\"a\": 1}");
        CHECK(read_json_file(path)["a"] == 1);
        write_file(path, "{oops");
        CHECK_THROWS_AS(read_json_file(path), SchemaViolation);
        CHECK_THROWS_AS(read_file((dir / "missing").string()), InvalidInput);
        std::filesystem::remove_all(dir);
    }
}
