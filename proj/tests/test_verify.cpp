#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "malab/corpus.hpp"
#include "malab/errors.hpp"
#include "malab/models.hpp"
#include "malab/verify.hpp"

using namespace malab;

TEST_SUITE("verify") {
    TEST_CASE("registry ids are unique and topics are in scope") {
        CHECK_NOTHROW(validate_registry());
        const auto& topics = in_scope_topics();
        std::set<std::string> ids;
        int fitted = 0;
        for (const auto& info : check_registry()) {
            CHECK(std::find(topics.begin(), topics.end(), info.topic) != topics.end());
            CHECK_FALSE(info.citation.empty());
            ids.insert(info.id);
            fitted += info.fitted ? 1 : 0;
        }
        CHECK(ids.size() == check_registry().size());
        CHECK(fitted == 6);
        CHECK_THROWS_AS(check_info("no_such_check"), InvalidInput);
    }

    TEST_CASE("held-out fit uses even indices to fit and odd indices to verify") {
        // ratios 1, 2, 1, 5: fit max(1, 1) = 1, constant 2, the ratio 5 fails
        const auto fit = held_out_fit({1.0, 2.0, 1.0, 5.0}, {1.0, 1.0, 1.0, 1.0}, 2.0, 1e-7);
        CHECK(fit.constant == doctest::Approx(2.0));
        CHECK(fit.instances == 2);
        CHECK(fit.failures == 1);
        CHECK(fit.worst_margin == doctest::Approx(-1.5));
        const auto clean = held_out_fit({1.0, 1.5, 2.0, 3.0}, {1.0, 1.0, 1.0, 1.0}, 2.0, 1e-7);
        CHECK(clean.failures == 0);
    }

    TEST_CASE("relative margin signs") {
        CHECK(relative_margin(2.0, 1.0) == doctest::Approx(0.5));
        CHECK(relative_margin(1.0, 2.0) == doctest::Approx(-1.0));
        CHECK(relative_margin(1.0, kInf) == -kInf);
    }

    TEST_CASE("small corpus passes the exact inequalities") {
        const auto model = radial_p2();
        const auto corpus = generate_corpus(model, 11, 30);
        VerifyOptions options;
        options.pair_count = 40;
        const std::vector<std::string> ids{"mixed_measure_probability", "mixed_energy_order_p1", "energy_order_p",
                                           "ordered_pair_mixed_energy", "ordered_pair_full_energy",
                                           "comparison_principle", "capacity_doubling"};
        const auto reports = run_checks(corpus, model, ids, options);
        REQUIRE(reports.size() == ids.size());
        for (const auto& report : reports) {
            INFO(report.id << ": " << report.detail);
            CHECK(report.passed());
            CHECK(report.instances > 0);
        }
    }

    TEST_CASE("identity corpus makes the ordered-pair bounds tight but valid") {
        const auto model = radial_p2();
        const auto corpus = identity_corpus(model, 10);
        VerifyOptions options;
        options.pair_count = 10;
        const auto reports = run_checks(corpus, model, {"ordered_pair_full_energy", "comparison_principle"}, options);
        for (const auto& report : reports) CHECK(report.passed());
    }

    TEST_CASE("registry order is kept and unknown ids are rejected") {
        const auto model = radial_p2();
        const auto corpus = generate_corpus(model, 0, 10);
        const auto reports = run_checks(corpus, model, {"comparison_principle", "mixed_measure_probability"});
        REQUIRE(reports.size() == 2);
        CHECK(reports[0].id == "mixed_measure_probability");
        CHECK(run_checks(corpus, model, {}).empty());
        CHECK_THROWS_AS(run_checks(corpus, model, {"bogus"}), InvalidInput);
    }

    TEST_CASE("junit and csv reports carry failures") {
        CheckReport good{"alpha_check", "a <= b", 3, 0, 0.25, 0.0, ""};
        CheckReport bad{"beta_check", "c <= d & e", 4, 2, -0.5, 1.5, "two cases"};
        const auto xml = junit_xml({good, bad}, "suite");
        CHECK(xml.find("<testsuite name=\"suite\" tests=\"2\" failures=\"1\"") != std::string::npos);
        CHECK(xml.find("<failure") != std::string::npos);
        CHECK(xml.find("&amp;") != std::string::npos);
        const auto csv = reports_csv({good, bad});
        CHECK(csv.find("id,citation,instances,failures,worst_margin,fitted_constant,status") == 0);
        CHECK(csv.find("beta_check") != std::string::npos);
        CHECK(csv.find("fail") != std::string::npos);
    }
}
