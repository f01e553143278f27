#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "malab/corpus.hpp"
#include "malab/errors.hpp"
#include "malab/models.hpp"

using namespace malab;

TEST_SUITE("corpus") {
    TEST_CASE("generation is deterministic per seed") {
        const auto model = radial_p2();
        const auto first = generate_corpus(model, 5, 40);
        const auto again = generate_corpus(model, 5, 40);
        const auto other = generate_corpus(model, 6, 40);
        CHECK(first.digest() == again.digest());
        CHECK(first.digest() != other.digest());
        CHECK(first.digest().size() == 16);
    }

    TEST_CASE("seed zero corpus keeps its recorded digest") {
        CHECK(generate_corpus(radial_p2(), 0, 200).digest() == "1353f8139b10fa99");
    }

    TEST_CASE("tags are balanced and members are normalized") {
        const auto corpus = generate_corpus(radial_p2(), 1, 53);
        REQUIRE(corpus.members.size() == 53);
        for (auto tag : all_corpus_tags()) {
            const std::size_t expected = tag == CorpusTag::Bounded ? 10 + 3 : 10;
            CHECK(corpus.count(tag) == expected);
            CHECK(corpus_tag_from_string(to_string(tag)) == tag);
        }
        std::set<std::string> names;
        for (const auto& member : corpus.members) {
            CHECK(member.profile.sup_value() == doctest::Approx(-1.0).epsilon(1e-12));
            CHECK(member.profile.grid() == corpus.grid);
            names.insert(member.name);
        }
        CHECK(names.size() == corpus.members.size());
        for (std::size_t i : corpus.bounded_indices()) {
            CHECK(std::isfinite(corpus.members[i].profile.limit_minus_inf()));
            CHECK(std::isfinite(corpus.members[i].profile.limit_plus_inf()));
        }
    }

    TEST_CASE("lelong members carry an atom-producing slope") {
        const auto corpus = generate_corpus(radial_p2(), 2, 25);
        for (std::size_t i : corpus.indices(CorpusTag::LelongPositive)) {
            const auto& member = corpus.members[i];
            CHECK(member.parameter > 0.0);
            CHECK(member.profile.offset_slope_minus_inf() > 0.0);
        }
    }

    TEST_CASE("chains decrease toward their limit") {
        const auto model = radial_p2();
        const auto chains = decreasing_chains(model, 3, 4, 6);
        REQUIRE(chains.size() == 4);
        for (const auto& chain : chains) {
            REQUIRE(chain.members.size() == 6);
            CHECK(chain.alpha >= 0.15);
            CHECK(chain.alpha <= 0.4);
            for (std::size_t j = 0; j + 1 < chain.members.size(); ++j) {
                CHECK(dominates(chain.members[j], chain.members[j + 1]));
                CHECK(chain.levels[j] < chain.levels[j + 1]);
            }
            CHECK(dominates(chain.members.back(), chain.limit));
        }
    }

    TEST_CASE("ordered pairs are ordered and non-positive") {
        const auto corpus = generate_corpus(radial_p2(), 4, 30);
        const auto pairs = ordered_pairs(corpus, 20, 9);
        REQUIRE(pairs.size() == 20);
        for (const auto& pair : pairs) {
            CHECK(dominates(pair.upper, pair.lower));
            CHECK(pair.upper.sup_value() <= 1e-12);
        }
    }

    TEST_CASE("identity corpus repeats one bounded profile") {
        const auto corpus = identity_corpus(radial_p2(), 7);
        REQUIRE(corpus.members.size() == 7);
        for (const auto& member : corpus.members) CHECK(member.profile.offset() == corpus.members[0].profile.offset());
    }

    TEST_CASE("corpus needs the radial model and a positive size") {
        CHECK_THROWS_AS(generate_corpus(product_p1p1(), 0, 10), InvalidInput);
        CHECK_THROWS_AS(generate_corpus(radial_p2(), 0, 0), InvalidInput);
    }
}
