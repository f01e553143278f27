#include "malab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <set>

#include "malab/errors.hpp"

namespace malab {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt, std::uint64_t index) {
    return std::mt19937_64(splitmix(splitmix(seed ^ (salt * 0x100000001b3ULL)) + index));
}

void require_radial(const KahlerModel& model) {
    if (model.kind() != ModelKind::RadialP2) {
        throw InvalidInput("the corpus lives on the radial model");
    }
}

// Canonical coordinate of every grid node (undoing the model's reparameterization).
struct CanonicalGrid {
    std::vector<double> grid;
    std::vector<double> canonical;
    double slope_factor = 1.0;  ///< canonical slope -> model slope
};

CanonicalGrid canonical_grid(const KahlerModel& model) {
    CanonicalGrid out;
    out.canonical = make_grid(GridSpec{40.0, 801, 1e12, 0.0, 1.05});
    out.grid = out.canonical;
    for (double& t : out.grid) t = model.t_scale() * t + model.t_shift();
    out.slope_factor = 1.0 / model.t_scale();
    return out;
}

// Convex mixture of smoothed and sharp hinge potentials, each with slopes in [0, 1/2].
struct HingeMixture {
    std::vector<double> weights, sharpness, centers;
    std::vector<bool> sharp;

    static HingeMixture random(std::mt19937_64& rng) {
        HingeMixture mix;
        const int terms = 1 + static_cast<int>(3.0 * uniform01(rng));
        double total = 0.0;
        for (int k = 0; k < terms; ++k) {
            mix.weights.push_back(0.2 + uniform01(rng));
            mix.sharpness.push_back(0.3 * std::pow(10.0, uniform01(rng)));
            mix.centers.push_back(uniform(rng, -6.0, 6.0));
            mix.sharp.push_back(uniform01(rng) < 0.25);
            total += mix.weights.back();
        }
        for (double& w : mix.weights) w /= total;
        return mix;
    }

    // Offset against the reference potential at canonical coordinate t.
    double offset(double t) const {
        double value = -0.5 * softplus(t);
        for (std::size_t k = 0; k < weights.size(); ++k) {
            const double shifted = t - centers[k];
            const double hinge = sharp[k] ? 0.5 * std::max(shifted, 0.0)
                                          : softplus(sharpness[k] * shifted) / (2.0 * sharpness[k]);
            value += weights[k] * hinge;
        }
        return value;
    }
};

RelativeProfile build(const KahlerModel& model, const CanonicalGrid& g, const std::vector<double>& offset,
                      double canonical_left_slope) {
    RelativeProfile phi(model.reference_on(g.grid), offset, canonical_left_slope * g.slope_factor, 0.0);
    return phi.normalized(-1.0);
}

RelativeProfile bounded_member(const KahlerModel& model, const CanonicalGrid& g, std::mt19937_64& rng) {
    const auto mix = HingeMixture::random(rng);
    std::vector<double> offset(g.canonical.size());
    for (std::size_t i = 0; i < offset.size(); ++i) offset[i] = mix.offset(g.canonical[i]);
    return build(model, g, offset, 0.0);
}

RelativeProfile lelong_member(const KahlerModel& model, const CanonicalGrid& g, double lelong,
                              std::mt19937_64& rng) {
    // lelong * (cone t/2) + (1 - lelong) * mixture, as an offset.
    const auto mix = HingeMixture::random(rng);
    std::vector<double> offset(g.canonical.size());
    for (std::size_t i = 0; i < offset.size(); ++i) {
        const double t = g.canonical[i];
        offset[i] = -0.5 * lelong * softplus(-t) + (1.0 - lelong) * mix.offset(t);
    }
    return build(model, g, offset, 0.5 * lelong);
}

double power_offset(double t, double alpha) {
    return -std::pow(0.5 * softplus(-t) + 1.0, alpha);
}

RelativeProfile alpha_member(const KahlerModel& model, const CanonicalGrid& g, double alpha) {
    std::vector<double> offset(g.canonical.size());
    for (std::size_t i = 0; i < offset.size(); ++i) offset[i] = power_offset(g.canonical[i], alpha);
    return build(model, g, offset, 0.0);
}

RelativeProfile divisor_bounded_member(const KahlerModel& model, const CanonicalGrid& g, double alpha,
                                       std::mt19937_64& rng) {
    const auto mix = HingeMixture::random(rng);
    const double weight = uniform(rng, 0.2, 0.8);
    std::vector<double> offset(g.canonical.size());
    for (std::size_t i = 0; i < offset.size(); ++i) {
        const double t = g.canonical[i];
        offset[i] = (1.0 - weight) * power_offset(t, alpha) + weight * mix.offset(t);
    }
    return build(model, g, offset, 0.0);
}

std::vector<double> chain_levels(int length) {
    std::vector<double> levels;
    for (int j = 0; j < length; ++j) {
        const double fraction = length == 1 ? 1.0 : static_cast<double>(j) / (length - 1);
        levels.push_back(2.0 * std::pow(512.0, fraction));
    }
    return levels;
}

DecreasingChain make_chain(const KahlerModel& model, const CanonicalGrid& g, int id, double alpha,
                           int length) {
    DecreasingChain chain;
    chain.id = id;
    chain.alpha = alpha;
    chain.levels = chain_levels(length);
    chain.limit = alpha_member(model, g, alpha);
    for (double level : chain.levels) {
        chain.members.push_back(onto_grid(truncate(chain.limit, level), g.grid));
    }
    return chain;
}

void hash_bytes(std::uint64_t& h, const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
}

constexpr std::uint64_t kMemberSalt = 1;
constexpr std::uint64_t kChainSalt = 2;
constexpr std::uint64_t kPairSalt = 3;

}  // namespace

std::string to_string(CorpusTag tag) {
    switch (tag) {
        case CorpusTag::Bounded: return "bounded";
        case CorpusTag::LelongPositive: return "lelong_positive";
        case CorpusTag::AlphaFamily: return "alpha_family";
        case CorpusTag::DivisorBounded: return "divisor_bounded";
        case CorpusTag::DecreasingChain: return "decreasing_chain";
    }
    return "bounded";
}

CorpusTag corpus_tag_from_string(const std::string& text) {
    for (auto tag : all_corpus_tags()) {
        if (to_string(tag) == text) return tag;
    }
    throw InvalidInput("unknown corpus tag: " + text);
}

std::vector<CorpusTag> all_corpus_tags() {
    return {CorpusTag::Bounded, CorpusTag::LelongPositive, CorpusTag::AlphaFamily,
            CorpusTag::DivisorBounded, CorpusTag::DecreasingChain};
}

std::size_t Corpus::count(CorpusTag tag) const {
    return static_cast<std::size_t>(
        std::count_if(members.begin(), members.end(), [&](const CorpusMember& m) { return m.tag == tag; }));
}

std::vector<std::size_t> Corpus::indices(CorpusTag tag) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i].tag == tag) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> Corpus::bounded_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto& phi = members[i].profile;
        if (std::isfinite(phi.limit_minus_inf()) && std::isfinite(phi.limit_plus_inf())) out.push_back(i);
    }
    return out;
}

std::string Corpus::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    hash_bytes(h, &seed, sizeof seed);
    for (double t : grid) hash_bytes(h, &t, sizeof t);
    for (const auto& m : members) {
        const auto tag = static_cast<int>(m.tag);
        hash_bytes(h, &tag, sizeof tag);
        for (double v : m.profile.offset()) hash_bytes(h, &v, sizeof v);
        const double left = m.profile.offset_slope_minus_inf();
        hash_bytes(h, &left, sizeof left);
    }
    char text[17];
    std::snprintf(text, sizeof text, "%016llx", static_cast<unsigned long long>(h));
    return text;
}

std::vector<double> corpus_grid(const KahlerModel& model) {
    require_radial(model);
    return canonical_grid(model).grid;
}

Corpus generate_corpus(const KahlerModel& model, std::uint64_t seed, int size) {
    require_radial(model);
    if (size < 1) throw InvalidInput("corpus size must be >= 1");
    const auto g = canonical_grid(model);
    Corpus corpus;
    corpus.seed = seed;
    corpus.grid = g.grid;

    const int quota = size / 5;
    const int bounded = size - 4 * quota;
    auto add = [&](CorpusTag tag, double parameter, RelativeProfile phi) {
        CorpusMember member;
        member.tag = tag;
        member.parameter = parameter;
        member.name = to_string(tag) + "_" + std::to_string(corpus.members.size());
        member.profile = std::move(phi);
        corpus.members.push_back(std::move(member));
    };

    std::uint64_t index = 0;
    for (int k = 0; k < bounded; ++k) {
        auto rng = stream(seed, kMemberSalt, index++);
        add(CorpusTag::Bounded, 0.0, bounded_member(model, g, rng));
    }
    for (int k = 0; k < quota; ++k) {
        auto rng = stream(seed, kMemberSalt, index++);
        const double lelong = uniform(rng, 0.05, 0.9);
        add(CorpusTag::LelongPositive, lelong, lelong_member(model, g, lelong, rng));
    }
    for (int k = 0; k < quota; ++k) {
        auto rng = stream(seed, kMemberSalt, index++);
        const double alpha = uniform(rng, 0.1, 0.95);
        add(CorpusTag::AlphaFamily, alpha, alpha_member(model, g, alpha));
    }
    for (int k = 0; k < quota; ++k) {
        auto rng = stream(seed, kMemberSalt, index++);
        const double alpha = uniform(rng, 0.1, 0.6);
        add(CorpusTag::DivisorBounded, alpha, divisor_bounded_member(model, g, alpha, rng));
    }
    constexpr int kChainLength = 5;
    int remaining = quota;
    int chain_id = 0;
    while (remaining > 0) {
        auto rng = stream(seed, kChainSalt, static_cast<std::uint64_t>(chain_id));
        const double alpha = uniform(rng, 0.15, 0.4);
        auto chain = make_chain(model, g, chain_id, alpha, kChainLength);
        const int take = std::min(remaining, kChainLength);
        for (int j = 0; j < take; ++j) {
            add(CorpusTag::DecreasingChain, alpha, chain.members[static_cast<std::size_t>(j)]);
            corpus.members.back().chain_id = chain_id;
            corpus.members.back().chain_index = j;
        }
        chain.members.resize(static_cast<std::size_t>(take));
        chain.levels.resize(static_cast<std::size_t>(take));
        corpus.chains.push_back(std::move(chain));
        remaining -= take;
        ++chain_id;
    }
    return corpus;
}

Corpus identity_corpus(const KahlerModel& model, int size) {
    require_radial(model);
    if (size < 1) throw InvalidInput("corpus size must be >= 1");
    const auto g = canonical_grid(model);
    auto rng = stream(0, kMemberSalt, 0);
    const auto phi = bounded_member(model, g, rng);
    Corpus corpus;
    corpus.grid = g.grid;
    for (int k = 0; k < size; ++k) {
        CorpusMember member;
        member.name = "identity_" + std::to_string(k);
        member.profile = phi;
        corpus.members.push_back(std::move(member));
    }
    return corpus;
}

std::vector<DecreasingChain> decreasing_chains(const KahlerModel& model, std::uint64_t seed, int count,
                                               int length) {
    require_radial(model);
    if (count < 0 || length < 1) throw InvalidInput("chain count must be >= 0 and length >= 1");
    const auto g = canonical_grid(model);
    std::vector<DecreasingChain> chains;
    for (int id = 0; id < count; ++id) {
        auto rng = stream(seed, kChainSalt, static_cast<std::uint64_t>(id));
        chains.push_back(make_chain(model, g, id, uniform(rng, 0.15, 0.4), length));
    }
    return chains;
}

std::vector<OrderedPair> ordered_pairs(const Corpus& corpus, int count, std::uint64_t seed) {
    const auto pool = corpus.bounded_indices();
    std::vector<OrderedPair> pairs;
    if (pool.empty() || count <= 0) return pairs;
    for (const auto& [first, second] : member_pairs(pool, count, seed)) {
        OrderedPair pair;
        pair.lower_index = first;
        pair.other_index = second;
        pair.lower = corpus.members[first].profile;
        pair.upper = onto_grid(max_relative(pair.lower, corpus.members[second].profile), corpus.grid);
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

std::vector<std::pair<std::size_t, std::size_t>> member_pairs(const std::vector<std::size_t>& pool,
                                                              int count, std::uint64_t seed) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (pool.empty()) return out;
    auto rng = stream(seed, kPairSalt, 0);
    const auto n = pool.size();
    for (int k = 0; k < count; ++k) {
        const auto a = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
        auto b = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
        if (n > 1 && b == a) b = (a + 1) % n;
        out.emplace_back(pool[std::min(a, n - 1)], pool[std::min(b, n - 1)]);
    }
    return out;
}

RelativeProfile onto_grid(const RelativeProfile& phi, const std::vector<double>& grid) {
    if (phi.grid() == grid) return phi;
    return phi.resampled(grid);
}

}  // namespace malab
