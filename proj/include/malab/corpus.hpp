#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "malab/models.hpp"
#include "malab/profiles.hpp"

namespace malab {

enum class CorpusTag { Bounded, LelongPositive, AlphaFamily, DivisorBounded, DecreasingChain };

std::string to_string(CorpusTag tag);
CorpusTag corpus_tag_from_string(const std::string& text);
std::vector<CorpusTag> all_corpus_tags();

struct CorpusMember {
    std::string name;
    CorpusTag tag = CorpusTag::Bounded;
    /// alpha for the power family and its blends, Lelong number for LelongPositive, 0 otherwise.
    double parameter = 0.0;
    int chain_id = -1;
    int chain_index = -1;
    /// Normalized so that sup phi = -1.
    RelativeProfile profile;
};

/// Decreasing sequence max(limit, -k_j) on the corpus grid, with its limit.
struct DecreasingChain {
    int id = 0;
    double alpha = 0.0;
    std::vector<double> levels;
    std::vector<RelativeProfile> members;
    RelativeProfile limit;
};

struct Corpus {
    std::uint64_t seed = 0;
    std::vector<double> grid;
    std::vector<CorpusMember> members;
    std::vector<DecreasingChain> chains;

    std::size_t count(CorpusTag tag) const;
    /// Indices of members carrying the tag.
    std::vector<std::size_t> indices(CorpusTag tag) const;
    /// Members whose offsets are bounded below (finite limits at both ends).
    std::vector<std::size_t> bounded_indices() const;
    /// FNV-1a hash of every grid value, offset value and tag, as 16 hex digits.
    std::string digest() const;
};

/// Shared grid for corpus work: uniform core on [-40, 40] with spacing 0.1 and a
/// geometric extension down to t = -1e12, mapped through the model's reparameterization.
std::vector<double> corpus_grid(const KahlerModel& model);

/// Deterministic per (model, seed, size). Each of the five tags receives
/// size / 5 members; the remainder goes to the bounded tag.
/// Requires the radial model (possibly reparameterized) and size >= 1.
Corpus generate_corpus(const KahlerModel& model, std::uint64_t seed, int size);

/// Corpus in which every member is the same bounded profile.
Corpus identity_corpus(const KahlerModel& model, int size);

/// Chains over power-family limits with alpha in [0.15, 0.4]; levels run
/// geometrically from 2 to 1024.
std::vector<DecreasingChain> decreasing_chains(const KahlerModel& model, std::uint64_t seed,
                                               int count, int length);

/// A pair phi <= psi <= 0 drawn from the corpus: psi = max(phi, other).
struct OrderedPair {
    std::size_t lower_index = 0;
    std::size_t other_index = 0;
    RelativeProfile lower;
    RelativeProfile upper;
};
/// Pairs among the bounded members, drawn with their own seed stream.
std::vector<OrderedPair> ordered_pairs(const Corpus& corpus, int count, std::uint64_t seed);

/// Unordered pairs of members (indices) drawn from `pool`.
std::vector<std::pair<std::size_t, std::size_t>> member_pairs(const std::vector<std::size_t>& pool,
                                                              int count, std::uint64_t seed);

/// Profile moved onto `grid` by sampling (keeps convexity; exact on shared nodes).
RelativeProfile onto_grid(const RelativeProfile& phi, const std::vector<double>& grid);

}  // namespace malab
