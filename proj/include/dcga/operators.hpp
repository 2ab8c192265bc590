#pragma once

#include "dcga/core.hpp"
#include "dcga/model.hpp"

#include <numeric>

namespace dcga {

/// Tournament selection without replacement: each pass shuffles the
/// population, slices it into blocks of s (dropping a short tail), and
/// promotes every block's best member. Passes repeat until pop.size()
/// winners are collected; the final pass is truncated.
inline Population tournament_select(const Population& pop, int tournament_size, Sense sense, RandomStream& rng)
{
    const std::size_t n = pop.size();
    if (tournament_size < 2 || static_cast<std::size_t>(tournament_size) > n) {
        throw config_error("tournament size must be in [2, population size]");
    }
    for (const auto& ind : pop.members) {
        if (!ind.evaluated()) {
            throw std::logic_error("tournament_select requires a fully evaluated population");
        }
    }
    const auto better = [sense](double a, double b) { return sense == Sense::maximize ? a > b : a < b; };

    const std::size_t s = static_cast<std::size_t>(tournament_size);
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    Population out;
    out.members.reserve(n);
    while (out.size() < n) {
        rng.shuffle(order);
        const std::size_t blocks = n / s;
        for (std::size_t b = 0; b < blocks && out.size() < n; ++b) {
            std::uint32_t winner = order[b * s];
            for (std::size_t j = 1; j < s; ++j) {
                const std::uint32_t candidate = order[b * s + j];
                if (better(pop.members[candidate].fitness, pop.members[winner].fitness)) {
                    winner = candidate;
                }
            }
            out.members.push_back(pop.members[winner]);
        }
    }
    return out;
}

/// Building-block-wise crossover: each offspring is assembled group by
/// group, copying every group's alleles from an independently drawn member
/// of the selected set. Offspring are unevaluated.
inline Population bb_wise_crossover(const Population& selected, const GenePartition& partition, std::size_t out_size,
                                    RandomStream& rng)
{
    if (selected.size() == 0) {
        throw std::logic_error("bb_wise_crossover requires a non-empty selected set");
    }
    const std::size_t l = selected.genome_length();
    partition.validate(l);

    // Per-group word masks so a group copy is a handful of word ops.
    struct WordMask {
        std::uint32_t word;
        std::uint64_t mask;
    };
    std::vector<std::vector<WordMask>> masks(partition.groups.size());
    for (std::size_t g = 0; g < partition.groups.size(); ++g) {
        for (auto idx : partition.groups[g]) {
            const std::uint32_t w = idx >> 6;
            const std::uint64_t bit = 1ULL << (idx & 63);
            auto it = std::find_if(masks[g].begin(), masks[g].end(), [w](const WordMask& m) { return m.word == w; });
            if (it == masks[g].end()) {
                masks[g].push_back({w, bit});
            } else {
                it->mask |= bit;
            }
        }
    }

    Population out;
    out.members.reserve(out_size);
    for (std::size_t i = 0; i < out_size; ++i) {
        Individual child;
        child.genome = Genome(l);
        auto& words = child.genome.words_mut();
        for (std::size_t g = 0; g < partition.groups.size(); ++g) {
            const auto& donor = selected.members[rng.uniform_index(selected.size())].genome;
            for (const auto& m : masks[g]) {
                words[m.word] |= donor.words()[m.word] & m.mask;
            }
        }
        out.members.push_back(std::move(child));
    }
    return out;
}

/// Uniform crossover with crossover probability 1: a shuffled copy of the
/// selected set is split into disjoint pairs; each pair yields two children
/// with every bit swapped independently with probability 1/2. Pairing passes
/// repeat until out_size offspring exist.
inline Population uniform_crossover(const Population& selected, std::size_t out_size, RandomStream& rng)
{
    if (selected.size() < 2) {
        throw std::logic_error("uniform_crossover requires at least two selected members");
    }
    const std::size_t words_per_genome = selected.members.front().genome.words().size();

    std::vector<std::uint32_t> order(selected.size());
    std::iota(order.begin(), order.end(), 0);

    Population out;
    out.members.reserve(out_size);
    while (out.size() < out_size) {
        rng.shuffle(order);
        for (std::size_t p = 0; p + 1 < order.size() && out.size() < out_size; p += 2) {
            const Genome& pa = selected.members[order[p]].genome;
            const Genome& pb = selected.members[order[p + 1]].genome;
            Individual child_a;
            Individual child_b;
            child_a.genome = Genome(pa.length());
            child_b.genome = Genome(pa.length());
            auto& wa = child_a.genome.words_mut();
            auto& wb = child_b.genome.words_mut();
            for (std::size_t w = 0; w < words_per_genome; ++w) {
                const std::uint64_t swap_mask = rng.next_u64();
                wa[w] = (pa.words()[w] & ~swap_mask) | (pb.words()[w] & swap_mask);
                wb[w] = (pb.words()[w] & ~swap_mask) | (pa.words()[w] & swap_mask);
            }
            out.members.push_back(std::move(child_a));
            if (out.size() < out_size) {
                out.members.push_back(std::move(child_b));
            }
        }
    }
    return out;
}

} // namespace dcga
