#pragma once

#include "dcga/core.hpp"

#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <utility>

namespace dcga {

/// Disjoint groups of gene indices covering {0..l-1}. Canonical form keeps
/// indices ascending within a group and groups ordered by first index.
struct GenePartition {
    std::vector<std::vector<std::uint32_t>> groups;

    static GenePartition singletons(std::size_t genome_length)
    {
        GenePartition p;
        p.groups.resize(genome_length);
        for (std::uint32_t i = 0; i < genome_length; ++i) {
            p.groups[i] = {i};
        }
        return p;
    }

    std::size_t genome_length() const
    {
        std::size_t n = 0;
        for (const auto& g : groups) {
            n += g.size();
        }
        return n;
    }

    std::size_t largest_group() const
    {
        std::size_t best = 0;
        for (const auto& g : groups) {
            best = std::max(best, g.size());
        }
        return best;
    }

    void canonicalize()
    {
        for (auto& g : groups) {
            std::sort(g.begin(), g.end());
        }
        std::sort(groups.begin(), groups.end(),
                  [](const auto& a, const auto& b) { return a.front() < b.front(); });
    }

    void validate(std::size_t genome_length) const
    {
        std::vector<char> seen(genome_length, 0);
        for (const auto& g : groups) {
            if (g.empty()) {
                throw config_error("partition group must be non-empty");
            }
            for (auto idx : g) {
                if (idx >= genome_length) {
                    throw config_error("group index " + std::to_string(idx) + " out of range for length " +
                                       std::to_string(genome_length));
                }
                if (seen[idx]) {
                    throw config_error("partition groups must be disjoint (index " + std::to_string(idx) + ")");
                }
                seen[idx] = 1;
            }
        }
        for (std::size_t i = 0; i < genome_length; ++i) {
            if (!seen[i]) {
                throw config_error("partition must cover index " + std::to_string(i));
            }
        }
    }

    /// Canonical text form, e.g. "[0,1,2|3,4|5]".
    std::string to_string() const
    {
        GenePartition canon = *this;
        canon.canonicalize();
        std::ostringstream out;
        out << '[';
        for (std::size_t g = 0; g < canon.groups.size(); ++g) {
            if (g > 0) {
                out << '|';
            }
            for (std::size_t j = 0; j < canon.groups[g].size(); ++j) {
                if (j > 0) {
                    out << ',';
                }
                out << canon.groups[g][j];
            }
        }
        out << ']';
        return out.str();
    }

    bool operator==(const GenePartition& other) const = default;
};

/// Configuration counts for one group. Bit j of a configuration value is the
/// allele at the group's j-th smallest index. Dense storage while the table
/// fits the source population, sparse (config -> count) pairs otherwise.
struct GroupTable {
    std::uint32_t width = 0;
    bool sparse = false;
    std::vector<std::uint32_t> dense;
    std::vector<std::pair<std::uint64_t, std::uint32_t>> entries; // sorted by config

    std::uint32_t count(std::uint64_t config) const
    {
        if (!sparse) {
            return config < dense.size() ? dense[config] : 0;
        }
        auto it = std::lower_bound(entries.begin(), entries.end(), config,
                                   [](const auto& e, std::uint64_t c) { return e.first < c; });
        return (it != entries.end() && it->first == config) ? it->second : 0;
    }

    template <class Fn> void for_each(Fn&& fn) const
    {
        if (!sparse) {
            for (std::uint64_t c = 0; c < dense.size(); ++c) {
                if (dense[c] > 0) {
                    fn(c, dense[c]);
                }
            }
        } else {
            for (const auto& [c, n] : entries) {
                fn(c, n);
            }
        }
    }
};

struct MarginalProductModel {
    GenePartition partition;
    std::vector<GroupTable> tables; // parallel to partition.groups
    std::uint32_t population_size = 0;
};

struct MdlScore {
    double compressed_population_complexity = 0;
    double model_complexity = 0;
    double total = 0;
};

namespace detail {

inline std::uint64_t group_config(const Genome& g, const std::vector<std::uint32_t>& group)
{
    std::uint64_t v = 0;
    for (std::size_t j = 0; j < group.size(); ++j) {
        v |= static_cast<std::uint64_t>(g.bit(group[j])) << j;
    }
    return v;
}

inline double entropy_bits(const std::vector<std::uint32_t>& counts, std::size_t n)
{
    double e = 0;
    const double inv = 1.0 / static_cast<double>(n);
    for (auto c : counts) {
        if (c > 0) {
            const double p = static_cast<double>(c) * inv;
            e -= p * std::log2(p);
        }
    }
    return e < 0 ? 0.0 : e;
}

} // namespace detail

/// Exact configuration counts of one group over a population.
inline GroupTable estimate_group_table(const std::vector<std::uint32_t>& group, const Population& pop)
{
    GroupTable table;
    table.width = static_cast<std::uint32_t>(group.size());
    if (group.size() >= 63) {
        throw config_error("group size " + std::to_string(group.size()) + " exceeds supported width");
    }
    const std::uint64_t card = 1ULL << group.size();
    table.sparse = card > pop.size();
    if (!table.sparse) {
        table.dense.assign(card, 0);
        for (const auto& ind : pop.members) {
            ++table.dense[detail::group_config(ind.genome, group)];
        }
    } else {
        std::vector<std::uint64_t> configs;
        configs.reserve(pop.size());
        for (const auto& ind : pop.members) {
            configs.push_back(detail::group_config(ind.genome, group));
        }
        std::sort(configs.begin(), configs.end());
        for (std::size_t i = 0; i < configs.size();) {
            std::size_t j = i;
            while (j < configs.size() && configs[j] == configs[i]) {
                ++j;
            }
            table.entries.emplace_back(configs[i], static_cast<std::uint32_t>(j - i));
            i = j;
        }
    }
    return table;
}

/// Shannon entropy (bits) of the group's configuration distribution.
inline double group_entropy(const Population& pop, const std::vector<std::uint32_t>& group)
{
    if (group.empty()) {
        throw config_error("group must be non-empty");
    }
    if (pop.size() == 0) {
        throw config_error("population must be non-empty");
    }
    for (auto idx : group) {
        if (idx >= pop.genome_length()) {
            throw config_error("group index " + std::to_string(idx) + " out of range");
        }
    }
    const GroupTable table = estimate_group_table(group, pop);
    double e = 0;
    const double inv = 1.0 / static_cast<double>(pop.size());
    table.for_each([&](std::uint64_t, std::uint32_t c) {
        const double p = static_cast<double>(c) * inv;
        e -= p * std::log2(p);
    });
    return e < 0 ? 0.0 : e;
}

inline double compressed_population_complexity(const Population& pop, const GenePartition& partition)
{
    partition.validate(pop.genome_length());
    double sum = 0;
    for (const auto& g : partition.groups) {
        sum += group_entropy(pop, g);
    }
    return static_cast<double>(pop.size()) * sum;
}

inline double model_complexity(const GenePartition& partition, std::size_t population_size)
{
    if (population_size < 1) {
        throw config_error("population size must be >= 1");
    }
    double table_cells = 0;
    for (const auto& g : partition.groups) {
        table_cells += std::ldexp(1.0, static_cast<int>(g.size())) - 1.0;
    }
    return std::log2(static_cast<double>(population_size) + 1.0) * table_cells;
}

inline MdlScore mdl_score(const Population& pop, const GenePartition& partition)
{
    MdlScore s;
    s.compressed_population_complexity = compressed_population_complexity(pop, partition);
    s.model_complexity = model_complexity(partition, pop.size());
    s.total = s.compressed_population_complexity + s.model_complexity;
    return s;
}

inline MarginalProductModel estimate_tables(const GenePartition& partition, const Population& pop)
{
    partition.validate(pop.genome_length());
    MarginalProductModel model;
    model.partition = partition;
    model.partition.canonicalize();
    model.population_size = static_cast<std::uint32_t>(pop.size());
    model.tables.reserve(model.partition.groups.size());
    for (const auto& g : model.partition.groups) {
        model.tables.push_back(estimate_group_table(g, pop));
    }
    return model;
}

struct ModelSearchOptions {
    std::uint32_t merge_cap = 20;      // max merged group size (table guard)
    double tie_tolerance = 1e-12;      // relative tolerance for gain ties
};

struct ModelSearchTrace {
    std::vector<double> accepted_gains; // total-MDL decrease of each accepted merge
};

namespace detail {

struct SearchGroup {
    std::vector<std::uint32_t> indices;
    std::uint32_t width = 0;
    double entropy = 0;
    std::vector<std::uint32_t> configs; // per-individual configuration value
    bool alive = true;

    // Union's two smallest indices, for the deterministic tie-break.
    std::uint32_t min_index = 0;
};

inline std::pair<std::uint32_t, std::uint32_t> merge_key(const SearchGroup& a, const SearchGroup& b)
{
    std::uint32_t second = std::numeric_limits<std::uint32_t>::max();
    const auto& first_group = a.min_index < b.min_index ? a : b;
    const auto& other_group = a.min_index < b.min_index ? b : a;
    for (auto idx : first_group.indices) {
        if (idx != first_group.min_index) {
            second = std::min(second, idx);
        }
    }
    second = std::min(second, other_group.min_index);
    return {first_group.min_index, second};
}

} // namespace detail

/// Greedy MDL partition search: start from singletons, keep applying the
/// pairwise merge with the largest total-MDL decrease, stop when none
/// decreases it. Ties within tie_tolerance go to the merge whose combined
/// index set sorts lowest. Tables are estimated from the same population.
inline MarginalProductModel greedy_model_search(const Population& pop, const ModelSearchOptions& options = {},
                                                ModelSearchTrace* trace = nullptr)
{
    if (pop.size() == 0) {
        throw config_error("population must be non-empty");
    }
    const std::size_t l = pop.genome_length();
    const std::size_t n = pop.size();
    const double log_n1 = std::log2(static_cast<double>(n) + 1.0);
    const double n_d = static_cast<double>(n);

    std::vector<detail::SearchGroup> groups(l);
    for (std::uint32_t i = 0; i < l; ++i) {
        auto& g = groups[i];
        g.indices = {i};
        g.width = 1;
        g.min_index = i;
        g.configs.resize(n);
        std::uint32_t ones = 0;
        for (std::size_t m = 0; m < n; ++m) {
            const std::uint32_t bit = pop.members[m].genome.bit(i);
            g.configs[m] = bit;
            ones += bit;
        }
        std::vector<std::uint32_t> counts = {static_cast<std::uint32_t>(n - ones), ones};
        g.entropy = detail::entropy_bits(counts, n);
    }

    std::vector<std::uint32_t> scratch_counts;
    std::vector<std::uint32_t> touched;
    touched.reserve(n);

    // Joint entropy of two groups' combined configurations.
    auto joint_entropy = [&](const detail::SearchGroup& a, const detail::SearchGroup& b) {
        const std::size_t table_size = std::size_t{1} << (a.width + b.width);
        if (scratch_counts.size() < table_size) {
            scratch_counts.assign(table_size, 0);
        }
        touched.clear();
        const std::uint32_t shift = a.width;
        for (std::size_t m = 0; m < n; ++m) {
            const std::uint32_t v = a.configs[m] | (b.configs[m] << shift);
            if (scratch_counts[v]++ == 0) {
                touched.push_back(v);
            }
        }
        double e = 0;
        const double inv = 1.0 / n_d;
        for (auto v : touched) {
            const double p = static_cast<double>(scratch_counts[v]) * inv;
            e -= p * std::log2(p);
            scratch_counts[v] = 0;
        }
        return e < 0 ? 0.0 : e;
    };

    constexpr double kNotACandidate = -std::numeric_limits<double>::infinity();

    // Total-MDL decrease of merging a and b; pairs that cannot win are
    // pruned by the bound E(ab) >= max(E(a), E(b)) without a counting pass.
    auto pair_gain = [&](const detail::SearchGroup& a, const detail::SearchGroup& b) {
        if (a.width + b.width > options.merge_cap) {
            return kNotACandidate;
        }
        const double cells_delta = std::ldexp(1.0, static_cast<int>(a.width + b.width)) -
                                   std::ldexp(1.0, static_cast<int>(a.width)) -
                                   std::ldexp(1.0, static_cast<int>(b.width)) + 1.0;
        const double mc_delta = log_n1 * cells_delta;
        if (n_d * std::min(a.entropy, b.entropy) <= mc_delta) {
            return kNotACandidate;
        }
        return n_d * (a.entropy + b.entropy - joint_entropy(a, b)) - mc_delta;
    };

    std::vector<double> gain(l * l, kNotACandidate);
    auto gain_at = [&](std::size_t i, std::size_t j) -> double& { return gain[std::min(i, j) * l + std::max(i, j)]; };

    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = i + 1; j < l; ++j) {
            gain_at(i, j) = pair_gain(groups[i], groups[j]);
        }
    }

    const double tol = options.tie_tolerance;
    while (true) {
        double best_gain = 0;
        std::size_t best_i = l, best_j = l;
        std::pair<std::uint32_t, std::uint32_t> best_key{0, 0};
        for (std::size_t i = 0; i < l; ++i) {
            if (!groups[i].alive) {
                continue;
            }
            for (std::size_t j = i + 1; j < l; ++j) {
                if (!groups[j].alive) {
                    continue;
                }
                const double g = gain_at(i, j);
                if (g <= 0) {
                    continue;
                }
                if (best_i == l) {
                    best_gain = g;
                    best_i = i;
                    best_j = j;
                    best_key = detail::merge_key(groups[i], groups[j]);
                    continue;
                }
                const double margin = tol * std::max(std::fabs(g), std::fabs(best_gain));
                if (g > best_gain + margin) {
                    best_gain = g;
                    best_i = i;
                    best_j = j;
                    best_key = detail::merge_key(groups[i], groups[j]);
                } else if (g >= best_gain - margin) {
                    const auto key = detail::merge_key(groups[i], groups[j]);
                    if (key < best_key) {
                        best_gain = g;
                        best_i = i;
                        best_j = j;
                        best_key = key;
                    }
                }
            }
        }
        if (best_i == l) {
            break; // no merge strictly decreases total MDL
        }
        if (trace != nullptr) {
            trace->accepted_gains.push_back(best_gain);
        }

        auto& a = groups[best_i];
        auto& b = groups[best_j];
        const std::uint32_t shift = a.width;
        for (std::size_t m = 0; m < n; ++m) {
            a.configs[m] |= b.configs[m] << shift;
        }
        a.indices.insert(a.indices.end(), b.indices.begin(), b.indices.end());
        a.width += b.width;
        a.min_index = std::min(a.min_index, b.min_index);
        a.entropy = [&] {
            const std::size_t table_size = std::size_t{1} << a.width;
            if (scratch_counts.size() < table_size) {
                scratch_counts.assign(table_size, 0);
            }
            touched.clear();
            for (std::size_t m = 0; m < n; ++m) {
                if (scratch_counts[a.configs[m]]++ == 0) {
                    touched.push_back(a.configs[m]);
                }
            }
            double e = 0;
            const double inv = 1.0 / n_d;
            for (auto v : touched) {
                const double p = static_cast<double>(scratch_counts[v]) * inv;
                e -= p * std::log2(p);
                scratch_counts[v] = 0;
            }
            return e < 0 ? 0.0 : e;
        }();
        b.alive = false;
        b.configs.clear();
        b.configs.shrink_to_fit();

        for (std::size_t k = 0; k < l; ++k) {
            if (k == best_i || !groups[k].alive) {
                continue;
            }
            gain_at(best_i, k) = pair_gain(groups[best_i], groups[k]);
        }
    }

    GenePartition partition;
    for (const auto& g : groups) {
        if (g.alive) {
            partition.groups.push_back(g.indices);
        }
    }
    partition.canonicalize();
    return estimate_tables(partition, pop);
}

} // namespace dcga
