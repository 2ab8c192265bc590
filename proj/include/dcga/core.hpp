#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcga {

enum class Sense { maximize, minimize };

/// Thrown for invalid user-facing configuration (sizes, lengths, names).
/// Programmer contract violations use std::logic_error instead.
class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// splitmix64 finalizer; used for seed derivation only.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic random stream with keyed derivation: child streams are a
/// pure function of (parent seed, key), so run r / role p always gets the
/// same stream no matter how work is scheduled.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed), state_(mix64(seed ^ 0x5851f42d4c957f2dULL))
    {
        if (state_ == 0) {
            state_ = 0x9e3779b97f4a7c15ULL;
        }
    }

    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
    {
        std::uint64_t s = mix64(seed + 0x632be59bd9b4e019ULL);
        s = mix64(s ^ a);
        return mix64(s ^ b);
    }

    RandomStream derive(std::uint64_t a, std::uint64_t b = 0) const { return RandomStream(derive_seed(seed_, a, b)); }

    std::uint64_t seed() const { return seed_; }

    // xorshift64* core. Standardized here (not impl-defined like
    // std::uniform_int_distribution) so traces are byte-identical across
    // toolchains.
    std::uint64_t next_u64()
    {
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dULL;
    }

    /// Unbiased draw from [0, n).
    std::uint64_t uniform_index(std::uint64_t n)
    {
        if (n == 0) {
            throw std::logic_error("uniform_index: n must be positive");
        }
        const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
        const std::uint64_t bound = 0 - rem; // largest multiple of n, as uint64; 0 means 2^64
        std::uint64_t x = next_u64();
        while (rem != 0 && x >= bound) {
            x = next_u64();
        }
        return x % n;
    }

    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    template <class T> void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

  private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

/// Fixed-length binary string, packed 64 bits per word. Padding bits in the
/// top word are kept zero; anything writing words directly must preserve
/// that.
class Genome {
  public:
    Genome() = default;

    explicit Genome(std::size_t length) : length_(length), words_((length + 63) / 64, 0)
    {
        if (length == 0) {
            throw config_error("genome length must be >= 1");
        }
    }

    static Genome random(std::size_t length, RandomStream& rng)
    {
        Genome g(length);
        for (auto& w : g.words_) {
            w = rng.next_u64();
        }
        g.mask_top();
        return g;
    }

    std::size_t length() const { return length_; }

    bool bit(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }

    void set_bit(std::size_t i, bool v)
    {
        const std::uint64_t mask = 1ULL << (i & 63);
        if (v) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }

    std::size_t count_ones() const
    {
        std::size_t total = 0;
        for (auto w : words_) {
            total += static_cast<std::size_t>(std::popcount(w));
        }
        return total;
    }

    /// Popcount over the half-open bit range [first, first + count).
    std::size_t ones_in_range(std::size_t first, std::size_t count) const
    {
        std::size_t total = 0;
        std::size_t remaining = count;
        std::size_t w = first >> 6;
        std::size_t offset = first & 63;
        while (remaining > 0) {
            const std::size_t take = std::min<std::size_t>(64 - offset, remaining);
            std::uint64_t word = words_[w] >> offset;
            if (take < 64) {
                word &= (1ULL << take) - 1;
            }
            total += static_cast<std::size_t>(std::popcount(word));
            remaining -= take;
            offset = 0;
            ++w;
        }
        return total;
    }

    const std::vector<std::uint64_t>& words() const { return words_; }

    // Direct word access for the crossover operators; callers must keep the
    // top-word padding zero.
    std::vector<std::uint64_t>& words_mut() { return words_; }

    std::string to_string() const
    {
        std::string s(length_, '0');
        for (std::size_t i = 0; i < length_; ++i) {
            if (bit(i)) {
                s[i] = '1';
            }
        }
        return s;
    }

    bool operator==(const Genome& other) const = default;

  private:
    void mask_top()
    {
        const std::size_t used = length_ & 63;
        if (used != 0) {
            words_.back() &= ~0ULL >> (64 - used);
        }
    }

    std::size_t length_ = 0;
    std::vector<std::uint64_t> words_;
};

struct Individual {
    Genome genome;
    double fitness = std::numeric_limits<double>::quiet_NaN();
    int evaluated_phase = -1;

    bool evaluated() const { return evaluated_phase >= 0 && std::isfinite(fitness); }
};

struct Population {
    std::vector<Individual> members;

    std::size_t size() const { return members.size(); }

    std::size_t genome_length() const { return members.empty() ? 0 : members.front().genome.length(); }
};

inline Population random_population(std::size_t size, std::size_t genome_length, RandomStream& rng)
{
    if (size < 2) {
        throw config_error("population size must be >= 2");
    }
    if (genome_length < 1) {
        throw config_error("genome length must be >= 1");
    }
    Population pop;
    pop.members.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        pop.members.push_back(Individual{Genome::random(genome_length, rng)});
    }
    return pop;
}

/// Evaluates every member at the given phase. Returns the number of
/// objective evaluations spent (== pop.size()).
template <class Problem> std::size_t evaluate_population(Population& pop, const Problem& problem, int phase)
{
    if (pop.genome_length() != problem.genome_length()) {
        throw config_error("genome length " + std::to_string(pop.genome_length()) +
                           " does not match problem length " + std::to_string(problem.genome_length()));
    }
    for (auto& ind : pop.members) {
        ind.fitness = problem.evaluate(ind.genome, phase);
        ind.evaluated_phase = phase;
    }
    return pop.size();
}

/// Environment clock: the phase flips every cycle_length generations,
/// walking through phase_count phases.
class EnvironmentClock {
  public:
    EnvironmentClock(int cycle_length, int phase_count = 2) : cycle_length_(cycle_length), phase_count_(phase_count)
    {
        if (cycle_length < 1) {
            throw config_error("cycle length must be >= 1");
        }
        if (phase_count < 1) {
            throw config_error("phase count must be >= 1");
        }
    }

    int cycle_length() const { return cycle_length_; }
    int phase_count() const { return phase_count_; }

    int phase(long long t) const { return static_cast<int>((t / cycle_length_) % phase_count_); }

    bool is_change(long long t) const { return t > 0 && t % cycle_length_ == 0; }

  private:
    int cycle_length_;
    int phase_count_;
};

inline bool oracle_change_detected(const EnvironmentClock& clock, long long t)
{
    if (t < 0) {
        throw std::logic_error("generation index must be >= 0");
    }
    return clock.is_change(t);
}

/// Single-sentinel detection: re-evaluate a stored solution and flag a
/// change when its fitness moved by more than tol.
template <class Problem>
bool sentinel_change_detected(const Individual& sentinel, const Problem& problem, int phase, double tol = 1e-9)
{
    if (!sentinel.evaluated()) {
        throw std::logic_error("sentinel must have been evaluated");
    }
    return std::fabs(problem.evaluate(sentinel.genome, phase) - sentinel.fitness) > tol;
}

} // namespace dcga
