#pragma once

#include "dcga/core.hpp"

#include <array>
#include <memory>

namespace dcga {

/// Phase-dependent fitness function with known per-phase optimum.
/// evaluate() must be pure in (genome, phase); mutable environment state
/// (the moving parabola's offset) only changes inside on_change().
class DynamicProblem {
  public:
    virtual ~DynamicProblem() = default;

    virtual std::string name() const = 0;
    virtual std::size_t genome_length() const = 0;
    virtual Sense sense() const = 0;
    virtual int phase_count() const { return 2; }
    virtual double evaluate(const Genome& genome, int phase) const = 0;
    virtual double optimum_value(int phase) const = 0;

    /// Called once per environment change event (cycle boundary).
    virtual void on_change() {}

    virtual std::unique_ptr<DynamicProblem> clone() const = 0;
};

/// Deceptive trap over the ones-count u of a k-bit block: high at u = k,
/// otherwise a slope from low at u = 0 down to zero at u = k - 1.
inline double trap_value(int u, int k, double low, double high)
{
    if (k < 2) {
        throw config_error("trap order must be >= 2");
    }
    if (u < 0 || u > k) {
        throw std::logic_error("ones count out of range for trap block");
    }
    if (u == k) {
        return high;
    }
    return low - static_cast<double>(u) * low / static_cast<double>(k - 1);
}

struct TrapSpec {
    int k = 5;
    int blocks = 10;
    double low;
    double high;

    TrapSpec(int order, int block_count)
        : k(order), blocks(block_count), low(static_cast<double>(order)), high(static_cast<double>(order) + 1.0)
    {
        if (order < 2) {
            throw config_error("trap order k must be >= 2");
        }
        if (block_count < 1) {
            throw config_error("trap blocks must be >= 1");
        }
    }

    std::size_t genome_length() const { return static_cast<std::size_t>(k) * blocks; }
};

/// Cyclic trap: even phases reward all zeros, odd phases all ones. The
/// optimum value blocks*(k+1) is the same in every phase; only its location
/// flips between the two maximally distant corners.
class DynamicTrap : public DynamicProblem {
  public:
    explicit DynamicTrap(TrapSpec spec) : spec_(spec) {}

    std::string name() const override { return "dynamic_trap"; }
    std::size_t genome_length() const override { return spec_.genome_length(); }
    Sense sense() const override { return Sense::maximize; }

    double evaluate(const Genome& genome, int phase) const override
    {
        require_length(genome.length(), genome_length());
        double total = 0;
        for (int b = 0; b < spec_.blocks; ++b) {
            const int u = static_cast<int>(genome.ones_in_range(static_cast<std::size_t>(b) * spec_.k, spec_.k));
            const int effective = phase % 2 == 0 ? spec_.k - u : u;
            total += trap_value(effective, spec_.k, spec_.low, spec_.high);
        }
        return total;
    }

    double optimum_value(int) const override { return spec_.blocks * spec_.high; }

    std::unique_ptr<DynamicProblem> clone() const override { return std::make_unique<DynamicTrap>(*this); }

    const TrapSpec& spec() const { return spec_; }

  protected:
    static void require_length(std::size_t got, std::size_t want)
    {
        if (got != want) {
            throw config_error("genome length " + std::to_string(got) + " does not match problem length " +
                               std::to_string(want));
        }
    }

  private:
    TrapSpec spec_;
};

/// Stationary trap baseline; phase is ignored and the optimum sits at all
/// ones, exactly the trap definition applied per block.
class StaticTrap : public DynamicProblem {
  public:
    explicit StaticTrap(TrapSpec spec) : spec_(spec) {}

    std::string name() const override { return "static_trap"; }
    std::size_t genome_length() const override { return spec_.genome_length(); }
    Sense sense() const override { return Sense::maximize; }
    int phase_count() const override { return 1; }

    double evaluate(const Genome& genome, int) const override
    {
        if (genome.length() != genome_length()) {
            throw config_error("genome length does not match problem length");
        }
        double total = 0;
        for (int b = 0; b < spec_.blocks; ++b) {
            const int u = static_cast<int>(genome.ones_in_range(static_cast<std::size_t>(b) * spec_.k, spec_.k));
            total += trap_value(u, spec_.k, spec_.low, spec_.high);
        }
        return total;
    }

    double optimum_value(int) const override { return spec_.blocks * spec_.high; }

    std::unique_ptr<DynamicProblem> clone() const override { return std::make_unique<StaticTrap>(*this); }

  private:
    TrapSpec spec_;
};

/// Order-4 trap with asymmetric attractors. Phase 0: global peak 5 at
/// u = 0, deceptive local peak 4 at u = 3, zero at u = 4. Phase 1 mirrors
/// the shape onto the opposite corner. The two phase landscapes are not
/// bit-complement images of each other (table0[1] != table0[3]), which is
/// the point of the construction.
struct ModifiedTrap4Spec {
    int blocks = 10;
    std::array<double, 5> phase0_table = {5.0, 4.0 / 3.0, 8.0 / 3.0, 4.0, 0.0};
    std::array<double, 5> phase1_table = {0.0, 4.0, 8.0 / 3.0, 4.0 / 3.0, 5.0};

    explicit ModifiedTrap4Spec(int block_count) : blocks(block_count)
    {
        if (block_count < 1) {
            throw config_error("trap blocks must be >= 1");
        }
    }
};

class ModifiedTrap4 : public DynamicProblem {
  public:
    explicit ModifiedTrap4(ModifiedTrap4Spec spec) : spec_(spec) {}

    std::string name() const override { return "modified_trap4"; }
    std::size_t genome_length() const override { return static_cast<std::size_t>(spec_.blocks) * 4; }
    Sense sense() const override { return Sense::maximize; }

    double evaluate(const Genome& genome, int phase) const override
    {
        if (genome.length() != genome_length()) {
            throw config_error("genome length does not match problem length");
        }
        const auto& table = phase % 2 == 0 ? spec_.phase0_table : spec_.phase1_table;
        double total = 0;
        for (int b = 0; b < spec_.blocks; ++b) {
            total += table[genome.ones_in_range(static_cast<std::size_t>(b) * 4, 4)];
        }
        return total;
    }

    double optimum_value(int phase) const override
    {
        const auto& table = phase % 2 == 0 ? spec_.phase0_table : spec_.phase1_table;
        return spec_.blocks * *std::max_element(table.begin(), table.end());
    }

    std::unique_ptr<DynamicProblem> clone() const override { return std::make_unique<ModifiedTrap4>(*this); }

    const ModifiedTrap4Spec& spec() const { return spec_; }

  private:
    ModifiedTrap4Spec spec_;
};

/// Alternates the block structure itself: phase 0 scores order-4 blocks
/// (optimum all zeros, attractor at u = 3), phase 1 order-3 blocks (optimum
/// all ones, attractor at u = 1). Length must divide by both, i.e. by 12.
struct SwitchingTrapSpec {
    int length = 12;
    std::array<double, 5> trap4_table = {5.0, 4.0 / 3.0, 8.0 / 3.0, 4.0, 0.0};
    std::array<double, 4> trap3_table = {0.0, 3.0, 1.5, 4.0};

    explicit SwitchingTrapSpec(int genome_length) : length(genome_length)
    {
        if (genome_length < 12 || genome_length % 12 != 0) {
            throw config_error("length must be divisible by 12");
        }
    }
};

class SwitchingTrap : public DynamicProblem {
  public:
    explicit SwitchingTrap(SwitchingTrapSpec spec) : spec_(spec) {}

    std::string name() const override { return "switching_trap"; }
    std::size_t genome_length() const override { return static_cast<std::size_t>(spec_.length); }
    Sense sense() const override { return Sense::maximize; }

    double evaluate(const Genome& genome, int phase) const override
    {
        if (genome.length() != genome_length()) {
            throw config_error("genome length does not match problem length");
        }
        double total = 0;
        if (phase % 2 == 0) {
            for (int b = 0; b < spec_.length / 4; ++b) {
                total += spec_.trap4_table[genome.ones_in_range(static_cast<std::size_t>(b) * 4, 4)];
            }
        } else {
            for (int b = 0; b < spec_.length / 3; ++b) {
                total += spec_.trap3_table[genome.ones_in_range(static_cast<std::size_t>(b) * 3, 3)];
            }
        }
        return total;
    }

    double optimum_value(int phase) const override
    {
        if (phase % 2 == 0) {
            return (spec_.length / 4) * *std::max_element(spec_.trap4_table.begin(), spec_.trap4_table.end());
        }
        return (spec_.length / 3) * *std::max_element(spec_.trap3_table.begin(), spec_.trap3_table.end());
    }

    std::unique_ptr<DynamicProblem> clone() const override { return std::make_unique<SwitchingTrap>(*this); }

    const SwitchingTrapSpec& spec() const { return spec_; }

  private:
    SwitchingTrapSpec spec_;
};

/// Big-endian decode of bit range [first, first + bits) onto
/// [lower, upper]: all zeros -> lower, all ones -> upper.
inline double decode_binary(const Genome& genome, std::size_t first, std::size_t bits, double lower, double upper)
{
    if (bits == 0) {
        throw config_error("decode width must be >= 1");
    }
    std::uint64_t v = 0;
    for (std::size_t j = 0; j < bits; ++j) {
        v = (v << 1) | static_cast<std::uint64_t>(genome.bit(first + j));
    }
    const double vmax = std::ldexp(1.0, static_cast<int>(bits)) - 1.0;
    return lower + (upper - lower) * static_cast<double>(v) / vmax;
}

struct MovingParabolaSpec {
    int n_vars = 10;
    int bits_per_var = 10;
    double lower = -40.0;
    double upper = 40.0;
    double severity = 1.0;

    MovingParabolaSpec() = default;

    void validate() const
    {
        if (n_vars < 1) {
            throw config_error("vars must be >= 1");
        }
        if (bits_per_var < 1 || bits_per_var > 32) {
            throw config_error("bits must be in [1, 32]");
        }
        if (!(upper > lower)) {
            throw config_error("upper bound must exceed lower bound");
        }
    }
};

/// f(x) = sum_i (x_i + delta_i)^2, minimized; every change event shifts all
/// offsets by the severity, so the minimizer drifts one step per cycle.
class MovingParabola : public DynamicProblem {
  public:
    explicit MovingParabola(MovingParabolaSpec spec) : spec_(spec), delta_(spec.n_vars, 0.0) { spec_.validate(); }

    std::string name() const override { return "moving_parabola"; }
    std::size_t genome_length() const override
    {
        return static_cast<std::size_t>(spec_.n_vars) * spec_.bits_per_var;
    }
    Sense sense() const override { return Sense::minimize; }

    double evaluate(const Genome& genome, int) const override
    {
        if (genome.length() != genome_length()) {
            throw config_error("genome length does not match problem length");
        }
        double total = 0;
        for (int i = 0; i < spec_.n_vars; ++i) {
            const double x = decode_binary(genome, static_cast<std::size_t>(i) * spec_.bits_per_var,
                                           spec_.bits_per_var, spec_.lower, spec_.upper);
            const double term = x + delta_[i];
            total += term * term;
        }
        return total;
    }

    /// Best achievable value on the decoding grid for the current offsets.
    double optimum_value(int) const override
    {
        const double span = spec_.upper - spec_.lower;
        const double vmax = std::ldexp(1.0, spec_.bits_per_var) - 1.0;
        double total = 0;
        for (double d : delta_) {
            const double ideal = (-d - spec_.lower) / span * vmax;
            const long long v0 = std::llround(ideal);
            double best = std::numeric_limits<double>::infinity();
            for (long long v = v0 - 1; v <= v0 + 1; ++v) {
                const long long vc = std::clamp(v, 0LL, static_cast<long long>(vmax));
                const double x = spec_.lower + span * static_cast<double>(vc) / vmax;
                best = std::min(best, (x + d) * (x + d));
            }
            total += best;
        }
        return total;
    }

    void advance_environment()
    {
        for (double& d : delta_) {
            d += spec_.severity;
        }
    }

    void on_change() override { advance_environment(); }

    std::unique_ptr<DynamicProblem> clone() const override { return std::make_unique<MovingParabola>(*this); }

    const std::vector<double>& delta() const { return delta_; }
    const MovingParabolaSpec& spec() const { return spec_; }

  private:
    MovingParabolaSpec spec_;
    std::vector<double> delta_;
};

struct ProblemCatalogEntry {
    const char* name;
    const char* parameters;
};

inline const std::vector<ProblemCatalogEntry>& problem_catalog()
{
    static const std::vector<ProblemCatalogEntry> entries = {
        {"dynamic_trap", "k (3|4|5), blocks — cyclic trap, optimum flips between all-0s and all-1s"},
        {"static_trap", "k, blocks — stationary trap baseline, optimum at all-1s"},
        {"modified_trap4", "blocks — order-4 trap with asymmetric attractors"},
        {"switching_trap", "length (divisible by 12) — alternates order-4 and order-3 blocks"},
        {"moving_parabola", "severity (default 1), vars (default 10), bits (default 10) — minimization"},
    };
    return entries;
}

} // namespace dcga
