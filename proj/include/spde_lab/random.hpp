#ifndef SPDE_LAB_RANDOM_HPP
#define SPDE_LAB_RANDOM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace spde_lab {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr Counter round(Counter c, Key k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
}

constexpr Counter block(Counter c, Key k) noexcept {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        c = round(c, k);
    }
    return c;
}

}  // namespace philox

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/**
 * Hierarchical key naming an independent random stream. A stream is a value:
 * copying it and drawing from both copies yields the same numbers. Children
 * are derived by appending a component (experiment id, sample index, mode
 * index, ...), so draws depend only on the key, never on which worker
 * evaluates it or in what order.
 */
class RandomStream {
public:
    explicit RandomStream(std::uint64_t master_seed) : seed_(master_seed), digest_(splitmix64(master_seed ^ kRoot)) {}

    RandomStream child(std::uint64_t component) const {
        RandomStream c = *this;
        c.path_.push_back(component);
        c.digest_ = splitmix64(digest_ ^ splitmix64(component + kBranch));
        return c;
    }

    std::uint64_t master_seed() const noexcept { return seed_; }
    const std::vector<std::uint64_t>& path() const noexcept { return path_; }

    /// 64 bits of Philox key plus 64 bits of counter prefix derived from the key path.
    philox::Key key() const noexcept {
        const std::uint64_t k = splitmix64(digest_);
        return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    }
    std::uint64_t counter_prefix() const noexcept { return splitmix64(digest_ + kPrefix); }

    /// Raw 128-bit block number `index` of this stream.
    philox::Counter raw_block(std::uint64_t index) const noexcept {
        const std::uint64_t hi = counter_prefix();
        return philox::block({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                              static_cast<std::uint32_t>(hi), static_cast<std::uint32_t>(hi >> 32)},
                             key());
    }

    bool operator==(const RandomStream& o) const { return seed_ == o.seed_ && path_ == o.path_; }

private:
    static constexpr std::uint64_t kRoot = 0x5350444542524F4Eull;
    static constexpr std::uint64_t kBranch = 0x632BE59BD9B4E019ull;
    static constexpr std::uint64_t kPrefix = 0x8CB92BA72F3D8DD7ull;

    std::uint64_t seed_;
    std::vector<std::uint64_t> path_;
    std::uint64_t digest_;
};

/**
 * Sequential standard-normal draws from one stream (Box-Muller on pairs of
 * 53-bit uniforms; each Philox block yields two normals).
 */
class NormalSource {
public:
    explicit NormalSource(const RandomStream& stream)
        : key_(stream.key()), prefix_(stream.counter_prefix()) {}

    double operator()() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const philox::Counter r = philox::block(
            {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
             static_cast<std::uint32_t>(prefix_), static_cast<std::uint32_t>(prefix_ >> 32)},
            key_);
        ++block_;
        const std::uint64_t a = (std::uint64_t{r[0]} << 32) | r[1];
        const std::uint64_t b = (std::uint64_t{r[2]} << 32) | r[3];
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    void fill(std::span<double> out) noexcept {
        for (double& x : out) {
            x = (*this)();
        }
    }

private:
    philox::Key key_;
    std::uint64_t prefix_;
    std::uint64_t block_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// The first n standard-normal draws of `stream`.
inline std::vector<double> gaussian(const RandomStream& stream, std::size_t n) {
    std::vector<double> out(n);
    NormalSource source(stream);
    source.fill(out);
    return out;
}

}  // namespace spde_lab

#endif  // SPDE_LAB_RANDOM_HPP
