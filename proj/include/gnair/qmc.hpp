#ifndef GNAIR_QMC_HPP
#define GNAIR_QMC_HPP

#include <array>
#include <cstdint>

namespace gnair::qmc
{

inline constexpr int max_dimensions = 8;

/// SplitMix64 finalizer, used to derive independent scrambling seeds.
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) { return mix64(seed ^ mix64(value)); }

/// Nested uniform (Owen) scramble of a 32-bit fixed-point coordinate via the Laine-Karras hash.
std::uint32_t owen_scramble(std::uint32_t x, std::uint32_t seed);

/**
 * Owen-scrambled Sobol points in up to max_dimensions dimensions, 32-bit resolution.
 * Points are produced in Gray-code order, so any prefix of length 2^m is a (t, m, s)-net.
 */
class ScrambledSobol
{
  public:
    ScrambledSobol(int dimensions, std::uint64_t seed);

    int dimensions() const { return dimensions_; }

    /// Writes the next point into out[0 .. dimensions). Coordinates lie in (0, 1).
    void next(double* out);

    /// Unscrambled 32-bit coordinates of the next point (for tests).
    void next_raw(std::uint32_t* out);

  private:
    int dimensions_;
    std::uint64_t index_ = 0;
    std::array<std::array<std::uint32_t, 32>, max_dimensions> directions_{};
    std::array<std::uint32_t, max_dimensions> state_{};
    std::array<std::uint32_t, max_dimensions> seeds_{};
};

} // namespace gnair::qmc

#endif // GNAIR_QMC_HPP
