#include "gnair/qmc.hpp"

#include <bit>

#include "gnair/errors.hpp"

namespace gnair::qmc
{

namespace
{

// Joe-Kuo primitive polynomials and initial direction numbers for dimensions 2..8.
struct Primitive
{
    unsigned degree;
    unsigned coeffs;
    std::array<std::uint32_t, 5> m;
};

constexpr std::array<Primitive, max_dimensions - 1> joe_kuo{{
    {1, 0, {1, 0, 0, 0, 0}},
    {2, 1, {1, 3, 0, 0, 0}},
    {3, 1, {1, 3, 1, 0, 0}},
    {3, 2, {1, 1, 1, 0, 0}},
    {4, 1, {1, 1, 3, 3, 0}},
    {4, 4, {1, 3, 5, 13, 0}},
    {5, 2, {1, 1, 5, 5, 17}},
}};

std::uint32_t reverse_bits(std::uint32_t x)
{
    x = ((x >> 1) & 0x55555555u) | ((x & 0x55555555u) << 1);
    x = ((x >> 2) & 0x33333333u) | ((x & 0x33333333u) << 2);
    x = ((x >> 4) & 0x0f0f0f0fu) | ((x & 0x0f0f0f0fu) << 4);
    x = ((x >> 8) & 0x00ff00ffu) | ((x & 0x00ff00ffu) << 8);
    return (x >> 16) | (x << 16);
}

std::uint32_t laine_karras(std::uint32_t x, std::uint32_t seed)
{
    x += seed;
    x ^= x * 0x6c50b47cu;
    x ^= x * 0xb82f1e52u;
    x ^= x * 0xc7afe638u;
    x ^= x * 0x8d22f6e6u;
    return x;
}

} // namespace

std::uint32_t owen_scramble(std::uint32_t x, std::uint32_t seed)
{
    return reverse_bits(laine_karras(reverse_bits(x), seed));
}

ScrambledSobol::ScrambledSobol(int dimensions, std::uint64_t seed) : dimensions_(dimensions)
{
    if (dimensions < 1 || dimensions > max_dimensions)
        throw DomainError("ScrambledSobol: unsupported dimension count");

    for (int b = 0; b < 32; ++b)
        directions_[0][b] = 1u << (31 - b);

    for (int d = 1; d < dimensions; ++d)
    {
        const Primitive& p = joe_kuo[d - 1];
        const unsigned s = p.degree;
        auto& v = directions_[d];
        for (unsigned b = 0; b < s; ++b)
            v[b] = p.m[b] << (31 - b);
        for (unsigned b = s; b < 32; ++b)
        {
            std::uint32_t value = v[b - s] ^ (v[b - s] >> s);
            for (unsigned j = 1; j < s; ++j)
                if ((p.coeffs >> (s - 1 - j)) & 1u)
                    value ^= v[b - j];
            v[b] = value;
        }
    }

    std::uint64_t h = mix64(seed);
    for (int d = 0; d < dimensions; ++d)
    {
        h = mix64(h + static_cast<std::uint64_t>(d));
        seeds_[d] = static_cast<std::uint32_t>(h >> 32);
    }
}

void ScrambledSobol::next_raw(std::uint32_t* out)
{
    // Point 0 is the origin; afterwards flip the direction number of the lowest zero bit of index-1.
    if (index_ > 0)
    {
        const int c = std::countr_zero(index_);
        for (int d = 0; d < dimensions_; ++d)
            state_[d] ^= directions_[d][c];
    }
    ++index_;
    for (int d = 0; d < dimensions_; ++d)
        out[d] = state_[d];
}

void ScrambledSobol::next(double* out)
{
    std::array<std::uint32_t, max_dimensions> raw{};
    next_raw(raw.data());
    constexpr double scale = 1.0 / 4294967296.0;
    for (int d = 0; d < dimensions_; ++d)
        out[d] = (static_cast<double>(owen_scramble(raw[d], seeds_[d])) + 0.5) * scale;
}

} // namespace gnair::qmc
