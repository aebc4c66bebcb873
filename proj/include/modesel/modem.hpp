#pragma once

/**
 * \file modem.hpp
 *
 * Gray-mapped square QAM over complex AWGN with max-log LLR demapping.
 *
 * Each axis carries bits_per_symbol/2 bits as a Gray-coded PAM level; the
 * constellation is scaled to unit average symbol energy so the SNR argument
 * is Es/N0. LLRs follow the convention log(P(b=0)/P(b=1)).
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "random.hpp"

namespace modesel {

enum class ModulationScheme { qpsk = 0, qam16 = 1, qam64 = 2, qam256 = 3 };

inline constexpr std::array<ModulationScheme, 4> kAllModulations{
    ModulationScheme::qpsk, ModulationScheme::qam16, ModulationScheme::qam64, ModulationScheme::qam256};

inline constexpr int bits_per_symbol(ModulationScheme m) noexcept
{
    return 2 * (static_cast<int>(m) + 1);
}

/// 0 for QPSK up to 3 for 256-QAM.
inline constexpr int modulation_index(ModulationScheme m) noexcept { return static_cast<int>(m); }

inline constexpr std::string_view to_string(ModulationScheme m)
{
    switch (m) {
    case ModulationScheme::qpsk: return "qpsk";
    case ModulationScheme::qam16: return "qam16";
    case ModulationScheme::qam64: return "qam64";
    case ModulationScheme::qam256: return "qam256";
    }
    return "?";
}

inline std::optional<ModulationScheme> parse_modulation(std::string_view s)
{
    for (const auto m : kAllModulations)
        if (s == to_string(m))
            return m;
    if (s == "16qam")
        return ModulationScheme::qam16;
    if (s == "64qam")
        return ModulationScheme::qam64;
    if (s == "256qam")
        return ModulationScheme::qam256;
    return std::nullopt;
}

using Bits = std::vector<std::uint8_t>;

namespace detail {

/// Per-axis Gray PAM: level[i] is the amplitude whose Gray label is i.
struct PamAxis {
    int bits = 1;
    std::vector<double> level_of_label;

    explicit PamAxis(int bits_per_axis) : bits(bits_per_axis)
    {
        const int levels = 1 << bits;
        // Unit average symbol energy over both axes: E|s|^2 = 2 (L^2 - 1) / 3 before scaling.
        const double scale = 1.0 / std::sqrt(2.0 * (levels * levels - 1) / 3.0);
        level_of_label.resize(static_cast<std::size_t>(levels));
        for (int i = 0; i < levels; ++i) {
            const int gray = i ^ (i >> 1);
            level_of_label[static_cast<std::size_t>(gray)] = (2.0 * i - (levels - 1)) * scale;
        }
    }

    double map(std::span<const std::uint8_t> bits_msb_first) const
    {
        unsigned label = 0;
        for (const auto b : bits_msb_first)
            label = (label << 1) | (b & 1u);
        return level_of_label[label];
    }

    /// Max-log LLR for each of this axis's bits, MSB first.
    void demap(double y, double n0, std::span<double> out) const
    {
        const auto levels = level_of_label.size();
        for (int k = 0; k < bits; ++k) {
            const unsigned mask = 1u << (bits - 1 - k);
            double d0 = std::numeric_limits<double>::infinity();
            double d1 = d0;
            for (std::size_t label = 0; label < levels; ++label) {
                const double e = y - level_of_label[label];
                const double d = e * e;
                if (label & mask)
                    d1 = std::min(d1, d);
                else
                    d0 = std::min(d0, d);
            }
            out[static_cast<std::size_t>(k)] = (d1 - d0) / n0;
        }
    }
};

inline const PamAxis& axis_for(ModulationScheme m)
{
    static const std::array<PamAxis, 4> axes{PamAxis(1), PamAxis(2), PamAxis(3), PamAxis(4)};
    return axes[static_cast<std::size_t>(m)];
}

} // namespace detail

/// Modulates, adds complex AWGN at the given Es/N0 and returns one LLR per
/// input bit. The tail is zero-padded to a whole symbol; pad LLRs are dropped.
inline std::vector<double> transmit_awgn(std::span<const std::uint8_t> bits, ModulationScheme mod,
                                         double snr_db, Rng& rng)
{
    const auto& axis = detail::axis_for(mod);
    const auto bps = static_cast<std::size_t>(bits_per_symbol(mod));
    const auto half = bps / 2;
    const std::size_t n_sym = (bits.size() + bps - 1) / bps;

    Bits padded(bits.begin(), bits.end());
    padded.resize(n_sym * bps, 0);

    const double n0 = std::pow(10.0, -snr_db / 10.0);
    std::normal_distribution<double> noise(0.0, std::sqrt(n0 / 2.0));

    std::vector<double> llr(n_sym * bps);
    for (std::size_t s = 0; s < n_sym; ++s) {
        const std::span<const std::uint8_t> sym(padded.data() + s * bps, bps);
        const double i = axis.map(sym.first(half)) + noise(rng);
        const double q = axis.map(sym.last(half)) + noise(rng);
        axis.demap(i, n0, std::span<double>(llr.data() + s * bps, half));
        axis.demap(q, n0, std::span<double>(llr.data() + s * bps + half, half));
    }
    llr.resize(bits.size());
    return llr;
}

inline std::vector<double> transmit_awgn(std::span<const std::uint8_t> bits, ModulationScheme mod,
                                         double snr_db, std::uint64_t seed)
{
    Rng rng(seed);
    return transmit_awgn(bits, mod, snr_db, rng);
}

inline Bits hard_decisions(std::span<const double> llr)
{
    Bits out(llr.size());
    for (std::size_t i = 0; i < llr.size(); ++i)
        out[i] = llr[i] < 0.0 ? 1 : 0;
    return out;
}

} // namespace modesel
