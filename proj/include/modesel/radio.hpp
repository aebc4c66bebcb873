#pragma once

/**
 * \file radio.hpp
 *
 * Link budget and packet-level PHY abstraction.
 *
 * RSRP here is the wideband received power over the full channel bandwidth,
 * so SNR = RSRP - (-174 dBm/Hz + 10 log10(B) + NF). Link adaptation picks the
 * highest modulation (fixed code rate) whose calibrated BLER at the
 * penalized SNR meets the target, bounded by the technology's cap.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "calibration.hpp"
#include "error.hpp"
#include "modem.hpp"

namespace modesel {

enum class RatId { nr = 0, lte = 1, d2d = 2 };

inline constexpr std::string_view to_string(RatId r)
{
    switch (r) {
    case RatId::nr: return "nr";
    case RatId::lte: return "lte";
    case RatId::d2d: return "d2d";
    }
    return "?";
}

struct Rat {
    RatId id = RatId::nr;
    double carrier_ghz = 5.5;
    double bandwidth_hz = 20e6;
    double scs_khz = 30.0;
    double tx_power_dbm = 35.0;
    double noise_figure_db = 6.0;
    ModulationScheme max_modulation = ModulationScheme::qam256;
    double diversity_bonus_db = 0.0;

    double tti_ms() const { return 1.0 / (scs_khz / 15.0); }
};

inline Rat default_rat(RatId id)
{
    switch (id) {
    case RatId::nr: return {RatId::nr, 5.5, 20e6, 30.0, 35.0, 6.0, ModulationScheme::qam256, 0.0};
    case RatId::lte: return {RatId::lte, 2.1, 20e6, 15.0, 35.0, 7.0, ModulationScheme::qam64, 0.0};
    case RatId::d2d: return {RatId::d2d, 2.4, 20e6, 15.0, 15.0, 5.0, ModulationScheme::qam64, 0.0};
    }
    return {};
}

struct PhyParams {
    std::array<Rat, 3> rats{default_rat(RatId::nr), default_rat(RatId::lte), default_rat(RatId::d2d)};
    double bs_height_m = 25.0;
    double ue_height_m = 1.5;
    double shadow_sigma_db = 6.0;
    double speed_penalty_db_per_mps = 0.2;
    std::array<double, 4> modulation_penalty_db{0.0, 0.5, 1.0, 1.5};
    double overhead = 0.14;
    double bler_target = 0.1;
    double sched_tti = 0.5;
    double decode_tti = 0.1;
    double harq_rtt_tti = 8.0;
    double queue_base_ms = 2.0;
    double queue_speed_ref_mps = 10.0;
    double latency_cap_ms = 100.0;

    const Rat& rat(RatId id) const { return rats[static_cast<std::size_t>(id)]; }
};

// ---------------------------------------------------------------------------
// Propagation

/**
 * 3GPP TR 38.901 UMa path loss in dB.
 *
 * \param distance_m 3D distance; values in (0, 1) are clamped to 1 m
 * \param los        line of sight; NLOS returns max(PL_LOS, PL'_NLOS)
 */
inline double pathloss_uma(double carrier_ghz, double distance_m, double bs_height_m = 25.0,
                           double ue_height_m = 1.5, bool los = false)
{
    if (!(distance_m > 0.0))
        throw invalid_input("path loss distance must be > 0 m");
    const double d = std::max(distance_m, 1.0);
    const double fc_term = 20.0 * std::log10(carrier_ghz);

    // Breakpoint with effective environment height 1 m.
    const double h_bs = std::max(bs_height_m - 1.0, 0.0);
    const double h_ut = std::max(ue_height_m - 1.0, 0.0);
    const double d_bp = 4.0 * h_bs * h_ut * carrier_ghz * 1e9 / 3e8;
    double pl_los = 28.0 + 22.0 * std::log10(d) + fc_term;
    if (d_bp > 0.0 && d > d_bp) {
        const double dh = bs_height_m - ue_height_m;
        pl_los = 28.0 + 40.0 * std::log10(d) + fc_term - 9.0 * std::log10(d_bp * d_bp + dh * dh);
    }
    if (los)
        return pl_los;

    const double pl_nlos = 13.54 + 39.08 * std::log10(d) + fc_term - 0.6 * (ue_height_m - 1.5);
    return std::max(pl_los, pl_nlos);
}

/// Transmitter-side heights follow the technology: base station for NR/LTE, UE for D2D.
inline double link_pathloss(const Rat& rat, double distance_m, const PhyParams& p)
{
    const double tx_h = rat.id == RatId::d2d ? p.ue_height_m : p.bs_height_m;
    return pathloss_uma(rat.carrier_ghz, distance_m, tx_h, p.ue_height_m, false);
}

/// Shadowing is a loss: positive shadow_db lowers RSRP.
inline double rsrp(const Rat& rat, double distance_m, double shadow_db, const PhyParams& p = {})
{
    return rat.tx_power_dbm - link_pathloss(rat, distance_m, p) - shadow_db;
}

inline double noise_floor_dbm(const Rat& rat)
{
    return -174.0 + 10.0 * std::log10(rat.bandwidth_hz) + rat.noise_figure_db;
}

inline double snr(double rsrp_dbm, const Rat& rat) { return rsrp_dbm - noise_floor_dbm(rat); }

inline double effective_snr(double snr_db, double speed_mps, ModulationScheme mod, const Rat& rat,
                            const PhyParams& p = {})
{
    if (speed_mps < 0.0)
        throw invalid_input("speed must be >= 0");
    return snr_db - p.speed_penalty_db_per_mps * speed_mps -
           p.modulation_penalty_db[static_cast<std::size_t>(mod)] + rat.diversity_bonus_db;
}

struct LinkBudget {
    RatId rat = RatId::nr;
    double distance_m = 0.0;
    double shadow_db = 0.0;
    double rsrp_dbm = 0.0;
    double snr_db = 0.0;
    double effective_snr_db = 0.0; // at the selected modulation, filled by link adaptation
};

inline LinkBudget make_link_budget(const Rat& rat, double distance_m, double shadow_db, const PhyParams& p)
{
    LinkBudget b;
    b.rat = rat.id;
    b.distance_m = distance_m;
    b.shadow_db = shadow_db;
    b.rsrp_dbm = rsrp(rat, distance_m, shadow_db, p);
    b.snr_db = snr(b.rsrp_dbm, rat);
    b.effective_snr_db = b.snr_db;
    return b;
}

// ---------------------------------------------------------------------------
// Link adaptation and packet outcome

struct McsChoice {
    ModulationScheme mod = ModulationScheme::qpsk;
    double bler = 1.0;
    double ber = 0.5;
    double effective_snr_db = 0.0;
};

/// Highest modulation up to the RAT cap whose BLER at its own effective SNR
/// is within the target; QPSK with whatever BLER it has otherwise.
inline McsChoice select_mcs(double snr_db, double speed_mps, const Rat& rat, const CurveSet& curves,
                            const PhyParams& p = {})
{
    const int cap = modulation_index(rat.max_modulation);
    for (int m = cap; m >= 0; --m) {
        const auto mod = static_cast<ModulationScheme>(m);
        const double eff = effective_snr(snr_db, speed_mps, mod, rat, p);
        const auto look = curves.lookup(mod, eff);
        if (look.bler <= p.bler_target || m == 0)
            return {mod, look.bler, look.ber, eff};
    }
    return {}; // unreachable
}

/// bandwidth * bits_per_symbol * code_rate * (1 - overhead) * (1 - bler)
inline double throughput(ModulationScheme mod, double bler, const Rat& rat, double code_rate = 0.5,
                         double overhead = 0.14)
{
    if (!(bler >= 0.0 && bler <= 1.0))
        throw invalid_input("BLER must lie in [0, 1]");
    const double spectral_eff = bits_per_symbol(mod) * code_rate * (1.0 - overhead);
    return rat.bandwidth_hz * spectral_eff * (1.0 - bler);
}

struct LatencyBreakdown {
    double tx_ms = 0.0;
    double sched_ms = 0.0;
    double decode_ms = 0.0;
    double harq_ms = 0.0;
    double queue_ms = 0.0;
    double prop_ms = 0.0;
    double total_ms = 0.0;
    bool delivered = true;
};

/// Sum of transmission, scheduling, decoding, HARQ, queuing and propagation
/// delay. An undeliverable packet (BLER 1 or zero throughput) reports the
/// latency cap with delivered = false; every total is capped.
inline LatencyBreakdown packet_latency(double packet_bits, double tput_bps, double bler, const Rat& rat,
                                       ModulationScheme mod, double load_factor, double speed_mps,
                                       double distance_m, const PhyParams& p = {})
{
    if (load_factor < 0.0)
        throw invalid_input("load factor must be >= 0");
    LatencyBreakdown l;
    if (!(tput_bps > 0.0) || !(bler < 1.0)) {
        l.delivered = false;
        l.total_ms = p.latency_cap_ms;
        return l;
    }
    const double tti = rat.tti_ms();
    l.tx_ms = packet_bits / tput_bps * 1e3;
    l.sched_ms = p.sched_tti * tti;
    l.decode_ms = p.decode_tti * tti * (1.0 + modulation_index(mod));
    l.harq_ms = bler / (1.0 - bler) * p.harq_rtt_tti * tti;
    l.queue_ms = p.queue_base_ms * load_factor * (1.0 + speed_mps / p.queue_speed_ref_mps);
    l.prop_ms = distance_m / 3e8 * 1e3;
    l.total_ms = std::min(l.tx_ms + l.sched_ms + l.decode_ms + l.harq_ms + l.queue_ms + l.prop_ms,
                          p.latency_cap_ms);
    return l;
}

/// Sample standard deviation (n - 1); 0 for fewer than two samples.
inline double jitter(std::span<const double> window)
{
    if (window.size() < 2)
        return 0.0;
    const double mean = std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(window.size());
    double ss = 0.0;
    for (const double x : window)
        ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(window.size() - 1));
}

struct HopOutcome {
    LinkBudget link;
    McsChoice mcs;
    double throughput_bps = 0.0;
    LatencyBreakdown latency;
};

inline HopOutcome evaluate_hop(const LinkBudget& link, double speed_mps, double load_factor,
                               double packet_bits, const CurveSet& curves, const PhyParams& p)
{
    const Rat& rat = p.rat(link.rat);
    HopOutcome h;
    h.link = link;
    h.mcs = select_mcs(link.snr_db, speed_mps, rat, curves, p);
    h.link.effective_snr_db = h.mcs.effective_snr_db;
    h.throughput_bps = throughput(h.mcs.mod, h.mcs.bler, rat, curves.code_rate(), p.overhead);
    h.latency = packet_latency(packet_bits, h.throughput_bps, h.mcs.bler, rat, h.mcs.mod, load_factor,
                               speed_mps, link.distance_m, p);
    return h;
}

struct PacketOutcome {
    double throughput_bps = 0.0;
    double bler = 1.0;
    double ber = 0.5;
    double latency_ms = 0.0;
    double effective_snr_db = 0.0; // bottleneck hop
    ModulationScheme mod = ModulationScheme::qpsk; // bottleneck hop
    bool delivered = false;
};

/// One hop, or a relayed path: throughput is the bottleneck hop's, latency
/// adds up, and a packet survives only if it survives both hops.
inline PacketOutcome combine_hops(std::span<const HopOutcome> hops, double latency_cap_ms)
{
    if (hops.empty())
        throw invalid_input("a path needs at least one hop");
    PacketOutcome out;
    out.throughput_bps = hops[0].throughput_bps;
    std::size_t bottleneck = 0;
    double ok_block = 1.0, ok_bit = 1.0, latency = 0.0;
    bool delivered = true;
    for (std::size_t i = 0; i < hops.size(); ++i) {
        if (hops[i].throughput_bps < out.throughput_bps) {
            out.throughput_bps = hops[i].throughput_bps;
            bottleneck = i;
        }
        ok_block *= 1.0 - hops[i].mcs.bler;
        ok_bit *= 1.0 - hops[i].mcs.ber;
        latency += hops[i].latency.total_ms;
        delivered = delivered && hops[i].latency.delivered;
    }
    out.bler = 1.0 - ok_block;
    out.ber = 1.0 - ok_bit;
    out.latency_ms = std::min(latency, latency_cap_ms);
    out.delivered = delivered;
    out.effective_snr_db = hops[bottleneck].mcs.effective_snr_db;
    out.mod = hops[bottleneck].mcs.mod;
    return out;
}

} // namespace modesel
