#pragma once

/**
 * \file selection.hpp
 *
 * Mode selectors: the slice-aware AHP x sigmoid(RSRP) selector and three
 * baselines (strongest RSRP, CQI-driven SDN handover with HOM/TTT, and a
 * greedy stand-in for joint mode/relay selection under a BER constraint).
 *
 * A handover is any change of attachment point: the serving eNB/gNB for
 * direct modes, the relay UE for relayed modes.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ahp.hpp"
#include "error.hpp"
#include "radio.hpp"

namespace modesel {

enum class Mode { lte_direct = 0, nr_direct = 1, lte_via_d2d = 2, nr_via_d2d = 3 };

inline constexpr std::array<Mode, 4> kAllModes{Mode::lte_direct, Mode::nr_direct, Mode::lte_via_d2d,
                                               Mode::nr_via_d2d};

inline constexpr std::string_view to_string(Mode m)
{
    switch (m) {
    case Mode::lte_direct: return "LTE_DIRECT";
    case Mode::nr_direct: return "NR_DIRECT";
    case Mode::lte_via_d2d: return "LTE_VIA_D2D";
    case Mode::nr_via_d2d: return "NR_VIA_D2D";
    }
    return "?";
}

inline constexpr bool is_relayed(Mode m) { return m == Mode::lte_via_d2d || m == Mode::nr_via_d2d; }

/// Both relayed modes share the single D2D option of the AHP hierarchy.
inline constexpr ahp::Option option_of(Mode m)
{
    switch (m) {
    case Mode::lte_direct: return ahp::Option::lte;
    case Mode::nr_direct: return ahp::Option::nr;
    default: return ahp::Option::d2d;
    }
}

inline constexpr RatId infrastructure_rat(Mode m)
{
    return (m == Mode::lte_direct || m == Mode::lte_via_d2d) ? RatId::lte : RatId::nr;
}

enum class Selector { proposed = 0, rsrp_max = 1, sdn_joint = 2, jmsra = 3 };

inline constexpr std::array<Selector, 4> kAllSelectors{Selector::proposed, Selector::rsrp_max,
                                                       Selector::sdn_joint, Selector::jmsra};

inline constexpr std::string_view to_string(Selector s)
{
    switch (s) {
    case Selector::proposed: return "proposed";
    case Selector::rsrp_max: return "rsrp_max";
    case Selector::sdn_joint: return "sdn_joint";
    case Selector::jmsra: return "jmsra";
    }
    return "?";
}

inline std::optional<Selector> parse_selector(std::string_view s)
{
    for (const auto sel : kAllSelectors)
        if (s == to_string(sel))
            return sel;
    return std::nullopt;
}

struct AttachmentId {
    enum class Kind : std::uint8_t { node, relay };
    Kind kind = Kind::node;
    std::uint32_t id = 0;

    auto operator<=>(const AttachmentId&) const = default;
};

struct Candidate {
    Mode mode = Mode::lte_direct;
    std::uint32_t serving_node = 0;
    std::optional<std::uint32_t> relay;
    double rsrp_dbm = 0.0; // bottleneck over hops
    double snr_db = 0.0;   // bottleneck over hops
    std::vector<LinkBudget> hops;
    // Filled by the caller for the joint (JMSRA) baseline.
    double predicted_throughput_bps = 0.0;
    double predicted_ber = 0.5;

    AttachmentId attachment() const
    {
        return relay ? AttachmentId{AttachmentId::Kind::relay, *relay}
                     : AttachmentId{AttachmentId::Kind::node, serving_node};
    }
};

/// Relayed candidate from the UE->relay hop and the relay->node hop.
inline Candidate make_relayed_candidate(Mode mode, std::uint32_t relay, std::uint32_t node,
                                        const LinkBudget& d2d_hop, const LinkBudget& infra_hop)
{
    Candidate c;
    c.mode = mode;
    c.relay = relay;
    c.serving_node = node;
    c.hops = {d2d_hop, infra_hop};
    c.rsrp_dbm = std::min(d2d_hop.rsrp_dbm, infra_hop.rsrp_dbm);
    c.snr_db = std::min(d2d_hop.snr_db, infra_hop.snr_db);
    return c;
}

inline Candidate make_direct_candidate(Mode mode, std::uint32_t node, const LinkBudget& hop)
{
    Candidate c;
    c.mode = mode;
    c.serving_node = node;
    c.hops = {hop};
    c.rsrp_dbm = hop.rsrp_dbm;
    c.snr_db = hop.snr_db;
    return c;
}

struct SelectParams {
    double hysteresis_db = 0.6;
    double sigmoid_center_dbm = -90.0;
    double sigmoid_scale_db = 10.0;
    int sdn_hom_cqi = 1;
    int sdn_ttt_steps = 3;
    double jmsra_ber_threshold = 1e-3;
    double jmsra_rate_min_bps = 1e6;
    double jmsra_hysteresis_db = 0.0;
};

struct SelectionState {
    std::optional<Mode> current;
    std::optional<AttachmentId> attachment;
    std::map<AttachmentId, int> ttt_counters;
};

struct ModeDecision {
    Mode chosen = Mode::lte_direct;
    std::size_t index = 0; // into the candidate list
    AttachmentId attachment;
    double combined_score = 0.0;
    bool handover = false;
};

/// 1 / (1 + exp(-(rsrp - center) / scale))
inline double sigmoid_norm(double rsrp_dbm, double center_dbm = -90.0, double scale_db = 10.0)
{
    return 1.0 / (1.0 + std::exp(-(rsrp_dbm - center_dbm) / scale_db));
}

namespace detail {

inline void require_candidates(std::span<const Candidate> c)
{
    if (c.empty())
        throw invalid_input("mode selection needs at least one candidate");
}

/// Index of the candidate holding the current attachment (preferring the
/// current mode when two relayed modes share a relay).
inline std::optional<std::size_t> find_current(std::span<const Candidate> cands, const SelectionState& st)
{
    if (!st.attachment)
        return std::nullopt;
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (cands[i].attachment() != *st.attachment)
            continue;
        if (st.current && cands[i].mode == *st.current)
            return i;
        if (!found)
            found = i;
    }
    return found;
}

/// argmax of key; ties go to the earlier mode in enumeration order, then the earlier candidate.
template <typename Key>
std::size_t argmax(std::span<const Candidate> cands, Key key)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i) {
        const double a = key(cands[i]), b = key(cands[best]);
        if (a > b || (a == b && static_cast<int>(cands[i].mode) < static_cast<int>(cands[best].mode)))
            best = i;
    }
    return best;
}

inline ModeDecision commit(std::span<const Candidate> cands, std::size_t idx, double score, SelectionState& st)
{
    ModeDecision d;
    d.index = idx;
    d.chosen = cands[idx].mode;
    d.attachment = cands[idx].attachment();
    d.combined_score = score;
    d.handover = st.attachment.has_value() && *st.attachment != d.attachment;
    if (d.handover || !st.attachment)
        st.ttt_counters.clear();
    st.current = d.chosen;
    st.attachment = d.attachment;
    return d;
}

/// Winner takes over unless it would move the attachment without beating the
/// current link's RSRP by the hysteresis. A hysteresis <= 0 disables gating.
inline std::size_t apply_hysteresis(std::span<const Candidate> cands, std::size_t winner,
                                    const SelectionState& st, double hysteresis_db)
{
    const auto cur = find_current(cands, st);
    if (!cur)
        return winner;
    if (cands[winner].attachment() == cands[*cur].attachment())
        return winner;
    if (hysteresis_db <= 0.0)
        return winner;
    return cands[winner].rsrp_dbm >= cands[*cur].rsrp_dbm + hysteresis_db ? winner : *cur;
}

} // namespace detail

inline double combined_score(const ahp::RankTable& rank, const Candidate& c, const SelectParams& p)
{
    return rank.score(option_of(c.mode)) * sigmoid_norm(c.rsrp_dbm, p.sigmoid_center_dbm, p.sigmoid_scale_db);
}

/// Static AHP score of the candidate's option times its sigmoid-normalized RSRP.
inline ModeDecision proposed_select(const ahp::RankTable& rank, std::span<const Candidate> cands,
                                    SelectionState& st, const SelectParams& p = {})
{
    detail::require_candidates(cands);
    const auto score = [&](const Candidate& c) { return combined_score(rank, c, p); };
    const auto winner = detail::argmax(cands, score);
    const auto idx = detail::apply_hysteresis(cands, winner, st, p.hysteresis_db);
    return detail::commit(cands, idx, score(cands[idx]), st);
}

inline ModeDecision rsrp_select(std::span<const Candidate> cands, SelectionState& st, const SelectParams& p = {})
{
    detail::require_candidates(cands);
    const auto key = [](const Candidate& c) { return c.rsrp_dbm; };
    const auto winner = detail::argmax(cands, key);
    const auto idx = detail::apply_hysteresis(cands, winner, st, p.hysteresis_db);
    return detail::commit(cands, idx, cands[idx].rsrp_dbm, st);
}

/// Greedy joint selection: best predicted throughput among candidates that
/// meet the BER and rate thresholds, else the lowest predicted BER.
inline ModeDecision jmsra_select(std::span<const Candidate> cands, SelectionState& st, const SelectParams& p = {})
{
    detail::require_candidates(cands);
    if (!(p.jmsra_ber_threshold > 0.0) || !(p.jmsra_rate_min_bps > 0.0))
        throw invalid_input("JMSRA thresholds must be > 0");

    bool any_feasible = false;
    for (const auto& c : cands)
        any_feasible = any_feasible || (c.predicted_ber <= p.jmsra_ber_threshold &&
                                        c.predicted_throughput_bps >= p.jmsra_rate_min_bps);
    std::size_t winner;
    if (any_feasible) {
        winner = detail::argmax(cands, [&](const Candidate& c) {
            const bool ok = c.predicted_ber <= p.jmsra_ber_threshold &&
                            c.predicted_throughput_bps >= p.jmsra_rate_min_bps;
            return ok ? c.predicted_throughput_bps : -1.0;
        });
    } else {
        winner = detail::argmax(cands, [](const Candidate& c) { return -c.predicted_ber; });
    }
    const auto idx = detail::apply_hysteresis(cands, winner, st, p.jmsra_hysteresis_db);
    return detail::commit(cands, idx, cands[idx].predicted_throughput_bps, st);
}

/// 15-level CQI from SNR: clamp(round(15 (snr + 6) / 28), 0, 15).
inline int cqi_from_snr(double snr_db)
{
    const long q = std::lround(15.0 * (snr_db + 6.0) / 28.0);
    return static_cast<int>(std::clamp(q, 0L, 15L));
}

/// Same mapping before rounding; handover margins are compared on this so a
/// fixed dB gap never flips across a quantization boundary.
inline double cqi_level(double snr_db) { return std::clamp(15.0 * (snr_db + 6.0) / 28.0, 0.0, 15.0); }

/**
 * CQI-driven handover: a target must beat the serving CQI by the handover
 * margin for TTT consecutive steps. Losing the serving link forces an
 * immediate move to the best CQI.
 */
inline ModeDecision sdn_select(std::span<const Candidate> cands, SelectionState& st, const SelectParams& p = {})
{
    detail::require_candidates(cands);
    const auto cqi_key = [](const Candidate& c) { return cqi_level(c.snr_db) + c.snr_db * 1e-9; };
    const auto cur = detail::find_current(cands, st);
    if (!cur) {
        const auto idx = detail::argmax(cands, cqi_key);
        return detail::commit(cands, idx, cqi_from_snr(cands[idx].snr_db), st);
    }

    const double serving_cqi = cqi_level(cands[*cur].snr_db);
    const auto serving = cands[*cur].attachment();
    std::map<AttachmentId, int> next;
    std::optional<std::size_t> target;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto att = cands[i].attachment();
        if (att == serving)
            continue;
        if (cqi_level(cands[i].snr_db) < serving_cqi + p.sdn_hom_cqi)
            continue;
        const auto it = st.ttt_counters.find(att);
        const int held = std::max(next[att], (it == st.ttt_counters.end() ? 0 : it->second) + 1);
        next[att] = held;
        if (held >= p.sdn_ttt_steps && (!target || cqi_key(cands[i]) > cqi_key(cands[*target])))
            target = i;
    }
    st.ttt_counters = std::move(next);
    const auto idx = target.value_or(*cur);
    return detail::commit(cands, idx, cqi_from_snr(cands[idx].snr_db), st);
}

enum class PairHandover { none, half, full };

struct PairDecision {
    ModeDecision first;
    ModeDecision second;
    PairHandover kind = PairHandover::none;
};

/// Both members of a D2D pair are evaluated before either commits: a full
/// handover when both meet their condition, a half handover when only one does.
inline PairDecision sdn_select_pair(std::span<const Candidate> a, SelectionState& sa,
                                    std::span<const Candidate> b, SelectionState& sb, const SelectParams& p = {})
{
    SelectionState ta = sa, tb = sb;
    const auto da = sdn_select(a, ta, p);
    const auto db = sdn_select(b, tb, p);
    sa = std::move(ta);
    sb = std::move(tb);
    PairDecision out{da, db, PairHandover::none};
    if (da.handover && db.handover)
        out.kind = PairHandover::full;
    else if (da.handover || db.handover)
        out.kind = PairHandover::half;
    return out;
}

inline ModeDecision select(Selector s, const ahp::RankTable& rank, std::span<const Candidate> cands,
                           SelectionState& st, const SelectParams& p)
{
    switch (s) {
    case Selector::proposed: return proposed_select(rank, cands, st, p);
    case Selector::rsrp_max: return rsrp_select(cands, st, p);
    case Selector::sdn_joint: return sdn_select(cands, st, p);
    case Selector::jmsra: return jmsra_select(cands, st, p);
    }
    throw invalid_input("unknown selector");
}

} // namespace modesel
