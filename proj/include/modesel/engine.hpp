#pragma once

/**
 * \file engine.hpp
 *
 * Time-stepped system-level simulation: random placement, random-waypoint
 * mobility, per-step candidate enumeration and mode selection, packet
 * outcomes from the radio model, and KPI accumulation per run.
 *
 * Node ids: eNBs are 0..n_enb-1, gNBs follow. Relay attachments use UE ids.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "calibration.hpp"
#include "config.hpp"
#include "error.hpp"
#include "ldpc.hpp"
#include "radio.hpp"
#include "random.hpp"
#include "selection.hpp"
#include "slices.hpp"

namespace modesel {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Node {
    std::uint32_t id = 0;
    RatId rat = RatId::lte;
    Vec2 pos;
};

struct UeState {
    std::uint32_t id = 0;
    Vec2 pos;
    Vec2 waypoint;
    double speed_mps = 0.0;
    std::optional<std::uint32_t> partner;
    SelectionState selection;
    std::deque<double> latency_window;
};

struct Topology {
    double area_m = 1000.0;
    std::vector<Node> nodes;
    std::vector<UeState> ues;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> d2d_pairs;
    std::vector<double> node_shadow_db; // [ue * nodes + node]
    std::vector<double> ue_shadow_db;   // [a * ues + b], symmetric

    double shadow_to_node(std::size_t ue, std::size_t node) const
    {
        return node_shadow_db.empty() ? 0.0 : node_shadow_db[ue * nodes.size() + node];
    }
    double shadow_between(std::size_t a, std::size_t b) const
    {
        return ue_shadow_db.empty() ? 0.0 : ue_shadow_db[a * ues.size() + b];
    }
};

namespace detail {

inline Vec2 uniform_point(double area, Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, area);
    const double x = u(rng);
    return {x, u(rng)};
}

} // namespace detail

/// Uniform node and UE positions plus a random perfect matching of UEs
/// (an odd UE stays unpaired). Deterministic per seed.
inline Topology place(std::uint64_t seed, std::size_t n_ue, std::size_t n_enb, std::size_t n_gnb,
                      double area_m = 1000.0)
{
    if (!(area_m > 0.0))
        throw invalid_input("simulation area must be positive");
    if (n_enb == 0 || n_gnb == 0)
        throw invalid_input("placement needs at least one eNB and one gNB");
    Topology t;
    t.area_m = area_m;
    auto placement = make_stream(seed, Stream::placement);
    for (std::size_t i = 0; i < n_enb + n_gnb; ++i)
        t.nodes.push_back({static_cast<std::uint32_t>(i), i < n_enb ? RatId::lte : RatId::nr,
                           detail::uniform_point(area_m, placement)});
    for (std::size_t i = 0; i < n_ue; ++i) {
        UeState ue;
        ue.id = static_cast<std::uint32_t>(i);
        ue.pos = detail::uniform_point(area_m, placement);
        ue.waypoint = ue.pos;
        t.ues.push_back(std::move(ue));
    }

    auto pairing = make_stream(seed, Stream::pairing);
    std::vector<std::uint32_t> order(n_ue);
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), pairing);
    for (std::size_t i = 0; i + 1 < order.size(); i += 2) {
        t.d2d_pairs.emplace_back(order[i], order[i + 1]);
        t.ues[order[i]].partner = order[i + 1];
        t.ues[order[i + 1]].partner = order[i];
    }
    return t;
}

/// Static log-normal shadowing per (UE, node) and per UE pair.
inline void draw_shadowing(Topology& t, std::uint64_t seed, double sigma_db)
{
    auto rng = make_stream(seed, Stream::shadowing);
    std::normal_distribution<double> n(0.0, sigma_db > 0.0 ? sigma_db : 1.0);
    const auto draw = [&] { return sigma_db > 0.0 ? n(rng) : 0.0; };
    const std::size_t u = t.ues.size();
    t.node_shadow_db.assign(u * t.nodes.size(), 0.0);
    for (auto& s : t.node_shadow_db)
        s = draw();
    t.ue_shadow_db.assign(u * u, 0.0);
    for (std::size_t a = 0; a < u; ++a)
        for (std::size_t b = a + 1; b < u; ++b)
            t.ue_shadow_db[a * u + b] = t.ue_shadow_db[b * u + a] = draw();
}

/// Random waypoint with zero pause: move speed*dt toward the waypoint; on
/// arrival, stop there and draw the next waypoint.
inline void step_mobility(UeState& ue, double dt_s, double area_m, Rng& rng)
{
    if (!(dt_s > 0.0))
        throw invalid_input("time step must be > 0");
    if (ue.speed_mps <= 0.0)
        return;
    const double travel = ue.speed_mps * dt_s;
    const double remaining = distance(ue.pos, ue.waypoint);
    if (remaining <= travel) {
        ue.pos = ue.waypoint;
        ue.waypoint = detail::uniform_point(area_m, rng);
    } else {
        const double f = travel / remaining;
        ue.pos.x += f * (ue.waypoint.x - ue.pos.x);
        ue.pos.y += f * (ue.waypoint.y - ue.pos.y);
    }
    ue.pos.x = std::clamp(ue.pos.x, 0.0, area_m);
    ue.pos.y = std::clamp(ue.pos.y, 0.0, area_m);
}

// ---------------------------------------------------------------------------
// Per-step link evaluation

struct LinkTable {
    std::vector<LinkBudget> budgets; // [ue * nodes + node]
    std::vector<std::uint32_t> best_enb;
    std::vector<std::uint32_t> best_gnb;
    std::size_t nodes = 0;

    const LinkBudget& at(std::size_t ue, std::size_t node) const { return budgets[ue * nodes + node]; }
    std::uint32_t best(std::size_t ue, RatId rat) const { return rat == RatId::lte ? best_enb[ue] : best_gnb[ue]; }
};

inline LinkTable compute_links(const Topology& t, const PhyParams& p)
{
    LinkTable lt;
    lt.nodes = t.nodes.size();
    lt.budgets.resize(t.ues.size() * lt.nodes);
    lt.best_enb.assign(t.ues.size(), 0);
    lt.best_gnb.assign(t.ues.size(), 0);
    const double dh = p.bs_height_m - p.ue_height_m;
    for (std::size_t u = 0; u < t.ues.size(); ++u) {
        std::optional<std::uint32_t> be, bg;
        for (std::size_t n = 0; n < lt.nodes; ++n) {
            const auto& node = t.nodes[n];
            const double d2 = distance(t.ues[u].pos, node.pos);
            const double d3 = std::sqrt(d2 * d2 + dh * dh);
            auto& b = lt.budgets[u * lt.nodes + n];
            b = make_link_budget(p.rat(node.rat), d3, t.shadow_to_node(u, n), p);
            auto& best = node.rat == RatId::lte ? be : bg;
            if (!best || b.rsrp_dbm > lt.at(u, *best).rsrp_dbm)
                best = static_cast<std::uint32_t>(n);
        }
        lt.best_enb[u] = be.value_or(0);
        lt.best_gnb[u] = bg.value_or(0);
    }
    return lt;
}

inline LinkBudget d2d_budget(const Topology& t, std::size_t a, std::size_t b, const PhyParams& p)
{
    const double d = std::max(distance(t.ues[a].pos, t.ues[b].pos), 1.0);
    return make_link_budget(p.rat(RatId::d2d), d, t.shadow_between(a, b), p);
}

/**
 * Strongest eNB and gNB as direct candidates, and per relayed mode the relay
 * (any UE within max_d2d_m) with the best bottleneck RSRP. The current
 * attachment is kept as an extra candidate when it is still reachable but no
 * longer the strongest, so hysteresis can compare against it.
 */
inline std::vector<Candidate> enumerate_candidates(const Topology& t, const LinkTable& links, std::size_t ue,
                                                   const PhyParams& p, double max_d2d_m)
{
    std::vector<Candidate> out;
    const auto enb = links.best(ue, RatId::lte);
    const auto gnb = links.best(ue, RatId::nr);
    out.push_back(make_direct_candidate(Mode::lte_direct, enb, links.at(ue, enb)));
    out.push_back(make_direct_candidate(Mode::nr_direct, gnb, links.at(ue, gnb)));

    std::optional<Candidate> best_lte, best_nr, keep;
    const auto& st = t.ues[ue].selection;
    for (std::size_t v = 0; v < t.ues.size(); ++v) {
        if (v == ue || distance(t.ues[ue].pos, t.ues[v].pos) > max_d2d_m)
            continue;
        const auto hop1 = d2d_budget(t, ue, v, p);
        const auto rv = static_cast<std::uint32_t>(v);
        auto lte = make_relayed_candidate(Mode::lte_via_d2d, rv, links.best(v, RatId::lte), hop1,
                                          links.at(v, links.best(v, RatId::lte)));
        auto nr = make_relayed_candidate(Mode::nr_via_d2d, rv, links.best(v, RatId::nr), hop1,
                                         links.at(v, links.best(v, RatId::nr)));
        if (st.attachment && st.attachment->kind == AttachmentId::Kind::relay && st.attachment->id == rv)
            keep = (st.current == Mode::lte_via_d2d) ? lte : nr;
        if (!best_lte || lte.rsrp_dbm > best_lte->rsrp_dbm)
            best_lte = std::move(lte);
        if (!best_nr || nr.rsrp_dbm > best_nr->rsrp_dbm)
            best_nr = std::move(nr);
    }
    if (best_lte)
        out.push_back(std::move(*best_lte));
    if (best_nr)
        out.push_back(std::move(*best_nr));

    if (st.attachment && st.attachment->kind == AttachmentId::Kind::node && st.attachment->id != enb &&
        st.attachment->id != gnb) {
        const auto n = st.attachment->id;
        const Mode m = t.nodes[n].rat == RatId::lte ? Mode::lte_direct : Mode::nr_direct;
        out.push_back(make_direct_candidate(m, n, links.at(ue, n)));
    }
    if (keep) {
        const auto have = std::any_of(out.begin(), out.end(), [&](const Candidate& c) {
            return c.mode == keep->mode && c.attachment() == keep->attachment();
        });
        if (!have)
            out.push_back(std::move(*keep));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Step and run

struct SimContext {
    PhyParams phy;
    SelectParams select;
    const CurveSet* curves = nullptr;
    ahp::RankTable rank;
    Selector selector = Selector::proposed;
    double packet_bits = 12000.0;
    int node_capacity = 50;
    double max_d2d_m = 80.0;
    std::size_t jitter_window = 20;
    double dt_s = 1.0;
    const ldpc::LdpcCode* decode_code = nullptr; // set to decode one codeword per hop per step
    int max_iters = ldpc::kDefaultMaxIters;
};

struct UeStepMetrics {
    std::uint32_t ue = 0;
    Mode mode = Mode::lte_direct;
    AttachmentId attachment;
    double rsrp_dbm = 0.0;
    double snr_db = 0.0;
    double effective_snr_db = 0.0;
    ModulationScheme mcs = ModulationScheme::qpsk;
    double bler = 1.0;
    double ber = 0.5;
    double throughput_bps = 0.0;
    double latency_ms = 0.0;
    double jitter_ms = 0.0;
    bool delivered = false;
    bool handover = false;
};

namespace detail {

inline void predict(Candidate& c, double speed, const SimContext& ctx)
{
    std::vector<HopOutcome> hops;
    for (const auto& h : c.hops)
        hops.push_back(evaluate_hop(h, speed, 0.0, ctx.packet_bits, *ctx.curves, ctx.phy));
    const auto out = combine_hops(hops, ctx.phy.latency_cap_ms);
    c.predicted_throughput_bps = out.throughput_bps;
    c.predicted_ber = out.ber;
}

/// Replace the table prediction by one decoded codeword at the hop's effective SNR.
inline void realize_hop(HopOutcome& h, double speed, double load, const SimContext& ctx, Rng& rng)
{
    const auto& code = *ctx.decode_code;
    std::bernoulli_distribution coin(0.5);
    Bits msg(code.k);
    for (auto& b : msg)
        b = coin(rng) ? 1 : 0;
    const auto word = ldpc::encode(code, msg);
    const auto llr = transmit_awgn(word, h.mcs.mod, h.mcs.effective_snr_db, rng);
    const auto res = ldpc::decode(code, llr, ctx.max_iters);
    std::size_t errors = 0;
    for (std::size_t i = 0; i < code.k; ++i)
        errors += res.message[i] != msg[i];
    h.mcs.bler = (res.converged && errors == 0) ? 0.0 : 1.0;
    h.mcs.ber = static_cast<double>(errors) / static_cast<double>(code.k);
    const Rat& rat = ctx.phy.rat(h.link.rat);
    h.throughput_bps = throughput(h.mcs.mod, h.mcs.bler, rat, code.rate(), ctx.phy.overhead);
    h.latency = packet_latency(ctx.packet_bits, h.throughput_bps, h.mcs.bler, rat, h.mcs.mod, load, speed,
                               h.link.distance_m, ctx.phy);
}

} // namespace detail

/// One time step for every UE: move (except on step 0), select, and evaluate the packet.
inline std::vector<UeStepMetrics> simulate_step(Topology& t, const SimContext& ctx, int step, Rng& mobility,
                                                Rng& channel)
{
    if (!ctx.curves)
        throw calibration_error("simulation step needs calibration curves");
    if (step > 0)
        for (auto& ue : t.ues)
            step_mobility(ue, ctx.dt_s, t.area_m, mobility);

    const auto links = compute_links(t, ctx.phy);
    const std::size_t n = t.ues.size();
    std::vector<std::vector<Candidate>> cands(n);
    for (std::size_t u = 0; u < n; ++u) {
        cands[u] = enumerate_candidates(t, links, u, ctx.phy, ctx.max_d2d_m);
        if (ctx.selector == Selector::jmsra)
            for (auto& c : cands[u])
                detail::predict(c, t.ues[u].speed_mps, ctx);
    }

    std::vector<ModeDecision> decisions(n);
    if (ctx.selector == Selector::sdn_joint) {
        std::vector<bool> done(n, false);
        for (const auto& [a, b] : t.d2d_pairs) {
            const auto pd = sdn_select_pair(cands[a], t.ues[a].selection, cands[b], t.ues[b].selection, ctx.select);
            decisions[a] = pd.first;
            decisions[b] = pd.second;
            done[a] = done[b] = true;
        }
        for (std::size_t u = 0; u < n; ++u)
            if (!done[u])
                decisions[u] = sdn_select(cands[u], t.ues[u].selection, ctx.select);
    } else {
        for (std::size_t u = 0; u < n; ++u)
            decisions[u] = select(ctx.selector, ctx.rank, cands[u], t.ues[u].selection, ctx.select);
    }

    std::vector<int> node_load(t.nodes.size(), 0), relay_load(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
        const auto& c = cands[u][decisions[u].index];
        ++node_load[c.serving_node];
        if (c.relay)
            ++relay_load[*c.relay];
    }

    std::vector<UeStepMetrics> out(n);
    const double cap = static_cast<double>(ctx.node_capacity);
    for (std::size_t u = 0; u < n; ++u) {
        auto& ue = t.ues[u];
        const auto& c = cands[u][decisions[u].index];
        std::vector<HopOutcome> hops;
        for (const auto& link : c.hops) {
            const double load = link.rat == RatId::d2d ? relay_load[*c.relay] / cap : node_load[c.serving_node] / cap;
            auto h = evaluate_hop(link, ue.speed_mps, load, ctx.packet_bits, *ctx.curves, ctx.phy);
            if (ctx.decode_code)
                detail::realize_hop(h, ue.speed_mps, load, ctx, channel);
            hops.push_back(std::move(h));
        }
        const auto pkt = combine_hops(hops, ctx.phy.latency_cap_ms);

        ue.latency_window.push_back(pkt.latency_ms);
        while (ue.latency_window.size() > ctx.jitter_window)
            ue.latency_window.pop_front();
        const std::vector<double> window(ue.latency_window.begin(), ue.latency_window.end());

        auto& m = out[u];
        m.ue = ue.id;
        m.mode = c.mode;
        m.attachment = c.attachment();
        m.rsrp_dbm = c.rsrp_dbm;
        m.snr_db = c.snr_db;
        m.effective_snr_db = pkt.effective_snr_db;
        m.mcs = pkt.mod;
        m.bler = pkt.bler;
        m.ber = pkt.ber;
        m.throughput_bps = pkt.throughput_bps;
        m.latency_ms = pkt.latency_ms;
        m.jitter_ms = jitter(window);
        m.delivered = pkt.delivered;
        m.handover = decisions[u].handover;
    }
    return out;
}

struct StepLogRow {
    int step = 0;
    UeStepMetrics metrics;
};

struct RunSummary {
    double throughput_bps = 0.0;
    double ber = 0.0;
    double latency_ms = 0.0;
    double jitter_ms = 0.0;
    double effective_snr_db = 0.0;
    long handovers = 0;
    std::vector<StepLogRow> log;
};

struct RunSpec {
    Selector selector = Selector::proposed;
    Slice slice = Slice::embb;
    int users = 60;
    double speed_mps = 6.0;
    int run_index = 0;
    bool keep_log = false;
};

/// Builds the per-run context shared by every step.
inline SimContext make_context(const SimConfig& cfg, const CurveSet& curves, Selector selector, Slice slice,
                               const ldpc::LdpcCode* decode_code = nullptr)
{
    SimContext ctx;
    ctx.phy = cfg.phy;
    ctx.select = cfg.select;
    ctx.curves = &curves;
    ctx.rank = slice_ranking(cfg.ahp.profile(slice, cfg.engine.level1_source), cfg.ahp).rank;
    ctx.selector = selector;
    ctx.packet_bits = 8.0 * cfg.engine.packet_bytes;
    ctx.node_capacity = cfg.engine.node_capacity;
    ctx.max_d2d_m = cfg.engine.max_d2d_distance_m;
    ctx.jitter_window = static_cast<std::size_t>(cfg.engine.jitter_window);
    ctx.dt_s = cfg.engine.dt_s;
    ctx.decode_code = decode_code;
    ctx.max_iters = cfg.calib.max_iters;
    return ctx;
}

/// place -> steps -> per-step UE means -> mean over steps; handovers summed.
inline RunSummary run(const SimConfig& cfg, const CurveSet& curves, const RunSpec& spec,
                      const ldpc::LdpcCode* decode_code = nullptr)
{
    if (cfg.engine.steps < 1)
        throw config_error("engine.steps must be >= 1");
    if (spec.users < 1)
        throw invalid_input("a run needs at least one UE");
    if (spec.speed_mps < 0.0)
        throw invalid_input("speed must be >= 0");
    const auto seed = run_seed(cfg.engine.seed, static_cast<std::uint64_t>(spec.run_index));
    auto topo = place(seed, static_cast<std::size_t>(spec.users), static_cast<std::size_t>(cfg.engine.n_enb),
                      static_cast<std::size_t>(cfg.engine.n_gnb), cfg.engine.area_m);
    draw_shadowing(topo, seed, cfg.phy.shadow_sigma_db);
    auto mobility = make_stream(seed, Stream::mobility);
    for (auto& ue : topo.ues) {
        ue.speed_mps = spec.speed_mps;
        ue.waypoint = detail::uniform_point(topo.area_m, mobility);
    }
    auto channel = make_stream(seed, Stream::channel);
    const auto ctx = make_context(cfg, curves, spec.selector, spec.slice, decode_code);

    RunSummary sum;
    for (int step = 0; step < cfg.engine.steps; ++step) {
        const auto metrics = simulate_step(topo, ctx, step, mobility, channel);
        double tput = 0, ber = 0, lat = 0, jit = 0, snr = 0;
        for (const auto& m : metrics) {
            tput += m.throughput_bps;
            ber += m.ber;
            lat += m.latency_ms;
            jit += m.jitter_ms;
            snr += m.effective_snr_db;
            sum.handovers += m.handover ? 1 : 0;
            if (spec.keep_log)
                sum.log.push_back({step, m});
        }
        const double k = static_cast<double>(metrics.size());
        sum.throughput_bps += tput / k;
        sum.ber += ber / k;
        sum.latency_ms += lat / k;
        sum.jitter_ms += jit / k;
        sum.effective_snr_db += snr / k;
    }
    const double steps = static_cast<double>(cfg.engine.steps);
    sum.throughput_bps /= steps;
    sum.ber /= steps;
    sum.latency_ms /= steps;
    sum.jitter_ms /= steps;
    sum.effective_snr_db /= steps;
    return sum;
}

// ---------------------------------------------------------------------------
// Aggregation

struct Estimate {
    double mean = 0.0;
    double ci_halfwidth = 0.0;
    int n_runs = 0;
};

/// Sample mean and 1.96 s / sqrt(n) with the n - 1 standard deviation.
inline Estimate aggregate(std::span<const double> values)
{
    if (values.size() < 2)
        throw insufficient_runs("aggregation needs at least 2 runs, got " + std::to_string(values.size()));
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (const double v : values)
        ss += (v - mean) * (v - mean);
    return {mean, 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n), static_cast<int>(values.size())};
}

enum class Kpi { throughput, ber, latency, jitter, handovers };

inline constexpr std::array<Kpi, 5> kAllKpis{Kpi::throughput, Kpi::ber, Kpi::latency, Kpi::jitter, Kpi::handovers};

inline constexpr std::string_view to_string(Kpi k)
{
    switch (k) {
    case Kpi::throughput: return "throughput_mbps";
    case Kpi::ber: return "ber";
    case Kpi::latency: return "latency_ms";
    case Kpi::jitter: return "jitter_ms";
    case Kpi::handovers: return "handovers";
    }
    return "?";
}

inline double kpi_value(const RunSummary& r, Kpi k)
{
    switch (k) {
    case Kpi::throughput: return r.throughput_bps / 1e6;
    case Kpi::ber: return r.ber;
    case Kpi::latency: return r.latency_ms;
    case Kpi::jitter: return r.jitter_ms;
    case Kpi::handovers: return static_cast<double>(r.handovers);
    }
    return 0.0;
}

struct SweepResult {
    SweepVar sweep_var = SweepVar::speed;
    double sweep_value = 0.0;
    Selector selector = Selector::proposed;
    Slice slice = Slice::embb;
    std::array<Estimate, kAllKpis.size()> kpis{};
    Estimate effective_snr;

    const Estimate& at(Kpi k) const { return kpis[static_cast<std::size_t>(k)]; }
};

inline SweepResult aggregate_runs(std::span<const RunSummary> runs, SweepVar var, double value, Selector sel,
                                  Slice slice)
{
    SweepResult r{var, value, sel, slice, {}, {}};
    std::vector<double> xs(runs.size());
    for (const auto k : kAllKpis) {
        for (std::size_t i = 0; i < runs.size(); ++i)
            xs[i] = kpi_value(runs[i], k);
        r.kpis[static_cast<std::size_t>(k)] = aggregate(xs);
    }
    for (std::size_t i = 0; i < runs.size(); ++i)
        xs[i] = runs[i].effective_snr_db;
    r.effective_snr = aggregate(xs);
    return r;
}

} // namespace modesel
