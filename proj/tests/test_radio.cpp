#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "modesel/radio.hpp"
#include "synthetic_curves.hpp"

using namespace modesel;

namespace {

const Rat kNr = default_rat(RatId::nr);
const Rat kLte = default_rat(RatId::lte);
const Rat kD2d = default_rat(RatId::d2d);

double nlos_formula(double fc, double d) { return 13.54 + 39.08 * std::log10(d) + 20.0 * std::log10(fc); }

} // namespace

TEST(Pathloss, NlosFormula)
{
    EXPECT_NEAR(pathloss_uma(5.5, 100.0), nlos_formula(5.5, 100.0), 1e-9);
    EXPECT_NEAR(pathloss_uma(5.5, 100.0), 106.5, 0.05);
    EXPECT_NEAR(pathloss_uma(5.5, 1000.0), 145.6, 0.05);
    EXPECT_NEAR(pathloss_uma(5.5, 1000.0) - pathloss_uma(5.5, 100.0), 39.08, 1e-9);
}

TEST(Pathloss, LosBelowNlos)
{
    for (double d : {10.0, 50.0, 200.0, 900.0, 2000.0})
        EXPECT_LE(pathloss_uma(3.5, d, 25.0, 1.5, true), pathloss_uma(3.5, d));
    // Free-space-like LOS slope below the breakpoint.
    EXPECT_NEAR(pathloss_uma(5.5, 100.0, 25.0, 1.5, true), 28.0 + 44.0 + 20.0 * std::log10(5.5), 1e-9);
}

TEST(Pathloss, MonotoneAndClamped)
{
    double prev = 0.0;
    for (double d = 1.0; d < 3000.0; d *= 1.3) {
        const double pl = pathloss_uma(2.1, d);
        EXPECT_GT(pl, prev);
        prev = pl;
    }
    EXPECT_DOUBLE_EQ(pathloss_uma(2.1, 0.3), pathloss_uma(2.1, 1.0));
    EXPECT_THROW(pathloss_uma(2.1, 0.0), invalid_input);
    EXPECT_THROW(pathloss_uma(2.1, -5.0), invalid_input);
}

TEST(Rsrp, Composition)
{
    EXPECT_NEAR(rsrp(kNr, 100.0, 0.0), 35.0 - nlos_formula(5.5, 100.0), 1e-9);
    EXPECT_NEAR(rsrp(kNr, 100.0, 0.0), -71.5, 0.05);
    EXPECT_DOUBLE_EQ(rsrp(kNr, 100.0, 0.0) - rsrp(kNr, 100.0, 6.0), 6.0);
    EXPECT_TRUE(std::isfinite(rsrp(kD2d, 80.0, 0.0)));
}

TEST(Snr, NoiseFloor)
{
    EXPECT_NEAR(noise_floor_dbm(kNr), -174.0 + 10.0 * std::log10(20e6) + 6.0, 1e-12);
    EXPECT_NEAR(snr(-71.5, kNr), 23.49, 0.01);
    Rat nf7 = kNr;
    nf7.noise_figure_db = 7.0;
    EXPECT_NEAR(snr(-80.0, kNr) - snr(-80.0, nf7), 1.0, 1e-12);
    EXPECT_NEAR(snr(noise_floor_dbm(kNr), kNr), 0.0, 1e-12);
}

TEST(EffectiveSnr, Penalties)
{
    EXPECT_DOUBLE_EQ(effective_snr(12.0, 0.0, ModulationScheme::qpsk, kNr), 12.0);
    EXPECT_NEAR(effective_snr(12.0, 10.0, ModulationScheme::qpsk, kNr), 10.0, 1e-12);
    EXPECT_NEAR(effective_snr(12.0, 0.0, ModulationScheme::qam256, kNr), 10.5, 1e-12);
    Rat bonus = kNr;
    bonus.diversity_bonus_db = 3.0;
    EXPECT_NEAR(effective_snr(12.0, 0.0, ModulationScheme::qpsk, bonus), 15.0, 1e-12);
    EXPECT_THROW(effective_snr(12.0, -1.0, ModulationScheme::qpsk, kNr), invalid_input);
}

TEST(SelectMcs, Caps)
{
    const auto curves = fixtures::synthetic_curves();
    EXPECT_EQ(select_mcs(40.0, 0.0, kNr, curves).mod, ModulationScheme::qam256);
    EXPECT_EQ(select_mcs(40.0, 0.0, kLte, curves).mod, ModulationScheme::qam64);
    EXPECT_EQ(select_mcs(40.0, 0.0, kD2d, curves).mod, ModulationScheme::qam64);
}

TEST(SelectMcs, ThresholdsAndFallback)
{
    const auto curves = fixtures::synthetic_curves();
    // 16-QAM needs 8 dB effective (+0.5 dB penalty); 64-QAM would need 15 dB.
    const auto mid = select_mcs(10.0, 0.0, kNr, curves);
    EXPECT_EQ(mid.mod, ModulationScheme::qam16);
    EXPECT_NEAR(mid.effective_snr_db, 9.5, 1e-12);
    EXPECT_DOUBLE_EQ(mid.bler, 0.0);

    const auto low = select_mcs(-5.0, 0.0, kNr, curves);
    EXPECT_EQ(low.mod, ModulationScheme::qpsk);
    EXPECT_DOUBLE_EQ(low.bler, 1.0);

    // 1 dB of QPSK waterfall: BLER halfway down.
    const auto edge = select_mcs(1.0, 0.0, kNr, curves);
    EXPECT_EQ(edge.mod, ModulationScheme::qpsk);
    EXPECT_NEAR(edge.bler, 0.5, 1e-12);

    // Speed pushes the same SNR down one order.
    EXPECT_EQ(select_mcs(10.0, 10.0, kNr, curves).mod, ModulationScheme::qpsk);
}

TEST(Throughput, Arithmetic)
{
    EXPECT_NEAR(throughput(ModulationScheme::qpsk, 0.0, kNr), 17.2e6, 1e-3);
    EXPECT_NEAR(throughput(ModulationScheme::qam256, 0.0, kNr), 4.0 * 17.2e6, 1e-3);
    EXPECT_DOUBLE_EQ(throughput(ModulationScheme::qpsk, 1.0, kNr), 0.0);
    EXPECT_NEAR(throughput(ModulationScheme::qpsk, 0.25, kNr), 0.75 * 17.2e6, 1e-3);
    EXPECT_THROW(throughput(ModulationScheme::qpsk, 1.5, kNr), invalid_input);
}

TEST(Latency, TermByTerm)
{
    const auto l = packet_latency(12000, 17.2e6, 0.0, kLte, ModulationScheme::qpsk, 0.0, 0.0, 0.0);
    EXPECT_TRUE(l.delivered);
    EXPECT_NEAR(l.tx_ms, 12000.0 / 17.2e6 * 1e3, 1e-12);
    EXPECT_NEAR(l.sched_ms, 0.5, 1e-12);
    EXPECT_NEAR(l.decode_ms, 0.1, 1e-12);
    EXPECT_NEAR(l.total_ms, 0.698 + 0.5 + 0.1, 1e-3);
    EXPECT_NEAR(l.total_ms, 1.4, 0.15);
}

TEST(Latency, HarqAndMonotone)
{
    const auto base = packet_latency(12000, 17.2e6, 0.0, kLte, ModulationScheme::qpsk, 0.0, 0.0, 0.0);
    const auto half = packet_latency(12000, 17.2e6, 0.5, kLte, ModulationScheme::qpsk, 0.0, 0.0, 0.0);
    EXPECT_NEAR(half.total_ms - base.total_ms, 8.0 * kLte.tti_ms(), 1e-12);

    double prev = 0.0;
    for (double load : {0.0, 0.2, 0.4, 0.8}) {
        const auto l = packet_latency(12000, 17.2e6, 0.1, kLte, ModulationScheme::qpsk, load, 5.0, 300.0);
        EXPECT_GT(l.total_ms, prev);
        prev = l.total_ms;
    }
    const auto slow = packet_latency(12000, 17.2e6, 0.0, kNr, ModulationScheme::qpsk, 0.5, 0.0, 0.0);
    const auto fast = packet_latency(12000, 17.2e6, 0.0, kNr, ModulationScheme::qpsk, 0.5, 20.0, 0.0);
    EXPECT_GT(fast.queue_ms, slow.queue_ms);
}

TEST(Latency, Undeliverable)
{
    const PhyParams p;
    const auto dead = packet_latency(12000, 0.0, 1.0, kNr, ModulationScheme::qpsk, 0.0, 0.0, 0.0, p);
    EXPECT_FALSE(dead.delivered);
    EXPECT_DOUBLE_EQ(dead.total_ms, p.latency_cap_ms);
    const auto huge = packet_latency(12000, 1e3, 0.0, kNr, ModulationScheme::qpsk, 0.0, 0.0, 0.0, p);
    EXPECT_DOUBLE_EQ(huge.total_ms, p.latency_cap_ms);
    EXPECT_THROW(packet_latency(12000, 1e6, 0.0, kNr, ModulationScheme::qpsk, -1.0, 0.0, 0.0), invalid_input);
}

TEST(Jitter, SampleStd)
{
    const std::vector<double> constant{5, 5, 5, 5};
    EXPECT_DOUBLE_EQ(jitter(constant), 0.0);
    const std::vector<double> two{10, 20};
    EXPECT_NEAR(jitter(two), 7.0710678, 1e-6);
    const std::vector<double> one{3};
    EXPECT_DOUBLE_EQ(jitter(one), 0.0);
    const std::vector<double> scaled{20, 40};
    EXPECT_NEAR(jitter(scaled), 2.0 * jitter(two), 1e-12);
}

TEST(CombineHops, Relayed)
{
    const auto curves = fixtures::synthetic_curves();
    const PhyParams p;
    auto d2d = make_link_budget(kD2d, 30.0, 0.0, p);
    auto nr = make_link_budget(kNr, 400.0, 0.0, p);
    const HopOutcome a = evaluate_hop(d2d, 0.0, 0.0, 12000, curves, p);
    const HopOutcome b = evaluate_hop(nr, 0.0, 0.2, 12000, curves, p);
    const std::vector<HopOutcome> hops{a, b};
    const auto out = combine_hops(hops, p.latency_cap_ms);
    EXPECT_DOUBLE_EQ(out.throughput_bps, std::min(a.throughput_bps, b.throughput_bps));
    EXPECT_NEAR(out.latency_ms, std::min(a.latency.total_ms + b.latency.total_ms, p.latency_cap_ms), 1e-12);
    EXPECT_NEAR(out.bler, 1.0 - (1.0 - a.mcs.bler) * (1.0 - b.mcs.bler), 1e-12);

    const std::vector<HopOutcome> single{b};
    const auto direct = combine_hops(single, p.latency_cap_ms);
    EXPECT_DOUBLE_EQ(direct.throughput_bps, b.throughput_bps);
    EXPECT_DOUBLE_EQ(direct.latency_ms, b.latency.total_ms);
    EXPECT_THROW(combine_hops(std::span<const HopOutcome>{}, 100.0), invalid_input);
}
