#pragma once

// Slice profiles, the level-1 option tables, and the end-to-end slice ranking.
//
// Everything here can be overridden from a key-value data file:
//
//   slice.<slice>.priority.<criterion> = <1..10>
//   level1.<criterion>.<option>        = <weight>
//   pcm.level1.<criterion>             = r00 r01 r02; r10 r11 r12; r20 r21 r22
//
// with <slice> in {embb, urllc, mmtc}, <criterion> in {data_rate,
// reliability, latency, jitter} and <option> in {lte, nr, d2d}.

#include <array>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ahp.hpp"
#include "kv.hpp"

namespace modesel {

enum class Slice { embb = 0, urllc = 1, mmtc = 2 };
inline constexpr std::array<Slice, 3> kAllSlices{Slice::embb, Slice::urllc, Slice::mmtc};

inline constexpr std::string_view to_string(Slice s)
{
    switch (s) {
    case Slice::embb: return "embb";
    case Slice::urllc: return "urllc";
    case Slice::mmtc: return "mmtc";
    }
    return "?";
}

inline std::optional<Slice> parse_slice(std::string_view s)
{
    for (const Slice sl : kAllSlices)
        if (s == to_string(sl))
            return sl;
    return std::nullopt;
}

enum class Level1Source { printed, recomputed };

inline constexpr std::string_view to_string(Level1Source s)
{
    return s == Level1Source::printed ? "printed" : "recomputed";
}

inline std::optional<Level1Source> parse_level1_source(std::string_view s)
{
    if (s == "printed")
        return Level1Source::printed;
    if (s == "recomputed")
        return Level1Source::recomputed;
    return std::nullopt;
}

namespace ahp {

inline std::optional<Criterion> parse_criterion(std::string_view s)
{
    for (const Criterion c : kAllCriteria)
        if (s == to_string(c))
            return c;
    return std::nullopt;
}

inline std::optional<Option> parse_option(std::string_view s)
{
    for (const Option o : kAllOptions)
        if (s == to_string(o))
            return o;
    return std::nullopt;
}

} // namespace ahp

using CriterionPriorities = std::array<double, ahp::kCriteria>;

struct SliceProfile {
    Slice slice = Slice::embb;
    CriterionPriorities criterion_priorities{};
    Level1Source level1_source = Level1Source::printed;
};

struct AhpData {
    std::array<CriterionPriorities, 3> priorities{};
    ahp::OptionWeights printed_level1{};
    std::vector<ahp::ComparisonMatrix> level1_pcms; // one per criterion, CR-1..CR-4
    // Published final scores per slice (LTE, NR, D2D), only used for comparison output.
    std::array<std::optional<std::array<double, ahp::kOptions>>, 3> reference_scores{};

    const CriterionPriorities& priorities_for(Slice s) const
    {
        return priorities[static_cast<std::size_t>(s)];
    }

    SliceProfile profile(Slice s, Level1Source src = Level1Source::printed) const
    {
        return SliceProfile{s, priorities_for(s), src};
    }
};

/// Built-in tables. data/slices.conf ships the same values.
inline AhpData default_ahp_data()
{
    AhpData d;
    d.priorities[static_cast<std::size_t>(Slice::embb)] = {10, 5, 2, 1};
    d.priorities[static_cast<std::size_t>(Slice::urllc)] = {3, 6, 7, 1};
    d.priorities[static_cast<std::size_t>(Slice::mmtc)] = {1, 3, 6, 9};

    // rows LTE, NR, D2D; columns data rate, reliability, latency, jitter
    d.printed_level1 = {{
        {0.30, 0.28, 0.149, 0.35},
        {0.30, 0.29, 0.254, 0.16},
        {0.39, 0.42, 0.596, 0.48},
    }};

    d.level1_pcms = {
        ahp::ComparisonMatrix{{1, 0.33, 0.5}, {3, 1, 2}, {2, 0.5, 1}},
        ahp::ComparisonMatrix{{1, 0.5, 0.33}, {0.6, 1, 0.5}, {3, 2, 1}},
        ahp::ComparisonMatrix{{1, 0.5, 0.25}, {2, 1, 0.3}, {4, 2, 1}},
        ahp::ComparisonMatrix{{1, 2, 0.75}, {0.5, 1, 0.3}, {1.5, 2.5, 1}},
    };

    d.reference_scores[static_cast<std::size_t>(Slice::embb)] = {0.199, 0.41, 0.24};
    d.reference_scores[static_cast<std::size_t>(Slice::urllc)] = {0.205, 0.27, 0.470};
    d.reference_scores[static_cast<std::size_t>(Slice::mmtc)] = {0.262, 0.224, 0.495};
    return d;
}

namespace detail {

inline ahp::ComparisonMatrix parse_pcm(const std::string& key, const std::string& value)
{
    std::vector<double> entries;
    std::size_t rows = 0;
    for (const auto& row : kv::split(value, ';')) {
        ++rows;
        for (const auto& cell : kv::split(row, ' '))
            entries.push_back(kv::to_double(key, cell));
    }
    if (rows == 0)
        throw config_error("empty matrix for '" + key + "'");
    try {
        return ahp::ComparisonMatrix(rows, std::move(entries));
    } catch (const std::exception& e) {
        throw config_error("'" + key + "': " + e.what());
    }
}

} // namespace detail

inline bool is_ahp_key(std::string_view key)
{
    return key.starts_with("slice.") || key.starts_with("level1.") || key.starts_with("pcm.level1.") ||
           key.starts_with("reference.");
}

/// Overlays `table` onto `base`. Every key must be a recognized AHP key.
inline AhpData apply_ahp_overrides(AhpData base, const kv::Table& table)
{
    for (const auto& [key, value] : table) {
        const auto parts = kv::split(key, '.');
        if (parts.size() == 4 && parts[0] == "slice" && parts[2] == "priority") {
            const auto slice = parse_slice(parts[1]);
            const auto crit = ahp::parse_criterion(parts[3]);
            if (!slice || !crit)
                throw config_error("unknown key '" + key + "'");
            const double p = kv::to_double(key, value);
            if (!(p >= 1.0 && p <= 10.0))
                throw config_error("'" + key + "' = " + value + " is outside the priority scale [1, 10]");
            base.priorities[static_cast<std::size_t>(*slice)][static_cast<std::size_t>(*crit)] = p;
        } else if (parts.size() == 3 && parts[0] == "level1") {
            const auto crit = ahp::parse_criterion(parts[1]);
            const auto opt = ahp::parse_option(parts[2]);
            if (!crit || !opt)
                throw config_error("unknown key '" + key + "'");
            const double w = kv::to_double(key, value);
            if (!(w >= 0.0 && w <= 1.0))
                throw config_error("'" + key + "' = " + value + " is outside [0, 1]");
            base.printed_level1[static_cast<std::size_t>(*opt)][static_cast<std::size_t>(*crit)] = w;
        } else if (parts.size() == 3 && parts[0] == "pcm" && parts[1] == "level1") {
            const auto crit = ahp::parse_criterion(parts[2]);
            if (!crit)
                throw config_error("unknown key '" + key + "'");
            auto m = detail::parse_pcm(key, value);
            if (m.order() != ahp::kOptions)
                throw config_error("'" + key + "' must be a 3x3 matrix");
            base.level1_pcms[static_cast<std::size_t>(*crit)] = std::move(m);
        } else if (parts.size() == 3 && parts[0] == "reference") {
            const auto slice = parse_slice(parts[1]);
            const auto opt = ahp::parse_option(parts[2]);
            if (!slice || !opt)
                throw config_error("unknown key '" + key + "'");
            const double w = kv::to_double(key, value);
            if (!(w >= 0.0 && w <= 1.0))
                throw config_error("'" + key + "' = " + value + " is outside [0, 1]");
            auto& ref = base.reference_scores[static_cast<std::size_t>(*slice)];
            if (!ref)
                ref = std::array<double, ahp::kOptions>{};
            (*ref)[static_cast<std::size_t>(*opt)] = w;
        } else {
            throw config_error("unknown key '" + key + "'");
        }
    }
    return base;
}

inline AhpData load_ahp_data(const std::string& path)
{
    return apply_ahp_overrides(default_ahp_data(), kv::parse_file(path));
}

struct MatrixDiagnostics {
    std::string label;
    ahp::WeightVector weights;
    ahp::ConsistencyReport consistency;
    double reciprocity_error = 0.0;
};

struct SliceRanking {
    ahp::RankTable rank;
    ahp::OptionWeights level1{};
    MatrixDiagnostics level0;
    std::vector<MatrixDiagnostics> level1_matrices; // always computed, used only when recomputed
    std::vector<std::string> warnings;
};

inline MatrixDiagnostics diagnose(std::string label, const ahp::ComparisonMatrix& pcm)
{
    MatrixDiagnostics d;
    d.label = std::move(label);
    d.weights = ahp::normalize(pcm).weights;
    d.consistency = ahp::consistency(pcm, d.weights);
    d.reciprocity_error = pcm.max_reciprocity_error();
    return d;
}

/// Level-0 PCM from the slice priorities, level-1 weights from the chosen
/// source, synthesized into a rank table. Inconsistency is reported as a
/// warning, never an error.
inline SliceRanking slice_ranking(const SliceProfile& profile, const AhpData& data = default_ahp_data())
{
    for (const double p : profile.criterion_priorities)
        if (!(p >= 1.0 && p <= 10.0))
            throw invalid_input("slice priorities must lie on the 1..10 scale");
    if (data.level1_pcms.size() != ahp::kCriteria)
        throw dimension_mismatch("need one level-1 comparison matrix per criterion");

    SliceRanking out;
    const auto pcm0 = ahp::build_pcm_from_priorities(profile.criterion_priorities);
    out.level0 = diagnose("level0/" + std::string(to_string(profile.slice)), pcm0);

    ahp::OptionWeights recomputed{};
    for (std::size_t c = 0; c < ahp::kCriteria; ++c) {
        auto d = diagnose("level1/" + std::string(ahp::to_string(ahp::kAllCriteria[c])),
                          data.level1_pcms[c]);
        for (std::size_t o = 0; o < ahp::kOptions; ++o)
            recomputed[o][c] = d.weights[o];
        out.level1_matrices.push_back(std::move(d));
    }

    out.level1 = profile.level1_source == Level1Source::recomputed ? recomputed : data.printed_level1;
    out.rank = ahp::synthesize_rank(out.level1, out.level0.weights);

    auto check = [&](const MatrixDiagnostics& d) {
        char buf[160];
        if (!d.consistency.consistent) {
            std::snprintf(buf, sizeof buf, "%s: CR = %.4f >= 0.1 (inconsistent judgements)",
                          d.label.c_str(), d.consistency.cr);
            out.warnings.emplace_back(buf);
        }
        if (d.reciprocity_error > ahp::kReciprocityTolerance) {
            std::snprintf(buf, sizeof buf, "%s: max |x_ij*x_ji - 1| = %.3f exceeds %.2f",
                          d.label.c_str(), d.reciprocity_error, ahp::kReciprocityTolerance);
            out.warnings.emplace_back(buf);
        }
    };
    check(out.level0);
    if (profile.level1_source == Level1Source::recomputed)
        for (const auto& d : out.level1_matrices)
            check(d);
    return out;
}

} // namespace modesel
