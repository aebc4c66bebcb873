#pragma once

/**
 * \file ahp.hpp
 *
 * Two-level Analytic Hierarchy Process.
 *
 * Level 0 compares the four QoS criteria against each other; level 1
 * compares the three access options under each criterion. Weights are
 * extracted with the approximate column-normalization method (normalize
 * each column of the pairwise comparison matrix, then average each row),
 * and the principal eigenvalue is estimated as the dot product of the
 * column sums with the weight vector.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace modesel::ahp {

enum class Criterion { data_rate = 0, reliability = 1, latency = 2, jitter = 3 };
enum class Option { lte = 0, nr = 1, d2d = 2 };

inline constexpr std::size_t kCriteria = 4;
inline constexpr std::size_t kOptions = 3;

inline constexpr std::array<Criterion, kCriteria> kAllCriteria{
    Criterion::data_rate, Criterion::reliability, Criterion::latency, Criterion::jitter};
inline constexpr std::array<Option, kOptions> kAllOptions{Option::lte, Option::nr, Option::d2d};

inline constexpr std::string_view to_string(Criterion c)
{
    switch (c) {
    case Criterion::data_rate: return "data_rate";
    case Criterion::reliability: return "reliability";
    case Criterion::latency: return "latency";
    case Criterion::jitter: return "jitter";
    }
    return "?";
}

inline constexpr std::string_view to_string(Option o)
{
    switch (o) {
    case Option::lte: return "lte";
    case Option::nr: return "nr";
    case Option::d2d: return "d2d";
    }
    return "?";
}

inline constexpr std::string_view display_name(Option o)
{
    switch (o) {
    case Option::lte: return "LTE";
    case Option::nr: return "NR";
    case Option::d2d: return "D2D";
    }
    return "?";
}

/// Square matrix of strictly positive pairwise preferences with a unit diagonal.
///
/// Reciprocity (x_ij * x_ji == 1) is not enforced: hand-entered matrices are
/// usually rounded. Use max_reciprocity_error() to audit it.
class ComparisonMatrix {
public:
    ComparisonMatrix(std::size_t n, std::vector<double> entries) : n_(n), x_(std::move(entries))
    {
        if (n_ == 0)
            throw invalid_input("comparison matrix must have order >= 1");
        if (x_.size() != n_ * n_)
            throw dimension_mismatch("comparison matrix of order " + std::to_string(n_) +
                                     " needs " + std::to_string(n_ * n_) + " entries, got " +
                                     std::to_string(x_.size()));
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                const double v = (*this)(i, j);
                if (!std::isfinite(v) || v <= 0.0)
                    throw invalid_input("comparison matrix entries must be finite and > 0");
            }
            if (std::abs((*this)(i, i) - 1.0) > 1e-12)
                throw invalid_input("comparison matrix diagonal must be 1");
        }
    }

    ComparisonMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : ComparisonMatrix(rows.size(), flatten(rows))
    {
    }

    std::size_t order() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return x_[i * n_ + j]; }
    std::span<const double> entries() const noexcept { return x_; }

    std::vector<double> column_sums() const
    {
        std::vector<double> sums(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                sums[j] += (*this)(i, j);
        return sums;
    }

    /// max over i<j of |x_ij * x_ji - 1|
    double max_reciprocity_error() const noexcept
    {
        double worst = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j)
                worst = std::max(worst, std::abs((*this)(i, j) * (*this)(j, i) - 1.0));
        return worst;
    }

private:
    static std::vector<double> flatten(std::initializer_list<std::initializer_list<double>> rows)
    {
        std::vector<double> out;
        for (const auto& r : rows) {
            if (r.size() != rows.size())
                throw dimension_mismatch("comparison matrix rows must all have the matrix order");
            out.insert(out.end(), r.begin(), r.end());
        }
        return out;
    }

    std::size_t n_;
    std::vector<double> x_;
};

inline constexpr double kReciprocityTolerance = 0.15;

struct WeightVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }
};

struct NormalizedMatrix {
    std::size_t order = 0;
    std::vector<double> entries; // row-major y_ij
    WeightVector weights;

    double operator()(std::size_t i, std::size_t j) const { return entries[i * order + j]; }
};

struct ConsistencyReport {
    double lambda_max = 0.0;
    double ci = 0.0;
    double cr = 0.0;
    double ri = 0.0;
    bool consistent = true;
};

/// x_ij = p_i / p_j. Exactly reciprocal, unit diagonal.
inline ComparisonMatrix build_pcm_from_priorities(std::span<const double> priorities)
{
    const std::size_t n = priorities.size();
    if (n == 0)
        throw invalid_input("priority list is empty");
    for (const double p : priorities)
        if (!std::isfinite(p) || p <= 0.0)
            throw invalid_input("priorities must be finite and > 0");

    std::vector<double> x(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            x[i * n + j] = (i == j) ? 1.0 : priorities[i] / priorities[j];
    return ComparisonMatrix(n, std::move(x));
}

inline ComparisonMatrix build_pcm_from_priorities(std::initializer_list<double> priorities)
{
    return build_pcm_from_priorities(std::span<const double>(priorities.begin(), priorities.size()));
}

/// Column-normalizes the matrix; weights are the row means of the result.
inline NormalizedMatrix normalize(const ComparisonMatrix& pcm)
{
    const std::size_t n = pcm.order();
    const auto sums = pcm.column_sums();

    NormalizedMatrix out;
    out.order = n;
    out.entries.resize(n * n);
    out.weights.values.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double y = pcm(i, j) / sums[j];
            out.entries[i * n + j] = y;
            out.weights.values[i] += y;
        }
        out.weights.values[i] /= static_cast<double>(n);
    }
    return out;
}

/// Saaty's random index. Only orders 3 and 4 are tabulated here.
inline double random_index(std::size_t n)
{
    switch (n) {
    case 3: return 0.58;
    case 4: return 0.90;
    default:
        throw unsupported_order("no random index for matrix order " + std::to_string(n) +
                                " (supported: 3, 4)");
    }
}

inline ConsistencyReport consistency(const ComparisonMatrix& pcm, const WeightVector& weights)
{
    const std::size_t n = pcm.order();
    const double ri = random_index(n);
    if (weights.size() != n)
        throw dimension_mismatch("weight vector length " + std::to_string(weights.size()) +
                                 " does not match matrix order " + std::to_string(n));

    const auto sums = pcm.column_sums();
    ConsistencyReport r;
    r.lambda_max = std::inner_product(sums.begin(), sums.end(), weights.values.begin(), 0.0);
    r.ci = (r.lambda_max - static_cast<double>(n)) / static_cast<double>(n - 1);
    r.ri = ri;
    r.cr = r.ci / ri;
    // Negative CR is possible on sub-reciprocal matrices and counts as consistent.
    r.consistent = r.cr < 0.1;
    return r;
}

/// Level-1 priorities: row = option (LTE, NR, D2D), column = criterion (CR-1..CR-4).
using OptionWeights = std::array<std::array<double, kCriteria>, kOptions>;

struct RankTable {
    std::array<double, kOptions> scores{};
    std::array<int, kOptions> ranks{}; // 1 = best

    double score(Option o) const { return scores[static_cast<std::size_t>(o)]; }
    int rank(Option o) const { return ranks[static_cast<std::size_t>(o)]; }

    /// Options from best to worst.
    std::array<Option, kOptions> ordering() const
    {
        std::array<Option, kOptions> out{};
        for (const Option o : kAllOptions)
            out[static_cast<std::size_t>(rank(o) - 1)] = o;
        return out;
    }
};

/// Ranks by descending score; equal scores keep the fixed order LTE < NR < D2D.
inline RankTable rank_scores(const std::array<double, kOptions>& scores)
{
    std::array<std::size_t, kOptions> idx{0, 1, 2};
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    RankTable t;
    t.scores = scores;
    for (std::size_t pos = 0; pos < kOptions; ++pos)
        t.ranks[idx[pos]] = static_cast<int>(pos + 1);
    return t;
}

inline constexpr double kLevel1ColumnTolerance = 0.02;

/// score(o) = sum_c P[o][c] * W[c]
inline RankTable synthesize_rank(const OptionWeights& level1, const WeightVector& level0)
{
    if (level0.size() != kCriteria)
        throw dimension_mismatch("level-0 weight vector must have " + std::to_string(kCriteria) +
                                 " entries, got " + std::to_string(level0.size()));
    for (std::size_t c = 0; c < kCriteria; ++c) {
        double col = 0.0;
        for (std::size_t o = 0; o < kOptions; ++o) {
            if (!std::isfinite(level1[o][c]) || level1[o][c] < 0.0)
                throw invalid_input("level-1 weights must be finite and nonnegative");
            col += level1[o][c];
        }
        if (std::abs(col - 1.0) > kLevel1ColumnTolerance)
            throw invalid_input("level-1 weights for criterion " +
                                std::string(to_string(kAllCriteria[c])) + " sum to " +
                                std::to_string(col) + ", expected 1");
    }

    std::array<double, kOptions> scores{};
    for (std::size_t o = 0; o < kOptions; ++o)
        for (std::size_t c = 0; c < kCriteria; ++c)
            scores[o] += level1[o][c] * level0[c];
    return rank_scores(scores);
}

} // namespace modesel::ahp
