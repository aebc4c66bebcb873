#pragma once

/**
 * \file ldpc.hpp
 *
 * Regular LDPC codes with column weight 3, systematic encoding via GF(2)
 * elimination of the parity-check matrix, and a sum-product (tanh-rule)
 * belief-propagation decoder.
 */

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "modem.hpp"
#include "random.hpp"

namespace modesel::ldpc {

inline constexpr int kColumnWeight = 3;
inline constexpr int kDefaultMaxIters = 50;

namespace detail {

class BitRow {
public:
    explicit BitRow(std::size_t bits = 0) : words_((bits + 63) / 64, 0) {}

    bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
    void set(std::size_t i) { words_[i / 64] |= (std::uint64_t{1} << (i % 64)); }
    void flip(std::size_t i) { words_[i / 64] ^= (std::uint64_t{1} << (i % 64)); }
    BitRow& operator^=(const BitRow& o)
    {
        for (std::size_t w = 0; w < words_.size(); ++w)
            words_[w] ^= o.words_[w];
        return *this;
    }
    /// Parity of the bitwise AND with `o`.
    bool dot(const BitRow& o) const
    {
        unsigned acc = 0;
        for (std::size_t w = 0; w < words_.size(); ++w)
            acc ^= static_cast<unsigned>(std::popcount(words_[w] & o.words_[w]));
        return acc & 1u;
    }

    bool operator==(const BitRow&) const = default;

private:
    std::vector<std::uint64_t> words_;
};

} // namespace detail

struct LdpcCode {
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::uint32_t>> checks;        // variable indices per parity check
    std::vector<std::uint32_t> info_positions;             // codeword positions of the k message bits
    std::vector<std::uint32_t> parity_positions;           // one per check, the elimination pivot
    std::vector<detail::BitRow> parity_rows;               // parity bit = <row, message> over GF(2)
    std::vector<std::uint32_t> edge_var;                   // checks flattened, row after row
    std::vector<std::uint32_t> check_start;                // offsets into edge_var, m + 1 entries

    std::size_t m() const noexcept { return checks.size(); }
    double rate() const noexcept { return n ? static_cast<double>(k) / static_cast<double>(n) : 0.0; }

    bool same_structure(const LdpcCode& o) const
    {
        return n == o.n && k == o.k && checks == o.checks && info_positions == o.info_positions;
    }

    bool satisfies_checks(std::span<const std::uint8_t> word) const
    {
        for (const auto& row : checks) {
            unsigned parity = 0;
            for (const auto v : row)
                parity ^= word[v];
            if (parity & 1u)
                return false;
        }
        return true;
    }
};

namespace detail {

// Random socket matching: 3 edges per column, check degrees as even as the
// edge count allows, no repeated (check, variable) pair.
inline std::vector<std::vector<std::uint32_t>> draw_structure(std::size_t n, std::size_t m, Rng& rng)
{
    const std::size_t edges = n * kColumnWeight;
    std::vector<std::uint32_t> sockets;
    sockets.reserve(edges);
    for (std::size_t e = 0; e < edges; ++e)
        sockets.push_back(static_cast<std::uint32_t>(e % m));

    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::shuffle(sockets.begin(), sockets.end(), rng);
        bool ok = true;
        for (std::size_t v = 0; v < n && ok; ++v) {
            for (int a = 0; a < kColumnWeight && ok; ++a) {
                const std::size_t pos = v * kColumnWeight + static_cast<std::size_t>(a);
                auto clashes = [&](std::uint32_t c) {
                    for (int b = 0; b < a; ++b)
                        if (sockets[v * kColumnWeight + static_cast<std::size_t>(b)] == c)
                            return true;
                    return false;
                };
                if (!clashes(sockets[pos]))
                    continue;
                // Swap with a later socket that does not clash here.
                bool fixed = false;
                for (std::size_t tries = 0; tries < 4 * edges && !fixed; ++tries) {
                    std::uniform_int_distribution<std::size_t> pick(pos + 1, edges - 1);
                    if (pos + 1 >= edges)
                        break;
                    const std::size_t other = pick(rng);
                    if (!clashes(sockets[other])) {
                        std::swap(sockets[pos], sockets[other]);
                        fixed = true;
                    }
                }
                ok = fixed;
            }
        }
        if (!ok)
            continue;

        std::vector<std::vector<std::uint32_t>> checks(m);
        for (std::size_t v = 0; v < n; ++v)
            for (int a = 0; a < kColumnWeight; ++a)
                checks[sockets[v * kColumnWeight + static_cast<std::size_t>(a)]].push_back(
                    static_cast<std::uint32_t>(v));
        for (auto& row : checks)
            std::sort(row.begin(), row.end());
        return checks;
    }
    return {};
}

/// Reduced row echelon form. Returns false when H is rank deficient.
inline bool systematize(LdpcCode& code)
{
    const std::size_t n = code.n;
    const std::size_t m = code.checks.size();
    std::vector<BitRow> h(m, BitRow(n));
    for (std::size_t r = 0; r < m; ++r)
        for (const auto v : code.checks[r])
            h[r].set(v);

    std::vector<std::uint32_t> pivots;
    std::vector<bool> is_pivot(n, false);
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < m; ++col) {
        std::size_t sel = row;
        while (sel < m && !h[sel].get(col))
            ++sel;
        if (sel == m)
            continue;
        std::swap(h[row], h[sel]);
        for (std::size_t r = 0; r < m; ++r)
            if (r != row && h[r].get(col))
                h[r] ^= h[row];
        pivots.push_back(static_cast<std::uint32_t>(col));
        is_pivot[col] = true;
        ++row;
    }
    if (row < m)
        return false;

    code.info_positions.clear();
    for (std::size_t c = 0; c < n; ++c)
        if (!is_pivot[c])
            code.info_positions.push_back(static_cast<std::uint32_t>(c));
    code.k = code.info_positions.size();
    code.parity_positions = pivots;
    code.parity_rows.assign(m, BitRow(code.k));
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t i = 0; i < code.k; ++i)
            if (h[r].get(code.info_positions[i]))
                code.parity_rows[r].set(i);
    return true;
}

} // namespace detail

/// Regular Gallager-style code, column weight 3, redrawn until the parity
/// check matrix has full rank. Deterministic per seed.
inline LdpcCode make_code(std::size_t n, double rate, std::uint64_t seed)
{
    if (n == 0 || n % 2 != 0)
        throw invalid_input("LDPC length must be even and positive, got " + std::to_string(n));
    if (!(rate > 0.0 && rate < 1.0))
        throw invalid_input("LDPC rate must lie in (0, 1)");
    const auto m = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - rate)));
    if (m < static_cast<std::size_t>(kColumnWeight) || m >= n)
        throw invalid_input("no column-weight-3 code with n=" + std::to_string(n) +
                            " and rate " + std::to_string(rate));

    Rng rng(mix_seed({seed, 0x1d9c}));
    for (int attempt = 0; attempt < 200; ++attempt) {
        LdpcCode code;
        code.n = n;
        code.seed = seed;
        code.checks = detail::draw_structure(n, m, rng);
        if (code.checks.empty())
            continue;
        if (!detail::systematize(code))
            continue;
        code.check_start.push_back(0);
        for (const auto& row : code.checks) {
            code.edge_var.insert(code.edge_var.end(), row.begin(), row.end());
            code.check_start.push_back(static_cast<std::uint32_t>(code.edge_var.size()));
        }
        return code;
    }
    throw invalid_input("could not draw a full-rank parity-check matrix for n=" + std::to_string(n));
}

inline Bits encode(const LdpcCode& code, std::span<const std::uint8_t> message)
{
    if (message.size() != code.k)
        throw invalid_input("message length " + std::to_string(message.size()) +
                            " does not match k = " + std::to_string(code.k));
    detail::BitRow msg(code.k);
    Bits word(code.n, 0);
    for (std::size_t i = 0; i < code.k; ++i) {
        if (message[i] & 1u) {
            msg.set(i);
            word[code.info_positions[i]] = 1;
        }
    }
    for (std::size_t r = 0; r < code.parity_rows.size(); ++r)
        word[code.parity_positions[r]] = code.parity_rows[r].dot(msg) ? 1 : 0;
    return word;
}

inline Bits extract_message(const LdpcCode& code, std::span<const std::uint8_t> word)
{
    Bits msg(code.k);
    for (std::size_t i = 0; i < code.k; ++i)
        msg[i] = word[code.info_positions[i]];
    return msg;
}

struct DecodeResult {
    Bits message;
    Bits codeword;
    bool converged = false;
    int iterations = 0;
};

/// Sum-product decoding with early exit once every check is satisfied.
/// A variable whose posterior LLR is exactly zero counts as undecided and
/// blocks convergence.
inline DecodeResult decode(const LdpcCode& code, std::span<const double> llr,
                           int max_iters = kDefaultMaxIters)
{
    if (llr.size() != code.n)
        throw invalid_input("LLR length " + std::to_string(llr.size()) + " does not match n = " +
                            std::to_string(code.n));

    constexpr double kClip = 30.0;
    constexpr double kTanhLimit = 1.0 - 1e-15;

    const auto& edge_var = code.edge_var;
    const auto& check_start = code.check_start;
    const std::size_t n_edges = edge_var.size();
    std::vector<double> v2c(n_edges), c2v(n_edges, 0.0), total(code.n);
    for (std::size_t e = 0; e < n_edges; ++e)
        v2c[e] = std::clamp(llr[edge_var[e]], -kClip, kClip);

    DecodeResult res;
    res.codeword.assign(code.n, 0);
    std::vector<double> t, prefix;

    for (int it = 1; it <= max_iters; ++it) {
        res.iterations = it;
        for (std::size_t c = 0; c + 1 < check_start.size(); ++c) {
            const std::size_t b = check_start[c], e = check_start[c + 1], deg = e - b;
            t.resize(deg);
            prefix.resize(deg + 1);
            prefix[0] = 1.0;
            for (std::size_t i = 0; i < deg; ++i) {
                // tanh(x/2) = (e^x - 1) / (e^x + 1)
                const double ex = std::exp(v2c[b + i]);
                t[i] = (ex - 1.0) / (ex + 1.0);
                prefix[i + 1] = prefix[i] * t[i];
            }
            double suffix = 1.0;
            for (std::size_t i = deg; i-- > 0;) {
                const double p = std::clamp(prefix[i] * suffix, -kTanhLimit, kTanhLimit);
                c2v[b + i] = std::log((1.0 + p) / (1.0 - p)); // 2 atanh(p)
                suffix *= t[i];
            }
        }

        std::copy(llr.begin(), llr.end(), total.begin());
        for (std::size_t e = 0; e < n_edges; ++e)
            total[edge_var[e]] += c2v[e];
        for (std::size_t e = 0; e < n_edges; ++e)
            v2c[e] = std::clamp(total[edge_var[e]] - c2v[e], -kClip, kClip);

        bool decided = true;
        for (std::size_t v = 0; v < code.n; ++v) {
            res.codeword[v] = total[v] < 0.0 ? 1 : 0;
            decided = decided && total[v] != 0.0;
        }
        if (decided && code.satisfies_checks(res.codeword)) {
            res.converged = true;
            break;
        }
    }
    res.message = extract_message(code, res.codeword);
    return res;
}

} // namespace modesel::ldpc
