#pragma once

/**
 * \file calibration.hpp
 *
 * Monte-Carlo SNR -> BLER/BER curves for the LDPC-coded AWGN link, their
 * on-disk table format, and the runtime lookup used by link adaptation.
 *
 * File layout:
 *
 *     # modesel-calibration v1 n=512 k=256 code_seed=7 channel_seed=1 max_iters=50
 *     modulation snr_db bler ber trials
 *     qpsk -2 1 0.1483 1000
 *     ...
 */

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "kv.hpp"
#include "ldpc.hpp"
#include "modem.hpp"
#include "random.hpp"

namespace modesel {

struct BlerPoint {
    double snr_db = 0.0;
    double bler = 0.0;
    double ber = 0.0;          // information-bit error rate after decoding
    double raw_bler = 0.0;     // before isotonic smoothing
    double pre_decoding_ber = 0.0; // hard decisions on channel LLRs; not persisted
};

struct BlerCurve {
    ModulationScheme mod = ModulationScheme::qpsk;
    double code_rate = 0.5;
    int trials_per_point = 0;
    std::vector<BlerPoint> points;
};

/// Pool-adjacent-violators fit of a non-increasing sequence (equal weights).
inline std::vector<double> isotonic_non_increasing(const std::vector<double>& y)
{
    struct Block {
        double sum;
        std::size_t count;
        double mean() const { return sum / static_cast<double>(count); }
    };
    std::vector<Block> blocks;
    for (const double v : y) {
        blocks.push_back({v, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() < blocks.back().mean()) {
            const Block top = blocks.back();
            blocks.pop_back();
            blocks.back().sum += top.sum;
            blocks.back().count += top.count;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const auto& b : blocks)
        out.insert(out.end(), b.count, b.mean());
    return out;
}

struct CalibrationOptions {
    int trials = 1000;
    std::uint64_t seed = 1;
    int max_iters = ldpc::kDefaultMaxIters;
    unsigned workers = 0; // 0: hardware concurrency
};

namespace detail {

inline BlerPoint simulate_point(const ldpc::LdpcCode& code, ModulationScheme mod, double snr_db,
                                int trials, int max_iters, Rng rng)
{
    std::bernoulli_distribution coin(0.5);
    Bits msg(code.k);
    std::size_t block_errors = 0, bit_errors = 0, raw_errors = 0;
    for (int t = 0; t < trials; ++t) {
        for (auto& b : msg)
            b = coin(rng) ? 1 : 0;
        const auto word = ldpc::encode(code, msg);
        const auto llr = transmit_awgn(word, mod, snr_db, rng);
        for (std::size_t i = 0; i < word.size(); ++i)
            raw_errors += ((llr[i] < 0.0 ? 1 : 0) != word[i]);
        const auto dec = ldpc::decode(code, llr, max_iters);
        std::size_t errs = 0;
        for (std::size_t i = 0; i < code.k; ++i)
            errs += dec.message[i] != msg[i];
        bit_errors += errs;
        block_errors += errs > 0 ? 1 : 0;
    }
    BlerPoint p;
    p.snr_db = snr_db;
    p.raw_bler = p.bler = static_cast<double>(block_errors) / trials;
    p.ber = static_cast<double>(bit_errors) / (static_cast<double>(trials) * static_cast<double>(code.k));
    p.pre_decoding_ber = static_cast<double>(raw_errors) / (static_cast<double>(trials) * static_cast<double>(code.n));
    return p;
}

} // namespace detail

/// Each grid point draws from its own stream, so results do not depend on
/// the worker count.
inline BlerCurve calibrate(const ldpc::LdpcCode& code, ModulationScheme mod,
                           const std::vector<double>& snr_grid, const CalibrationOptions& opt = {})
{
    if (snr_grid.empty())
        throw calibration_error("calibration SNR grid is empty");
    if (opt.trials < 100)
        throw calibration_error("calibration needs at least 100 trials per point");
    for (std::size_t i = 1; i < snr_grid.size(); ++i)
        if (!(snr_grid[i] > snr_grid[i - 1]))
            throw calibration_error("calibration SNR grid must be strictly increasing");

    BlerCurve curve;
    curve.mod = mod;
    curve.code_rate = code.rate();
    curve.trials_per_point = opt.trials;
    curve.points.resize(snr_grid.size());

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::max(1u, std::min<unsigned>(opt.workers ? opt.workers : hw,
                                                             static_cast<unsigned>(snr_grid.size())));
    auto job = [&](std::size_t i) {
        Rng rng(mix_seed({opt.seed, static_cast<std::uint64_t>(mod), i}));
        curve.points[i] = detail::simulate_point(code, mod, snr_grid[i], opt.trials, opt.max_iters, rng);
    };
    if (workers == 1) {
        for (std::size_t i = 0; i < snr_grid.size(); ++i)
            job(i);
    } else {
        std::vector<std::future<void>> pending;
        for (unsigned w = 0; w < workers; ++w)
            pending.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < snr_grid.size(); i += workers)
                    job(i);
            }));
        for (auto& f : pending)
            f.get();
    }

    std::vector<double> raw;
    for (const auto& p : curve.points)
        raw.push_back(p.raw_bler);
    const auto smooth = isotonic_non_increasing(raw);
    for (std::size_t i = 0; i < smooth.size(); ++i)
        curve.points[i].bler = smooth[i];
    return curve;
}

struct CalibrationHeader {
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t code_seed = 0;
    std::uint64_t channel_seed = 0;
    int max_iters = ldpc::kDefaultMaxIters;
};

struct BlerLookup {
    double bler = 1.0;
    double ber = 0.5;
};

/// Calibrated curves for every modulation, linearly interpolated in dB and
/// clamped at the grid ends.
class CurveSet {
public:
    CurveSet() = default;
    CurveSet(CalibrationHeader header, std::vector<BlerCurve> curves) : header_(header)
    {
        for (auto& c : curves) {
            if (c.points.empty())
                throw calibration_error("calibration curve for " + std::string(to_string(c.mod)) +
                                        " has no points");
            curves_[c.mod] = std::move(c);
        }
    }

    const CalibrationHeader& header() const noexcept { return header_; }
    bool has(ModulationScheme m) const { return curves_.count(m) != 0; }
    const BlerCurve& curve(ModulationScheme m) const
    {
        const auto it = curves_.find(m);
        if (it == curves_.end())
            throw calibration_error("missing calibration curve for " + std::string(to_string(m)));
        return it->second;
    }
    double code_rate() const
    {
        return header_.n ? static_cast<double>(header_.k) / static_cast<double>(header_.n) : 0.5;
    }

    BlerLookup lookup(ModulationScheme m, double snr_db) const
    {
        const auto& pts = curve(m).points;
        if (snr_db <= pts.front().snr_db)
            return {pts.front().bler, pts.front().ber};
        if (snr_db >= pts.back().snr_db)
            return {pts.back().bler, pts.back().ber};
        const auto hi = std::upper_bound(pts.begin(), pts.end(), snr_db,
                                         [](double s, const BlerPoint& p) { return s < p.snr_db; });
        const auto lo = hi - 1;
        const double f = (snr_db - lo->snr_db) / (hi->snr_db - lo->snr_db);
        return {lo->bler + f * (hi->bler - lo->bler), lo->ber + f * (hi->ber - lo->ber)};
    }

    std::vector<BlerCurve> curves() const
    {
        std::vector<BlerCurve> out;
        for (const auto& [m, c] : curves_)
            out.push_back(c);
        return out;
    }

private:
    CalibrationHeader header_{};
    std::map<ModulationScheme, BlerCurve> curves_;
};

inline constexpr const char* kCalibrationMagic = "modesel-calibration v1";

inline std::string format_calibration(const CalibrationHeader& h, const std::vector<BlerCurve>& curves)
{
    std::ostringstream os;
    os << "# " << kCalibrationMagic << " n=" << h.n << " k=" << h.k << " code_seed=" << h.code_seed
       << " channel_seed=" << h.channel_seed << " max_iters=" << h.max_iters << "\n";
    os << "modulation snr_db bler ber trials\n";
    char buf[128];
    for (const auto& c : curves)
        for (const auto& p : c.points) {
            std::snprintf(buf, sizeof buf, "%s %.10g %.10g %.10g %d\n",
                          std::string(to_string(c.mod)).c_str(), p.snr_db, p.bler, p.ber,
                          c.trials_per_point);
            os << buf;
        }
    return os.str();
}

inline CurveSet parse_calibration(const std::string& text, const std::string& origin = "<calibration>")
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind(std::string("# ") + kCalibrationMagic, 0) != 0)
        throw calibration_error(origin + ": not a calibration file (bad header)");

    CalibrationHeader h;
    {
        std::istringstream hs(line.substr(2 + std::string(kCalibrationMagic).size()));
        std::string tok;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                continue;
            const auto key = tok.substr(0, eq), value = tok.substr(eq + 1);
            if (key == "n") h.n = static_cast<std::size_t>(kv::to_int(key, value));
            else if (key == "k") h.k = static_cast<std::size_t>(kv::to_int(key, value));
            else if (key == "code_seed") h.code_seed = static_cast<std::uint64_t>(kv::to_int(key, value));
            else if (key == "channel_seed") h.channel_seed = static_cast<std::uint64_t>(kv::to_int(key, value));
            else if (key == "max_iters") h.max_iters = static_cast<int>(kv::to_int(key, value));
        }
    }
    if (h.n == 0 || h.k == 0 || h.k >= h.n)
        throw calibration_error(origin + ": header lacks valid n/k");

    std::map<ModulationScheme, BlerCurve> curves;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = kv::trim(line);
        if (body.empty() || body.front() == '#' || body.starts_with("modulation"))
            continue;
        std::istringstream row{std::string(body)};
        std::string mod_s;
        BlerPoint p;
        int trials = 0;
        if (!(row >> mod_s >> p.snr_db >> p.bler >> p.ber >> trials))
            throw calibration_error(origin + ":" + std::to_string(line_no) + ": malformed row");
        const auto mod = parse_modulation(mod_s);
        if (!mod)
            throw calibration_error(origin + ":" + std::to_string(line_no) + ": unknown modulation '" + mod_s + "'");
        if (p.bler < 0 || p.bler > 1 || p.ber < 0 || p.ber > 1)
            throw calibration_error(origin + ":" + std::to_string(line_no) + ": rate outside [0, 1]");
        auto& c = curves[*mod];
        if (!c.points.empty() && !(p.snr_db > c.points.back().snr_db))
            throw calibration_error(origin + ":" + std::to_string(line_no) + ": snr_db not increasing");
        c.mod = *mod;
        c.trials_per_point = trials;
        c.code_rate = static_cast<double>(h.k) / static_cast<double>(h.n);
        p.raw_bler = p.bler;
        c.points.push_back(p);
    }
    std::vector<BlerCurve> list;
    for (auto& [m, c] : curves)
        list.push_back(std::move(c));
    return CurveSet(h, std::move(list));
}

inline CurveSet load_calibration(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw calibration_error("calibration file '" + path +
                                "' not found; generate it with `modesel calibrate`");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_calibration(ss.str(), path);
}

inline std::vector<double> snr_grid(double lo, double hi, double step)
{
    if (!(step > 0.0) || hi < lo)
        throw calibration_error("invalid SNR grid");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

} // namespace modesel
