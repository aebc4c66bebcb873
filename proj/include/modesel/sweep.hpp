#pragma once

/**
 * \file sweep.hpp
 *
 * Sweep orchestration over (selector x sweep value x run) on a worker pool,
 * plus the results CSV and per-KPI plot-data formats.
 */

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "engine.hpp"

namespace modesel {

inline std::vector<double> sweep_values(const EngineConfig& e)
{
    if (e.sweep == SweepVar::speed)
        return e.speeds;
    return {e.user_counts.begin(), e.user_counts.end()};
}

inline RunSpec make_run_spec(const EngineConfig& e, Selector sel, double value, int run_index)
{
    RunSpec s;
    s.selector = sel;
    s.slice = e.slice;
    s.users = e.sweep == SweepVar::users ? static_cast<int>(value) : e.users;
    s.speed_mps = e.sweep == SweepVar::speed ? value : e.speed_mps;
    s.run_index = run_index;
    s.keep_log = e.step_log;
    return s;
}

/// Called once per finished run, serialized across workers. The summary's
/// step log is dropped after the callback returns.
using RunCallback = std::function<void(const RunSpec&, const RunSummary&)>;

inline std::size_t worker_count(int configured, std::size_t tasks)
{
    std::size_t w = configured > 0 ? static_cast<std::size_t>(configured)
                                   : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return std::min(w, std::max<std::size_t>(1, tasks));
}

/**
 * Every (selector, value) point reuses the same per-run seeds, so selectors
 * are compared on identical placements, shadowing and trajectories.
 * Results are ordered by selector (config order), then sweep value.
 */
inline std::vector<SweepResult> run_sweep(const SimConfig& cfg, const CurveSet& curves, const RunCallback& on_run = {},
                                          const ldpc::LdpcCode* decode_code = nullptr)
{
    const auto values = sweep_values(cfg.engine);
    const auto& sels = cfg.engine.selectors;
    const auto runs = static_cast<std::size_t>(cfg.engine.runs);
    if (runs < 2)
        throw insufficient_runs("a sweep needs engine.runs >= 2");
    const std::size_t points = sels.size() * values.size();
    const std::size_t tasks = points * runs;

    std::vector<RunSummary> summaries(tasks);
    std::vector<std::exception_ptr> errors(tasks);
    std::atomic<std::size_t> next{0};
    std::mutex collector;

    const auto spec_of = [&](std::size_t t) {
        const std::size_t point = t / runs;
        return make_run_spec(cfg.engine, sels[point / values.size()], values[point % values.size()],
                             static_cast<int>(t % runs));
    };
    const auto work = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) {
            try {
                const auto spec = spec_of(t);
                auto s = run(cfg, curves, spec, decode_code);
                if (on_run) {
                    std::lock_guard lock(collector);
                    on_run(spec, s);
                }
                s.log.clear();
                s.log.shrink_to_fit();
                summaries[t] = std::move(s);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };

    const auto nw = worker_count(cfg.engine.workers, tasks);
    if (nw == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < nw; ++i)
            pool.emplace_back(work);
        for (auto& th : pool)
            th.join();
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    std::vector<SweepResult> out;
    for (std::size_t p = 0; p < points; ++p) {
        const std::span<const RunSummary> chunk(summaries.data() + p * runs, runs);
        out.push_back(aggregate_runs(chunk, cfg.engine.sweep, values[p % values.size()], sels[p / values.size()],
                                     cfg.engine.slice));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output formats

namespace detail {

inline std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string output_header(const SimConfig& cfg)
{
    return std::string("# ") + kResultsSchema + "\n# config_hash=" + cfg.hash_hex() + "\n";
}

} // namespace detail

inline constexpr const char* kCsvColumns = "selector,slice,sweep_var,sweep_value,kpi,mean,ci_halfwidth,n_runs";

inline std::string format_csv(const SimConfig& cfg, const std::vector<SweepResult>& results)
{
    std::string out = detail::output_header(cfg);
    out += kCsvColumns;
    out += '\n';
    for (const auto& r : results) {
        for (const auto k : kAllKpis) {
            const auto& e = r.at(k);
            out += std::string(to_string(r.selector)) + ',' + std::string(to_string(r.slice)) + ',' +
                   std::string(to_string(r.sweep_var)) + ',' + detail::num(r.sweep_value) + ',' +
                   std::string(to_string(k)) + ',' + detail::num(e.mean) + ',' + detail::num(e.ci_halfwidth) + ',' +
                   std::to_string(e.n_runs) + '\n';
        }
    }
    return out;
}

/// Whitespace-separated columns: sweep value, then mean and CI per selector.
inline std::string format_plot_data(const SimConfig& cfg, const std::vector<SweepResult>& results, Kpi kpi)
{
    std::vector<Selector> sels;
    std::vector<double> values;
    for (const auto& r : results) {
        if (std::find(sels.begin(), sels.end(), r.selector) == sels.end())
            sels.push_back(r.selector);
        if (std::find(values.begin(), values.end(), r.sweep_value) == values.end())
            values.push_back(r.sweep_value);
    }
    std::string out = detail::output_header(cfg);
    out += "# kpi=" + std::string(to_string(kpi)) + " slice=" + std::string(to_string(cfg.engine.slice)) + "\n";
    out += std::string(to_string(cfg.engine.sweep));
    for (const auto s : sels)
        out += " " + std::string(to_string(s)) + "_mean " + std::string(to_string(s)) + "_ci";
    out += '\n';
    for (const double v : values) {
        out += detail::num(v);
        for (const auto s : sels) {
            const auto it = std::find_if(results.begin(), results.end(),
                                         [&](const SweepResult& r) { return r.selector == s && r.sweep_value == v; });
            out += " " + detail::num(it->at(kpi).mean) + " " + detail::num(it->at(kpi).ci_halfwidth);
        }
        out += '\n';
    }
    return out;
}

inline std::string format_step_log_header(const SimConfig& cfg)
{
    return detail::output_header(cfg) +
           "step,ue,mode,attachment,rsrp_dbm,snr_db,mcs,bler,ber,throughput_bps,latency_ms,jitter_ms,handover\n";
}

inline std::string format_step_log_rows(const RunSummary& r)
{
    std::string out;
    for (const auto& row : r.log) {
        const auto& m = row.metrics;
        out += std::to_string(row.step) + ',' + std::to_string(m.ue) + ',' + std::string(to_string(m.mode)) + ',' +
               (m.attachment.kind == AttachmentId::Kind::node ? "node:" : "relay:") + std::to_string(m.attachment.id) +
               ',' + detail::num(m.rsrp_dbm) + ',' + detail::num(m.snr_db) + ',' + std::string(to_string(m.mcs)) + ',' +
               detail::num(m.bler) + ',' + detail::num(m.ber) + ',' + detail::num(m.throughput_bps) + ',' +
               detail::num(m.latency_ms) + ',' + detail::num(m.jitter_ms) + ',' + (m.handover ? "1" : "0") + '\n';
    }
    return out;
}

/// Write via a temporary file and rename, so readers never see a half-written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out.flush())
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace modesel
