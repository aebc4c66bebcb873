// modesel: calibrate the PHY tables, run KPI sweeps, print AHP rankings.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modesel/calibration.hpp"
#include "modesel/config.hpp"
#include "modesel/engine.hpp"
#include "modesel/ldpc.hpp"
#include "modesel/slices.hpp"
#include "modesel/sweep.hpp"

namespace fs = std::filesystem;
using namespace modesel;

namespace {

struct CommonFlags {
    std::string config;
    std::vector<std::string> sets;
    std::string seed;
};

kv::Table parse_sets(const std::vector<std::string>& sets)
{
    kv::Table t;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw config_error("--set expects key=value, got '" + s + "'");
        t[std::string(kv::trim(s.substr(0, eq)))] = std::string(kv::trim(s.substr(eq + 1)));
    }
    return t;
}

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config, "key=value configuration file");
    cmd->add_option("--set", f.sets, "override a config key (key=value), repeatable");
    cmd->add_option("--seed", f.seed, "master seed (engine.seed, and calib.seed for calibrate)");
}

std::string ordering_text(const ahp::RankTable& r)
{
    std::string out;
    for (const auto o : r.ordering()) {
        if (!out.empty())
            out += " > ";
        out += ahp::display_name(o);
    }
    return out;
}

void print_matrix_line(const MatrixDiagnostics& d, bool used)
{
    std::printf("  %-22s lambda_max=%.4f  CI=%+.4f  CR=%+.4f  %s%s\n", d.label.c_str(), d.consistency.lambda_max,
                d.consistency.ci, d.consistency.cr, d.consistency.consistent ? "consistent" : "INCONSISTENT",
                used ? "" : "  (not used by this source)");
}

int cmd_rank(const std::string& slice_name, const std::string& level1, const CommonFlags& f)
{
    const auto slice = parse_slice(slice_name);
    if (!slice)
        throw config_error("unknown slice '" + slice_name + "' (embb, urllc, mmtc)");
    const auto src = parse_level1_source(level1);
    if (!src)
        throw config_error("--level1 must be 'printed' or 'recomputed'");
    const auto cfg = load_config(f.config, parse_sets(f.sets));
    const auto r = slice_ranking(cfg.ahp.profile(*slice, *src), cfg.ahp);

    std::printf("slice %s, level-1 source %s\n\n", std::string(to_string(*slice)).c_str(),
                std::string(to_string(*src)).c_str());
    std::printf("  option  score   rank\n");
    for (const auto o : ahp::kAllOptions)
        std::printf("  %-6s  %.4f  %d\n", std::string(ahp::display_name(o)).c_str(), r.rank.score(o), r.rank.rank(o));
    std::printf("\n  ordering: %s\n\n", ordering_text(r.rank).c_str());

    std::printf("criterion weights:");
    for (std::size_t c = 0; c < ahp::kCriteria; ++c)
        std::printf(" %s=%.4f", std::string(ahp::to_string(ahp::kAllCriteria[c])).c_str(), r.level0.weights[c]);
    std::printf("\n\nconsistency:\n");
    print_matrix_line(r.level0, true);
    for (const auto& d : r.level1_matrices)
        print_matrix_line(d, *src == Level1Source::recomputed);

    if (!r.warnings.empty()) {
        std::printf("\nwarnings:\n");
        for (const auto& w : r.warnings)
            std::printf("  %s\n", w.c_str());
    }

    if (const auto& ref = cfg.ahp.reference_scores[static_cast<std::size_t>(*slice)]) {
        const auto ref_rank = ahp::rank_scores(*ref);
        std::printf("\nreference scores: LTE %.3f, NR %.3f, D2D %.3f (%s)\n", (*ref)[0], (*ref)[1], (*ref)[2],
                    ordering_text(ref_rank).c_str());
        if (ref_rank.ordering() != r.rank.ordering())
            std::printf("note: discrepancy, the %s ordering %s differs from the reference ordering %s\n",
                        std::string(to_string(*src)).c_str(), ordering_text(r.rank).c_str(),
                        ordering_text(ref_rank).c_str());
        else
            std::printf("ordering matches the reference\n");
    }
    return 0;
}

int cmd_calibrate(const CommonFlags& f, const std::string& out_path)
{
    kv::Table sets = parse_sets(f.sets);
    if (!f.seed.empty())
        sets["calib.seed"] = f.seed;
    const auto cfg = load_config(f.config, sets);
    const std::string path = out_path.empty() ? cfg.calib.file : out_path;

    const auto code = ldpc::make_code(cfg.calib.n, cfg.calib.rate, cfg.calib.code_seed);
    CalibrationOptions opt;
    opt.trials = cfg.calib.trials;
    opt.seed = cfg.calib.seed;
    opt.max_iters = cfg.calib.max_iters;
    opt.workers = static_cast<unsigned>(cfg.engine.workers);
    const auto grid = cfg.calib.grid();

    std::vector<BlerCurve> curves;
    for (const auto mod : kAllModulations) {
        const auto t0 = std::chrono::steady_clock::now();
        curves.push_back(calibrate(code, mod, grid, opt));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::fprintf(stderr, "calibrated %-6s %zu points x %d blocks in %.1f s\n",
                     std::string(to_string(mod)).c_str(), grid.size(), opt.trials, secs);
    }
    const CalibrationHeader h{code.n, code.k, cfg.calib.code_seed, cfg.calib.seed, cfg.calib.max_iters};
    if (const auto parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    write_file_atomic(path, format_calibration(h, curves));
    std::fprintf(stderr, "wrote %s (n=%zu k=%zu)\n", path.c_str(), code.n, code.k);
    return 0;
}

int cmd_sweep(const CommonFlags& f, const std::string& slice, const std::string& sweep,
              const std::string& selectors, const std::string& out_dir)
{
    const fs::path dir = out_dir.empty() ? fs::path("results") : fs::path(out_dir);
    fs::create_directories(dir);
    const auto marker = dir / "FAILED";
    fs::remove(marker);
    try {
        kv::Table sets = parse_sets(f.sets);
        if (!f.seed.empty())
            sets["engine.seed"] = f.seed;
        if (!slice.empty())
            sets["engine.slice"] = slice;
        if (!sweep.empty())
            sets["engine.sweep"] = sweep;
        if (!selectors.empty())
            sets["engine.selectors"] = selectors;
        const auto cfg = load_config(f.config, sets);
        const auto curves = load_calibration(cfg.calib.file);
        const auto& h = curves.header();
        if (h.n != cfg.calib.n || h.code_seed != cfg.calib.code_seed)
            throw calibration_error("calibration file '" + cfg.calib.file + "' was generated for n=" +
                                    std::to_string(h.n) + ", code seed " + std::to_string(h.code_seed) +
                                    "; rerun `modesel calibrate` for the current ldpc.* settings");
        for (const auto mod : kAllModulations)
            if (!curves.has(mod))
                throw calibration_error("calibration file lacks " + std::string(to_string(mod)) +
                                        "; rerun `modesel calibrate`");

        std::optional<ldpc::LdpcCode> code;
        if (cfg.calib.per_packet_decode)
            code = ldpc::make_code(cfg.calib.n, cfg.calib.rate, cfg.calib.code_seed);

        write_file_atomic(dir / "config.echo", "# config_hash=" + cfg.hash_hex() + "\n" + cfg.echo());

        RunCallback on_run;
        if (cfg.engine.step_log) {
            fs::create_directories(dir / "steplog");
            on_run = [&](const RunSpec& spec, const RunSummary& s) {
                char name[160];
                std::snprintf(name, sizeof name, "%s_%s%s_run%03d.csv", std::string(to_string(spec.selector)).c_str(),
                              std::string(to_string(cfg.engine.sweep)).c_str(),
                              detail::num(cfg.engine.sweep == SweepVar::speed ? spec.speed_mps : spec.users).c_str(),
                              spec.run_index);
                write_file_atomic(dir / "steplog" / name, format_step_log_header(cfg) + format_step_log_rows(s));
            };
        }

        const auto t0 = std::chrono::steady_clock::now();
        const auto results = run_sweep(cfg, curves, on_run, code ? &*code : nullptr);
        write_file_atomic(dir / "results.csv", format_csv(cfg, results));
        for (const auto k : kAllKpis)
            write_file_atomic(dir / ("plot_" + std::string(to_string(k)) + ".dat"), format_plot_data(cfg, results, k));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::fprintf(stderr, "sweep done: %zu operating points x %d runs in %.1f s -> %s\n", results.size(),
                     cfg.engine.runs, secs, dir.string().c_str());
        return 0;
    } catch (const std::exception& e) {
        std::ofstream(marker) << "sweep failed: " << e.what() << "\n";
        throw;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Slice-aware D2D/5G mode selection: calibration, sweeps and AHP rankings"};
    app.require_subcommand(1);

    CommonFlags cal_flags, sweep_flags, rank_flags;
    std::string cal_out;
    auto* cal = app.add_subcommand("calibrate", "simulate LDPC BLER/BER curves for every modulation");
    add_common(cal, cal_flags);
    cal->add_option("--out", cal_out, "calibration file to write (default: phy.calibration_file)");

    std::string slice, sweep, selectors, out_dir;
    auto* sw = app.add_subcommand("sweep", "run every selector over the sweep values and write CSV + plot data");
    add_common(sw, sweep_flags);
    sw->add_option("--slice", slice, "embb | urllc | mmtc");
    sw->add_option("--sweep", sweep, "speed | users");
    sw->add_option("--selectors", selectors, "comma-separated subset of proposed,rsrp_max,sdn_joint,jmsra");
    sw->add_option("--out", out_dir, "output directory (default: results)");

    std::string rank_slice, level1 = "printed";
    auto* rk = app.add_subcommand("rank", "print the AHP ranking of LTE / NR / D2D for a slice");
    rk->add_option("slice", rank_slice, "embb | urllc | mmtc")->required();
    rk->add_option("--level1", level1, "printed | recomputed");
    rk->add_option("--config", rank_flags.config, "configuration file with AHP overrides");
    rk->add_option("--set", rank_flags.sets, "override a config key (key=value), repeatable");

    CLI11_PARSE(app, argc, argv);
    try {
        if (cal->parsed())
            return cmd_calibrate(cal_flags, cal_out);
        if (sw->parsed())
            return cmd_sweep(sweep_flags, slice, sweep, selectors, out_dir);
        if (rk->parsed())
            return cmd_rank(rank_slice, level1, rank_flags);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
