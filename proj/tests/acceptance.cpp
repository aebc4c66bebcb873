// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is 0 unless --strict is given and a criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "modesel/ahp.hpp"
#include "modesel/calibration.hpp"
#include "modesel/config.hpp"
#include "modesel/engine.hpp"
#include "modesel/slices.hpp"
#include "modesel/sweep.hpp"

namespace fs = std::filesystem;
using namespace modesel;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criterion {
    int id;
    std::string title;
    bool pass = true;
    std::vector<std::string> details;

    Criterion(int i, std::string t) : id(i), title(std::move(t)) {}

    void check(bool ok, const std::string& what)
    {
        pass = pass && ok;
        details.push_back(std::string(ok ? "ok    " : "MISS  ") + what);
    }
    void note(const std::string& what) { details.push_back("      " + what); }
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void report(const Criterion& c)
{
    std::printf("[%s] criterion %d: %s\n", c.pass ? "PASS" : "FAIL", c.id, c.title.c_str());
    for (const auto& d : c.details)
        std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Level-0 matrices as printed, with rounded entries.
ahp::ComparisonMatrix printed_embb()
{
    return {{1, 2, 5, 10}, {0.5, 1, 3, 5}, {0.2, 0.3, 1, 2}, {0.1, 0.2, 0.5, 1}};
}

ahp::ComparisonMatrix printed_urllc()
{
    return {{1, 0.5, 0.42, 3}, {2, 1, 0.85, 6}, {2.3, 1.16, 1, 7}, {0.3, 0.16, 0.14, 1}};
}

Criterion level0_reproduction()
{
    Criterion c{1, "AHP level-0 weights and lambda_max"};
    const double embb_w[] = {0.55, 0.28, 0.10, 0.05};
    const double urllc_w[] = {0.176, 0.354, 0.412, 0.056};

    const auto e = ahp::normalize(printed_embb()).weights;
    for (std::size_t i = 0; i < 4; ++i)
        c.check(std::abs(e[i] - embb_w[i]) <= 0.01, fmt("eMBB w[%zu] = %.4f (target %.2f +-0.01)", i, e[i], embb_w[i]));
    const auto u = ahp::normalize(printed_urllc()).weights;
    for (std::size_t i = 0; i < 4; ++i)
        c.check(std::abs(u[i] - urllc_w[i]) <= 0.005,
                fmt("uRLLc w[%zu] = %.4f (target %.3f +-0.005)", i, u[i], urllc_w[i]));

    const auto e_rounded = ahp::consistency(printed_embb(), ahp::WeightVector{{0.55, 0.28, 0.10, 0.05}});
    c.check(std::abs(e_rounded.lambda_max - 3.8) <= 0.05,
            fmt("eMBB lambda_max with the two-decimal weight column = %.4f (target 3.8 +-0.05)", e_rounded.lambda_max));
    const auto e_full = ahp::consistency(printed_embb(), e);
    c.note(fmt("eMBB lambda_max with full-precision weights = %.4f (informational)", e_full.lambda_max));
    const auto u_full = ahp::consistency(printed_urllc(), u);
    c.check(std::abs(u_full.lambda_max - 3.94) <= 0.02,
            fmt("uRLLc lambda_max = %.4f (target 3.94 +-0.02), CI = %.4f", u_full.lambda_max, u_full.ci));
    return c;
}

std::string ordering_text(const ahp::RankTable& r)
{
    std::string out;
    for (const auto o : r.ordering())
        out += (out.empty() ? "" : " > ") + std::string(ahp::display_name(o));
    return out;
}

Criterion rank_orderings()
{
    Criterion c{2, "AHP rank orderings with printed level-1 weights"};
    const auto data = default_ahp_data();

    // Oracle: exact-ratio level-0 weights are p / sum(p); scores are P . W.
    auto oracle = [&](Slice s) {
        const auto& p = data.priorities_for(s);
        const double total = std::accumulate(p.begin(), p.end(), 0.0);
        std::array<double, ahp::kOptions> out{};
        for (std::size_t o = 0; o < ahp::kOptions; ++o)
            for (std::size_t k = 0; k < ahp::kCriteria; ++k)
                out[o] += data.printed_level1[o][k] * p[k] / total;
        return out;
    };

    using ahp::Option;
    struct Case {
        Slice slice;
        std::array<Option, 3> expected;
        bool full_ordering;
        std::array<double, 3> approx;
    };
    const Case cases[] = {
        {Slice::urllc, {Option::d2d, Option::nr, Option::lte}, true, {0.233, 0.269, 0.490}},
        {Slice::mmtc, {Option::d2d, Option::lte, Option::nr}, true, {0.273, 0.213, 0.505}},
        {Slice::embb, {}, false, {}},
    };
    for (const auto& k : cases) {
        const auto r = slice_ranking(data.profile(k.slice, Level1Source::printed), data).rank;
        const auto name = std::string(to_string(k.slice));
        if (k.full_ordering)
            c.check(r.ordering() == k.expected, name + " ordering " + ordering_text(r));
        else
            c.check(r.rank(Option::lte) == 3, name + " ordering " + ordering_text(r) + " (LTE must rank 3)");
        const auto want = oracle(k.slice);
        for (const auto o : ahp::kAllOptions) {
            const auto i = static_cast<std::size_t>(o);
            c.check(std::abs(r.scores[i] - want[i]) <= 0.05,
                    fmt("%s %s score %.4f vs oracle %.4f", name.c_str(), std::string(ahp::display_name(o)).c_str(),
                        r.scores[i], want[i]));
            if (k.full_ordering && std::abs(want[i] - k.approx[i]) > 0.005)
                c.check(false, fmt("oracle %.4f disagrees with tabulated %.3f", want[i], k.approx[i]));
        }
    }
    return c;
}

Criterion consistency_property()
{
    Criterion c{3, "consistency of 500 random exact-ratio matrices"};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> prio(1.0, 10.0);
    std::bernoulli_distribution four(0.5);
    double worst_cr = 0.0, worst_w = 0.0;
    int n3 = 0, n4 = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = four(rng) ? 4 : 3;
        (n == 4 ? n4 : n3)++;
        std::vector<double> p(n);
        for (auto& v : p)
            v = prio(rng);
        const double total = std::accumulate(p.begin(), p.end(), 0.0);
        const auto x = ahp::build_pcm_from_priorities(p);
        const auto y = ahp::normalize(x);
        worst_cr = std::max(worst_cr, std::abs(ahp::consistency(x, y.weights).cr));
        for (std::size_t i = 0; i < n; ++i)
            worst_w = std::max(worst_w, std::abs(y.weights[i] - p[i] / total));
    }
    c.check(worst_cr <= 1e-9, fmt("max |CR| = %.3g over %d (n=3) + %d (n=4) matrices", worst_cr, n3, n4));
    c.check(worst_w <= 1e-9, fmt("max |w - p/sum(p)| = %.3g", worst_w));
    return c;
}

Criterion ldpc_properties(const SimConfig& cfg, const ldpc::LdpcCode& code, std::vector<BlerCurve>& curves)
{
    Criterion c{4, "LDPC calibration properties"};
    const auto t0 = Clock::now();
    CalibrationOptions opt;
    opt.trials = cfg.calib.trials;
    opt.seed = cfg.calib.seed;
    opt.max_iters = cfg.calib.max_iters;
    const auto grid = cfg.calib.grid();
    for (const auto mod : kAllModulations)
        curves.push_back(calibrate(code, mod, grid, opt));
    const double secs = seconds_since(t0);
    c.note(fmt("n=%zu k=%zu, %zu SNR points x %d blocks per modulation", code.n, code.k, grid.size(), opt.trials));

    for (const auto& curve : curves) {
        const auto name = std::string(to_string(curve.mod));
        int checked = 0, ber_bad = 0, raw_up = 0, raw_up_beyond_noise = 0, pub_up = 0;
        for (std::size_t i = 0; i < curve.points.size(); ++i) {
            const auto& p = curve.points[i];
            if (p.raw_bler < 0.9) {
                ++checked;
                ber_bad += p.ber > p.pre_decoding_ber ? 1 : 0;
            }
            if (i == 0)
                continue;
            const auto& q = curve.points[i - 1];
            pub_up += p.bler > q.bler ? 1 : 0;
            if (p.raw_bler > q.raw_bler) {
                ++raw_up;
                // Binomial standard error of the difference, floored at one block per point.
                const double hi = std::max(p.raw_bler, 1.0 / opt.trials);
                const double se = std::sqrt(2.0 * hi * (1.0 - hi) / opt.trials);
                raw_up_beyond_noise += p.raw_bler - q.raw_bler > 3.0 * se ? 1 : 0;
            }
        }
        c.check(ber_bad == 0, fmt("%s: decoded BER <= hard-decision BER at %d/%d points with BLER < 0.9",
                                  name.c_str(), checked - ber_bad, checked));
        c.check(pub_up == 0 && raw_up_beyond_noise == 0,
                fmt("%s: published BLER increases %d times; measured BLER increases %d times, %d beyond 3 s.e.",
                    name.c_str(), pub_up, raw_up, raw_up_beyond_noise));
    }
    const auto& qpsk = curves.front();
    const auto at10 = std::find_if(qpsk.points.begin(), qpsk.points.end(),
                                   [](const BlerPoint& p) { return std::abs(p.snr_db - 10.0) < 1e-9; });
    if (at10 == qpsk.points.end())
        c.check(false, "grid has no 10 dB point");
    else
        c.check(at10->raw_bler < 1e-2, fmt("QPSK BLER at 10 dB = %.4g (< 1e-2)", at10->raw_bler));
    c.check(secs <= 300.0, fmt("calibration time %.1f s (<= 300 s)", secs));
    return c;
}

const SweepResult& find(const std::vector<SweepResult>& rs, Selector s, double v)
{
    return *std::find_if(rs.begin(), rs.end(), [&](const SweepResult& r) { return r.selector == s && r.sweep_value == v; });
}

Criterion simulation_trends(const CurveSet& curves)
{
    Criterion c{5, "simulation trend suite (default config, speed sweep)"};
    const auto t0 = Clock::now();
    const auto embb_cfg = build_config({{{"engine.slice", "embb"}}});
    const auto urllc_cfg = build_config({{{"engine.slice", "urllc"}}});
    const auto embb = run_sweep(embb_cfg, curves);
    const auto urllc = run_sweep(urllc_cfg, curves);
    const auto& speeds = embb_cfg.engine.speeds;
    c.note(fmt("%d runs x %d steps, %d UEs per point", embb_cfg.engine.runs, embb_cfg.engine.steps, embb_cfg.engine.users));

    // (a) handovers non-decreasing in speed, allowing one CI half-width.
    {
        bool ok = true;
        std::string row = "(a) proposed handovers:";
        for (std::size_t i = 0; i < speeds.size(); ++i) {
            const auto& e = find(embb, Selector::proposed, speeds[i]).at(Kpi::handovers);
            row += fmt(" %.1f+-%.1f", e.mean, e.ci_halfwidth);
            if (i > 0) {
                const auto& prev = find(embb, Selector::proposed, speeds[i - 1]).at(Kpi::handovers);
                ok = ok && e.mean >= prev.mean - std::max(e.ci_halfwidth, prev.ci_halfwidth);
            }
        }
        c.check(ok, row);
    }
    // (b) SDN <= proposed <= JMSRA at the top speed.
    {
        const double v = speeds.back();
        const double sdn = find(embb, Selector::sdn_joint, v).at(Kpi::handovers).mean;
        const double prop = find(embb, Selector::proposed, v).at(Kpi::handovers).mean;
        const double jm = find(embb, Selector::jmsra, v).at(Kpi::handovers).mean;
        c.check(sdn <= prop && prop <= jm,
                fmt("(b) handovers at %g m/s: sdn_joint %.1f <= proposed %.1f <= jmsra %.1f", v, sdn, prop, jm));
    }
    // (c) eMBB latency band.
    {
        bool ok = true;
        std::string row = "(c) proposed eMBB latency ms:";
        for (const double v : speeds) {
            const double m = find(embb, Selector::proposed, v).at(Kpi::latency).mean;
            row += fmt(" %.2f", m);
            ok = ok && m >= 5.0 && m <= 70.0;
        }
        c.check(ok, row + " (within [5, 70])");
    }
    // (d) eMBB throughput: proposed >= SDN everywhere.
    {
        bool ok = true;
        std::string row = "(d) eMBB throughput Mbps proposed/sdn_joint:";
        for (const double v : speeds) {
            const double p = find(embb, Selector::proposed, v).at(Kpi::throughput).mean;
            const double s = find(embb, Selector::sdn_joint, v).at(Kpi::throughput).mean;
            row += fmt(" %.2f/%.2f", p, s);
            ok = ok && p >= s;
        }
        c.check(ok, row);
    }
    // (e) uRLLc latency: proposed lowest at >= 4 of 5 speeds.
    {
        int wins = 0;
        std::string row = "(e) uRLLc latency ms proposed/min baseline:";
        for (const double v : speeds) {
            const double p = find(urllc, Selector::proposed, v).at(Kpi::latency).mean;
            double best = 1e300;
            for (const auto s : {Selector::rsrp_max, Selector::sdn_joint, Selector::jmsra})
                best = std::min(best, find(urllc, s, v).at(Kpi::latency).mean);
            row += fmt(" %.2f/%.2f", p, best);
            wins += p <= best ? 1 : 0;
        }
        c.check(wins >= 4, row + fmt(" (proposed lowest at %d of %zu)", wins, speeds.size()));
    }
    const double secs = seconds_since(t0);
    c.check(secs <= 600.0, fmt("sweep time %.1f s (<= 600 s)", secs));
    return c;
}

Criterion determinism(const fs::path& work, const fs::path& calib_file)
{
    Criterion c{6, "sweep determinism"};
    std::string csv[2];
    for (int i = 0; i < 2; ++i) {
        const auto out = work / ("sweep" + std::to_string(i));
        const std::string cmd = std::string(MODESEL_CLI_PATH) + " sweep --seed 1 --set phy.calibration_file=" +
                                calib_file.string() + " --out " + out.string() + " 2>/dev/null";
        const int st = std::system(cmd.c_str());
        c.check(st == 0, fmt("sweep #%d exit status %d", i + 1, st));
        csv[i] = slurp(out / "results.csv");
    }
    c.check(!csv[0].empty() && csv[0] == csv[1], fmt("results.csv byte-identical (%zu bytes)", csv[0].size()));
    return c;
}

Criterion statistics()
{
    Criterion c{7, "aggregate statistics"};
    const std::vector<double> v{8, 12};
    const auto e = aggregate(v);
    c.check(e.mean == 10.0, fmt("mean = %.6g", e.mean));
    c.check(std::abs(e.ci_halfwidth - 3.92) <= 0.01, fmt("ci_halfwidth = %.6g (3.92 +-0.01)", e.ci_halfwidth));
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    bool strict = false;
    for (int i = 1; i < argc; ++i)
        strict = strict || std::strcmp(argv[i], "--strict") == 0;

    std::vector<Criterion> results;
    auto record = [&](Criterion c) {
        report(c);
        results.push_back(std::move(c));
    };

    record(level0_reproduction());
    record(rank_orderings());
    record(consistency_property());

    const auto cfg = build_config({});
    const auto code = ldpc::make_code(cfg.calib.n, cfg.calib.rate, cfg.calib.code_seed);
    std::vector<BlerCurve> curves;
    record(ldpc_properties(cfg, code, curves));

    const auto work = fs::temp_directory_path() / "modesel_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    const CalibrationHeader h{code.n, code.k, cfg.calib.code_seed, cfg.calib.seed, cfg.calib.max_iters};
    const auto text = format_calibration(h, curves);
    write_file_atomic(work / "calibration.txt", text);
    const auto set = parse_calibration(text);

    record(simulation_trends(set));
    record(determinism(work, work / "calibration.txt"));
    record(statistics());
    fs::remove_all(work);

    const auto passed = std::count_if(results.begin(), results.end(), [](const Criterion& c) { return c.pass; });
    std::printf("%zd/%zu criteria pass\n", static_cast<std::ptrdiff_t>(passed), results.size());
    return strict && passed != static_cast<std::ptrdiff_t>(results.size()) ? 1 : 0;
}
