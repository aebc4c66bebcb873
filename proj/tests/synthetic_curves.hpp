#pragma once

// Hand-made BLER waterfalls for tests that must not depend on Monte-Carlo
// calibration: BLER drops linearly from 1 to 0 over 2 dB ending at the
// modulation's threshold.

#include <array>

#include "modesel/calibration.hpp"

namespace modesel::fixtures {

inline constexpr std::array<double, 4> kWaterfallEnd{2.0, 8.0, 14.0, 20.0};

inline CurveSet synthetic_curves()
{
    std::vector<BlerCurve> curves;
    for (const auto mod : kAllModulations) {
        BlerCurve c;
        c.mod = mod;
        c.trials_per_point = 1000;
        const double end = kWaterfallEnd[static_cast<std::size_t>(modulation_index(mod))];
        for (double s = -10.0; s <= 40.0; s += 1.0) {
            BlerPoint p;
            p.snr_db = s;
            p.bler = s >= end ? 0.0 : (s <= end - 2.0 ? 1.0 : (end - s) / 2.0);
            p.ber = p.bler * 0.1;
            p.raw_bler = p.bler;
            c.points.push_back(p);
        }
        curves.push_back(c);
    }
    return CurveSet(CalibrationHeader{512, 256, 7, 1, 50}, curves);
}

} // namespace modesel::fixtures
