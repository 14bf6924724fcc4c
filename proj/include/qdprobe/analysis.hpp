#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdprobe/constants.hpp"
#include "qdprobe/errors.hpp"
#include "qdprobe/fitting.hpp"
#include "qdprobe/instrument.hpp"

namespace qdprobe {

inline constexpr const char* kSummarySchema = "qdprobe-summary v1";

struct AnalysisParams {
    double filter_sigma_px = 3.0;    // first-order Gaussian along the sweep axis
    int max_window_px = 5;           // maximum-filter window (full width)
    double floor_rel = 0.25;         // floor as a fraction of the strong-feature level
    double floor_noise_mult = 3.5;   // floor as a multiple of the robust noise sigma
    double slope_min = -2.0;         // px per row, window for chain links
    double slope_max = 1.25;
    int max_row_gap = 2;             // rows a chain link may skip
    double min_length_frac = 0.30;   // segment must span this fraction of rows
    double merge_endpoint_px = 3.0;  // junction proximity for merging segments
    int merge_row_gap = 2;
    double outlier_spacing_mult = 3.0;
    double success_extent_frac = 0.73;  // a clear transition spans most of the window

    int min_length_rows(int rows) const {
        return std::max(2, static_cast<int>(std::ceil(min_length_frac * rows)));
    }
    int success_extent_rows(int rows) const {
        return std::max(2, static_cast<int>(std::ceil(success_extent_frac * rows)));
    }
};

struct MaxPoint {
    int row = 0;
    double col = 0.0;  // sub-pixel after zero-crossing refinement
};

struct MaximaSet {
    int rows = 0, cols = 0;
    std::vector<MaxPoint> points;  // sorted by (row, col)
};

struct CurveSegment {
    std::vector<MaxPoint> points;  // sorted by row, one per row
    int row_min = 0, row_max = 0;
    int span() const { return row_max - row_min + 1; }
};

struct TransitionCurve {
    std::vector<MaxPoint> points;  // sorted by row, at most one per row
    int row_min = 0, row_max = 0;
    double mean_col = 0.0;
    int span() const { return row_max - row_min + 1; }
    bool crosses_row(double row) const { return row_min <= row && row <= row_max; }

    // linear interpolation of the column as a function of row
    double col_at(double row) const {
        if (points.empty()) throw validation_error("empty transition curve");
        if (row <= points.front().row) return points.front().col;
        if (row >= points.back().row) return points.back().col;
        for (size_t k = 1; k < points.size(); ++k) {
            if (points[k].row >= row) {
                const auto& a = points[k - 1];
                const auto& b = points[k];
                if (b.row == a.row) return b.col;
                double t = (row - a.row) / static_cast<double>(b.row - a.row);
                return a.col + t * (b.col - a.col);
            }
        }
        return points.back().col;
    }
};

struct TransitionSummary {
    std::optional<double> v1e;
    std::optional<double> v2e;
    std::optional<double> addition_voltage;
    std::optional<double> cutoff_pb_difference;
    std::optional<double> scan_margin;
    bool success = false;
};

// ---- background removal -----------------------------------------------------

// Convolves each row with the first derivative of a Gaussian along the sweep
// axis (reflective boundary). The kernel is antisymmetric, so any constant
// input maps to exactly zero and the response is invariant under adding a
// global constant; a linear ramp maps to its slope per pixel.
inline ScanGrid highpass_background(const ScanGrid& grid, double sigma_px) {
    if (!(sigma_px > 0)) throw validation_error("highpass_background: sigma must be > 0");
    const int rows = grid.rows(), cols = grid.cols();
    const int half = static_cast<int>(std::ceil(4.0 * sigma_px));
    std::vector<double> w(2 * half + 1);
    double norm = 0.0;
    for (int k = -half; k <= half; ++k) {
        w[k + half] = k * std::exp(-0.5 * k * k / (sigma_px * sigma_px));
        norm += k * w[k + half];
    }
    for (double& x : w) x /= norm;  // unit response to a unit-slope ramp

    ScanGrid out = grid;
    auto reflect = [&](int j) {
        while (j < 0 || j >= cols) {
            if (j < 0) j = -j - 1;
            if (j >= cols) j = 2 * cols - 1 - j;
        }
        return j;
    };
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (int k = -half; k <= half; ++k) acc += w[k + half] * grid.at(i, reflect(j + k));
            out.at(i, j) = acc;
        }
    }
    return out;
}

// ---- maxima -----------------------------------------------------------------

// A point is a maximum if it equals the max of its window neighborhood along
// the row and exceeds the floor; plateau ties resolve to the leftmost pixel.
inline MaximaSet detect_maxima(const ScanGrid& grid, int window_px, double floor) {
    if (window_px < 1) throw validation_error("detect_maxima: window must be >= 1");
    const int rows = grid.rows(), cols = grid.cols();
    const int hw = window_px / 2;
    MaximaSet out;
    out.rows = rows;
    out.cols = cols;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const double v = grid.at(i, j);
            if (!(v > floor)) continue;
            bool is_max = true;
            for (int k = std::max(0, j - hw); k <= std::min(cols - 1, j + hw) && is_max; ++k) {
                if (k == j) continue;
                double u = grid.at(i, k);
                if (k < j ? u >= v : u > v) is_max = false;
            }
            if (is_max) out.points.push_back({i, static_cast<double>(j)});
        }
    }
    return out;
}

// The derivative-of-Gaussian response to a line crosses zero at the line
// center; pull each detected (left-lobe) maximum to the sub-pixel crossing
// to its right. Points without a crossing in reach keep their pixel position.
inline MaximaSet refine_maxima(const ScanGrid& filtered, const MaximaSet& maxima,
                               double sigma_px) {
    const int reach = static_cast<int>(std::ceil(3.0 * sigma_px + 4));
    MaximaSet out = maxima;
    for (auto& p : out.points) {
        int c = static_cast<int>(std::lround(p.col));
        for (int k = c; k < std::min(filtered.cols() - 1, c + reach); ++k) {
            double a = filtered.at(p.row, k), b = filtered.at(p.row, k + 1);
            if (a >= 0.0 && b < 0.0) {
                p.col = k + a / (a - b);
                break;
            }
        }
    }
    return out;
}

// Floor policy for real scans: a fraction of the strong-feature level with a
// noise-referenced lower bound. Percentile of positive response picks up the
// line lobes; the median of |response| estimates the noise scale.
inline double auto_floor(const ScanGrid& filtered, const AnalysisParams& p) {
    std::vector<double> pos, mags;
    pos.reserve(filtered.values.size());
    mags.reserve(filtered.values.size());
    for (double v : filtered.values) {
        if (v > 0) pos.push_back(v);
        mags.push_back(std::fabs(v));
    }
    double strong = 0.0;
    if (!pos.empty()) {
        size_t idx = static_cast<size_t>(0.99 * (pos.size() - 1));
        std::nth_element(pos.begin(), pos.begin() + idx, pos.end());
        strong = pos[idx];
    }
    size_t mid = mags.size() / 2;
    std::nth_element(mags.begin(), mags.begin() + mid, mags.end());
    double noise_sigma = 1.4826 * mags[mid];
    return std::max({p.floor_rel * strong, p.floor_noise_mult * noise_sigma, 1e-12});
}

// ---- curve segments ----------------------------------------------------------

struct SlopeWindow {
    double min_px_per_row = -2.0;
    double max_px_per_row = 1.25;
};

// Chains maximum points into curve segments. A link p->q (q below p, within
// max_row_gap rows) exists iff q is p's nearest maximum looking down, p is
// q's nearest maximum looking up, and the slope between them is inside the
// window. Every point joins at most one link in each direction, so segments
// are simple paths; segments shorter than min_rows in vertical span drop.
inline std::vector<CurveSegment> chain_segments(const MaximaSet& maxima,
                                                SlopeWindow slope_window, int min_rows,
                                                int max_row_gap = 2) {
    if (slope_window.min_px_per_row > slope_window.max_px_per_row)
        throw validation_error("chain_segments: slope window inverted");
    const auto& pts = maxima.points;
    const int n = static_cast<int>(pts.size());
    std::vector<int> nn_down(n, -1), nn_up(n, -1);

    auto dist2 = [&](int a, int b) {
        double dr = pts[b].row - pts[a].row;
        double dc = pts[b].col - pts[a].col;
        return dr * dr + dc * dc;
    };
    for (int a = 0; a < n; ++a) {
        double best = 0;
        for (int b = 0; b < n; ++b) {
            int dr = pts[b].row - pts[a].row;
            if (dr < 1 || dr > max_row_gap) continue;
            double d = dist2(a, b);
            if (nn_down[a] < 0 || d < best) {
                best = d;
                nn_down[a] = b;
            }
        }
        best = 0;
        for (int b = 0; b < n; ++b) {
            int dr = pts[a].row - pts[b].row;
            if (dr < 1 || dr > max_row_gap) continue;
            double d = dist2(b, a);
            if (nn_up[a] < 0 || d < best) {
                best = d;
                nn_up[a] = b;
            }
        }
    }

    std::vector<int> link_down(n, -1), link_up(n, -1);
    for (int a = 0; a < n; ++a) {
        int b = nn_down[a];
        if (b < 0 || nn_up[b] != a) continue;
        double slope = (pts[b].col - pts[a].col) / (pts[b].row - pts[a].row);
        if (slope < slope_window.min_px_per_row || slope > slope_window.max_px_per_row) continue;
        link_down[a] = b;
        link_up[b] = a;
    }

    std::vector<CurveSegment> out;
    for (int a = 0; a < n; ++a) {
        if (link_up[a] >= 0 || link_down[a] < 0) continue;  // chain heads only
        CurveSegment seg;
        for (int cur = a; cur >= 0; cur = link_down[cur]) seg.points.push_back(pts[cur]);
        seg.row_min = seg.points.front().row;
        seg.row_max = seg.points.back().row;
        if (seg.span() >= min_rows) out.push_back(std::move(seg));
    }
    return out;
}

// ---- transition curves --------------------------------------------------------

namespace detail {

inline double segment_col_at_row(const CurveSegment& s, int row) {
    // nearest-point column for junction comparison
    double best = s.points.front().col;
    int bestd = std::abs(s.points.front().row - row);
    for (const auto& p : s.points) {
        int d = std::abs(p.row - row);
        if (d < bestd) {
            bestd = d;
            best = p.col;
        }
    }
    return best;
}

inline bool mergeable(const std::vector<MaxPoint>& curve, int c_rmin, int c_rmax,
                      const CurveSegment& s, const AnalysisParams& params) {
    // row ranges must overlap or abut within merge_row_gap
    if (s.row_min > c_rmax + params.merge_row_gap) return false;
    if (s.row_max < c_rmin - params.merge_row_gap) return false;
    // compare columns over the junction/overlap region
    int lo = std::max(c_rmin, s.row_min), hi = std::min(c_rmax, s.row_max);
    auto curve_col_at = [&](int row) {
        double best = curve.front().col;
        int bestd = std::abs(curve.front().row - row);
        for (const auto& p : curve) {
            int d = std::abs(p.row - row);
            if (d < bestd) {
                bestd = d;
                best = p.col;
            }
        }
        return best;
    };
    if (lo > hi) {  // abutting: compare facing endpoints
        int cr = (s.row_min > c_rmax) ? c_rmax : c_rmin;
        int sr = (s.row_min > c_rmax) ? s.row_min : s.row_max;
        return std::fabs(curve_col_at(cr) - segment_col_at_row(s, sr)) <=
               params.merge_endpoint_px;
    }
    double dev = 0;
    int cnt = 0;
    for (int r = lo; r <= hi; ++r) {
        dev += std::fabs(curve_col_at(r) - segment_col_at_row(s, r));
        ++cnt;
    }
    return cnt > 0 && dev / cnt <= params.merge_endpoint_px;
}

}  // namespace detail

// Merges overlapping/abutting segments into transition curves, removes
// spacing outliers, and orders curves by their mean sweep coordinate. The
// first curve is the 1e candidate, the second the 2e candidate.
inline std::vector<TransitionCurve> merge_and_order(std::vector<CurveSegment> segments,
                                                    const AnalysisParams& params = {}) {
    std::sort(segments.begin(), segments.end(), [](const CurveSegment& a, const CurveSegment& b) {
        if (a.span() != b.span()) return a.span() > b.span();
        if (a.row_min != b.row_min) return a.row_min < b.row_min;
        return a.points.front().col < b.points.front().col;
    });

    struct Acc {
        std::vector<MaxPoint> pts;
        int rmin = 0, rmax = 0;
    };
    std::vector<Acc> acc;
    for (const auto& s : segments) {
        bool merged = false;
        for (auto& c : acc) {
            if (detail::mergeable(c.pts, c.rmin, c.rmax, s, params)) {
                for (const auto& p : s.points) {
                    bool dup = false;
                    for (const auto& q : c.pts)
                        if (q.row == p.row) {
                            dup = true;
                            break;
                        }
                    if (!dup) c.pts.push_back(p);
                }
                std::sort(c.pts.begin(), c.pts.end(),
                          [](const MaxPoint& a, const MaxPoint& b) { return a.row < b.row; });
                c.rmin = c.pts.front().row;
                c.rmax = c.pts.back().row;
                merged = true;
                break;
            }
        }
        if (!merged) {
            Acc c;
            c.pts = s.points;
            c.rmin = s.row_min;
            c.rmax = s.row_max;
            acc.push_back(std::move(c));
        }
    }

    std::vector<TransitionCurve> curves;
    for (auto& c : acc) {
        TransitionCurve t;
        t.points = std::move(c.pts);
        t.row_min = c.rmin;
        t.row_max = c.rmax;
        double m = 0;
        for (const auto& p : t.points) m += p.col;
        t.mean_col = m / t.points.size();
        curves.push_back(std::move(t));
    }
    std::sort(curves.begin(), curves.end(),
              [](const TransitionCurve& a, const TransitionCurve& b) {
                  return a.mean_col < b.mean_col;
              });

    // spacing-based outlier rejection at the flanks
    bool changed = true;
    while (changed && curves.size() >= 3) {
        changed = false;
        std::vector<double> gaps;
        for (size_t k = 1; k < curves.size(); ++k)
            gaps.push_back(curves[k].mean_col - curves[k - 1].mean_col);
        std::vector<double> sorted = gaps;
        std::sort(sorted.begin(), sorted.end());
        double med = sorted[sorted.size() / 2];
        if (med <= 0) break;
        if (gaps.front() > params.outlier_spacing_mult * med &&
            curves.front().span() < curves[1].span()) {
            curves.erase(curves.begin());
            changed = true;
            continue;
        }
        if (gaps.back() > params.outlier_spacing_mult * med &&
            curves.back().span() < curves[curves.size() - 2].span()) {
            curves.pop_back();
            changed = true;
        }
    }
    return curves;
}

// ---- summary -----------------------------------------------------------------

// 1e/2e voltages are read where the first/second curve crosses the midpoint
// of the barrier (stepped) axis; the cutoff point is the lowest visible row
// of the first curve; the scan margin is the distance from the 1e voltage to
// the left window edge.
inline TransitionSummary summarize_transitions(const std::vector<TransitionCurve>& curves,
                                               const ScanGrid& grid,
                                               const AnalysisParams& params = {}) {
    TransitionSummary s;
    const int rows = grid.rows();
    const double midrow = (rows - 1) / 2.0;
    const int need = params.success_extent_rows(rows);
    for (const auto& c : curves)
        if (c.span() >= need) s.success = true;

    if (!curves.empty() && curves[0].crosses_row(midrow))
        s.v1e = grid.swept_voltage(curves[0].col_at(midrow));
    if (curves.size() >= 2 && curves[1].crosses_row(midrow))
        s.v2e = grid.swept_voltage(curves[1].col_at(midrow));
    if (s.v1e && s.v2e && *s.v2e > *s.v1e) s.addition_voltage = *s.v2e - *s.v1e;
    if (!curves.empty()) {
        const auto& c0 = curves[0];
        double vp = grid.swept_voltage(c0.col_at(c0.row_min));
        double vb = grid.stepped_voltage(c0.row_min);
        s.cutoff_pb_difference = vp - vb;
    }
    if (s.v1e) s.scan_margin = *s.v1e - grid.plan.swept.ramps[0].start;
    return s;
}

// Scan-margin rule: margin strictly greater than twice the wafer-typical
// (median) addition voltage.
inline std::vector<bool> validate_margin(const std::vector<TransitionSummary>& summaries) {
    std::vector<double> adds;
    for (const auto& s : summaries)
        if (s.addition_voltage) adds.push_back(*s.addition_voltage);
    if (adds.empty())
        throw validation_error("validate_margin: no addition voltages on this wafer");
    std::sort(adds.begin(), adds.end());
    double median = adds[adds.size() / 2];
    std::vector<bool> out;
    out.reserve(summaries.size());
    for (const auto& s : summaries)
        out.push_back(s.scan_margin.has_value() && *s.scan_margin > 2.0 * median);
    return out;
}

// ---- orchestration -------------------------------------------------------------

struct AnalysisResult {
    ScanGrid filtered;
    MaximaSet maxima;
    std::vector<CurveSegment> segments;
    std::vector<TransitionCurve> curves;
    TransitionSummary summary;
    double floor = 0.0;
};

inline AnalysisResult analyze_scan(const ScanGrid& grid, const AnalysisParams& params = {}) {
    AnalysisResult r;
    r.filtered = highpass_background(grid, params.filter_sigma_px);
    r.floor = auto_floor(r.filtered, params);
    MaximaSet m = detect_maxima(r.filtered, params.max_window_px, r.floor);
    r.maxima = refine_maxima(r.filtered, m, params.filter_sigma_px);
    r.segments = chain_segments(r.maxima, {params.slope_min, params.slope_max},
                                params.min_length_rows(grid.rows()), params.max_row_gap);
    r.curves = merge_and_order(r.segments, params);
    r.summary = summarize_transitions(r.curves, grid, params);
    return r;
}

// ---- electron temperature -------------------------------------------------------

struct ElectronTemperatureFit {
    double te_k = 0.0;
    double te_sigma_k = 0.0;  // propagated from the lever-arm uncertainty
    double rms_residual = 0.0;
    double amplitude = 0.0;
    double v0 = 0.0;
};

// Integrates a 1D lock-in trace across a transition, removes a linear
// background fitted to the flat ends, and fits the temperature-broadened
// charge transition A*tanh(e*alpha*(V-V0)/(2*kB*T)) + B.
inline ElectronTemperatureFit fit_electron_temperature(const std::vector<double>& volts,
                                                       const std::vector<double>& signal,
                                                       double lever_arm,
                                                       double lever_arm_sigma = 0.0) {
    if (!(lever_arm > 0.0) || lever_arm > 1.0)
        throw validation_error("fit_electron_temperature: lever arm must be in (0,1]");
    if (volts.size() != signal.size() || volts.size() < 16)
        throw validation_error("fit_electron_temperature: need >=16 matched samples");
    const size_t n = volts.size();

    std::vector<double> cum(n, 0.0);
    for (size_t i = 1; i < n; ++i)
        cum[i] = cum[i - 1] + 0.5 * (signal[i] + signal[i - 1]) * (volts[i] - volts[i - 1]);

    // Linear background from the outer 15% on each side. The two tails are
    // fit separately: the transition step shifts their intercepts apart, so
    // the background slope is the mean of the end slopes and the intercept
    // splits the step symmetrically.
    const size_t tail = std::max<size_t>(2, n * 15 / 100);
    std::vector<double> lx, ly, rx, ry;
    for (size_t i = 0; i < tail; ++i) {
        lx.push_back(volts[i]);
        ly.push_back(cum[i]);
        rx.push_back(volts[n - 1 - i]);
        ry.push_back(cum[n - 1 - i]);
    }
    LineFit left = fit_line(lx, ly);
    LineFit right = fit_line(rx, ry);
    LineFit bg{(left.a + right.a) / 2, (left.b + right.b) / 2};
    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i) y[i] = cum[i] - (bg.a + bg.b * volts[i]);

    double ymin = *std::min_element(y.begin(), y.end());
    double ymax = *std::max_element(y.begin(), y.end());
    double a0 = (ymax - ymin) / 2, b0 = (ymax + ymin) / 2;
    double v0 = volts[n / 2];
    for (size_t i = 0; i + 1 < n; ++i)
        if ((y[i] - b0) * (y[i + 1] - b0) <= 0 && y[i] != y[i + 1]) {
            v0 = volts[i] + (b0 - y[i]) * (volts[i + 1] - volts[i]) / (y[i + 1] - y[i]);
            break;
        }

    auto resid = [&](const std::vector<double>& p, std::vector<double>& r) {
        const double t = std::fabs(p[3]);
        const double k = lever_arm / (2.0 * phys::thermal_voltage(std::max(t, 1e-6)));
        for (size_t i = 0; i < n; ++i)
            r[i] = p[0] * std::tanh(k * (volts[i] - p[1])) + p[2] - y[i];
    };
    auto fit = levmar_fit(resid, n, {a0, v0, b0, 2.0});
    double te = std::fabs(fit.params[3]);
    double amp = std::fabs(fit.params[0]);
    if (!fit.converged || !(te > 1e-4) || !(amp > 0) ||
        fit.rms_residual > 0.2 * std::max(amp, 1e-30))
        throw fit_error("electron temperature fit did not converge", fit.rms_residual);
    // the trace must span the transition: flat tails on both sides and a
    // width resolved by the sampling
    const double width = 2.0 * phys::thermal_voltage(te) / lever_arm;
    const double span = volts.back() - volts.front();
    const double step = span / static_cast<double>(n - 1);
    if (width * 6.0 > std::fabs(span) || width < 0.5 * std::fabs(step))
        throw fit_error("fitted transition is not resolved by the trace", fit.rms_residual);

    ElectronTemperatureFit out;
    out.te_k = te;
    out.te_sigma_k = te * (lever_arm_sigma / lever_arm);
    out.rms_residual = fit.rms_residual;
    out.amplitude = amp;
    out.v0 = fit.params[1];
    return out;
}

// ---- serialization ---------------------------------------------------------------

inline nlohmann::json to_json(const TransitionSummary& s) {
    nlohmann::json j;
    j["success"] = s.success;
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) j[k] = *v;
    };
    put("v1e", s.v1e);
    put("v2e", s.v2e);
    put("addition_voltage", s.addition_voltage);
    put("cutoff_pb_difference", s.cutoff_pb_difference);
    put("scan_margin", s.scan_margin);
    return j;
}

inline TransitionSummary summary_from_json(const nlohmann::json& j) {
    TransitionSummary s;
    s.success = j.at("success").get<bool>();
    auto get = [&](const char* k) -> std::optional<double> {
        if (j.contains(k)) return j.at(k).get<double>();
        return std::nullopt;
    };
    s.v1e = get("v1e");
    s.v2e = get("v2e");
    s.addition_voltage = get("addition_voltage");
    s.cutoff_pb_difference = get("cutoff_pb_difference");
    s.scan_margin = get("scan_margin");
    return s;
}

inline std::string summary_csv_header() {
    return std::string("# ") + kSummarySchema +
           "\ndie_x,die_y,device,dot,success,v1e,v2e,addition_voltage,cutoff_pb_difference,"
           "scan_margin\n";
}

inline std::string summary_csv_row(int die_x, int die_y, int device, const std::string& dot,
                                   const TransitionSummary& s) {
    std::string row = std::to_string(die_x) + "," + std::to_string(die_y) + "," +
                      std::to_string(device) + "," + dot + "," + (s.success ? "1" : "0");
    auto put = [&](const std::optional<double>& v) {
        row += ",";
        if (v) row += detail::fmt17(*v);
    };
    put(s.v1e);
    put(s.v2e);
    put(s.addition_voltage);
    put(s.cutoff_pb_difference);
    put(s.scan_margin);
    row += "\n";
    return row;
}

}  // namespace qdprobe
