#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "qdprobe/analysis.hpp"
#include "qdprobe/rng.hpp"

using namespace qdprobe;

namespace {

ScanGrid make_grid(int rows, int cols, double p0, double pstep, double b0, double bstep,
                   const std::function<double(int, int)>& f) {
    ScanGrid g;
    g.plan.kind = ScanKind::plunger_vs_barriers;
    g.plan.swept.ramps = {{"P", p0, p0 + pstep * (cols - 1)}};
    g.plan.swept.points = cols;
    g.plan.stepped.ramps = {{"B", b0, b0 + bstep * (rows - 1)}};
    g.plan.stepped.points = rows;
    g.values.resize(static_cast<size_t>(rows) * cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g.at(i, j) = f(i, j);
    return g;
}

double sech2(double x) {
    double c = std::cosh(x);
    return 1.0 / (c * c);
}

// independent direct convolution with the analytic derivative-of-Gaussian
// kernel (same reflective boundary rule, separately coded)
std::vector<double> oracle_filter_row(const std::vector<double>& row, double sigma) {
    int half = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> w;
    double norm = 0;
    for (int k = -half; k <= half; ++k) {
        double g = k * std::exp(-k * k / (2 * sigma * sigma));
        w.push_back(g);
        norm += k * g;
    }
    int n = static_cast<int>(row.size());
    auto ref = [&](int j) {
        while (j < 0 || j >= n) j = j < 0 ? -j - 1 : 2 * n - 1 - j;
        return j;
    };
    std::vector<double> out(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double acc = 0;
        for (int k = -half; k <= half; ++k) acc += w[k + half] * row[ref(j + k)];
        out[j] = acc / norm;
    }
    return out;
}

}  // namespace

TEST_CASE("highpass: constants vanish, ramps give constant response", "[analysis]") {
    auto cg = make_grid(5, 40, 0, 0.005, 0, 0.01, [](int, int) { return 3.7; });
    ScanGrid f = highpass_background(cg, 3.0);
    for (double v : f.values) REQUIRE(std::fabs(v) < 1e-12);

    auto rg = make_grid(5, 60, 0, 0.005, 0, 0.01, [](int, int j) { return 0.2 * j; });
    ScanGrid fr = highpass_background(rg, 3.0);
    for (int i = 0; i < 5; ++i)
        for (int j = 15; j < 45; ++j)  // interior
            REQUIRE(fr.at(i, j) == Catch::Approx(0.2).margin(1e-9));

    REQUIRE_THROWS_AS(highpass_background(cg, 0.0), validation_error);
    REQUIRE_THROWS_AS(highpass_background(cg, -1.0), validation_error);
}

TEST_CASE("highpass matches the independent convolution oracle", "[analysis][oracle]") {
    Stream rng(404);
    std::vector<double> row(81);
    for (auto& v : row) v = rng.normal();
    auto g = make_grid(2, 81, 0, 0.005, 0, 0.01, [&](int, int j) { return row[j]; });
    ScanGrid f = highpass_background(g, 2.5);
    auto want = oracle_filter_row(row, 2.5);
    for (int j = 0; j < 81; ++j) REQUIRE(f.at(0, j) == Catch::Approx(want[j]).margin(1e-12));
}

TEST_CASE("line center bracketed by response lobes, recovered by zero crossing",
          "[analysis][oracle]") {
    const double center_px = 50.37;
    auto g = make_grid(3, 101, 0, 0.005, 0, 0.01,
                       [&](int, int j) { return sech2((j - center_px) / 1.3); });
    ScanGrid f = highpass_background(g, 3.0);

    for (int i = 0; i < 3; ++i) {
        int jpos = 0, jneg = 0;
        for (int j = 1; j < 101; ++j) {
            if (f.at(i, j) > f.at(i, jpos)) jpos = j;
            if (f.at(i, j) < f.at(i, jneg)) jneg = j;
        }
        REQUIRE(jpos < center_px);  // positive lobe left of center
        REQUIRE(jneg > center_px);  // negative lobe right of center

        MaximaSet m = detect_maxima(f, 5, 0.01);
        MaximaSet r = refine_maxima(f, m, 3.0);
        bool found = false;
        for (const auto& p : r.points)
            if (p.row == i) {
                REQUIRE(p.col == Catch::Approx(center_px).margin(1.0));
                found = true;
            }
        REQUIRE(found);
    }
}

TEST_CASE("maxima: single pixel, distant equals, floor, window", "[analysis]") {
    auto g = make_grid(3, 30, 0, 0.005, 0, 0.01, [](int, int) { return 0.0; });
    g.at(1, 10) = 5.0;
    MaximaSet m = detect_maxima(g, 5, 0.5);
    REQUIRE(m.points.size() == 1);
    REQUIRE(m.points[0].row == 1);
    REQUIRE(m.points[0].col == 10.0);

    g.at(1, 20) = 5.0;  // farther apart than the window: both kept
    m = detect_maxima(g, 5, 0.5);
    REQUIRE(m.points.size() == 2);

    g.at(1, 12) = 5.0;  // equal within window: leftmost of the plateau wins
    m = detect_maxima(g, 5, 0.5);
    std::set<double> cols;
    for (auto& p : m.points) cols.insert(p.col);
    REQUIRE(cols == std::set<double>{10.0, 20.0});

    REQUIRE_THROWS_AS(detect_maxima(g, 0, 0.5), validation_error);
}

TEST_CASE("maxima positions are invariant under a global constant", "[analysis][property]") {
    Stream rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        double c1 = rng.uniform(20, 40), c2 = rng.uniform(55, 80);
        auto base = [&](int i, int j) {
            return sech2((j - c1 + 0.2 * i) / 1.5) + sech2((j - c2 + 0.2 * i) / 1.5);
        };
        double shift = rng.uniform(-5, 5);
        auto g1 = make_grid(7, 101, 0, 0.005, 0, 0.01, base);
        auto g2 = make_grid(7, 101, 0, 0.005, 0, 0.01,
                            [&](int i, int j) { return base(i, j) + shift; });
        AnalysisParams p;
        ScanGrid f1 = highpass_background(g1, p.filter_sigma_px);
        ScanGrid f2 = highpass_background(g2, p.filter_sigma_px);
        MaximaSet m1 = detect_maxima(f1, p.max_window_px, 0.05);
        MaximaSet m2 = detect_maxima(f2, p.max_window_px, 0.05);
        REQUIRE(m1.points.size() == m2.points.size());
        for (size_t k = 0; k < m1.points.size(); ++k) {
            REQUIRE(m1.points[k].row == m2.points[k].row);
            REQUIRE(m1.points[k].col == m2.points[k].col);
        }
    }
}

// exhaustive per-row argmax oracle on a synthetic two-line scan
TEST_CASE("per-row maxima track line centers within one pixel", "[analysis][oracle]") {
    const double a0 = 30.0, b0 = 62.0, slope = -0.3;
    auto g = make_grid(21, 101, 0, 0.005, 0, 0.0075, [&](int i, int j) {
        return sech2((j - (a0 + slope * i)) / 1.2) + sech2((j - (b0 + slope * i)) / 1.2);
    });
    AnalysisParams p;
    ScanGrid f = highpass_background(g, p.filter_sigma_px);
    MaximaSet m = refine_maxima(f, detect_maxima(f, p.max_window_px, auto_floor(f, p)),
                                p.filter_sigma_px);
    for (const auto& pt : m.points) {
        double c1 = a0 + slope * pt.row, c2 = b0 + slope * pt.row;
        double d = std::min(std::fabs(pt.col - c1), std::fabs(pt.col - c2));
        REQUIRE(d <= 1.0);
    }
    // every row found both lines
    std::map<int, int> per_row;
    for (const auto& pt : m.points) per_row[pt.row]++;
    for (int i = 0; i < 21; ++i) REQUIRE(per_row[i] == 2);
}

TEST_CASE("chain segments: empty, single diagonal, parallel pair", "[analysis]") {
    MaximaSet empty;
    empty.rows = 10;
    empty.cols = 50;
    REQUIRE(chain_segments(empty, {-2, 2}, 3).empty());

    MaximaSet diag;
    diag.rows = 12;
    diag.cols = 50;
    for (int i = 0; i < 12; ++i) diag.points.push_back({i, 20.0 - 0.4 * i});
    auto segs = chain_segments(diag, {-2, 1.25}, 4);
    REQUIRE(segs.size() == 1);
    REQUIRE(segs[0].points.size() == 12);
    REQUIRE(segs[0].span() == 12);

    // below min length: dropped
    REQUIRE(chain_segments(diag, {-2, 1.25}, 13).empty());

    // slope outside the window: no links at all
    MaximaSet steep;
    steep.rows = 12;
    steep.cols = 80;
    for (int i = 0; i < 12; ++i) steep.points.push_back({i, 10.0 + 5.0 * i});
    REQUIRE(chain_segments(steep, {-2, 1.25}, 2).empty());

    MaximaSet two;
    two.rows = 10;
    two.cols = 60;
    for (int i = 0; i < 10; ++i) {
        two.points.push_back({i, 15.0 - 0.3 * i});
        two.points.push_back({i, 40.0 - 0.3 * i});
    }
    auto segs2 = chain_segments(two, {-2, 1.25}, 4);
    REQUIRE(segs2.size() == 2);
    REQUIRE(segs2[0].points.size() == 10);
    REQUIRE(segs2[1].points.size() == 10);

    REQUIRE_THROWS_AS(chain_segments(two, {2, -2}, 4), validation_error);
}

namespace {

// Brute-force chaining oracle: full distance matrices, no early exits.
std::vector<std::vector<std::pair<int, double>>> oracle_chain(const std::vector<MaxPoint>& pts,
                                                              double smin, double smax,
                                                              int min_rows, int gap) {
    const int n = static_cast<int>(pts.size());
    auto d2 = [&](int a, int b) {
        double dr = pts[a].row - pts[b].row, dc = pts[a].col - pts[b].col;
        return dr * dr + dc * dc;
    };
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            int dr = pts[b].row - pts[a].row;
            if (dr < 1 || dr > gap) continue;
            bool b_nearest_down = true;
            for (int c = 0; c < n; ++c) {
                int dc = pts[c].row - pts[a].row;
                if (dc < 1 || dc > gap || c == b) continue;
                if (d2(a, c) < d2(a, b)) b_nearest_down = false;
            }
            bool a_nearest_up = true;
            for (int c = 0; c < n; ++c) {
                int dc = pts[b].row - pts[c].row;
                if (dc < 1 || dc > gap || c == a) continue;
                if (d2(c, b) < d2(a, b)) a_nearest_up = false;
            }
            double slope = (pts[b].col - pts[a].col) / dr;
            if (b_nearest_down && a_nearest_up && slope >= smin && slope <= smax)
                adj[a][b] = adj[b][a] = true;
        }
    std::vector<int> comp(n, -1);
    int nc = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{s};
        comp[s] = nc;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v)
                if (adj[u][v] && comp[v] < 0) {
                    comp[v] = nc;
                    stack.push_back(v);
                }
        }
        ++nc;
    }
    std::vector<std::vector<std::pair<int, double>>> out;
    for (int c = 0; c < nc; ++c) {
        std::vector<std::pair<int, double>> pl;
        bool linked = false;
        for (int i = 0; i < n; ++i)
            if (comp[i] == c) {
                pl.emplace_back(pts[i].row, pts[i].col);
                for (int j = 0; j < n; ++j) linked = linked || adj[i][j];
            }
        if (pl.size() < 2 || !linked) continue;
        std::sort(pl.begin(), pl.end());
        int span = pl.back().first - pl.front().first + 1;
        if (span >= min_rows) out.push_back(std::move(pl));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<std::pair<int, double>>> as_point_lists(
    const std::vector<CurveSegment>& segs) {
    std::vector<std::vector<std::pair<int, double>>> got;
    for (const auto& s : segs) {
        std::vector<std::pair<int, double>> pl;
        for (const auto& p : s.points) pl.emplace_back(p.row, p.col);
        std::sort(pl.begin(), pl.end());
        got.push_back(std::move(pl));
    }
    std::sort(got.begin(), got.end());
    return got;
}

}  // namespace

TEST_CASE("chaining equals the brute-force oracle on random point sets",
          "[analysis][oracle][property]") {
    Stream rng(515);
    for (int trial = 0; trial < 300; ++trial) {
        MaximaSet m;
        m.rows = 12;
        m.cols = 40;
        int npts = 3 + rng.uniform_int(18);
        std::set<std::pair<int, int>> used;
        for (int k = 0; k < npts; ++k) {
            int row = rng.uniform_int(m.rows);
            int colpx = rng.uniform_int(m.cols);
            if (!used.insert({row, colpx}).second) continue;
            m.points.push_back({row, colpx + rng.uniform(-0.3, 0.3)});
        }
        std::sort(m.points.begin(), m.points.end(), [](const MaxPoint& a, const MaxPoint& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        int min_rows = 2 + rng.uniform_int(3);
        auto segs = chain_segments(m, {-2.0, 1.25}, min_rows, 2);
        REQUIRE(as_point_lists(segs) == oracle_chain(m.points, -2.0, 1.25, min_rows, 2));
    }
}

TEST_CASE("segments satisfy the three chain criteria post hoc", "[analysis][property]") {
    Stream rng(616);
    for (int trial = 0; trial < 100; ++trial) {
        MaximaSet m;
        m.rows = 20;
        m.cols = 60;
        int npts = 5 + rng.uniform_int(40);
        std::set<std::pair<int, int>> used;
        for (int k = 0; k < npts; ++k) {
            int row = rng.uniform_int(m.rows), col = rng.uniform_int(m.cols);
            if (used.insert({row, col}).second)
                m.points.push_back({row, static_cast<double>(col)});
        }
        std::sort(m.points.begin(), m.points.end(), [](const MaxPoint& a, const MaxPoint& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        int min_rows = 3;
        auto segs = chain_segments(m, {-2.0, 1.25}, min_rows, 2);
        std::set<std::pair<int, long long>> seen;  // no point in two segments
        for (const auto& s : segs) {
            REQUIRE(s.span() >= min_rows);
            for (size_t k = 0; k + 1 < s.points.size(); ++k) {
                const auto& a = s.points[k];
                const auto& b = s.points[k + 1];
                double slope = (b.col - a.col) / (b.row - a.row);
                REQUIRE(slope >= -2.0);
                REQUIRE(slope <= 1.25);
                REQUIRE(b.row - a.row >= 1);
                REQUIRE(b.row - a.row <= 2);
                // neighbor must be the nearest maximum among candidate rows
                for (const auto& q : m.points) {
                    int dr = q.row - a.row;
                    if (dr < 1 || dr > 2) continue;
                    double dq = static_cast<double>(q.row - a.row) * (q.row - a.row) +
                                (q.col - a.col) * (q.col - a.col);
                    double db = static_cast<double>(b.row - a.row) * (b.row - a.row) +
                                (b.col - a.col) * (b.col - a.col);
                    REQUIRE(dq >= db - 1e-12);
                }
            }
            for (const auto& p : s.points) {
                auto key = std::make_pair(p.row, static_cast<long long>(p.col * 1e6));
                REQUIRE(seen.insert(key).second);
            }
        }
    }
}

TEST_CASE("merging: collinear abutting segments, ordering, outlier removal", "[analysis]") {
    CurveSegment a, b;
    for (int i = 0; i < 6; ++i) a.points.push_back({i, 20.0 - 0.3 * i});
    a.row_min = 0;
    a.row_max = 5;
    for (int i = 6; i < 12; ++i) b.points.push_back({i, 20.0 - 0.3 * i});
    b.row_min = 6;
    b.row_max = 11;
    auto curves = merge_and_order({a, b});
    REQUIRE(curves.size() == 1);
    REQUIRE(curves[0].span() == 12);

    // three parallel full-height curves, fed out of order
    std::vector<CurveSegment> segs;
    for (double c0 : {69.0, 45.0, 57.0}) {
        CurveSegment s;
        for (int i = 0; i < 12; ++i) s.points.push_back({i, c0 - 0.3 * i});
        s.row_min = 0;
        s.row_max = 11;
        segs.push_back(s);
    }
    curves = merge_and_order(segs);
    REQUIRE(curves.size() == 3);
    REQUIRE(curves[0].mean_col < curves[1].mean_col);
    REQUIRE(curves[1].mean_col < curves[2].mean_col);

    // a spurious short segment far to the left is dropped
    CurveSegment noise;
    for (int i = 4; i < 8; ++i) noise.points.push_back({i, 2.0});
    noise.row_min = 4;
    noise.row_max = 7;
    segs.push_back(noise);
    curves = merge_and_order(segs);
    REQUIRE(curves.size() == 3);
    REQUIRE(curves[0].mean_col == Catch::Approx(45.0 - 0.3 * 5.5).margin(1e-9));
}

TEST_CASE("summary of two vertical lines", "[analysis]") {
    // window starts at 0.20 V, 5 mV steps; lines at 0.45 V and 0.61 V
    auto g = make_grid(41, 101, 0.20, 0.005, 0.80, 0.0075, [&](int, int j) {
        return sech2((j - 50.0) / 1.2) + sech2((j - 82.0) / 1.2);
    });
    auto r = analyze_scan(g);
    REQUIRE(r.curves.size() == 2);
    REQUIRE(r.summary.success);
    REQUIRE(r.summary.v1e.has_value());
    REQUIRE(*r.summary.v1e == Catch::Approx(0.45).margin(0.002));
    REQUIRE(*r.summary.v2e == Catch::Approx(0.61).margin(0.002));
    REQUIRE(*r.summary.addition_voltage == Catch::Approx(0.16).margin(0.003));
    REQUIRE(*r.summary.scan_margin == Catch::Approx(0.25).margin(0.002));
    REQUIRE(*r.summary.cutoff_pb_difference == Catch::Approx(0.45 - 0.80).margin(0.003));
}

TEST_CASE("curve ending below the midpoint yields no v1e but may still succeed", "[analysis]") {
    // line visible only on the lower 40% of rows; midpoint row = 20
    auto g = make_grid(41, 101, 0.20, 0.005, 0.80, 0.0075, [&](int i, int j) {
        if (i > 16) return 0.0;
        return sech2((j - 50.0) / 1.2);
    });
    AnalysisParams p;
    p.success_extent_frac = 0.30;  // a shorter extent counts as clear here
    auto r = analyze_scan(g, p);
    REQUIRE_FALSE(r.summary.v1e.has_value());
    REQUIRE_FALSE(r.summary.scan_margin.has_value());
    REQUIRE(r.summary.success);
    // cutoff still read from the lowest visible row
    REQUIRE(r.summary.cutoff_pb_difference.has_value());
}

TEST_CASE("margin rule is strict at exactly twice the median", "[analysis]") {
    std::vector<TransitionSummary> ss;
    for (double add : {0.150, 0.158, 0.166}) {
        TransitionSummary s;
        s.v1e = 0.5;
        s.v2e = 0.5 + add;
        s.addition_voltage = add;
        s.success = true;
        ss.push_back(s);
    }
    ss[0].scan_margin = 0.40;    // 0.40 > 0.316: pass
    ss[1].scan_margin = 0.316;   // exactly 2x the 0.158 median: fail (strict)
    ss[2].scan_margin = 0.3161;  // just above: pass
    auto flags = validate_margin(ss);
    REQUIRE(flags == std::vector<bool>{true, false, true});

    std::vector<TransitionSummary> none(3);
    REQUIRE_THROWS_AS(validate_margin(none), validation_error);
}

TEST_CASE("axis translation equivariance of summaries", "[analysis][property]") {
    Stream rng(818);
    for (int trial = 0; trial < 25; ++trial) {
        double dp = rng.uniform(-0.5, 0.5), db = rng.uniform(-0.5, 0.5);
        double c1 = rng.uniform(35, 45), c2 = c1 + rng.uniform(20, 30);
        double slope = rng.uniform(-0.5, 0.1);
        auto field = [&](int i, int j) {
            return sech2((j - (c1 + slope * i)) / 1.3) + sech2((j - (c2 + slope * i)) / 1.3);
        };
        auto g1 = make_grid(41, 101, 0.20, 0.005, 0.80, 0.0075, field);
        auto g2 = make_grid(41, 101, 0.20 + dp, 0.005, 0.80 + db, 0.0075, field);
        auto r1 = analyze_scan(g1);
        auto r2 = analyze_scan(g2);
        REQUIRE(r1.summary.v1e.has_value());
        REQUIRE(r2.summary.v1e.has_value());
        REQUIRE(*r2.summary.v1e == Catch::Approx(*r1.summary.v1e + dp).margin(1e-9));
        REQUIRE(*r2.summary.addition_voltage ==
                Catch::Approx(*r1.summary.addition_voltage).margin(1e-9));
        REQUIRE(*r2.summary.cutoff_pb_difference ==
                Catch::Approx(*r1.summary.cutoff_pb_difference + dp - db).margin(1e-9));
        REQUIRE(*r2.summary.scan_margin == Catch::Approx(*r1.summary.scan_margin).margin(1e-9));
    }
}

TEST_CASE("electron temperature fit", "[analysis][oracle]") {
    const double alpha = 0.08, te = 1.6;
    const double width = 2 * phys::thermal_voltage(te) / alpha;  // volts
    auto gen_trace = [&](double amp, double offset, int n, double noise, std::uint64_t seed) {
        std::vector<double> v(n), y(n);
        Stream rng(seed);
        for (int i = 0; i < n; ++i) {
            v[i] = -8 * width + 16 * width * i / (n - 1);
            double x = v[i] / width;
            double c = std::cosh(x);
            y[i] = amp / (c * c) + offset + noise * rng.normal();
        }
        return std::make_pair(v, y);
    };

    // noiseless: recover within 0.1% (the integral of sech^2 is tanh exactly)
    auto [v1, y1] = gen_trace(1.0, 0.3, 401, 0.0, 1);
    auto f1 = fit_electron_temperature(v1, y1, alpha, 0.01);
    REQUIRE(f1.te_k == Catch::Approx(te).epsilon(0.001));

    // amplitude scale invariance
    auto [v2, y2] = gen_trace(2.0, 0.3, 401, 0.0, 1);
    auto f2 = fit_electron_temperature(v2, y2, alpha, 0.01);
    REQUIRE(f2.te_k == Catch::Approx(f1.te_k).epsilon(1e-6));

    // lever-arm uncertainty propagation: te * (0.01/0.08) = 12.5% = 0.2 K
    REQUIRE(f1.te_sigma_k == Catch::Approx(f1.te_k * 0.125).epsilon(1e-9));
    REQUIRE(f1.te_sigma_k == Catch::Approx(0.2).margin(0.01));

    // visible noise comparable to the extended-data trace: within 10%
    auto [v3, y3] = gen_trace(1.0, 0.3, 401, 0.05, 99);
    auto f3 = fit_electron_temperature(v3, y3, alpha, 0.01);
    REQUIRE(f3.te_k == Catch::Approx(te).epsilon(0.10));

    // garbage input: no transition to fit
    std::vector<double> flat_v(50), flat_y(50, 0.0);
    Stream rng(5);
    for (int i = 0; i < 50; ++i) {
        flat_v[i] = i * 0.001;
        flat_y[i] = rng.normal();
    }
    REQUIRE_THROWS_AS(fit_electron_temperature(flat_v, flat_y, alpha), fit_error);
    REQUIRE_THROWS_AS(fit_electron_temperature(flat_v, flat_y, 0.0), validation_error);
    REQUIRE_THROWS_AS(fit_electron_temperature(flat_v, flat_y, 1.5), validation_error);
}

TEST_CASE("summary serialization", "[analysis]") {
    TransitionSummary s;
    s.success = true;
    s.v1e = 0.4512345678901234;
    s.v2e = 0.53;
    s.addition_voltage = *s.v2e - *s.v1e;
    s.scan_margin = 0.25;
    auto j = to_json(s);
    TransitionSummary t = summary_from_json(j);
    REQUIRE(t.success == s.success);
    REQUIRE(*t.v1e == *s.v1e);
    REQUIRE_FALSE(t.cutoff_pb_difference.has_value());

    std::string row = summary_csv_row(3, -2, 1, "D05", s);
    REQUIRE(row.find("3,-2,1,D05,1,") == 0);
    REQUIRE(summary_csv_header().find(kSummarySchema) != std::string::npos);
}
