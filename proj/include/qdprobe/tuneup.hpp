#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdprobe/analysis.hpp"
#include "qdprobe/instrument.hpp"

namespace qdprobe {

inline constexpr const char* kRecordSchema = "qdprobe-record v1";

struct TuneupConfig {
    double vt_threshold_a = 1e-9;  // current criterion for VT
    // pinch-off sweeps
    double iv_start_v = -0.3;
    double iv_stop_v = 1.8;
    double iv_step_v = 0.010;
    double bias_v = 0.001;
    double gate_offset_v = 0.25;  // gates parked at channel VT + this after turn-on
    // channel isolation
    double screening_start_v = 0.6;
    double screening_floor_v = -0.2;
    double screening_step_v = 0.02;
    double isolation_floor = 0.05;  // normalized cross-conductance
    // density equalization
    double gm_target = 1.7e-9;  // A/V
    double gm_band_rel = 0.25;
    double gm_halfstep_v = 0.002;
    double equalize_step_v = 0.010;
    int equalize_max_passes = 60;
    // barrier-barrier scans
    double bb_span_v = 0.24;
    int bb_points = 31;
    double bb_plunger_offset_v = 0.25;
    double bb_center_offset_v = 0.10;  // VT criterion sits below the pinch-off center
    double corner_max_residual_rel = 0.05;
    double flat_grid_min_range_rel = 0.02;  // of the saturated current
    double corner_min_v = 0.2;              // anomalously low pinch-off below this
    // charge sensing
    double cs_plunger_below_v = 0.07;
    double cs_plunger_above_v = 0.43;
    int cs_plunger_points = 101;
    double cs_barrier_below_v = 0.10;
    double cs_barrier_above_v = 0.20;
    int cs_barrier_points = 41;
    double lockin_hz = 1000.0;
    double sensor_pinch_below_v = 0.2;  // idle sensor plungers parked below VT
    // double-dot scans
    double dqd_plunger_below_v = 0.02;
    double dqd_plunger_above_v = 0.30;
    int dqd_plunger_points = 61;
};

struct IVCurve {
    std::string gate_id;
    std::vector<double> voltage;  // strictly increasing
    std::vector<double> current;
    double bias = 0.001;

    void validate() const {
        if (voltage.size() != current.size() || voltage.size() < 2)
            throw validation_error("IV curve: need >=2 matched samples");
        for (size_t i = 1; i < voltage.size(); ++i)
            if (!(voltage[i] > voltage[i - 1]))
                throw validation_error("IV curve: voltages must be strictly increasing");
    }
};

struct VtExtraction {
    enum class Status { ok, no_turn_on, always_on };
    Status status = Status::no_turn_on;
    double vt = 0.0;
    bool ok() const { return status == Status::ok; }
};

// First upward crossing of the threshold, linearly interpolated. A curve that
// never reaches the threshold is a "no turn-on" fault; one that never drops
// below it is reported distinctly as "always on".
inline VtExtraction extract_vt(const IVCurve& curve, double threshold = 1e-9) {
    curve.validate();
    VtExtraction r;
    for (size_t k = 0; k + 1 < curve.voltage.size(); ++k) {
        if (curve.current[k] <= threshold && curve.current[k + 1] > threshold) {
            double f = (threshold - curve.current[k]) / (curve.current[k + 1] - curve.current[k]);
            r.vt = curve.voltage[k] + f * (curve.voltage[k + 1] - curve.voltage[k]);
            r.status = VtExtraction::Status::ok;
            return r;
        }
    }
    bool all_above = true;
    for (double i : curve.current) all_above = all_above && i > threshold;
    r.status = all_above ? VtExtraction::Status::always_on : VtExtraction::Status::no_turn_on;
    return r;
}

struct CornerFit {
    double b1 = 0, b2 = 0;
    double w1 = 0, w2 = 0;
    double amplitude = 0, offset = 0;
    double rms_residual = 0;
    bool ok = false;
    std::string fault;  // empty when ok
};

// Least-squares fit of I0*L((V1-c1)/w1)*L((V2-c2)/w2) + offset to a
// barrier-barrier grid. Faults: flat grid, poor fit, corner outside the
// window, or an anomalously low pinch-off at the corner.
inline CornerFit fit_corner(const ScanGrid& grid, const TuneupConfig& cfg = {},
                            double saturation_scale = 40e-9) {
    if (grid.plan.kind != ScanKind::barrier_barrier)
        throw validation_error("fit_corner: needs a barrier-barrier scan");
    CornerFit out;
    const int rows = grid.rows(), cols = grid.cols();
    const size_t n = grid.values.size();
    double lo = grid.values[0], hi = grid.values[0];
    for (double v : grid.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < cfg.flat_grid_min_range_rel * saturation_scale) {
        out.fault = "flat-grid";
        return out;
    }

    // initial centers from the half-maximum crossing of the axis envelopes
    auto half_cross = [&](bool along_swept) {
        int m = along_swept ? cols : rows;
        std::vector<double> env(m, lo);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) {
                int k = along_swept ? j : i;
                env[k] = std::max(env[k], grid.at(i, j));
            }
        double target = (hi + lo) / 2;
        for (int k = 0; k + 1 < m; ++k)
            if (env[k] <= target && env[k + 1] > target) {
                double f = (target - env[k]) / (env[k + 1] - env[k]);
                return along_swept ? grid.swept_voltage(k + f) : grid.stepped_voltage(k + f);
            }
        return along_swept ? grid.swept_voltage((m - 1) / 2.0)
                           : grid.stepped_voltage((m - 1) / 2.0);
    };
    double c1_0 = half_cross(true), c2_0 = half_cross(false);

    auto logistic = [](double x) {
        if (x > 40) return 1.0;
        if (x < -40) return 0.0;
        return 1.0 / (1.0 + std::exp(-x));
    };
    auto resid = [&](const std::vector<double>& p, std::vector<double>& r) {
        const double w1 = std::max(std::fabs(p[4]), 1e-4), w2 = std::max(std::fabs(p[5]), 1e-4);
        size_t k = 0;
        for (int i = 0; i < rows; ++i) {
            double l2 = logistic((grid.stepped_voltage(i) - p[2]) / w2);
            for (int j = 0; j < cols; ++j, ++k)
                r[k] = p[0] * logistic((grid.swept_voltage(j) - p[1]) / w1) * l2 + p[3] -
                       grid.values[k];
        }
    };
    auto fit = levmar_fit(resid, n, {hi - lo, c1_0, c2_0, lo, 0.03, 0.03});
    out.amplitude = fit.params[0];
    out.b1 = fit.params[1];
    out.b2 = fit.params[2];
    out.offset = fit.params[3];
    out.w1 = std::fabs(fit.params[4]);
    out.w2 = std::fabs(fit.params[5]);
    out.rms_residual = fit.rms_residual;

    if (!fit.converged || fit.rms_residual > cfg.corner_max_residual_rel * (hi - lo)) {
        out.fault = "poor-fit";
        return out;
    }
    const double s1a = grid.plan.swept.ramps[0].start, s1b = grid.plan.swept.ramps[0].stop;
    const double s2a = grid.plan.stepped.ramps[0].start, s2b = grid.plan.stepped.ramps[0].stop;
    if (out.b1 < s1a || out.b1 > s1b || out.b2 < s2a || out.b2 > s2b) {
        out.fault = "corner-outside-window";
        return out;
    }
    if (out.b1 < cfg.corner_min_v || out.b2 < cfg.corner_min_v) {
        out.fault = "anomalous-pinchoff";
        return out;
    }
    out.ok = true;
    return out;
}

struct ScanRef {
    std::string kind;
    std::string dot;
    std::string dot2;
    std::string file;
};

struct DeviceRecord {
    int die_x = 0, die_y = 0, device_index = 0;
    std::string wafer_id;
    std::uint64_t seed = 0;

    std::map<std::string, double> channel_vt;
    std::map<std::string, std::string> channel_fault;
    std::map<std::string, double> gate_vt;
    std::map<std::string, std::string> gate_fault;  // no-turn-on / always-on / channel-dead
    std::vector<int> ohmic_status;                  // 1 good, 0 bad
    bool isolation_ok = false;
    double isolation_v = 0.0;
    std::map<std::string, double> setpoints;
    std::map<std::string, std::string> equalize_fault;
    std::map<std::string, CornerFit> corners;              // all dots
    std::map<std::string, TransitionSummary> summaries;    // charge-sensed qubit dots
    std::map<std::string, bool> dqd_success;               // "D01+D02" -> flag
    std::vector<ScanRef> scans;

    bool gate_ok(const std::string& id) const {
        return gate_vt.count(id) && !gate_fault.count(id);
    }
    bool dot_ok(const std::string& id) const {
        auto it = corners.find(id);
        return it != corners.end() && it->second.ok;
    }
};

struct PipelineResult {
    DeviceRecord record;
    std::vector<ScanGrid> grids;  // parallel to record.scans
};

namespace detail {

inline IVCurve sweep_gate_group(ProbeSession& session, const std::string& channel,
                                const std::vector<std::string>& group,
                                std::map<std::string, double> voltages,
                                const TuneupConfig& cfg) {
    IVCurve iv;
    iv.gate_id = group.size() == 1 ? group[0] : channel;
    iv.bias = cfg.bias_v;
    for (double v = cfg.iv_start_v; v <= cfg.iv_stop_v + 1e-12; v += cfg.iv_step_v) {
        for (const auto& g : group) voltages[g] = v;
        iv.voltage.push_back(v);
        iv.current.push_back(session.measure_current(channel, voltages, cfg.bias_v));
    }
    return iv;
}

inline std::vector<std::string> conduction_gates(const DeviceLayout& lay, int channel) {
    std::vector<std::string> ids = lay.channels.at(channel).gates;
    if (channel == 0) ids.push_back("SCR");
    return ids;
}

}  // namespace detail

// Turns on every current channel with all of its gates ramped together,
// records the channel VT, and parks the gates at VT + offset.
inline void turn_on_channels(ProbeSession& session, const TuneupConfig& cfg,
                             DeviceRecord& rec, std::map<std::string, double>& setpoints) {
    const auto& lay = session.layout();
    for (const auto& gi : lay.gates) setpoints.emplace(gi.id, 0.0);
    for (size_t ch = 0; ch < lay.channels.size(); ++ch) {
        const auto& chan = lay.channels[ch];
        auto group = detail::conduction_gates(lay, static_cast<int>(ch));
        IVCurve iv = detail::sweep_gate_group(session, chan.id, group, setpoints, cfg);
        VtExtraction vt = extract_vt(iv, cfg.vt_threshold_a);
        if (vt.ok()) {
            rec.channel_vt[chan.id] = vt.vt;
            for (const auto& g : group) setpoints[g] = vt.vt + cfg.gate_offset_v;
        } else {
            rec.channel_fault[chan.id] =
                vt.status == VtExtraction::Status::always_on ? "always-on" : "no-turn-on";
            for (const auto& g : group) setpoints[g] = cfg.iv_stop_v;
        }
    }
}

// Per-gate pinch-off curves with everything else parked; gates on dead
// channels are unmeasurable and flagged as such.
inline void measure_gate_vts(ProbeSession& session, const TuneupConfig& cfg, DeviceRecord& rec,
                             std::map<std::string, double>& setpoints) {
    const auto& lay = session.layout();
    for (size_t ch = 0; ch < lay.channels.size(); ++ch) {
        const auto& chan = lay.channels[ch];
        bool alive = rec.channel_vt.count(chan.id) > 0;
        for (const auto& gid : detail::conduction_gates(lay, static_cast<int>(ch))) {
            if (!alive) {
                rec.gate_fault[gid] = "channel-dead";
                continue;
            }
            IVCurve iv = detail::sweep_gate_group(session, chan.id, {gid}, setpoints, cfg);
            VtExtraction vt = extract_vt(iv, cfg.vt_threshold_a);
            if (vt.ok())
                rec.gate_vt[gid] = vt.vt;
            else
                rec.gate_fault[gid] =
                    vt.status == VtExtraction::Status::always_on ? "always-on" : "no-turn-on";
        }
    }
}

// Steps the center screening gate down until the qubit channel stops
// responding to every sensor channel (within the configured floor).
inline void isolate_channels(ProbeSession& session, const TuneupConfig& cfg, DeviceRecord& rec,
                             std::map<std::string, double>& setpoints) {
    const auto& lay = session.layout();
    double start = std::min(cfg.screening_start_v, setpoints["SCR"]);
    for (double v = start; v >= cfg.screening_floor_v - 1e-12; v -= cfg.screening_step_v) {
        setpoints["SCR"] = v;
        double worst = 0.0;
        for (size_t ch = 1; ch < lay.channels.size(); ++ch) {
            if (!rec.channel_vt.count(lay.channels[ch].id)) continue;
            double xc = session.cross_conductance("qubit", lay.channels[ch].id, setpoints,
                                                  cfg.bias_v, cfg.gm_halfstep_v);
            worst = std::max(worst, std::fabs(xc));
        }
        if (worst < cfg.isolation_floor) {
            rec.isolation_ok = true;
            rec.isolation_v = v;
            return;
        }
    }
    rec.isolation_ok = false;
    rec.isolation_v = cfg.screening_floor_v;
}

// Iterative transconductance leveling: sample dI/dV_g per gate; raise the
// gate when above the band, lower it when below. On the noise-free logistic
// model the fixed point has all gates at equal offsets from their VTs.
inline void equalize_density(ProbeSession& session, const TuneupConfig& cfg,
                             const std::string& channel, DeviceRecord& rec,
                             std::map<std::string, double>& setpoints) {
    const auto& lay = session.layout();
    if (!rec.channel_vt.count(channel)) return;
    const auto& gates = lay.channels.at(lay.channel_index(channel)).gates;
    const double lo = cfg.gm_target * (1.0 - cfg.gm_band_rel);
    const double hi = cfg.gm_target * (1.0 + cfg.gm_band_rel);

    auto gm_of = [&](const std::string& gid) {
        auto v = setpoints;
        v[gid] += cfg.gm_halfstep_v;
        double up = session.measure_current(channel, v, cfg.bias_v);
        v[gid] -= 2 * cfg.gm_halfstep_v;
        double dn = session.measure_current(channel, v, cfg.bias_v);
        return (up - dn) / (2 * cfg.gm_halfstep_v);
    };

    for (int pass = 0; pass < cfg.equalize_max_passes; ++pass) {
        bool moved = false;
        for (const auto& gid : gates) {
            if (rec.gate_fault.count(gid)) continue;  // stuck or dead gates stay put
            double gm = gm_of(gid);
            if (gm > hi) {
                setpoints[gid] += cfg.equalize_step_v;
                moved = true;
            } else if (gm < lo) {
                setpoints[gid] -= cfg.equalize_step_v;
                moved = true;
            }
        }
        if (!moved) return;
    }
    rec.equalize_fault[channel] = "no-convergence";
}

// Barrier-barrier scan for one dot at the configured plunger offset.
inline ScanPlan barrier_barrier_plan(const ProbeSession& session, const TuneupConfig& cfg,
                                     const std::string& dot_id, const DeviceRecord& rec,
                                     const std::map<std::string, double>& setpoints) {
    const auto& d = session.layout().dot(dot_id);
    ScanPlan plan;
    plan.kind = ScanKind::barrier_barrier;
    plan.dot_id = dot_id;
    plan.bias_v = cfg.bias_v;
    plan.lockin_hz = cfg.lockin_hz;
    double c1 = rec.gate_vt.at(d.barriers[0]) + cfg.bb_center_offset_v;
    double c2 = rec.gate_vt.at(d.barriers[1]) + cfg.bb_center_offset_v;
    plan.swept.ramps = {{d.barriers[0], c1 - cfg.bb_span_v / 2, c1 + cfg.bb_span_v / 2}};
    plan.swept.points = cfg.bb_points;
    plan.stepped.ramps = {{d.barriers[1], c2 - cfg.bb_span_v / 2, c2 + cfg.bb_span_v / 2}};
    plan.stepped.points = cfg.bb_points;
    plan.fixed = setpoints;
    plan.fixed[d.plunger] = rec.gate_vt.at(d.plunger) + cfg.bb_plunger_offset_v;
    plan.fixed.erase(d.barriers[0]);
    plan.fixed.erase(d.barriers[1]);
    return plan;
}

// Charge-sensing plan: plunger swept relative to its VT, both barriers
// stepped over the same interval with separate values centered on the
// corner-fit result; the reported vertical axis is the first barrier.
inline ScanPlan charge_sensing_plan(const ProbeSession& session, const TuneupConfig& cfg,
                                    const std::string& dot_id, const DeviceRecord& rec,
                                    const std::map<std::string, double>& setpoints) {
    const auto& d = session.layout().dot(dot_id);
    const CornerFit& corner = rec.corners.at(dot_id);
    ScanPlan plan;
    plan.kind = ScanKind::plunger_vs_barriers;
    plan.dot_id = dot_id;
    plan.bias_v = cfg.bias_v;
    plan.lockin_hz = cfg.lockin_hz;
    double vp = rec.gate_vt.at(d.plunger);
    plan.swept.ramps = {{d.plunger, vp - cfg.cs_plunger_below_v, vp + cfg.cs_plunger_above_v}};
    plan.swept.points = cfg.cs_plunger_points;
    plan.stepped.ramps = {
        {d.barriers[0], corner.b1 - cfg.cs_barrier_below_v, corner.b1 + cfg.cs_barrier_above_v},
        {d.barriers[1], corner.b2 - cfg.cs_barrier_below_v, corner.b2 + cfg.cs_barrier_above_v}};
    plan.stepped.points = cfg.cs_barrier_points;
    plan.fixed = setpoints;
    plan.fixed.erase(d.plunger);
    plan.fixed.erase(d.barriers[0]);
    plan.fixed.erase(d.barriers[1]);
    return plan;
}

// Full per-device flow: channel turn-on, per-gate VT, isolation,
// equalization, per-dot corner fits, then charge sensing with each qubit
// dot and its nearest sensor tuned and the idle sensors pinched off. Stage
// failures flag the affected component and skip only its later stages.
inline PipelineResult run_device_pipeline(ProbeSession& session, const TuneupConfig& cfg = {},
                                          const AnalysisParams& analysis = {},
                                          bool charge_sensing = true, bool dqd_scans = false) {
    const auto& lay = session.layout();
    PipelineResult out;
    DeviceRecord& rec = out.record;
    rec.die_x = session.die_x();
    rec.die_y = session.die_y();
    rec.device_index = session.device_index();
    rec.wafer_id = session.wafer().id;
    rec.seed = session.wafer().spec.seed;

    std::map<std::string, double> setpoints;
    turn_on_channels(session, cfg, rec, setpoints);
    measure_gate_vts(session, cfg, rec, setpoints);

    // ohmic inference: a contact is linearly controllable iff some channel
    // through it turned on
    rec.ohmic_status.assign(lay.ohmic_count, 0);
    for (size_t ch = 0; ch < lay.channels.size(); ++ch) {
        if (!rec.channel_vt.count(lay.channels[ch].id)) continue;
        rec.ohmic_status[lay.channels[ch].ohmics[0]] = 1;
        rec.ohmic_status[lay.channels[ch].ohmics[1]] = 1;
    }

    isolate_channels(session, cfg, rec, setpoints);
    for (const auto& chan : lay.channels) equalize_density(session, cfg, chan.id, rec, setpoints);

    // per-dot tune-up from barrier-barrier scans
    for (const auto& d : lay.dots) {
        CornerFit corner;
        bool gates_measured = rec.gate_ok(d.plunger) && rec.gate_ok(d.barriers[0]) &&
                              rec.gate_ok(d.barriers[1]);
        if (!gates_measured) {
            corner.fault = "gates-unmeasured";
        } else {
            ScanPlan plan = barrier_barrier_plan(session, cfg, d.id, rec, setpoints);
            ScanGrid grid = session.run_scan(plan);
            corner = fit_corner(grid, cfg, session.model().i_on * cfg.bias_v /
                                               session.model().bias_ref_v);
            rec.scans.push_back({to_string(plan.kind), d.id, "", ""});
            out.grids.push_back(std::move(grid));
        }
        rec.corners[d.id] = corner;
    }

    if (charge_sensing) {
        for (const auto& d : lay.dots) {
            if (d.is_sensor) continue;
            if (!rec.dot_ok(d.id)) continue;  // no viable tune-up point to scan from

            auto v = setpoints;
            // park idle sensor plungers below pinch-off, bias the active one
            for (const auto& sd : lay.dots) {
                if (!sd.is_sensor || !rec.gate_vt.count(sd.plunger)) continue;
                if (sd.id == d.paired_sensor) {
                    if (rec.dot_ok(sd.id))
                        v[sd.plunger] = rec.corners.at(sd.id).b1 + cfg.bb_plunger_offset_v;
                } else {
                    v[sd.plunger] = rec.gate_vt.at(sd.plunger) - cfg.sensor_pinch_below_v;
                }
            }
            ScanPlan plan = charge_sensing_plan(session, cfg, d.id, rec, v);
            ScanGrid grid = session.run_scan(plan);
            AnalysisResult ar = analyze_scan(grid, analysis);
            rec.summaries[d.id] = ar.summary;
            rec.scans.push_back({to_string(plan.kind), d.id, "", ""});
            out.grids.push_back(std::move(grid));
        }
    }

    if (dqd_scans) {
        for (const auto& d : lay.dots) {
            if (d.is_sensor) continue;
            // pair each dot with its right neighbor under the same sensor
            int idx = std::stoi(d.id.substr(1));
            if (idx >= lay.qubit_dots) continue;
            char buf[8];
            std::snprintf(buf, sizeof buf, "D%02d", idx + 1);
            const auto& e = lay.dot(buf);
            if (e.paired_sensor != d.paired_sensor) continue;
            if (!rec.gate_ok(d.plunger) || !rec.gate_ok(e.plunger)) continue;
            bool barriers_ok = rec.gate_ok(d.barriers[0]) && rec.gate_ok(d.barriers[1]) &&
                               rec.gate_ok(e.barriers[1]);
            if (!barriers_ok) continue;

            ScanPlan plan;
            plan.kind = ScanKind::plunger_plunger;
            plan.dot_id = d.id;
            plan.dot_id2 = e.id;
            plan.bias_v = cfg.bias_v;
            plan.lockin_hz = cfg.lockin_hz;
            double vp1 = rec.gate_vt.at(d.plunger), vp2 = rec.gate_vt.at(e.plunger);
            plan.swept.ramps = {
                {d.plunger, vp1 + cfg.dqd_plunger_below_v, vp1 + cfg.dqd_plunger_above_v}};
            plan.swept.points = cfg.dqd_plunger_points;
            plan.stepped.ramps = {
                {e.plunger, vp2 + cfg.dqd_plunger_below_v, vp2 + cfg.dqd_plunger_above_v}};
            plan.stepped.points = cfg.dqd_plunger_points;
            plan.fixed = setpoints;
            for (const auto& b : {d.barriers[0], d.barriers[1], e.barriers[1]})
                plan.fixed[b] = rec.gate_vt.at(b) + cfg.bb_center_offset_v;
            plan.fixed.erase(d.plunger);
            plan.fixed.erase(e.plunger);

            ScanGrid grid = session.run_scan(plan);
            // eye-equivalent flag: transition curves detected along both axes
            AnalysisResult a1 = analyze_scan(grid, analysis);
            ScanGrid t;  // transposed view for the other dot's lines
            t.plan = grid.plan;
            std::swap(t.plan.swept, t.plan.stepped);
            t.values.resize(grid.values.size());
            for (int i = 0; i < grid.rows(); ++i)
                for (int j = 0; j < grid.cols(); ++j)
                    t.values[static_cast<size_t>(j) * grid.rows() + i] = grid.at(i, j);
            AnalysisResult a2 = analyze_scan(t, analysis);
            rec.dqd_success[d.id + "+" + e.id] = !a1.curves.empty() && !a2.curves.empty();
            rec.scans.push_back({to_string(plan.kind), d.id, e.id, ""});
            out.grids.push_back(std::move(grid));
        }
    }

    rec.setpoints = setpoints;
    return out;
}

// ---- serialization -----------------------------------------------------------

inline nlohmann::json to_json(const CornerFit& c) {
    nlohmann::json j;
    j["ok"] = c.ok;
    if (!c.fault.empty()) j["fault"] = c.fault;
    j["b1"] = c.b1;
    j["b2"] = c.b2;
    j["w1"] = c.w1;
    j["w2"] = c.w2;
    j["amplitude"] = c.amplitude;
    j["offset"] = c.offset;
    j["rms_residual"] = c.rms_residual;
    return j;
}

inline CornerFit corner_from_json(const nlohmann::json& j) {
    CornerFit c;
    c.ok = j.at("ok").get<bool>();
    if (j.contains("fault")) c.fault = j.at("fault").get<std::string>();
    c.b1 = j.at("b1").get<double>();
    c.b2 = j.at("b2").get<double>();
    c.w1 = j.at("w1").get<double>();
    c.w2 = j.at("w2").get<double>();
    c.amplitude = j.at("amplitude").get<double>();
    c.offset = j.at("offset").get<double>();
    c.rms_residual = j.at("rms_residual").get<double>();
    return c;
}

inline nlohmann::json to_json(const DeviceRecord& r) {
    nlohmann::json j;
    j["schema"] = kRecordSchema;
    j["die_x"] = r.die_x;
    j["die_y"] = r.die_y;
    j["device"] = r.device_index;
    j["wafer_id"] = r.wafer_id;
    j["seed"] = r.seed;
    j["channel_vt"] = r.channel_vt;
    j["channel_fault"] = r.channel_fault;
    j["gate_vt"] = r.gate_vt;
    j["gate_fault"] = r.gate_fault;
    j["ohmic_status"] = r.ohmic_status;
    j["isolation_ok"] = r.isolation_ok;
    j["isolation_v"] = r.isolation_v;
    j["setpoints"] = r.setpoints;
    j["equalize_fault"] = r.equalize_fault;
    nlohmann::json corners;
    for (const auto& [id, c] : r.corners) corners[id] = to_json(c);
    j["corners"] = corners;
    nlohmann::json summaries;
    for (const auto& [id, s] : r.summaries) summaries[id] = to_json(s);
    j["summaries"] = summaries;
    j["dqd_success"] = r.dqd_success;
    nlohmann::json scans = nlohmann::json::array();
    for (const auto& s : r.scans)
        scans.push_back({{"kind", s.kind}, {"dot", s.dot}, {"dot2", s.dot2}, {"file", s.file}});
    j["scans"] = scans;
    return j;
}

inline DeviceRecord record_from_json(const nlohmann::json& j) {
    const std::string schema = j.at("schema").get<std::string>();
    if (schema != kRecordSchema) throw schema_error(schema, kRecordSchema);
    DeviceRecord r;
    r.die_x = j.at("die_x").get<int>();
    r.die_y = j.at("die_y").get<int>();
    r.device_index = j.at("device").get<int>();
    r.wafer_id = j.at("wafer_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.channel_vt = j.at("channel_vt").get<std::map<std::string, double>>();
    r.channel_fault = j.at("channel_fault").get<std::map<std::string, std::string>>();
    r.gate_vt = j.at("gate_vt").get<std::map<std::string, double>>();
    r.gate_fault = j.at("gate_fault").get<std::map<std::string, std::string>>();
    r.ohmic_status = j.at("ohmic_status").get<std::vector<int>>();
    r.isolation_ok = j.at("isolation_ok").get<bool>();
    r.isolation_v = j.at("isolation_v").get<double>();
    r.setpoints = j.at("setpoints").get<std::map<std::string, double>>();
    r.equalize_fault = j.at("equalize_fault").get<std::map<std::string, std::string>>();
    for (const auto& [id, c] : j.at("corners").items()) r.corners[id] = corner_from_json(c);
    for (const auto& [id, s] : j.at("summaries").items()) r.summaries[id] = summary_from_json(s);
    r.dqd_success = j.at("dqd_success").get<std::map<std::string, bool>>();
    for (const auto& s : j.at("scans"))
        r.scans.push_back({s.at("kind").get<std::string>(), s.at("dot").get<std::string>(),
                           s.at("dot2").get<std::string>(), s.at("file").get<std::string>()});
    return r;
}

}  // namespace qdprobe
