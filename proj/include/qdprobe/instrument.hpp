#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qdprobe/constants.hpp"
#include "qdprobe/errors.hpp"
#include "qdprobe/rng.hpp"
#include "qdprobe/wafer.hpp"

namespace qdprobe {

inline constexpr const char* kScanSchema = "qdprobe-scan v1";

// Response model of the virtual measurement stack.
struct InstrumentModel {
    double electron_temp_k = 1.6;
    double i_on = 40e-9;          // saturated channel current at 1 mV bias
    double bias_ref_v = 0.001;    // current scales linearly with bias/bias_ref
    double xtalk_coeff = 0.02;    // per-gate cross-channel coupling weight
    double screening_span_v = 0.2;  // coupling rises linearly over this span
    double lockin_amplitude = 1.0;  // transition line peak, lock-in units
};

struct NoiseModel {
    double white_current_rms = 5e-12;  // A, per transport sample
    double white_lockin_rms = 0.03;    // lock-in units, per sensing sample
    double sensor_jump_rate = 0.005;   // probability per scan line
    double sensor_jump_sigma = 0.030;  // V, gate-referred jump magnitude
    double background_amp = 0.25;      // slowly varying sensor background
    double background_scale_v = 0.35;  // its characteristic voltage scale

    static NoiseModel zero() {
        NoiseModel n;
        n.white_current_rms = 0;
        n.white_lockin_rms = 0;
        n.sensor_jump_rate = 0;
        n.sensor_jump_sigma = 0;
        n.background_amp = 0;
        return n;
    }
};

enum class ScanKind { barrier_barrier, plunger_vs_barriers, plunger_plunger };

inline const char* to_string(ScanKind k) {
    switch (k) {
        case ScanKind::barrier_barrier: return "barrier-barrier";
        case ScanKind::plunger_vs_barriers: return "plunger-vs-barriers";
        case ScanKind::plunger_plunger: return "plunger-plunger";
    }
    return "?";
}

inline ScanKind scan_kind_from_string(const std::string& s) {
    if (s == "barrier-barrier") return ScanKind::barrier_barrier;
    if (s == "plunger-vs-barriers") return ScanKind::plunger_vs_barriers;
    if (s == "plunger-plunger") return ScanKind::plunger_plunger;
    throw validation_error("unknown scan kind: " + s);
}

struct GateRamp {
    std::string gate;
    double start = 0, stop = 0;
};

// One scan axis. Several gates may advance simultaneously with independent
// voltage values; the first ramp is the reported axis.
struct AxisSpec {
    std::vector<GateRamp> ramps;
    int points = 2;

    double step(size_t ramp = 0) const {
        return (ramps.at(ramp).stop - ramps.at(ramp).start) / (points - 1);
    }
    double value(int i, size_t ramp = 0) const {
        return ramps.at(ramp).start + i * step(ramp);
    }
    void validate() const {
        if (points < 2) throw validation_error("scan axis: points must be >= 2");
        if (ramps.empty()) throw validation_error("scan axis: no gates");
        for (const auto& r : ramps)
            if (!(r.start < r.stop))
                throw validation_error("scan axis: start must be < stop for " + r.gate);
    }
};

struct ScanPlan {
    ScanKind kind = ScanKind::barrier_barrier;
    AxisSpec swept;    // inner (fast) axis
    AxisSpec stepped;  // outer (slow) axis
    std::map<std::string, double> fixed;
    double lockin_hz = 1000.0;
    double bias_v = 0.001;
    std::string dot_id;   // target dot (sensing) or scanned dot (transport)
    std::string dot_id2;  // second dot for plunger-plunger scans

    void validate(const DeviceLayout& layout) const {
        swept.validate();
        stepped.validate();
        for (const auto& r : swept.ramps)
            if (!layout.has_gate(r.gate)) throw validation_error("scan plan: unknown gate " + r.gate);
        for (const auto& r : stepped.ramps)
            if (!layout.has_gate(r.gate)) throw validation_error("scan plan: unknown gate " + r.gate);
        for (const auto& [g, v] : fixed)
            if (!layout.has_gate(g)) throw validation_error("scan plan: unknown gate " + g);
        if (lockin_hz <= 0) throw validation_error("scan plan: lockin_hz must be > 0");
    }
};

struct ScanGrid {
    ScanPlan plan;
    int die_x = 0, die_y = 0, device_index = 0;
    std::uint64_t seed = 0;
    std::string units = "V,arb";
    std::vector<double> values;  // row-major: [stepped][swept]

    int rows() const { return plan.stepped.points; }
    int cols() const { return plan.swept.points; }
    double& at(int i, int j) { return values[static_cast<size_t>(i) * cols() + j]; }
    double at(int i, int j) const { return values[static_cast<size_t>(i) * cols() + j]; }
    double swept_voltage(double j) const {
        return plan.swept.ramps[0].start + j * plan.swept.step(0);
    }
    double stepped_voltage(double i) const {
        return plan.stepped.ramps[0].start + i * plan.stepped.step(0);
    }
};

namespace detail {

inline double logistic(double x) {
    if (x > 40) return 1.0;
    if (x < -40) return 0.0;
    return 1.0 / (1.0 + std::exp(-x));
}

inline double sech2(double x) {
    if (std::fabs(x) > 40) return 0.0;
    double c = std::cosh(x);
    return 1.0 / (c * c);
}

}  // namespace detail

// Stateful per-device probe connection. The sensor-offset state models slow
// charge rearrangement near the active charge sensor; it is re-zeroed when a
// sensing scan starts (tuning the sensor absorbs whatever drift came before)
// and jumps between scan lines per the noise model.
class ProbeSession {
public:
    ProbeSession(const Wafer& wafer, int die_index, int device_index,
                 InstrumentModel model = {}, NoiseModel noise = {})
        : wafer_(&wafer),
          die_index_(die_index),
          device_index_(device_index),
          model_(model),
          noise_(noise),
          rng_(mix_key(wafer.spec.seed, "probe-session", wafer.dies.at(die_index).x,
                       wafer.dies.at(die_index).y, device_index)) {}

    const Wafer& wafer() const { return *wafer_; }
    const DeviceLayout& layout() const { return wafer_->layout; }
    const DeviceGroundTruth& ground_truth() const {
        return wafer_->device(die_index_, device_index_);
    }
    int die_x() const { return wafer_->dies.at(die_index_).x; }
    int die_y() const { return wafer_->dies.at(die_index_).y; }
    int die_index() const { return die_index_; }
    int device_index() const { return device_index_; }
    const InstrumentModel& model() const { return model_; }
    const NoiseModel& noise() const { return noise_; }
    double sensor_offset() const { return sensor_offset_; }

    // ---- transport -------------------------------------------------------

    // Noise-free closed form: I = (bias/bias_ref) * I_on * prod_g L((V_g -
    // VT_g)/w_g), times the screening-mediated cross-channel multiplier.
    // Stuck gates contribute a factor of 1 (they cannot pinch), dead ohmics
    // kill the channel entirely.
    double current_model(const std::string& channel_id,
                         const std::map<std::string, double>& voltages, double bias) const {
        const auto& lay = layout();
        const auto& gt = ground_truth();
        int ch = lay.channel_index(channel_id);
        const auto& chan = lay.channels[ch];
        if (!gt.ohmic_ok.at(chan.ohmics[0]) || !gt.ohmic_ok.at(chan.ohmics[1])) return 0.0;

        for (const auto& [g, v] : voltages)
            if (!lay.has_gate(g)) throw validation_error("unknown gate id: " + g);

        double prod = 1.0;
        auto gate_factor = [&](const std::string& gid) {
            const auto& g = gt.gates.at(gid);
            if (!g.responds) return 1.0;
            auto it = voltages.find(gid);
            if (it == voltages.end())
                throw validation_error("channel gate not assigned: " + gid);
            return detail::logistic((it->second - g.true_vt) / g.pinchoff_width);
        };
        for (const auto& gid : chan.gates) prod *= gate_factor(gid);
        if (ch == 0) prod *= gate_factor("SCR");  // the screening gate can deplete the qubit channel

        double m = 1.0 + screening_coupling(voltages) * xtalk_sum(ch, voltages);
        if (m < 0) m = 0;
        return (bias / model_.bias_ref_v) * model_.i_on * prod * m;
    }

    double measure_current(const std::string& channel_id,
                           const std::map<std::string, double>& voltages, double bias) {
        double i = current_model(channel_id, voltages, bias);
        return i + noise_.white_current_rms * rng_.normal();
    }

    // d(I_a)/d(common shift of channel_b gates), symmetric finite difference,
    // normalized by I_on per volt. The coupling enters the current linearly,
    // so the estimate matches the analytic derivative to rounding.
    double cross_conductance(const std::string& channel_a, const std::string& channel_b,
                             const std::map<std::string, double>& voltages, double bias,
                             double half_step = 0.005) {
        if (channel_a == channel_b)
            throw validation_error("cross_conductance: need two distinct channels");
        const auto& lay = layout();
        const auto& bgates = lay.channels.at(lay.channel_index(channel_b)).gates;
        auto shifted = [&](double h) {
            std::map<std::string, double> v = voltages;
            for (const auto& g : bgates) v.at(g) += h;
            return measure_current(channel_a, v, bias);
        };
        double d = (shifted(half_step) - shifted(-half_step)) / (2 * half_step);
        return d / model_.i_on;
    }

    // ---- charge sensing ----------------------------------------------------

    double tunnel_rate(const DotGroundTruth& dot, double vb1, double vb2) const {
        double delta = 0.5 * ((vb1 - dot.corner_b1) + (vb2 - dot.corner_b2));
        return dot.tunnel_rate_prefactor_hz * std::exp(delta / dot.tunnel_rate_scale_v);
    }

    double visibility(double gamma_hz, double lockin_hz) const {
        if (gamma_hz < lockin_hz) return 0.0;
        return 1.0 - lockin_hz / gamma_hz;
    }

    double broadening(double gamma_hz) const {
        double r = phys::hbar * gamma_hz / (phys::k_boltzmann * model_.electron_temp_k);
        return std::max(1.0, r);
    }

    // Demodulated charge-sensing signal for one dot: a sum of
    // temperature-broadened transition lines, visibility-gated by the tunnel
    // rate, plus a slowly varying sensor background. Both the dot and its
    // paired sensor must be viable for lines to appear.
    double lockin_signal_model(const std::string& dot_id,
                               const std::map<std::string, double>& voltages, double lockin_hz,
                               double sensor_offset) const {
        const auto& lay = layout();
        const auto& gt = ground_truth();
        const DotInfo& di = lay.dot(dot_id);
        if (di.paired_sensor.empty())
            throw validation_error("lockin_signal: dot " + dot_id + " has no paired sensor");
        const auto& dot = gt.dots.at(dot_id);
        const auto& sensor = gt.dots.at(di.paired_sensor);

        const double vp = voltages.at(di.plunger);
        const double vb1 = voltages.at(di.barriers[0]);
        const double vb2 = voltages.at(di.barriers[1]);

        double signal = 0.0;
        const double gamma = tunnel_rate(dot, vb1, vb2);
        const double vis = visibility(gamma, lockin_hz);
        if (dot.viable && sensor.viable && vis > 0.0) {
            const double beta = broadening(gamma);
            // half-width of the line argument, in plunger volts
            const double denom =
                2.0 * phys::thermal_voltage(model_.electron_temp_k) * beta / dot.lever_plunger;
            const double barrier_shift = (dot.lever_b1 * (vb1 - dot.corner_b1) +
                                          dot.lever_b2 * (vb2 - dot.corner_b2)) /
                                         dot.lever_plunger;
            const double reach = 10.0 * denom;
            for (int n = 1; n <= 50; ++n) {
                double vn = dot.true_v1e + (n - 1) * dot.addition_voltage - barrier_shift +
                            sensor_offset;
                if (vn > vp + reach) break;
                if (vn < vp - reach) continue;
                signal += model_.lockin_amplitude * vis * detail::sech2((vp - vn) / denom);
            }
        }
        if (noise_.background_amp > 0) {
            const double tau = 6.283185307179586;
            double ph1 = tau * static_cast<double>(mix_key(wafer_->spec.seed, "bg-phase-p",
                                                           gt.die_x, gt.die_y,
                                                           gt.device_index) >> 11) * 0x1.0p-53;
            double ph2 = tau * static_cast<double>(mix_key(wafer_->spec.seed, "bg-phase-b",
                                                           gt.die_x, gt.die_y,
                                                           gt.device_index) >> 11) * 0x1.0p-53;
            signal += noise_.background_amp *
                      (0.5 * std::sin(tau * vp / noise_.background_scale_v + ph1) +
                       0.5 * std::sin(tau * vb1 / (2 * noise_.background_scale_v) + ph2));
        }
        return signal;
    }

    double lockin_signal(const std::string& dot_id, const std::map<std::string, double>& voltages,
                         double lockin_hz = 1000.0) {
        double s = lockin_signal_model(dot_id, voltages, lockin_hz, sensor_offset_);
        return s + noise_.white_lockin_rms * rng_.normal();
    }

    // ---- raster acquisition ------------------------------------------------

    // Row-by-row raster: stepped axis outer, swept axis inner. Sensing scans
    // re-zero the sensor offset at the start and may jump it at each row
    // boundary.
    ScanGrid run_scan(const ScanPlan& plan) {
        plan.validate(layout());
        const auto& lay = layout();
        ScanGrid grid;
        grid.plan = plan;
        grid.die_x = die_x();
        grid.die_y = die_y();
        grid.device_index = device_index_;
        grid.seed = wafer_->spec.seed;
        grid.units = plan.kind == ScanKind::barrier_barrier ? "V,A" : "V,arb";
        grid.values.resize(static_cast<size_t>(plan.stepped.points) * plan.swept.points);

        const bool sensing = plan.kind != ScanKind::barrier_barrier;
        std::string channel_id;
        if (!sensing) {
            if (plan.dot_id.empty())
                throw validation_error("barrier-barrier plan needs a target dot");
            channel_id = lay.channels.at(lay.dot(plan.dot_id).channel).id;
        }
        if (sensing) sensor_offset_ = 0.0;

        std::map<std::string, double> v = plan.fixed;
        for (int i = 0; i < plan.stepped.points; ++i) {
            if (sensing && i > 0 && rng_.bernoulli(noise_.sensor_jump_rate))
                sensor_offset_ += rng_.normal(0.0, noise_.sensor_jump_sigma);
            for (size_t r = 0; r < plan.stepped.ramps.size(); ++r)
                v[plan.stepped.ramps[r].gate] = plan.stepped.value(i, r);
            for (int j = 0; j < plan.swept.points; ++j) {
                for (size_t r = 0; r < plan.swept.ramps.size(); ++r)
                    v[plan.swept.ramps[r].gate] = plan.swept.value(j, r);
                double y;
                if (!sensing) {
                    y = measure_current(channel_id, v, plan.bias_v);
                } else {
                    y = lockin_signal(plan.dot_id, v, plan.lockin_hz);
                    if (plan.kind == ScanKind::plunger_plunger && !plan.dot_id2.empty())
                        y += lockin_signal_model(plan.dot_id2, v, plan.lockin_hz, sensor_offset_);
                }
                if (!std::isfinite(y))
                    throw std::runtime_error("scan produced a non-finite sample");
                grid.at(i, j) = y;
            }
        }
        return grid;
    }

private:
    double screening_coupling(const std::map<std::string, double>& voltages) const {
        auto it = voltages.find("SCR");
        if (it == voltages.end()) return 0.0;
        const auto& gt = ground_truth();
        double k = (it->second - gt.screening_couple_vt) / model_.screening_span_v;
        return std::clamp(k, 0.0, 1.0);
    }

    // Linear coupling from the gates of every other channel; the reference
    // is each gate's own VT so an un-biased wafer couples to nothing.
    double xtalk_sum(int channel, const std::map<std::string, double>& voltages) const {
        const auto& lay = layout();
        const auto& gt = ground_truth();
        double s = 0.0;
        for (const auto& gi : lay.gates) {
            if (gi.role == GateRole::screening || gi.channel == channel) continue;
            auto it = voltages.find(gi.id);
            if (it == voltages.end()) continue;
            s += model_.xtalk_coeff * (it->second - gt.gates.at(gi.id).true_vt);
        }
        return s;
    }

    const Wafer* wafer_;
    int die_index_;
    int device_index_;
    InstrumentModel model_;
    NoiseModel noise_;
    Stream rng_;
    double sensor_offset_ = 0.0;
};

// ---- scan grid serialization ----------------------------------------------
// Text header followed by row-major comma-separated values. Doubles are
// printed with %.17g, which round-trips bit-exactly.

namespace detail {
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

inline void write_scan(const ScanGrid& g, std::ostream& out) {
    out << "# " << kScanSchema << "\n";
    out << "kind = " << to_string(g.plan.kind) << "\n";
    out << "die = " << g.die_x << "," << g.die_y << "\n";
    out << "device = " << g.device_index << "\n";
    out << "seed = " << g.seed << "\n";
    if (!g.plan.dot_id.empty()) out << "dot = " << g.plan.dot_id << "\n";
    if (!g.plan.dot_id2.empty()) out << "dot2 = " << g.plan.dot_id2 << "\n";
    out << "units = " << g.units << "\n";
    out << "lockin_hz = " << detail::fmt17(g.plan.lockin_hz) << "\n";
    out << "bias_v = " << detail::fmt17(g.plan.bias_v) << "\n";
    out << "swept_points = " << g.plan.swept.points << "\n";
    out << "stepped_points = " << g.plan.stepped.points << "\n";
    for (const auto& r : g.plan.swept.ramps)
        out << "swept = " << r.gate << " " << detail::fmt17(r.start) << " "
            << detail::fmt17(r.stop) << "\n";
    for (const auto& r : g.plan.stepped.ramps)
        out << "stepped = " << r.gate << " " << detail::fmt17(r.start) << " "
            << detail::fmt17(r.stop) << "\n";
    for (const auto& [gate, v] : g.plan.fixed)
        out << "fixed = " << gate << " " << detail::fmt17(v) << "\n";
    out << "data\n";
    for (int i = 0; i < g.rows(); ++i) {
        for (int j = 0; j < g.cols(); ++j) {
            if (j) out << ',';
            out << detail::fmt17(g.at(i, j));
        }
        out << '\n';
    }
}

inline ScanGrid read_scan(std::istream& in, const std::string& origin = "<scan>") {
    std::string line;
    if (!std::getline(in, line)) throw validation_error(origin + ": empty scan file");
    const std::string expect = std::string("# ") + kScanSchema;
    if (Config::trim(line) != expect)
        throw schema_error(Config::trim(line), kScanSchema);

    ScanGrid g;
    GateRamp ramp;
    bool in_data = false;
    int swept_points = 0, stepped_points = 0;
    while (!in_data && std::getline(in, line)) {
        std::string s = Config::trim(line);
        if (s.empty()) continue;
        if (s == "data") {
            in_data = true;
            break;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) throw validation_error(origin + ": bad header line: " + s);
        std::string key = Config::trim(s.substr(0, eq));
        std::string val = Config::trim(s.substr(eq + 1));
        std::istringstream vs(val);
        if (key == "kind") g.plan.kind = scan_kind_from_string(val);
        else if (key == "die") {
            char comma;
            vs >> g.die_x >> comma >> g.die_y;
        } else if (key == "device") g.device_index = std::stoi(val);
        else if (key == "seed") g.seed = std::stoull(val);
        else if (key == "dot") g.plan.dot_id = val;
        else if (key == "dot2") g.plan.dot_id2 = val;
        else if (key == "units") g.units = val;
        else if (key == "lockin_hz") g.plan.lockin_hz = std::strtod(val.c_str(), nullptr);
        else if (key == "bias_v") g.plan.bias_v = std::strtod(val.c_str(), nullptr);
        else if (key == "swept_points") swept_points = std::stoi(val);
        else if (key == "stepped_points") stepped_points = std::stoi(val);
        else if (key == "swept" || key == "stepped") {
            std::string a, b;
            vs >> ramp.gate >> a >> b;
            ramp.start = std::strtod(a.c_str(), nullptr);
            ramp.stop = std::strtod(b.c_str(), nullptr);
            (key == "swept" ? g.plan.swept.ramps : g.plan.stepped.ramps).push_back(ramp);
        } else if (key == "fixed") {
            std::string gate, a;
            vs >> gate >> a;
            g.plan.fixed[gate] = std::strtod(a.c_str(), nullptr);
        } else {
            throw validation_error(origin + ": unknown scan header key: " + key);
        }
    }
    if (!in_data) throw validation_error(origin + ": missing data section");
    if (swept_points < 2 || stepped_points < 2)
        throw validation_error(origin + ": missing axis point counts");
    g.plan.swept.points = swept_points;
    g.plan.stepped.points = stepped_points;
    g.values.reserve(static_cast<size_t>(swept_points) * stepped_points);
    int row = 0;
    while (std::getline(in, line)) {
        std::string s = Config::trim(line);
        if (s.empty()) continue;
        ++row;
        size_t pos = 0;
        int count = 0;
        while (pos <= s.size()) {
            size_t comma = s.find(',', pos);
            std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos
                                                                       : comma - pos);
            char* end = nullptr;
            double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || !std::isfinite(v))
                throw validation_error(origin + ": bad value in data row " + std::to_string(row));
            g.values.push_back(v);
            ++count;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (count != swept_points)
            throw validation_error(origin + ": row " + std::to_string(row) + " has " +
                                   std::to_string(count) + " values, expected " +
                                   std::to_string(swept_points));
    }
    if (row != stepped_points)
        throw validation_error(origin + ": got " + std::to_string(row) + " rows, expected " +
                               std::to_string(stepped_points));
    return g;
}

inline std::string scan_to_string(const ScanGrid& g) {
    std::ostringstream out;
    write_scan(g, out);
    return out.str();
}

inline ScanGrid scan_from_string(const std::string& text, const std::string& origin = "<scan>") {
    std::istringstream in(text);
    return read_scan(in, origin);
}

}  // namespace qdprobe
