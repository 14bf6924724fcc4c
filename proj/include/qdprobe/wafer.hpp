#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdprobe/config.hpp"
#include "qdprobe/errors.hpp"
#include "qdprobe/layout.hpp"
#include "qdprobe/rng.hpp"

namespace qdprobe {

inline constexpr const char* kWaferSchema = "qdprobe-wafer v1";

// Threshold-voltage disorder: a low-order polynomial over normalized wafer
// coordinates (the systematic part) plus i.i.d. Gaussian per gate (the
// random part). Dot-level quantities get their own random draws.
struct DisorderModel {
    // c0 + cx*u + cy*v + cxx*u^2 + cyy*v^2 + cxy*u*v, with (u,v) in [-1,1]
    std::array<double, 6> systematic_vt{0, 0, 0, 0, 0, 0};
    double random_sigma_vt = 0.058;        // V
    double dot_random_sigma_v1e = 0.0154;  // V, on top of the plunger's own VT disorder
    double v1e_offset_mean = 0.12;         // V above the plunger's true VT
    double addition_voltage_mean = 0.079;  // V
    double addition_voltage_sigma = 0.012; // V
    double fault_rate_ohmic = 0.0;
    double fault_rate_gate = 0.0;
    double fault_rate_dot = 0.0;

    double systematic(double u, double v) const {
        return systematic_vt[0] + systematic_vt[1] * u + systematic_vt[2] * v +
               systematic_vt[3] * u * u + systematic_vt[4] * v * v + systematic_vt[5] * u * v;
    }
    void validate() const {
        if (random_sigma_vt < 0 || dot_random_sigma_v1e < 0 || addition_voltage_sigma < 0)
            throw validation_error("disorder: sigmas must be >= 0");
        for (double r : {fault_rate_ohmic, fault_rate_gate, fault_rate_dot})
            if (r < 0 || r > 1) throw validation_error("disorder: fault rates must be in [0,1]");
        if (addition_voltage_mean <= 0)
            throw validation_error("disorder: addition voltage mean must be > 0");
    }
};

struct FaultSpec {
    enum class Kind { ohmic, gate, dot };
    Kind kind;
    int die_x = 0, die_y = 0;
    int device = 0;
    std::string target;  // gate id, dot id, or ohmic index as text
};

struct WaferSpec {
    int die_count = 58;
    int devices_per_die = 4;
    int qubit_dots = 12;
    int sensor_count = 4;
    DisorderModel disorder;
    double sige_barrier_depth_nm = 50.0;  // 30 or 50
    std::uint64_t seed = 1;

    // role baselines and electrostatics
    double vt_baseline_plunger = 1.00;
    double vt_baseline_barrier = 0.95;
    double vt_baseline_reservoir = 0.90;
    double vt_baseline_screening = 0.05;   // the screening gate depletes far below the others
    double screening_couple_vt = 0.35;     // coupling to sensor channels dies below this
    double pinchoff_width = 0.030;         // V
    double lever_arm_plunger = 0.08;       // eV/V onto the dot under it
    double lever_arm_barrier = 0.010;      // eV/V onto the adjacent dot
    double tunnel_prefactor_hz = 1.4841e5; // Gamma at the corner reference point
    double tunnel_prefactor_sigma_ln = 0.77;
    double tunnel_scale_v = 0.013;         // barrier volts per e-fold of Gamma
    double vt_confine_min = 0.2;           // below this a gate cannot confine a dot

    std::vector<FaultSpec> injected_faults;

    DeviceLayout layout() const { return DeviceLayout::linear_array(qubit_dots, sensor_count); }

    void validate() const {
        if (die_count < 1) throw validation_error("wafer: die_count must be >= 1");
        if (devices_per_die < 1) throw validation_error("wafer: devices_per_die must be >= 1");
        if (sige_barrier_depth_nm != 30.0 && sige_barrier_depth_nm != 50.0)
            throw validation_error("wafer: sige_barrier_depth_nm must be 30 or 50");
        if (pinchoff_width <= 0) throw validation_error("wafer: pinchoff_width must be > 0");
        if (lever_arm_plunger <= 0 || lever_arm_plunger > 1 || lever_arm_barrier <= 0 ||
            lever_arm_barrier > 1)
            throw validation_error("wafer: lever arms must be in (0,1]");
        disorder.validate();
        DeviceLayout::linear_array(qubit_dots, sensor_count);  // throws if inconsistent
    }
};

struct GateGroundTruth {
    std::string gate_id;
    GateRole role = GateRole::plunger;
    double true_vt = 0.0;
    double pinchoff_width = 0.030;
    std::map<std::string, double> lever_arms;  // dot id -> alpha (eV/V)
    bool responds = true;                      // false: stuck gate, cannot pinch its channel
};

struct DotGroundTruth {
    std::string dot_id;
    bool is_sensor = false;
    double true_v1e = 0.0;           // plunger V of the first transition at the reference point
    double addition_voltage = 0.0;   // V between consecutive transitions
    double charging_energy_ev = 0.0; // = addition_voltage * plunger lever arm
    double tunnel_rate_prefactor_hz = 0.0;
    double tunnel_rate_scale_v = 0.013;
    std::string paired_sensor;
    // reference barrier point (the true tune-up corner) and lever arms,
    // copied here so the transition ladder is self-contained
    double corner_b1 = 0.0, corner_b2 = 0.0;
    double lever_plunger = 0.08, lever_b1 = 0.01, lever_b2 = 0.01;
    bool viable = true;
};

struct DieSite {
    int x = 0, y = 0;       // die grid coordinates (signed)
    double u = 0, v = 0;    // normalized [-1,1] position of the die center
};

struct DeviceGroundTruth {
    int die_x = 0, die_y = 0;
    int device_index = 0;
    double u = 0, v = 0;  // systematic disorder is evaluated at the device center
    std::map<std::string, GateGroundTruth> gates;
    std::map<std::string, DotGroundTruth> dots;
    std::vector<bool> ohmic_ok;
    double screening_couple_vt = 0.35;
};

struct Wafer {
    WaferSpec spec;
    std::string id;
    DeviceLayout layout;
    std::vector<DieSite> dies;
    std::vector<DeviceGroundTruth> devices;  // die-major, device-minor

    int device_count() const { return static_cast<int>(devices.size()); }
    const DeviceGroundTruth& device(int die_index, int dev_index) const {
        return devices.at(static_cast<size_t>(die_index) * spec.devices_per_die + dev_index);
    }
    DeviceGroundTruth& device(int die_index, int dev_index) {
        return devices.at(static_cast<size_t>(die_index) * spec.devices_per_die + dev_index);
    }
};

// Die map: the canonical 58-die disc (row widths 6,8,10,10,10,8,6, outer
// ring already excluded); other counts get a generic filled disc truncated
// to the requested count.
inline std::vector<DieSite> build_die_map(int die_count) {
    std::vector<DieSite> out;
    auto push_rows = [&](const std::vector<int>& widths) {
        int ny = static_cast<int>(widths.size());
        int y0 = -(ny - 1) / 2;
        double vmax = std::max(1.0, (ny - 1) / 2.0);
        int wmax = *std::max_element(widths.begin(), widths.end());
        double umax = std::max(1.0, wmax / 2.0 - 0.5);
        for (int r = 0; r < ny; ++r) {
            int w = widths[r];
            int x0 = -w / 2;
            for (int i = 0; i < w; ++i) {
                DieSite d;
                d.x = x0 + i;
                d.y = y0 + r;
                d.u = (d.x + 0.5) / (umax + 0.5);
                d.v = d.y / vmax;
                out.push_back(d);
            }
        }
    };
    if (die_count == 58) {
        push_rows({6, 8, 10, 10, 10, 8, 6});
        return out;
    }
    if (die_count == 1) {
        out.push_back({0, 0, 0.0, 0.0});
        return out;
    }
    // generic disc: grow the radius until enough sites exist, keep the first
    // die_count in (y, x) order
    double r = 1.0;
    std::vector<DieSite> sites;
    while (true) {
        sites.clear();
        int span = static_cast<int>(std::ceil(r)) + 1;
        for (int y = -span; y <= span; ++y)
            for (int x = -span; x <= span; ++x) {
                double cx = x + 0.5;
                if (cx * cx + static_cast<double>(y) * y <= r * r)
                    sites.push_back({x, y, cx / r, y / r});
            }
        if (static_cast<int>(sites.size()) >= die_count) break;
        r += 0.25;
    }
    sites.resize(die_count);
    return sites;
}

namespace detail {
inline double role_baseline(const WaferSpec& s, GateRole r) {
    switch (r) {
        case GateRole::plunger: return s.vt_baseline_plunger;
        case GateRole::barrier: return s.vt_baseline_barrier;
        case GateRole::reservoir: return s.vt_baseline_reservoir;
        case GateRole::screening: return s.vt_baseline_screening;
    }
    return 0.0;
}
}  // namespace detail

// Deterministic function of (spec, seed). Every gate draws
// true_vt = baseline(role) + systematic(u,v) + N(0, random_sigma_vt); every
// dot draws its first-transition offset, addition voltage, and tunnel-rate
// prefactor. Random faults come from dedicated substreams so that enabling
// them does not perturb the electrostatics draws; scripted faults are
// applied as a final overlay.
inline Wafer generate_wafer(const WaferSpec& spec) {
    spec.validate();
    Wafer w;
    w.spec = spec;
    w.layout = spec.layout();
    w.dies = build_die_map(spec.die_count);
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "w%02dnm-seed%llu", static_cast<int>(spec.sige_barrier_depth_nm),
                      static_cast<unsigned long long>(spec.seed));
        w.id = buf;
    }

    w.devices.reserve(static_cast<size_t>(spec.die_count) * spec.devices_per_die);
    for (int di = 0; di < spec.die_count; ++di) {
        const DieSite& site = w.dies[di];
        for (int dev = 0; dev < spec.devices_per_die; ++dev) {
            Stream rng(mix_key(spec.seed, "device", site.x, site.y, dev));
            DeviceGroundTruth g;
            g.die_x = site.x;
            g.die_y = site.y;
            g.device_index = dev;
            g.u = site.u;
            g.v = site.v;
            g.screening_couple_vt = spec.screening_couple_vt;
            const double sys = spec.disorder.systematic(site.u, site.v);

            for (const auto& gi : w.layout.gates) {
                GateGroundTruth gt;
                gt.gate_id = gi.id;
                gt.role = gi.role;
                gt.pinchoff_width = spec.pinchoff_width;
                gt.true_vt = detail::role_baseline(spec, gi.role) + sys +
                             rng.normal(0.0, spec.disorder.random_sigma_vt);
                g.gates[gi.id] = gt;
            }
            for (const auto& d : w.layout.dots) {
                DotGroundTruth dt;
                dt.dot_id = d.id;
                dt.is_sensor = d.is_sensor;
                dt.paired_sensor = d.paired_sensor;
                dt.lever_plunger = spec.lever_arm_plunger;
                dt.lever_b1 = spec.lever_arm_barrier;
                dt.lever_b2 = spec.lever_arm_barrier;
                dt.true_v1e = g.gates.at(d.plunger).true_vt + spec.disorder.v1e_offset_mean +
                              rng.normal(0.0, spec.disorder.dot_random_sigma_v1e);
                dt.addition_voltage = std::max(
                    1e-4, rng.normal(spec.disorder.addition_voltage_mean,
                                     spec.disorder.addition_voltage_sigma));
                dt.charging_energy_ev = dt.addition_voltage * dt.lever_plunger;
                dt.tunnel_rate_prefactor_hz =
                    spec.tunnel_prefactor_hz *
                    std::exp(rng.normal(0.0, spec.tunnel_prefactor_sigma_ln));
                dt.tunnel_rate_scale_v = spec.tunnel_scale_v;
                dt.corner_b1 = g.gates.at(d.barriers[0]).true_vt;
                dt.corner_b2 = g.gates.at(d.barriers[1]).true_vt;
                g.dots[d.id] = dt;

                auto& pg = g.gates.at(d.plunger);
                pg.lever_arms[d.id] = spec.lever_arm_plunger;
                g.gates.at(d.barriers[0]).lever_arms[d.id] = spec.lever_arm_barrier;
                g.gates.at(d.barriers[1]).lever_arms[d.id] = spec.lever_arm_barrier;
            }
            g.ohmic_ok.assign(w.layout.ohmic_count, true);

            // random faults, independent substream per device
            Stream frng(mix_key(spec.seed, "faults", site.x, site.y, dev));
            for (int o = 0; o < w.layout.ohmic_count; ++o)
                if (frng.bernoulli(spec.disorder.fault_rate_ohmic)) g.ohmic_ok[o] = false;
            for (const auto& gi : w.layout.gates)
                if (frng.bernoulli(spec.disorder.fault_rate_gate))
                    g.gates.at(gi.id).responds = false;
            for (const auto& d : w.layout.dots)
                if (frng.bernoulli(spec.disorder.fault_rate_dot)) {
                    // marginal confinement gate: anomalously low pinch-off
                    const std::string& victim = d.barriers[frng.uniform_int(2)];
                    g.gates.at(victim).true_vt = frng.uniform(0.05, 0.18);
                }

            w.devices.push_back(std::move(g));
        }
    }

    // scripted fault overlay
    for (const auto& f : spec.injected_faults) {
        DeviceGroundTruth* target = nullptr;
        for (auto& d : w.devices)
            if (d.die_x == f.die_x && d.die_y == f.die_y && d.device_index == f.device) {
                target = &d;
                break;
            }
        if (!target)
            throw validation_error("fault spec addresses a device not on the wafer");
        switch (f.kind) {
            case FaultSpec::Kind::ohmic: {
                int idx = std::stoi(f.target);
                if (idx < 0 || idx >= static_cast<int>(target->ohmic_ok.size()))
                    throw validation_error("fault spec: bad ohmic index " + f.target);
                target->ohmic_ok[idx] = false;
                break;
            }
            case FaultSpec::Kind::gate: {
                target->gates.at(f.target).responds = false;
                break;
            }
            case FaultSpec::Kind::dot: {
                const DotInfo& d = w.layout.dot(f.target);
                Stream r(mix_key(spec.seed, "injected-dot", f.die_x, f.die_y,
                                 f.device * 100 + w.layout.channel_index("qubit")));
                const std::string& victim = d.barriers[r.uniform_int(2)];
                target->gates.at(victim).true_vt = r.uniform(0.05, 0.18);
                break;
            }
        }
    }

    // dot viability: every defining gate must respond and must pinch off at
    // a healthy voltage, and the channel ohmics must conduct
    for (auto& dev : w.devices) {
        for (const auto& d : w.layout.dots) {
            auto& dt = dev.dots.at(d.id);
            const auto& ch = w.layout.channels.at(d.channel);
            bool ohmics_ok = dev.ohmic_ok.at(ch.ohmics[0]) && dev.ohmic_ok.at(ch.ohmics[1]);
            bool gates_ok = true;
            for (const std::string& gid : {d.plunger, d.barriers[0], d.barriers[1]}) {
                const auto& gg = dev.gates.at(gid);
                if (!gg.responds || gg.true_vt < spec.vt_confine_min) gates_ok = false;
            }
            dt.viable = ohmics_ok && gates_ok;
        }
    }
    return w;
}

// Constant-interaction ladder: the N-th transition sits one addition
// voltage above the previous. The barrier setpoint is the reported
// (first-barrier) axis value; both barriers are assumed displaced together
// from the reference corner, which shifts the line through the barrier
// lever arms.
inline double true_transition_voltage(const DotGroundTruth& dot, int electron_number,
                                      double barrier_setpoint) {
    if (electron_number < 1)
        throw validation_error("true_transition_voltage: electron_number must be >= 1");
    const double delta_b = barrier_setpoint - dot.corner_b1;
    const double barrier_shift = (dot.lever_b1 + dot.lever_b2) * delta_b / dot.lever_plunger;
    return dot.true_v1e + (electron_number - 1) * dot.addition_voltage - barrier_shift;
}

inline double true_transition_voltage(const DotGroundTruth& dot, int electron_number) {
    return true_transition_voltage(dot, electron_number, dot.corner_b1);
}

// ---- serialization -------------------------------------------------------

inline nlohmann::json to_json(const GateGroundTruth& g) {
    nlohmann::json j;
    j["role"] = to_string(g.role);
    j["true_vt"] = g.true_vt;
    j["pinchoff_width"] = g.pinchoff_width;
    j["responds"] = g.responds;
    j["lever_arms"] = g.lever_arms;
    return j;
}

inline nlohmann::json to_json(const DotGroundTruth& d) {
    nlohmann::json j;
    j["is_sensor"] = d.is_sensor;
    j["true_v1e"] = d.true_v1e;
    j["addition_voltage"] = d.addition_voltage;
    j["charging_energy_ev"] = d.charging_energy_ev;
    j["tunnel_rate_prefactor_hz"] = d.tunnel_rate_prefactor_hz;
    j["tunnel_rate_scale_v"] = d.tunnel_rate_scale_v;
    j["paired_sensor"] = d.paired_sensor;
    j["corner_b1"] = d.corner_b1;
    j["corner_b2"] = d.corner_b2;
    j["lever_plunger"] = d.lever_plunger;
    j["lever_b1"] = d.lever_b1;
    j["lever_b2"] = d.lever_b2;
    j["viable"] = d.viable;
    return j;
}

inline nlohmann::json wafer_to_json(const Wafer& w) {
    nlohmann::json j;
    j["schema"] = kWaferSchema;
    j["id"] = w.id;
    j["seed"] = w.spec.seed;
    j["die_count"] = w.spec.die_count;
    j["devices_per_die"] = w.spec.devices_per_die;
    j["sige_barrier_depth_nm"] = w.spec.sige_barrier_depth_nm;
    nlohmann::json dies = nlohmann::json::array();
    for (const auto& d : w.dies) dies.push_back({{"x", d.x}, {"y", d.y}, {"u", d.u}, {"v", d.v}});
    j["dies"] = dies;
    nlohmann::json devices = nlohmann::json::array();
    for (const auto& dev : w.devices) {
        nlohmann::json dj;
        dj["die_x"] = dev.die_x;
        dj["die_y"] = dev.die_y;
        dj["device"] = dev.device_index;
        dj["screening_couple_vt"] = dev.screening_couple_vt;
        nlohmann::json gj;
        for (const auto& [id, g] : dev.gates) gj[id] = to_json(g);
        dj["gates"] = gj;
        nlohmann::json dotj;
        for (const auto& [id, d] : dev.dots) dotj[id] = to_json(d);
        dj["dots"] = dotj;
        dj["ohmic_ok"] = dev.ohmic_ok;
        devices.push_back(dj);
    }
    j["devices"] = devices;
    return j;
}

// ---- config binding ------------------------------------------------------

inline FaultSpec parse_fault_entry(FaultSpec::Kind kind, const std::string& entry) {
    // "die_x,die_y,device,target"
    auto parts = Config::split_list(entry, ',');
    if (parts.size() != 4)
        throw validation_error("fault entry must be 'die_x,die_y,device,target': " + entry);
    FaultSpec f;
    f.kind = kind;
    f.die_x = std::stoi(parts[0]);
    f.die_y = std::stoi(parts[1]);
    f.device = std::stoi(parts[2]);
    f.target = parts[3];
    return f;
}

inline WaferSpec wafer_spec_from_config(const Config& cfg) {
    WaferSpec s;
    s.die_count = static_cast<int>(cfg.get_int("wafer", "die_count", s.die_count));
    s.devices_per_die = static_cast<int>(cfg.get_int("wafer", "devices_per_die", s.devices_per_die));
    s.qubit_dots = static_cast<int>(cfg.get_int("wafer", "qubit_dots", s.qubit_dots));
    s.sensor_count = static_cast<int>(cfg.get_int("wafer", "sensor_dots", s.sensor_count));
    s.sige_barrier_depth_nm = cfg.get_double("wafer", "sige_barrier_depth_nm", s.sige_barrier_depth_nm);
    s.seed = cfg.get_u64("wafer", "seed", s.seed);
    s.vt_baseline_plunger = cfg.get_double("wafer", "vt_baseline_plunger", s.vt_baseline_plunger);
    s.vt_baseline_barrier = cfg.get_double("wafer", "vt_baseline_barrier", s.vt_baseline_barrier);
    s.vt_baseline_reservoir = cfg.get_double("wafer", "vt_baseline_reservoir", s.vt_baseline_reservoir);
    s.vt_baseline_screening = cfg.get_double("wafer", "vt_baseline_screening", s.vt_baseline_screening);
    s.screening_couple_vt = cfg.get_double("wafer", "screening_couple_vt", s.screening_couple_vt);
    s.pinchoff_width = cfg.get_double("wafer", "pinchoff_width", s.pinchoff_width);
    s.lever_arm_plunger = cfg.get_double("wafer", "lever_arm_plunger", s.lever_arm_plunger);
    s.lever_arm_barrier = cfg.get_double("wafer", "lever_arm_barrier", s.lever_arm_barrier);
    s.tunnel_prefactor_hz = cfg.get_double("wafer", "tunnel_prefactor_hz", s.tunnel_prefactor_hz);
    s.tunnel_prefactor_sigma_ln =
        cfg.get_double("wafer", "tunnel_prefactor_sigma_ln", s.tunnel_prefactor_sigma_ln);
    s.tunnel_scale_v = cfg.get_double("wafer", "tunnel_scale_v", s.tunnel_scale_v);
    s.vt_confine_min = cfg.get_double("wafer", "vt_confine_min", s.vt_confine_min);

    auto& d = s.disorder;
    d.random_sigma_vt = cfg.get_double("wafer.disorder", "random_sigma_vt", d.random_sigma_vt);
    d.dot_random_sigma_v1e =
        cfg.get_double("wafer.disorder", "dot_random_sigma_v1e", d.dot_random_sigma_v1e);
    d.v1e_offset_mean = cfg.get_double("wafer.disorder", "v1e_offset_mean", d.v1e_offset_mean);
    d.addition_voltage_mean =
        cfg.get_double("wafer.disorder", "addition_voltage_mean", d.addition_voltage_mean);
    d.addition_voltage_sigma =
        cfg.get_double("wafer.disorder", "addition_voltage_sigma", d.addition_voltage_sigma);
    d.fault_rate_ohmic = cfg.get_double("wafer.disorder", "fault_rate_ohmic", d.fault_rate_ohmic);
    d.fault_rate_gate = cfg.get_double("wafer.disorder", "fault_rate_gate", d.fault_rate_gate);
    d.fault_rate_dot = cfg.get_double("wafer.disorder", "fault_rate_dot", d.fault_rate_dot);
    if (cfg.has("wafer.disorder", "systematic_vt")) {
        auto coeffs = Config::split_list(cfg.get_string("wafer.disorder", "systematic_vt"), ',');
        if (coeffs.size() > 6)
            throw validation_error("systematic_vt takes at most 6 coefficients");
        for (size_t i = 0; i < coeffs.size(); ++i) d.systematic_vt[i] = std::stod(coeffs[i]);
    }

    for (const auto& e : Config::split_list(cfg.get_string("faults", "dots", "")))
        s.injected_faults.push_back(parse_fault_entry(FaultSpec::Kind::dot, e));
    for (const auto& e : Config::split_list(cfg.get_string("faults", "gates", "")))
        s.injected_faults.push_back(parse_fault_entry(FaultSpec::Kind::gate, e));
    for (const auto& e : Config::split_list(cfg.get_string("faults", "ohmics", "")))
        s.injected_faults.push_back(parse_fault_entry(FaultSpec::Kind::ohmic, e));
    return s;
}

inline void wafer_spec_to_config(const WaferSpec& s, Config& cfg) {
    cfg.set_int("wafer", "die_count", s.die_count);
    cfg.set_int("wafer", "devices_per_die", s.devices_per_die);
    cfg.set_int("wafer", "qubit_dots", s.qubit_dots);
    cfg.set_int("wafer", "sensor_dots", s.sensor_count);
    cfg.set_double("wafer", "sige_barrier_depth_nm", s.sige_barrier_depth_nm);
    cfg.set("wafer", "seed", std::to_string(s.seed));
    cfg.set_double("wafer", "vt_baseline_plunger", s.vt_baseline_plunger);
    cfg.set_double("wafer", "vt_baseline_barrier", s.vt_baseline_barrier);
    cfg.set_double("wafer", "vt_baseline_reservoir", s.vt_baseline_reservoir);
    cfg.set_double("wafer", "vt_baseline_screening", s.vt_baseline_screening);
    cfg.set_double("wafer", "screening_couple_vt", s.screening_couple_vt);
    cfg.set_double("wafer", "pinchoff_width", s.pinchoff_width);
    cfg.set_double("wafer", "lever_arm_plunger", s.lever_arm_plunger);
    cfg.set_double("wafer", "lever_arm_barrier", s.lever_arm_barrier);
    cfg.set_double("wafer", "tunnel_prefactor_hz", s.tunnel_prefactor_hz);
    cfg.set_double("wafer", "tunnel_prefactor_sigma_ln", s.tunnel_prefactor_sigma_ln);
    cfg.set_double("wafer", "tunnel_scale_v", s.tunnel_scale_v);
    cfg.set_double("wafer", "vt_confine_min", s.vt_confine_min);

    const auto& d = s.disorder;
    cfg.set_double("wafer.disorder", "random_sigma_vt", d.random_sigma_vt);
    cfg.set_double("wafer.disorder", "dot_random_sigma_v1e", d.dot_random_sigma_v1e);
    cfg.set_double("wafer.disorder", "v1e_offset_mean", d.v1e_offset_mean);
    cfg.set_double("wafer.disorder", "addition_voltage_mean", d.addition_voltage_mean);
    cfg.set_double("wafer.disorder", "addition_voltage_sigma", d.addition_voltage_sigma);
    cfg.set_double("wafer.disorder", "fault_rate_ohmic", d.fault_rate_ohmic);
    cfg.set_double("wafer.disorder", "fault_rate_gate", d.fault_rate_gate);
    cfg.set_double("wafer.disorder", "fault_rate_dot", d.fault_rate_dot);
    {
        std::string sys;
        char buf[40];
        for (size_t i = 0; i < s.disorder.systematic_vt.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", s.disorder.systematic_vt[i]);
            if (i) sys += ",";
            sys += buf;
        }
        cfg.set("wafer.disorder", "systematic_vt", sys);
    }
    std::string dots, gates, ohmics;
    for (const auto& f : s.injected_faults) {
        std::string entry = std::to_string(f.die_x) + "," + std::to_string(f.die_y) + "," +
                            std::to_string(f.device) + "," + f.target;
        std::string* dst = f.kind == FaultSpec::Kind::dot     ? &dots
                           : f.kind == FaultSpec::Kind::gate  ? &gates
                                                              : &ohmics;
        if (!dst->empty()) *dst += ";";
        *dst += entry;
    }
    if (!dots.empty()) cfg.set("faults", "dots", dots);
    if (!gates.empty()) cfg.set("faults", "gates", gates);
    if (!ohmics.empty()) cfg.set("faults", "ohmics", ohmics);
}

}  // namespace qdprobe
