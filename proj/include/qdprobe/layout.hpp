#pragma once

#include <array>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qdprobe/errors.hpp"

namespace qdprobe {

enum class GateRole { plunger, barrier, reservoir, screening };

inline const char* to_string(GateRole r) {
    switch (r) {
        case GateRole::plunger: return "plunger";
        case GateRole::barrier: return "barrier";
        case GateRole::reservoir: return "reservoir";
        case GateRole::screening: return "screening";
    }
    return "?";
}

inline GateRole gate_role_from_string(const std::string& s) {
    if (s == "plunger") return GateRole::plunger;
    if (s == "barrier") return GateRole::barrier;
    if (s == "reservoir") return GateRole::reservoir;
    if (s == "screening") return GateRole::screening;
    throw validation_error("unknown gate role: " + s);
}

struct GateInfo {
    std::string id;
    GateRole role = GateRole::plunger;
    int channel = -1;  // index into channels; the screening gate sits on the qubit channel
};

struct DotInfo {
    std::string id;
    bool is_sensor = false;
    std::string plunger;
    std::array<std::string, 2> barriers;
    std::string paired_sensor;  // empty for sensor dots
    int channel = 0;
};

struct ChannelInfo {
    std::string id;
    std::vector<std::string> gates;     // series conduction gates, in order
    std::array<int, 2> ohmics{0, 0};    // indices into the device ohmic list
};

// Gate-level wiring of one device. The default is the 12-quantum-dot array:
// a 27-gate linear qubit channel (2 reservoir, 13 barrier, 12 plunger gates),
// four 4-gate sensor channels, and one center screening gate, 44 gates in
// all. Ohmics: qubit source/drain, a common sensor source, and one drain per
// sensor channel (7 total).
struct DeviceLayout {
    int qubit_dots = 12;
    int sensor_count = 4;  // sensor dots (one per sensor channel)

    std::vector<GateInfo> gates;
    std::vector<DotInfo> dots;          // qubit dots first, then sensor dots
    std::vector<ChannelInfo> channels;  // channel 0 = qubit channel
    int ohmic_count = 0;
    std::vector<GateRole> qubit_sequence;  // roles along the qubit channel

    const GateInfo& gate(const std::string& id) const {
        for (const auto& g : gates)
            if (g.id == id) return g;
        throw validation_error("unknown gate id: " + id);
    }
    bool has_gate(const std::string& id) const {
        for (const auto& g : gates)
            if (g.id == id) return true;
        return false;
    }
    const DotInfo& dot(const std::string& id) const {
        for (const auto& d : dots)
            if (d.id == id) return d;
        throw validation_error("unknown dot id: " + id);
    }
    int channel_index(const std::string& id) const {
        for (size_t i = 0; i < channels.size(); ++i)
            if (channels[i].id == id) return static_cast<int>(i);
        throw validation_error("unknown channel id: " + id);
    }

    static std::string plunger_name(int i) {  // 1-based
        char buf[16];
        std::snprintf(buf, sizeof buf, "Q_P%02d", i);
        return buf;
    }
    static std::string barrier_name(int i) {  // 1-based
        char buf[16];
        std::snprintf(buf, sizeof buf, "Q_B%02d", i);
        return buf;
    }

    // Standard linear array: n_dots plunger gates interleaved with n_dots+1
    // barriers, flanked by two reservoir gates; n_sensors sensor channels of
    // (reservoir, barrier, plunger, barrier); one screening gate.
    static DeviceLayout linear_array(int n_dots, int n_sensors) {
        if (n_dots < 1 || n_sensors < 1)
            throw validation_error("layout: need at least one qubit dot and one sensor");
        if (n_dots % n_sensors != 0)
            throw validation_error("layout: qubit dot count must divide evenly among sensors");
        DeviceLayout L;
        L.qubit_dots = n_dots;
        L.sensor_count = n_sensors;

        ChannelInfo qchan;
        qchan.id = "qubit";
        qchan.ohmics = {0, 1};
        auto add_gate = [&](const std::string& id, GateRole role, int chan) {
            L.gates.push_back({id, role, chan});
            return id;
        };
        qchan.gates.push_back(add_gate("Q_RES_L", GateRole::reservoir, 0));
        L.qubit_sequence.push_back(GateRole::reservoir);
        for (int i = 1; i <= n_dots; ++i) {
            qchan.gates.push_back(add_gate(barrier_name(i), GateRole::barrier, 0));
            L.qubit_sequence.push_back(GateRole::barrier);
            qchan.gates.push_back(add_gate(plunger_name(i), GateRole::plunger, 0));
            L.qubit_sequence.push_back(GateRole::plunger);
        }
        qchan.gates.push_back(add_gate(barrier_name(n_dots + 1), GateRole::barrier, 0));
        L.qubit_sequence.push_back(GateRole::barrier);
        qchan.gates.push_back(add_gate("Q_RES_R", GateRole::reservoir, 0));
        L.qubit_sequence.push_back(GateRole::reservoir);
        L.channels.push_back(qchan);

        // sensor channels share ohmic 2 as a common source
        for (int s = 1; s <= n_sensors; ++s) {
            char pre[16];
            std::snprintf(pre, sizeof pre, "S%d", s);
            ChannelInfo sc;
            sc.id = pre;
            sc.ohmics = {2, 2 + s};
            sc.gates.push_back(add_gate(std::string(pre) + "_RES", GateRole::reservoir, s));
            sc.gates.push_back(add_gate(std::string(pre) + "_B1", GateRole::barrier, s));
            sc.gates.push_back(add_gate(std::string(pre) + "_P", GateRole::plunger, s));
            sc.gates.push_back(add_gate(std::string(pre) + "_B2", GateRole::barrier, s));
            L.channels.push_back(sc);
        }
        add_gate("SCR", GateRole::screening, 0);
        L.ohmic_count = 3 + n_sensors;

        const int dots_per_sensor = n_dots / n_sensors;
        for (int i = 1; i <= n_dots; ++i) {
            DotInfo d;
            char buf[16];
            std::snprintf(buf, sizeof buf, "D%02d", i);
            d.id = buf;
            d.is_sensor = false;
            d.plunger = plunger_name(i);
            d.barriers = {barrier_name(i), barrier_name(i + 1)};
            int s = (i - 1) / dots_per_sensor + 1;
            std::snprintf(buf, sizeof buf, "SD%d", s);
            d.paired_sensor = buf;
            d.channel = 0;
            L.dots.push_back(d);
        }
        for (int s = 1; s <= n_sensors; ++s) {
            DotInfo d;
            char buf[16];
            std::snprintf(buf, sizeof buf, "SD%d", s);
            d.id = buf;
            d.is_sensor = true;
            std::snprintf(buf, sizeof buf, "S%d", s);
            d.plunger = std::string(buf) + "_P";
            d.barriers = {std::string(buf) + "_B1", std::string(buf) + "_B2"};
            d.channel = s;
            L.dots.push_back(d);
        }
        return L;
    }

    static DeviceLayout twelve_dot() { return linear_array(12, 4); }

    int gate_count() const { return static_cast<int>(gates.size()); }
    int dot_count() const { return static_cast<int>(dots.size()); }
};

// Mirror-symmetric plunger/barrier pairs of the qubit-channel linear array.
// The gate sequence must read the same under reversal (role-wise); the
// center gate of an odd-length array stays unpaired. Reservoir and
// screening gates are not part of the mismatch dataset.
inline std::vector<std::pair<std::string, std::string>> mirror_pairs(const DeviceLayout& layout) {
    const auto& seq = layout.channels.at(0).gates;
    const int n = static_cast<int>(seq.size());
    for (int i = 0; i < n / 2; ++i) {
        if (layout.gate(seq[i]).role != layout.gate(seq[n - 1 - i]).role)
            throw validation_error("layout has no mirror symmetry axis: " + seq[i] + " vs " +
                                   seq[n - 1 - i]);
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < n / 2; ++i) {
        GateRole r = layout.gate(seq[i]).role;
        if (r == GateRole::plunger || r == GateRole::barrier)
            pairs.emplace_back(seq[i], seq[n - 1 - i]);
    }
    return pairs;
}

// As above but for an arbitrary role sequence (used by small synthetic
// layouts in tests); returns index pairs.
inline std::vector<std::pair<int, int>> mirror_pairs(const std::vector<GateRole>& seq) {
    const int n = static_cast<int>(seq.size());
    for (int i = 0; i < n / 2; ++i)
        if (seq[i] != seq[n - 1 - i])
            throw validation_error("gate sequence has no mirror symmetry axis");
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n / 2; ++i)
        if (seq[i] == GateRole::plunger || seq[i] == GateRole::barrier)
            pairs.emplace_back(i, n - 1 - i);
    return pairs;
}

}  // namespace qdprobe
