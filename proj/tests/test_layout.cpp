#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "qdprobe/layout.hpp"

using namespace qdprobe;

TEST_CASE("twelve-dot layout matches the device description", "[layout]") {
    DeviceLayout L = DeviceLayout::twelve_dot();
    REQUIRE(L.gate_count() == 44);
    REQUIRE(L.channels.size() == 5);
    REQUIRE(L.channels[0].gates.size() == 27);  // 12 P + 13 B + 2 reservoir
    REQUIRE(L.dot_count() == 16);               // 12 qubit + 4 sensor dots
    REQUIRE(L.ohmic_count == 7);

    int plungers = 0, barriers = 0;
    for (const auto& g : L.gates) {
        if (g.channel != 0) continue;
        if (g.role == GateRole::plunger) ++plungers;
        if (g.role == GateRole::barrier) ++barriers;
    }
    // the screening gate is tested on the qubit channel but is not part of
    // the 25-gate linear array
    REQUIRE(plungers == 12);
    REQUIRE(barriers == 13);

    // every qubit dot: one plunger, two adjacent barriers, a paired sensor
    for (const auto& d : L.dots) {
        if (d.is_sensor) {
            REQUIRE(d.paired_sensor.empty());
            continue;
        }
        REQUIRE(L.gate(d.plunger).role == GateRole::plunger);
        REQUIRE(L.gate(d.barriers[0]).role == GateRole::barrier);
        REQUIRE(L.gate(d.barriers[1]).role == GateRole::barrier);
        REQUIRE_FALSE(d.paired_sensor.empty());
        REQUIRE(L.dot(d.paired_sensor).is_sensor);
    }
}

// Oracle: enumerate the symmetry of the 25-gate linear array by hand and
// compare with mirror_pairs.
TEST_CASE("mirror pairs of the 12QD array", "[layout][oracle]") {
    DeviceLayout L = DeviceLayout::twelve_dot();
    auto pairs = mirror_pairs(L);
    REQUIRE(pairs.size() == 12);  // 6 plunger + 6 barrier pairs

    std::set<std::pair<std::string, std::string>> expected;
    for (int i = 1; i <= 6; ++i)
        expected.insert({DeviceLayout::plunger_name(i), DeviceLayout::plunger_name(13 - i)});
    for (int i = 1; i <= 6; ++i)
        expected.insert({DeviceLayout::barrier_name(i), DeviceLayout::barrier_name(14 - i)});
    std::set<std::pair<std::string, std::string>> got(pairs.begin(), pairs.end());
    REQUIRE(got == expected);

    // center barrier B07 is unpaired
    for (const auto& [a, b] : pairs) {
        REQUIRE(a != "Q_B07");
        REQUIRE(b != "Q_B07");
    }
}

TEST_CASE("smallest symmetric gate sequence has one plunger pair", "[layout]") {
    std::vector<GateRole> toy{GateRole::plunger, GateRole::barrier, GateRole::plunger};
    auto pairs = mirror_pairs(toy);
    REQUIRE(pairs.size() == 1);
    REQUIRE(pairs[0] == std::pair<int, int>{0, 2});
}

TEST_CASE("asymmetric layout is rejected", "[layout]") {
    std::vector<GateRole> bad{GateRole::plunger, GateRole::barrier, GateRole::barrier};
    REQUIRE_THROWS_AS(mirror_pairs(bad), validation_error);
}

TEST_CASE("layout validation", "[layout]") {
    REQUIRE_THROWS_AS(DeviceLayout::linear_array(0, 1), validation_error);
    REQUIRE_THROWS_AS(DeviceLayout::linear_array(12, 5), validation_error);  // 12 % 5 != 0
    auto L = DeviceLayout::linear_array(3, 1);
    REQUIRE(L.channels[0].gates.size() == 2 + 3 + 4);
    REQUIRE_THROWS_AS(L.gate("nope"), validation_error);
}
