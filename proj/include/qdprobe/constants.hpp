#pragma once

namespace qdprobe::phys {

// CODATA 2018 exact values.
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double k_boltzmann      = 1.380649e-23;      // J/K
inline constexpr double hbar             = 1.054571817e-34;   // J*s

// Thermal energy k_B*T expressed in volts of chemical potential per unit
// lever arm: divide gate-voltage excursions by (2*kT/e/alpha) to get the
// argument of a temperature-broadened transition line shape.
inline double thermal_voltage(double temp_k) {
    return k_boltzmann * temp_k / elementary_charge;
}

}  // namespace qdprobe::phys
