//! Physical constants (CODATA 2018) and unit helpers. Everything downstream
//! works in SI units.

use std::f64::consts::PI;

/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Joules per GeV (exact, from the elementary charge).
pub const JOULE_PER_GEV: f64 = 1.602_176_634e-10;
/// Cubic centimetres per cubic metre.
pub const CM3_PER_M3: f64 = 1.0e6;

/// Angular frequency (rad/s) from an ordinary frequency in Hz.
pub fn angular(freq_hz: f64) -> f64 {
    2.0 * PI * freq_hz
}

/// Ordinary frequency (Hz) from an angular frequency.
pub fn hertz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Boltzmann factor `exp(-ħω / k_B T)` for a quantum of angular frequency
/// `omega`. Returns 0 at zero temperature.
pub fn boltzmann_factor(omega: f64, temp: f64) -> f64 {
    if temp <= 0.0 {
        return 0.0;
    }
    (-HBAR * omega / (BOLTZMANN * temp)).exp()
}

/// Mean Bose occupation `1 / (exp(ħω/k_B T) - 1)`.
pub fn bose_occupation(omega: f64, temp: f64) -> f64 {
    if temp <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (BOLTZMANN * temp)).exp_m1()
}
