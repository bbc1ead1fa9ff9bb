//! Physical parameters of the qubit–resonator device.

use serde::{Deserialize, Serialize};

use crate::constants::angular;
use crate::error::{Error, Result};

/// Device constants in SI units; frequencies are angular (rad/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    /// ω_p, rad/s
    pub phonon_freq: f64,
    /// ω_q, rad/s
    pub qubit_freq: f64,
    /// α, rad/s (negative for a transmon)
    pub anharmonicity: f64,
    /// g, rad/s
    pub coupling: f64,
    /// ω_FSR, rad/s
    pub fsr: f64,
    pub mode_number: u32,
    #[serde(rename = "T1_phonon")]
    pub t1_phonon: f64,
    #[serde(rename = "T2_phonon")]
    pub t2_phonon: f64,
    #[serde(rename = "T1_ge")]
    pub t1_ge: f64,
    #[serde(rename = "T1_ef")]
    pub t1_ef: f64,
    #[serde(rename = "T_phi")]
    pub t_phi: f64,
    /// Qubit temperature right after the cooling gate, K.
    #[serde(rename = "T_qb_init")]
    pub t_qb_init: f64,
    #[serde(rename = "T_qb_bath")]
    pub t_qb_bath: f64,
    /// Phonon environment temperature, K.
    #[serde(rename = "T_env")]
    pub t_env: f64,
    /// Resonator height L, m.
    pub length: f64,
    /// Acoustic mode waist µ (1/e radius), m.
    pub waist: f64,
    /// Mass density, kg/m³.
    pub density: f64,
    /// Stiffness c₃₃, Pa.
    pub c33: f64,
    /// Piezoelectric coefficient e₃₃, C/m².
    pub e33: f64,
    pub rel_permittivity: f64,
}

/// Literature range of the AlN piezoelectric coefficient, C/m².
pub const E33_RANGE: (f64, f64) = (0.4, 2.0);

impl DeviceParams {
    /// Mode 404 of the measured device.
    pub fn table1() -> Self {
        Self {
            phonon_freq: angular(5048.630e6),
            qubit_freq: angular(5068.81e6),
            anharmonicity: angular(-185.12e6),
            coupling: angular(280e3),
            fsr: angular(12.5e6),
            mode_number: 404,
            t1_phonon: 112e-6,
            t2_phonon: 200e-6,
            t1_ge: 28e-6,
            t1_ef: 20e-6,
            t_phi: 20e-6,
            t_qb_init: 0.030,
            t_qb_bath: 0.040,
            t_env: 0.010,
            length: 435e-6,
            waist: 27e-6,
            density: 3980.0,
            c33: 500e9,
            e33: 0.4,
            rel_permittivity: 10.0,
        }
    }

    /// The measured device with every lifetime pushed to 10³ s and a
    /// zero-temperature qubit preparation: the lossless reference limit.
    pub fn ideal() -> Self {
        Self {
            t1_phonon: 1e3,
            t2_phonon: 1e3,
            t1_ge: 1e3,
            t1_ef: 1e3,
            t_phi: 1e3,
            t_qb_init: 0.0,
            ..Self::table1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("phonon_freq", self.phonon_freq),
            ("qubit_freq", self.qubit_freq),
            ("coupling", self.coupling),
            ("fsr", self.fsr),
            ("T1_phonon", self.t1_phonon),
            ("T2_phonon", self.t2_phonon),
            ("T1_ge", self.t1_ge),
            ("T1_ef", self.t1_ef),
            ("T_phi", self.t_phi),
            ("length", self.length),
            ("waist", self.waist),
            ("density", self.density),
            ("c33", self.c33),
            ("e33", self.e33),
            ("rel_permittivity", self.rel_permittivity),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("T_qb_init", self.t_qb_init),
            ("T_qb_bath", self.t_qb_bath),
            ("T_env", self.t_env),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be finite and >= 0 K, got {v}")));
            }
        }
        if !self.anharmonicity.is_finite() {
            return Err(Error::param("anharmonicity", "must be finite"));
        }
        if self.mode_number == 0 {
            return Err(Error::param("mode_number", "must be > 0"));
        }
        if self.t2_phonon > 2.0 * self.t1_phonon {
            return Err(Error::param(
                "T2_phonon",
                format!(
                    "T2_phonon = {} s exceeds 2·T1_phonon = {} s",
                    self.t2_phonon,
                    2.0 * self.t1_phonon
                ),
            ));
        }
        Ok(())
    }

    /// Phonon decay rate Γ = 1/T1_phonon.
    pub fn phonon_decay_rate(&self) -> f64 {
        1.0 / self.t1_phonon
    }
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self::table1()
    }
}
