//! Bounds on gravitational-wave strain, dark-photon kinetic mixing and CSL
//! collapse parameters from a measured phonon population.
//!
//! Every bound follows from the steady state of a resonantly driven,
//! damped mode, `P = 4Ω²/Γ²`, solved for the coupling behind Ω.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{
    angular, ATOMIC_MASS_UNIT, CM3_PER_M3, ELECTRON_MASS, EPSILON_0, HBAR, JOULE_PER_GEV,
};
use crate::device::{DeviceParams, E33_RANGE};
use crate::error::{Error, Result};

/// Local dark-matter density, GeV/cm³.
pub const DARK_MATTER_DENSITY_GEV_CM3: f64 = 0.4;
/// CSL localization length, m. Carried as a constant.
pub const R_CSL: f64 = 3.0e-7;
/// Prefactor of `τ_e = K · T1 / n̄`, s per s.
pub const TAU_E_PREFACTOR: f64 = 3.5e13;

/// `(1 amu / m_e)²`, the ratio linking λ_CSL and τ_e.
pub fn amu_electron_ratio_sq() -> f64 {
    let r = ATOMIC_MASS_UNIT / ELECTRON_MASS;
    r * r
}

/// GeV/cm³ → J/m³.
pub fn convert_energy_density(gev_per_cm3: f64) -> Result<f64> {
    if !(gev_per_cm3 >= 0.0) {
        return Err(Error::param(
            "energy_density",
            format!("must be >= 0, got {gev_per_cm3}"),
        ));
    }
    Ok(gev_per_cm3 * JOULE_PER_GEV * CM3_PER_M3)
}

fn check_population(population: f64) -> Result<()> {
    if !(population > 0.0 && population < 1.0) {
        return Err(Error::param(
            "population",
            format!("must lie in (0, 1), got {population}"),
        ));
    }
    Ok(())
}

/// Overlap of the strain field with mode `n`, m^(5/2):
/// `4 L^{3/2} µ / (π^{3/2} n²)` for odd n, 0 for even n.
pub fn xi_33(length: f64, waist: f64, n: i64) -> Result<f64> {
    if n <= 0 {
        return Err(Error::param("mode_number", format!("must be > 0, got {n}")));
    }
    if n % 2 == 0 {
        return Ok(0.0);
    }
    Ok(xi_33_magnitude(length, waist, n as u32))
}

/// The odd-n closed form evaluated for any n.
pub fn xi_33_magnitude(length: f64, waist: f64, n: u32) -> f64 {
    let n = n as f64;
    4.0 * length.powf(1.5) * waist / (PI.powf(1.5) * n * n)
}

/// Conventions applied when turning a strain into a drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GwAssumptions {
    /// Projection ε₃₃ of the wave polarization on the mode; 1 is maximal.
    #[serde(default = "GwAssumptions::default_polarization")]
    pub polarization: f64,
}

impl GwAssumptions {
    fn default_polarization() -> f64 {
        1.0
    }
}

impl Default for GwAssumptions {
    fn default() -> Self {
        Self { polarization: 1.0 }
    }
}

/// Nominal mode number used as a magnitude parameter. The odd-n overlap is
/// used even for an even label because the label itself is uncertain by
/// about ±13 modes, which moves the bound by less than 7%.
const MODE_NUMBER_NOTE: &str = "mode number used as a magnitude parameter (odd-n overlap), \
                                regardless of parity";

/// `|Ω_GW| = h0 ε₃₃ (µ/n²) √(ρ ω³ L³ / (2ħπ³))`, rad/s.
pub fn gw_drive(h0: f64, device: &DeviceParams) -> Result<f64> {
    gw_drive_with(h0, device, &GwAssumptions::default())
}

pub fn gw_drive_with(h0: f64, device: &DeviceParams, assumptions: &GwAssumptions) -> Result<f64> {
    if !(h0 >= 0.0) {
        return Err(Error::param("h0", format!("must be >= 0, got {h0}")));
    }
    Ok(h0 * assumptions.polarization * gw_coupling(device))
}

/// Drive per unit strain, rad/s.
fn gw_coupling(device: &DeviceParams) -> f64 {
    let n = device.mode_number as f64;
    let w = device.phonon_freq;
    let l = device.length;
    (device.waist / (n * n)) * (device.density * w.powi(3) * l.powi(3) / (2.0 * HBAR * PI.powi(3))).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GWResult {
    pub h0: f64,
    /// Drive Ω_GW that reproduces the population, rad/s.
    pub drive: f64,
    /// Odd-n strain overlap evaluated at the nominal mode number, m^(5/2).
    pub xi33: f64,
    pub population: f64,
    pub assumptions: GwAssumptions,
    pub notes: Vec<String>,
    pub device: DeviceParams,
}

/// Smallest strain excluded by a measured population.
pub fn h0_bound(population: f64, device: &DeviceParams) -> Result<GWResult> {
    h0_bound_with(population, device, &GwAssumptions::default())
}

pub fn h0_bound_with(
    population: f64,
    device: &DeviceParams,
    assumptions: &GwAssumptions,
) -> Result<GWResult> {
    check_population(population)?;
    device.validate()?;
    if !(assumptions.polarization > 0.0 && assumptions.polarization <= 1.0) {
        return Err(Error::param("polarization", "must lie in (0, 1]"));
    }
    let drive = population.sqrt() * device.phonon_decay_rate() / 2.0;
    let h0 = drive / (assumptions.polarization * gw_coupling(device));
    let xi33 = xi_33_magnitude(device.length, device.waist, device.mode_number);
    Ok(GWResult {
        h0,
        drive,
        xi33,
        population,
        assumptions: *assumptions,
        notes: vec![MODE_NUMBER_NOTE.into(), "drive on resonance with the mode".into()],
        device: device.clone(),
    })
}

/// `|Ω_DP| = 4κ e₃₃ (µ/(ε_r n)) √(ρ_V ω L / (ε₀ ħ π c₃₃))`, rad/s.
pub fn dp_drive(kappa: f64, device: &DeviceParams, e33: f64, rho_v: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return Err(Error::param("kappa", format!("must be >= 0, got {kappa}")));
    }
    if !(rho_v >= 0.0) {
        return Err(Error::param("rho_v", format!("must be >= 0, got {rho_v}")));
    }
    Ok(kappa * dp_coupling(device, e33, rho_v))
}

fn dp_coupling(device: &DeviceParams, e33: f64, rho_v: f64) -> f64 {
    let n = device.mode_number as f64;
    4.0 * e33 * (device.waist / (device.rel_permittivity * n))
        * (rho_v * device.phonon_freq * device.length / (EPSILON_0 * HBAR * PI * device.c33)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DPResult {
    pub kappa: f64,
    /// Drive Ω_DP that reproduces the population, rad/s.
    pub drive: f64,
    pub e33_used: f64,
    /// Dark-matter energy density, J/m³.
    pub rho_v: f64,
    pub population: f64,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub device: DeviceParams,
}

/// Smallest kinetic mixing excluded by a measured population.
pub fn kappa_bound(population: f64, device: &DeviceParams, e33: f64) -> Result<DPResult> {
    check_population(population)?;
    device.validate()?;
    if !(e33 > 0.0) || !e33.is_finite() {
        return Err(Error::param("e33", format!("must be finite and > 0, got {e33}")));
    }
    let mut warnings = Vec::new();
    if e33 < E33_RANGE.0 || e33 > E33_RANGE.1 {
        warnings.push(format!(
            "e33 = {e33} C/m² lies outside the literature range [{}, {}] C/m²",
            E33_RANGE.0, E33_RANGE.1
        ));
    }
    let rho_v = convert_energy_density(DARK_MATTER_DENSITY_GEV_CM3)?;
    let drive = population.sqrt() * device.phonon_decay_rate() / 2.0;
    let kappa = drive / dp_coupling(device, e33, rho_v);
    Ok(DPResult {
        kappa,
        drive,
        e33_used: e33,
        rho_v,
        population,
        warnings,
        notes: vec![MODE_NUMBER_NOTE.into()],
        device: device.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CSLResult {
    /// Bound on the nonlinear-modification timescale, s.
    pub tau_e: f64,
    /// Bound on the collapse rate, 1/s.
    pub lambda_csl: f64,
    /// Localization length, m.
    pub r_csl: f64,
    pub population: f64,
    pub t1_phonon: f64,
}

/// Collapse-model bound: heating `n̄/T1` balanced against relaxation.
pub fn csl_bound(population: f64, t1_phonon: f64) -> Result<CSLResult> {
    if !(population > 0.0) {
        return Err(Error::param(
            "population",
            format!("must be > 0, got {population}"),
        ));
    }
    if !(t1_phonon > 0.0) {
        return Err(Error::param("T1_phonon", format!("must be > 0, got {t1_phonon}")));
    }
    let tau_e = TAU_E_PREFACTOR * t1_phonon / population;
    Ok(CSLResult {
        tau_e,
        lambda_csl: amu_electron_ratio_sq() / tau_e,
        r_csl: R_CSL,
        population,
        t1_phonon,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioLabel {
    Current,
    NextGeneration,
    MhzDevice,
}

impl ScenarioLabel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Current => "current",
            Self::NextGeneration => "next_generation",
            Self::MhzDevice => "mhz_device",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "current" => Some(Self::Current),
            "next_generation" => Some(Self::NextGeneration),
            "mhz_device" => Some(Self::MhzDevice),
            _ => None,
        }
    }
}

/// A device configuration for which bounds are projected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceScenario {
    pub label: ScenarioLabel,
    pub device: DeviceParams,
    /// Averaging time, s. Recorded only; the bounds use the population.
    pub integration_time: f64,
    pub population: f64,
    /// e₃₃ for the dark-photon bound; `None` skips that channel.
    pub e33: Option<f64>,
    /// Set when the scenario depends on parameters chosen here rather than
    /// taken from a measured device.
    pub assumption_flag: bool,
    pub assumptions: Vec<String>,
}

const WEEK: f64 = 7.0 * 86_400.0;
const YEAR: f64 = 365.25 * 86_400.0;

/// Longitudinal sound speed of quartz used to place the MHz modes, m/s.
pub const QUARTZ_SOUND_SPEED: f64 = 6320.0;
pub const QUARTZ_DENSITY: f64 = 2650.0;

impl DeviceScenario {
    /// Measured device with the measured population.
    pub fn current() -> Self {
        Self {
            label: ScenarioLabel::Current,
            device: DeviceParams::table1(),
            integration_time: WEEK,
            population: 6.7e-5,
            e33: Some(0.4),
            assumption_flag: false,
            assumptions: vec![
                "measured device parameters, phonon T1 = 112 µs".into(),
                "e33 = 0.4 C/m² (lower literature value)".into(),
            ],
        }
    }

    /// Sapphire device read out at the 3 GHz end of a 3–10 GHz band.
    pub fn next_generation() -> Self {
        let base = DeviceParams::table1();
        let freq = angular(3.0e9);
        let n = (freq / base.fsr).round() as u32;
        Self {
            label: ScenarioLabel::NextGeneration,
            device: DeviceParams {
                phonon_freq: freq,
                mode_number: n,
                t1_phonon: 1e-3,
                t2_phonon: 2e-3,
                t1_ge: 50e-6,
                ..base
            },
            integration_time: YEAR,
            population: 1e-5,
            e33: Some(2.0),
            assumption_flag: false,
            assumptions: vec![
                "mode at the 3 GHz band floor".into(),
                format!("mode number n = round(f / FSR) = {n} at FSR = 12.5 MHz"),
                "e33 = 2.0 C/m² (upper literature value)".into(),
                "geometry and material as the measured device".into(),
            ],
        }
    }

    /// Quartz resonator read out by a MHz-frequency qubit.
    pub fn mhz_device() -> Self {
        let length = 1e-3;
        let fsr_hz = QUARTZ_SOUND_SPEED / (2.0 * length);
        let band_floor = 15e6;
        let mut n = (band_floor / fsr_hz).round() as u32;
        if n % 2 == 0 {
            n += 1;
        }
        let base = DeviceParams::table1();
        Self {
            label: ScenarioLabel::MhzDevice,
            device: DeviceParams {
                phonon_freq: angular(band_floor),
                fsr: angular(fsr_hz),
                mode_number: n,
                t1_phonon: 10e-3,
                t2_phonon: 20e-3,
                t1_ge: 50e-6,
                length,
                waist: 700e-6,
                density: QUARTZ_DENSITY,
                c33: QUARTZ_DENSITY * QUARTZ_SOUND_SPEED * QUARTZ_SOUND_SPEED,
                ..base
            },
            integration_time: YEAR,
            population: 1e-5,
            e33: None,
            assumption_flag: true,
            assumptions: vec![
                format!("quartz, longitudinal sound speed {QUARTZ_SOUND_SPEED} m/s, density {QUARTZ_DENSITY} kg/m³"),
                format!("FSR = v / 2L = {:.3} MHz", fsr_hz / 1e6),
                format!("mode at the 15 MHz band floor, lowest odd n = {n}"),
                "dark-photon channel skipped: shielding suppresses the kinetic mixing".into(),
                "population assumed reachable by active cooling".into(),
            ],
        }
    }

    pub fn from_label(label: ScenarioLabel) -> Self {
        match label {
            ScenarioLabel::Current => Self::current(),
            ScenarioLabel::NextGeneration => Self::next_generation(),
            ScenarioLabel::MhzDevice => Self::mhz_device(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub scenario: DeviceScenario,
    pub gw: GWResult,
    pub dp: Option<DPResult>,
    pub csl: CSLResult,
}

pub fn project(scenario: &DeviceScenario) -> Result<Projection> {
    let gw = h0_bound(scenario.population, &scenario.device)?;
    let dp = scenario
        .e33
        .map(|e33| kappa_bound(scenario.population, &scenario.device, e33))
        .transpose()?;
    let csl = csl_bound(scenario.population, scenario.device.t1_phonon)?;
    Ok(Projection {
        scenario: scenario.clone(),
        gw,
        dp,
        csl,
    })
}

/// (frequency in Hz, h0) for neighbouring modes `n0 + k`, placed at
/// `ω_p + k·ω_FSR`, all evaluated at the same population.
pub fn strain_sensitivity(
    population: f64,
    device: &DeviceParams,
    mode_offsets: &[i32],
) -> Result<Vec<(f64, f64)>> {
    mode_offsets
        .iter()
        .map(|&k| {
            let n = device.mode_number as i64 + k as i64;
            if n <= 0 {
                return Err(Error::param("mode_offsets", format!("mode number {n} is not positive")));
            }
            let d = DeviceParams {
                mode_number: n as u32,
                phonon_freq: device.phonon_freq + k as f64 * device.fsr,
                ..device.clone()
            };
            let r = h0_bound(population, &d)?;
            Ok((crate::constants::hertz(d.phonon_freq), r.h0))
        })
        .collect()
}
