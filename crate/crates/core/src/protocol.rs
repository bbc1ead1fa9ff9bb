//! Simulation of the phonon-population measurement sequence.
//!
//! Sequence per run: qubit prepared thermal at `T_qb_init` (stands in for the
//! cooling gate), phonon prepared as `diag(1 − p, p, 0, …)`, resonant swap
//! (gate M), optional reference π_ge, e–f drive at amplitude 0 or π, final
//! π_ge, readout. The phonon population is the ratio
//! `A_sig / (A_sig + A_ref)` of the signal and reference contrasts.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::bose_occupation;
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, boltzmann_state, embed, number, qutrit_ops, ComplexMatrix, HilbertLayout,
    QuantumState, Slot,
};
use crate::lindblad::{evolve, CollapseOp, EvolveSettings, TimeSegment};

/// How π pulses are applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateModel {
    /// Ideal level permutation, no elapsed time.
    #[default]
    Instantaneous,
    /// Resonant Rabi pulse of `pi_pulse_duration` with all collapses active.
    FiniteDuration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSettings {
    /// Fraction of the nominal swap duration applied in gate M.
    #[serde(default = "ProtocolSettings::default_iswap_amplitude")]
    pub iswap_amplitude: f64,
    #[serde(default = "ProtocolSettings::default_readout_fidelity")]
    pub readout_fidelity: f64,
    #[serde(default)]
    pub gate_model: GateModel,
    #[serde(default = "ProtocolSettings::default_include_reference")]
    pub include_reference: bool,
    /// Overrides the nominal swap duration π/(2g), seconds.
    #[serde(default)]
    pub gate_duration: Option<f64>,
    /// π-pulse length in the finite-duration gate model, seconds.
    #[serde(default = "ProtocolSettings::default_pi_pulse_duration")]
    pub pi_pulse_duration: f64,
}

impl ProtocolSettings {
    pub const MAX_ISWAP_AMPLITUDE: f64 = 1.2;

    fn default_iswap_amplitude() -> f64 {
        1.0
    }
    fn default_readout_fidelity() -> f64 {
        1.0
    }
    fn default_include_reference() -> bool {
        true
    }
    fn default_pi_pulse_duration() -> f64 {
        40e-9
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=Self::MAX_ISWAP_AMPLITUDE).contains(&self.iswap_amplitude) {
            return Err(Error::param(
                "iswap_amplitude",
                format!("must lie in [0, 1.2], got {}", self.iswap_amplitude),
            ));
        }
        check_readout_fidelity(self.readout_fidelity)?;
        if let Some(t) = self.gate_duration {
            if !(t > 0.0) {
                return Err(Error::param("gate_duration", format!("must be > 0, got {t}")));
            }
        }
        if !(self.pi_pulse_duration > 0.0) {
            return Err(Error::param("pi_pulse_duration", "must be > 0"));
        }
        Ok(())
    }
}

impl Default for ProtocolSettings {
    fn default() -> Self {
        Self {
            iswap_amplitude: 1.0,
            readout_fidelity: 1.0,
            gate_model: GateModel::Instantaneous,
            include_reference: true,
            gate_duration: None,
            pi_pulse_duration: Self::default_pi_pulse_duration(),
        }
    }
}

fn check_readout_fidelity(f: f64) -> Result<()> {
    if !(f > 0.5 && f <= 1.0) {
        return Err(Error::param(
            "readout_fidelity",
            format!("must lie in (0.5, 1], got {f}"),
        ));
    }
    Ok(())
}

/// Truncation and integrator settings shared by every protocol run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default)]
    pub layout: HilbertLayout,
    #[serde(default)]
    pub engine: EvolveSettings,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastResult {
    pub a_sig: f64,
    pub a_ref: f64,
    pub population: f64,
}

/// Rates entering the collapse operators, 1/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipationRates {
    pub qubit_down: f64,
    pub qubit_up: f64,
    pub ef_down: f64,
    /// g–e coherence decay from pure dephasing, 1/T_φ.
    pub qubit_dephasing: f64,
    pub phonon_down: f64,
    pub phonon_up: f64,
    /// 0–1 coherence decay from pure dephasing, 1/T2 − 1/(2·T1).
    pub phonon_dephasing: f64,
}

/// Operators of the coupled qutrit–phonon system in the frame co-rotating
/// with the (resonant) qubit and phonon.
#[derive(Clone, Debug)]
pub struct ProtocolSystem {
    pub layout: HilbertLayout,
    /// Swap Hamiltonian `g(a†σ_ge + h.c.) + √2 g(a†σ_ef + h.c.) + α|f⟩⟨f|`, rad/s.
    pub hamiltonian: ComplexMatrix,
    pub collapses: Vec<CollapseOp>,
    pub rates: DissipationRates,
    /// Full-swap duration π/(2g), seconds.
    pub swap_duration: f64,
}

pub fn build_system(device: &DeviceParams, layout: &HilbertLayout) -> Result<ProtocolSystem> {
    device.validate()?;
    layout.validate()?;
    if layout.qubit_levels != 3 {
        return Err(Error::InvalidDimension(format!(
            "protocol simulation needs 3 qubit levels, got {}",
            layout.qubit_levels
        )));
    }
    let q = qutrit_ops();
    let a = embed(&annihilation(layout.fock_cutoff)?, Slot::Phonon, layout)?;
    let n_p = embed(&number(layout.fock_cutoff)?, Slot::Phonon, layout)?;
    let s_ge = embed(&q.sigma_ge, Slot::Qubit, layout)?;
    let s_ef = embed(&q.sigma_ef, Slot::Qubit, layout)?;
    let p_f = embed(&q.proj_f, Slot::Qubit, layout)?;
    let n_q = embed(&q.excitation_number(), Slot::Qubit, layout)?;

    let g = device.coupling;
    let ad = a.dagger();
    let jc_ge = &(&ad * &s_ge) + &(&a * &s_ge.dagger());
    let jc_ef = &(&ad * &s_ef) + &(&a * &s_ef.dagger());
    let hamiltonian = &(&jc_ge.scale_real(g) + &jc_ef.scale_real(std::f64::consts::SQRT_2 * g))
        + &p_f.scale_real(device.anharmonicity);

    let nq = bose_occupation(device.qubit_freq, device.t_qb_bath);
    let np = bose_occupation(device.phonon_freq, device.t_env);
    let phonon_dephasing = 1.0 / device.t2_phonon - 1.0 / (2.0 * device.t1_phonon);
    let rates = DissipationRates {
        qubit_down: (1.0 + nq) / device.t1_ge,
        qubit_up: nq / device.t1_ge,
        ef_down: 1.0 / device.t1_ef,
        qubit_dephasing: 1.0 / device.t_phi,
        phonon_down: (1.0 + np) / device.t1_phonon,
        phonon_up: np / device.t1_phonon,
        phonon_dephasing,
    };

    let collapses = vec![
        CollapseOp::new(s_ge.clone(), rates.qubit_down, "qubit ge decay")?,
        CollapseOp::new(s_ge.dagger(), rates.qubit_up, "qubit ge excitation")?,
        CollapseOp::new(s_ef, rates.ef_down, "qubit ef decay")?,
        CollapseOp::dephasing(n_q, rates.qubit_dephasing, "qubit dephasing")?,
        CollapseOp::new(a.clone(), rates.phonon_down, "phonon decay")?,
        CollapseOp::new(ad, rates.phonon_up, "phonon excitation")?,
        CollapseOp::dephasing(n_p, rates.phonon_dephasing, "phonon dephasing")?,
    ];

    Ok(ProtocolSystem {
        layout: *layout,
        hamiltonian,
        collapses,
        rates,
        swap_duration: PI / (2.0 * g),
    })
}

/// Gate M: resonant exchange for `A_iSWAP` times the swap duration.
pub fn gate_iswap(
    state: &QuantumState,
    system: &ProtocolSystem,
    settings: &ProtocolSettings,
    engine: &EvolveSettings,
) -> Result<QuantumState> {
    let duration = settings.iswap_amplitude * settings.gate_duration.unwrap_or(system.swap_duration);
    if duration == 0.0 {
        return Ok(state.clone());
    }
    evolve(
        state,
        &[TimeSegment::new(duration, system.hamiltonian.clone())],
        &system.collapses,
        engine,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    Ge,
    Ef,
}

fn transition_lowering(transition: Transition) -> ComplexMatrix {
    let q = qutrit_ops();
    match transition {
        Transition::Ge => q.sigma_ge,
        Transition::Ef => q.sigma_ef,
    }
}

/// Level-swapping unitary on the qutrit.
fn pi_unitary(transition: Transition) -> ComplexMatrix {
    let q = qutrit_ops();
    let (s, spectator) = match transition {
        Transition::Ge => (q.sigma_ge, q.proj_f),
        Transition::Ef => (q.sigma_ef, q.proj_g),
    };
    &(&s + &s.dagger()) + &spectator
}

/// Instantaneous π rotation on one qubit transition.
pub fn apply_pi(state: &QuantumState, transition: Transition) -> Result<QuantumState> {
    let u = match state.dims() {
        [3] => pi_unitary(transition),
        [3, fock] => embed(
            &pi_unitary(transition),
            Slot::Qubit,
            &HilbertLayout::new(3, *fock)?,
        )?,
        dims => {
            return Err(Error::InvalidDimension(format!(
                "π pulse needs a qutrit or qutrit ⊗ phonon state, dims are {dims:?}"
            )))
        }
    };
    state.conjugate(&u)
}

/// Finite-duration π pulse: resonant Rabi drive on the chosen transition
/// (phonon far detuned) with every collapse channel active.
pub fn apply_pi_finite(
    state: &QuantumState,
    transition: Transition,
    system: &ProtocolSystem,
    duration: f64,
    engine: &EvolveSettings,
) -> Result<QuantumState> {
    let s = embed(&transition_lowering(transition), Slot::Qubit, &system.layout)?;
    let rabi = PI / duration;
    let h = (&s + &s.dagger()).scale_real(rabi / 2.0);
    evolve(state, &[TimeSegment::new(duration, h)], &system.collapses, engine)
}

/// Probability of reading the qubit in g, through the symmetric confusion
/// matrix `[[F, 1−F], [1−F, F]]`.
fn readout_ground(state: &QuantumState, fidelity: f64) -> Result<f64> {
    let p_g = match state.dims() {
        [_] => state.populations()[0],
        [_, _] => state.marginal_populations(Slot::Qubit)?[0],
        dims => return Err(Error::InvalidDimension(format!("unsupported dims {dims:?}"))),
    };
    Ok(fidelity * p_g + (1.0 - fidelity) * (1.0 - p_g))
}

/// Contrast between the e–f drive-on and drive-off readouts.
pub fn readout_contrast(
    state_drive_on: &QuantumState,
    state_drive_off: &QuantumState,
    fidelity: f64,
) -> Result<f64> {
    check_readout_fidelity(fidelity)?;
    Ok((readout_ground(state_drive_on, fidelity)? - readout_ground(state_drive_off, fidelity)?).abs())
}

pub fn extract_population(a_sig: f64, a_ref: f64) -> Result<f64> {
    if !(a_sig >= 0.0) || !(a_ref >= 0.0) {
        return Err(Error::param(
            "contrast",
            format!("contrasts must be >= 0, got ({a_sig}, {a_ref})"),
        ));
    }
    let total = a_sig + a_ref;
    if total == 0.0 {
        return Err(Error::DegenerateContrast);
    }
    Ok(a_sig / total)
}

/// Everything observed in one protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOutcome {
    pub contrast: ContrastResult,
    pub true_population: f64,
    /// Applied gate-M duration, seconds.
    pub gate_duration: f64,
    /// Qubit level populations right after gate M.
    pub qubit_populations_after_swap: Vec<f64>,
    /// Largest population found in the top Fock level.
    pub top_fock_population: f64,
}

fn pulse(
    state: &QuantumState,
    transition: Transition,
    system: &ProtocolSystem,
    settings: &ProtocolSettings,
    engine: &EvolveSettings,
) -> Result<QuantumState> {
    match settings.gate_model {
        GateModel::Instantaneous => apply_pi(state, transition),
        GateModel::FiniteDuration => {
            apply_pi_finite(state, transition, system, settings.pi_pulse_duration, engine)
        }
    }
}

/// Drive-on/drive-off pair for one branch, returning its contrast.
fn branch_contrast(
    after_swap: &QuantumState,
    system: &ProtocolSystem,
    settings: &ProtocolSettings,
    engine: &EvolveSettings,
    top: &mut f64,
) -> Result<f64> {
    let off = pulse(after_swap, Transition::Ge, system, settings, engine)?;
    let driven = pulse(after_swap, Transition::Ef, system, settings, engine)?;
    let on = pulse(&driven, Transition::Ge, system, settings, engine)?;
    for s in [&off, &on] {
        *top = top.max(top_fock(s)?);
    }
    readout_contrast(&on, &off, settings.readout_fidelity)
}

fn top_fock(state: &QuantumState) -> Result<f64> {
    let p = state.marginal_populations(Slot::Phonon)?;
    Ok(*p.last().unwrap_or(&0.0))
}

/// Full protocol with diagnostics.
pub fn simulate_protocol(
    device: &DeviceParams,
    true_population: f64,
    settings: &ProtocolSettings,
    numerics: &Numerics,
) -> Result<ProtocolOutcome> {
    if !(0.0..0.5).contains(&true_population) {
        return Err(Error::param(
            "true_population",
            format!("must lie in [0, 0.5), got {true_population}"),
        ));
    }
    settings.validate()?;
    let system = build_system(device, &numerics.layout)?;
    let engine = &numerics.engine;

    let alpha = device.anharmonicity;
    let wq = device.qubit_freq;
    let qubit = boltzmann_state(&[0.0, wq, 2.0 * wq + alpha], device.t_qb_init)?;
    let mut phonon_pops = vec![0.0; numerics.layout.fock_cutoff];
    phonon_pops[0] = 1.0 - true_population;
    phonon_pops[1] = true_population;
    let phonon = QuantumState::diagonal(&phonon_pops)?;
    let initial = qubit.tensor(&phonon);

    let after_swap = gate_iswap(&initial, &system, settings, engine)?;
    let mut top = top_fock(&after_swap)?;

    let a_sig = branch_contrast(&after_swap, &system, settings, engine, &mut top)?;
    let a_ref = if settings.include_reference {
        let inverted = pulse(&after_swap, Transition::Ge, &system, settings, engine)?;
        branch_contrast(&inverted, &system, settings, engine, &mut top)?
    } else {
        // Without a reference sequence the signal is normalised to the full
        // readout window 2F − 1.
        (2.0 * settings.readout_fidelity - 1.0 - a_sig).max(0.0)
    };

    if top > HilbertLayout::TOP_LEVEL_GUARD {
        return Err(Error::NumericalConsistency(format!(
            "top Fock level population {top:e} exceeds the truncation guard; raise fock_cutoff"
        )));
    }

    let population = extract_population(a_sig, a_ref)?;
    Ok(ProtocolOutcome {
        contrast: ContrastResult {
            a_sig,
            a_ref,
            population,
        },
        true_population,
        gate_duration: settings.iswap_amplitude * settings.gate_duration.unwrap_or(system.swap_duration),
        qubit_populations_after_swap: after_swap.marginal_populations(Slot::Qubit)?,
        top_fock_population: top,
    })
}

pub fn run_protocol(
    device: &DeviceParams,
    true_population: f64,
    settings: &ProtocolSettings,
    numerics: &Numerics,
) -> Result<ContrastResult> {
    simulate_protocol(device, true_population, settings, numerics).map(|o| o.contrast)
}

/// Parameter swept in an error-budget study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "T1_ge")]
    T1Ge,
    #[serde(rename = "T_qb_bath")]
    TQbBath,
    #[serde(rename = "T1_ef")]
    T1Ef,
    #[serde(rename = "A_iSWAP")]
    AIswap,
    #[serde(rename = "T_phi")]
    TPhi,
    #[serde(rename = "F_ro")]
    FRo,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::T1Ge => "T1_ge",
            SweepParameter::TQbBath => "T_qb_bath",
            SweepParameter::T1Ef => "T1_ef",
            SweepParameter::AIswap => "A_iSWAP",
            SweepParameter::TPhi => "T_phi",
            SweepParameter::FRo => "F_ro",
        }
    }

    fn apply(&self, value: f64, device: &mut DeviceParams, settings: &mut ProtocolSettings) {
        match self {
            SweepParameter::T1Ge => device.t1_ge = value,
            SweepParameter::TQbBath => device.t_qb_bath = value,
            SweepParameter::T1Ef => device.t1_ef = value,
            SweepParameter::AIswap => settings.iswap_amplitude = value,
            SweepParameter::TPhi => device.t_phi = value,
            SweepParameter::FRo => settings.readout_fidelity = value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Phonon population injected in every run.
    pub true_population: f64,
}

impl SweepSpec {
    pub fn validate(&self, device: &DeviceParams, settings: &ProtocolSettings) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::param("values", "sweep needs at least one value"));
        }
        if !(0.0..0.5).contains(&self.true_population) {
            return Err(Error::param("true_population", "must lie in [0, 0.5)"));
        }
        for &v in &self.values {
            let (mut d, mut s) = (device.clone(), settings.clone());
            self.parameter.apply(v, &mut d, &mut s);
            d.validate()?;
            s.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub a_sig: f64,
    pub a_ref: f64,
    pub population: f64,
}

/// One protocol run per swept value; rows come back in input order no
/// matter how the runs are scheduled.
pub fn sweep(
    device: &DeviceParams,
    spec: &SweepSpec,
    settings: &ProtocolSettings,
    numerics: &Numerics,
) -> Result<Vec<SweepRow>> {
    spec.validate(device, settings)?;
    spec.values
        .par_iter()
        .map(|&value| {
            let (mut d, mut s) = (device.clone(), settings.clone());
            spec.parameter.apply(value, &mut d, &mut s);
            let c = run_protocol(&d, spec.true_population, &s, numerics)?;
            Ok(SweepRow {
                value,
                a_sig: c.a_sig,
                a_ref: c.a_ref,
                population: c.population,
            })
        })
        .collect()
}

/// Measured-vs-true population curve at one qubit bath temperature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    pub bath_temperature: f64,
    /// (true, measured) pairs, first entry at true population 0.
    pub points: Vec<(f64, f64)>,
}

impl ResponseCurve {
    pub fn floor(&self) -> f64 {
        self.points[0].1
    }

    fn check_monotone(&self) -> Result<()> {
        for w in self.points.windows(2) {
            if !(w[1].1 > w[0].1) {
                return Err(Error::Inversion(format!(
                    "measured population not increasing between true {:e} and {:e} at bath {} K",
                    w[0].0, w[1].0, self.bath_temperature
                )));
            }
        }
        Ok(())
    }

    /// True population reproducing `measured`, by piecewise-linear
    /// interpolation in log–log space (linear on the segment touching 0).
    pub fn invert(&self, measured: f64) -> Result<f64> {
        self.check_monotone()?;
        let floor = self.floor();
        if measured <= floor {
            if measured >= floor * (1.0 - 1e-12) {
                return Ok(0.0);
            }
            return Err(Error::FloorDominated { measured, floor });
        }
        let last = *self.points.last().expect("curve has points");
        if measured > last.1 {
            return Err(Error::Inversion(format!(
                "measured {measured:e} exceeds the simulated range (max {:e})",
                last.1
            )));
        }
        for w in self.points.windows(2) {
            let ((t0, m0), (t1, m1)) = (w[0], w[1]);
            if measured <= m1 {
                if t0 == 0.0 {
                    return Ok(t1 * (measured - m0) / (m1 - m0));
                }
                let frac = (measured.ln() - m0.ln()) / (m1.ln() - m0.ln());
                return Ok((t0.ln() + frac * (t1.ln() - t0.ln())).exp());
            }
        }
        unreachable!("measured lies within the curve range")
    }
}

/// Grid of true populations used for inversion: 0 followed by 25 log-spaced
/// points per decade over [1e-7, 1e-2].
pub fn inversion_grid() -> Vec<f64> {
    const PER_DECADE: usize = 25;
    const DECADES: usize = 5;
    let mut grid = vec![0.0];
    grid.extend((0..=PER_DECADE * DECADES).map(|k| 1e-7 * 10f64.powf(k as f64 / PER_DECADE as f64)));
    grid
}

pub fn response_curve(
    device: &DeviceParams,
    bath_temperature: f64,
    grid: &[f64],
    settings: &ProtocolSettings,
    numerics: &Numerics,
) -> Result<ResponseCurve> {
    let d = DeviceParams {
        t_qb_bath: bath_temperature,
        ..device.clone()
    };
    let points = grid
        .par_iter()
        .map(|&p| run_protocol(&d, p, settings, numerics).map(|c| (p, c.population)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResponseCurve {
        bath_temperature,
        points,
    })
}

/// Measured-vs-true curves at the two bath-temperature extremes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionCurves {
    pub cold: ResponseCurve,
    pub hot: ResponseCurve,
}

impl InversionCurves {
    pub fn build(
        device: &DeviceParams,
        bath_range: [f64; 2],
        settings: &ProtocolSettings,
        numerics: &Numerics,
    ) -> Result<Self> {
        let [lo, hi] = bath_range;
        if !(lo >= 0.0 && hi >= lo) {
            return Err(Error::param(
                "bath_range",
                format!("need 0 <= low <= high, got [{lo}, {hi}]"),
            ));
        }
        let grid = inversion_grid();
        Ok(Self {
            cold: response_curve(device, lo, &grid, settings, numerics)?,
            hot: response_curve(device, hi, &grid, settings, numerics)?,
        })
    }

    /// Upper boundary of the simulated region: the largest true population
    /// consistent with `measured` on either boundary curve.
    pub fn infer(&self, measured: f64) -> Result<f64> {
        let results = [self.cold.invert(measured), self.hot.invert(measured)];
        let mut best: Option<f64> = None;
        let mut floor_err = None;
        for r in results {
            match r {
                Ok(v) => best = Some(best.map_or(v, |b: f64| b.max(v))),
                Err(e @ Error::FloorDominated { .. }) => {
                    let lower = match (&floor_err, &e) {
                        (Some(Error::FloorDominated { floor: a, .. }), Error::FloorDominated { floor: b, .. }) => b < a,
                        _ => true,
                    };
                    if lower {
                        floor_err = Some(e);
                    }
                }
                Err(e) => return Err(e),
            }
        }
        match (best, floor_err) {
            (Some(v), _) => Ok(v),
            (None, Some(e)) => Err(e),
            (None, None) => unreachable!("two curves always yield a result or an error"),
        }
    }
}

/// Upper bound on the true phonon population given a measured one.
pub fn infer_population(
    measured: f64,
    device: &DeviceParams,
    bath_range: [f64; 2],
    settings: &ProtocolSettings,
    numerics: &Numerics,
) -> Result<f64> {
    InversionCurves::build(device, bath_range, settings, numerics)?.infer(measured)
}

/// Readout contrast scale 2F − 1 shared by both branches.
pub fn readout_window(fidelity: f64) -> f64 {
    2.0 * fidelity - 1.0
}
