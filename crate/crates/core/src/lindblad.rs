//! Master-equation time evolution.
//!
//! Integrates `dρ/dt = −i[H, ρ] + Σ_k γ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})` with
//! `H` in rad/s, over a list of piecewise segments. The default integrator is
//! an adaptive Dormand–Prince 5(4) pair acting directly on the density
//! matrix; time-independent segments can optionally be propagated exactly
//! with the exponential of the Liouvillian superoperator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{annihilation, number, ComplexMatrix, HilbertLayout, QuantumState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Trace drift tolerated across an accepted evolution.
pub const TRACE_TOLERANCE: f64 = 1e-8;
/// Most negative eigenvalue tolerated in an evolved state.
pub const POSITIVITY_FLOOR: f64 = 1e-8;
/// Relative Hermiticity error tolerated in an evolved state.
pub const HERMITICITY_TOLERANCE: f64 = 1e-9;

/// Dissipation channel `√rate · op`.
#[derive(Clone, Debug)]
pub struct CollapseOp {
    pub op: ComplexMatrix,
    pub rate: f64,
    pub label: String,
}

impl CollapseOp {
    pub fn new(op: ComplexMatrix, rate: f64, label: impl Into<String>) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::param("rate", format!("must be finite and >= 0, got {rate}")));
        }
        if !op.is_square() {
            return Err(Error::InvalidDimension("collapse operator must be square".into()));
        }
        Ok(Self {
            op,
            rate,
            label: label.into(),
        })
    }

    /// Pure dephasing through an excitation-number operator `n`. For
    /// `L = √κ n`, the coherence between levels differing by one quantum
    /// decays at κ/2, so κ is set to twice the requested coherence decay rate.
    pub fn dephasing(
        excitation_number: ComplexMatrix,
        coherence_rate: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        Self::new(excitation_number, 2.0 * coherence_rate, label)
    }
}

/// Reference frame of a segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Drive appears as `2Ω cos(ωt + φ)(A + A†)`.
    Lab,
    /// Carrier absorbed under the rotating-wave approximation:
    /// `Ω(e^{−iφ} A† + e^{iφ} A)`.
    Rotating,
}

/// Coherent drive on a lowering operator `A`.
#[derive(Clone, Debug)]
pub struct Drive {
    pub lowering: ComplexMatrix,
    /// Ω, rad/s.
    pub amplitude: f64,
    /// ω, rad/s. Ignored in the rotating frame.
    pub carrier: f64,
    pub phase: f64,
}

#[derive(Clone, Debug)]
pub struct TimeSegment {
    pub duration: f64,
    /// Static part of `H/ħ`, rad/s.
    pub hamiltonian: ComplexMatrix,
    pub drive: Option<Drive>,
    pub frame: Frame,
}

impl TimeSegment {
    pub fn new(duration: f64, hamiltonian: ComplexMatrix) -> Self {
        Self {
            duration,
            hamiltonian,
            drive: None,
            frame: Frame::Rotating,
        }
    }

    pub fn with_drive(mut self, drive: Drive, frame: Frame) -> Self {
        self.drive = Some(drive);
        self.frame = frame;
        self
    }

    fn is_time_independent(&self) -> bool {
        self.drive.is_none() || self.frame == Frame::Rotating
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::param(
                "duration",
                format!("segment duration must be > 0, got {}", self.duration),
            ));
        }
        if self.hamiltonian.rows() != dim || !self.hamiltonian.is_square() {
            return Err(Error::InvalidDimension(format!(
                "segment Hamiltonian is {}x{}, state dimension is {dim}",
                self.hamiltonian.rows(),
                self.hamiltonian.cols()
            )));
        }
        if let Some(d) = &self.drive {
            if d.lowering.rows() != dim || !d.lowering.is_square() {
                return Err(Error::InvalidDimension(
                    "drive operator does not match state dimension".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Propagation method for time-independent segments.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    RungeKutta,
    /// Exact `exp(𝓛 t)` for time-independent segments; lab-frame driven
    /// segments still use the Runge–Kutta path.
    Exponential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSettings {
    #[serde(default = "EvolveSettings::default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "EvolveSettings::default_abs_tol")]
    pub abs_tol: f64,
    /// Upper bound on the step, seconds. `None` means unbounded.
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default = "EvolveSettings::default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub method: Method,
}

impl EvolveSettings {
    fn default_rel_tol() -> f64 {
        1e-9
    }
    fn default_abs_tol() -> f64 {
        1e-12
    }
    fn default_max_steps() -> usize {
        5_000_000
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::param("rel_tol", "must be > 0"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::param("abs_tol", "must be > 0"));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::param("max_step", "must be > 0"));
            }
        }
        Ok(())
    }
}

impl Default for EvolveSettings {
    fn default() -> Self {
        Self {
            rel_tol: Self::default_rel_tol(),
            abs_tol: Self::default_abs_tol(),
            max_step: None,
            max_steps: Self::default_max_steps(),
            method: Method::RungeKutta,
        }
    }
}

/// Triplet list of the non-zero entries of an operator.
#[derive(Clone, Debug)]
struct SparseOp {
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != ZERO {
                    entries.push((i, j, v));
                }
            }
        }
        Self { entries }
    }

    /// `out += scale · S ρ`
    fn left_mul_acc(&self, rho: &DMatrix<Complex64>, scale: Complex64, out: &mut DMatrix<Complex64>) {
        let n = rho.ncols();
        for &(i, k, v) in &self.entries {
            let sv = scale * v;
            for j in 0..n {
                out[(i, j)] += sv * rho[(k, j)];
            }
        }
    }

    /// `out += scale · S ρ S†`
    fn sandwich_acc(&self, rho: &DMatrix<Complex64>, scale: f64, out: &mut DMatrix<Complex64>) {
        for &(i, k, v) in &self.entries {
            for &(l, m, w) in &self.entries {
                out[(i, l)] += v * rho[(k, m)] * w.conj() * scale;
            }
        }
    }
}

/// Right-hand side of the master equation for one segment.
struct Generator {
    /// `H − (i/2) Σ γ L†L`
    h_eff: SparseOp,
    jumps: Vec<(SparseOp, f64)>,
    /// Lab-frame drive `V = A + A†` with `f(t) = 2Ω cos(ωt + φ)`.
    lab_drive: Option<(SparseOp, f64, f64, f64)>,
}

impl Generator {
    fn new(segment: &TimeSegment, collapses: &[CollapseOp]) -> Self {
        let mut h = segment.hamiltonian.as_matrix().clone();
        let mut lab_drive = None;
        if let Some(d) = &segment.drive {
            let a = d.lowering.as_matrix();
            match segment.frame {
                Frame::Rotating => {
                    let ph = Complex64::from_polar(1.0, d.phase);
                    h += (a.adjoint() * ph.conj() + a * ph) * Complex64::new(d.amplitude, 0.0);
                }
                Frame::Lab => {
                    let v = a + a.adjoint();
                    lab_drive = Some((SparseOp::from_dense(&v), d.amplitude, d.carrier, d.phase));
                }
            }
        }
        let mut jumps = Vec::new();
        for c in collapses.iter().filter(|c| c.rate > 0.0) {
            let l = c.op.as_matrix();
            h -= (l.adjoint() * l) * Complex64::new(0.0, 0.5 * c.rate);
            jumps.push((SparseOp::from_dense(l), c.rate));
        }
        Self {
            h_eff: SparseOp::from_dense(&h),
            jumps,
            lab_drive,
        }
    }

    fn rhs(&self, t: f64, rho: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        out.fill(ZERO);
        // X = −i H_eff ρ; the commutator/anticommutator part is X + X†.
        self.h_eff.left_mul_acc(rho, -I, out);
        if let Some((v, amp, carrier, phase)) = &self.lab_drive {
            let f = 2.0 * amp * (carrier * t + phase).cos();
            v.left_mul_acc(rho, -I * f, out);
        }
        let n = rho.nrows();
        for i in 0..n {
            for j in i..n {
                let s = out[(i, j)] + out[(j, i)].conj();
                out[(i, j)] = s;
                out[(j, i)] = s.conj();
            }
        }
        for (l, rate) in &self.jumps {
            l.sandwich_acc(rho, *rate, out);
        }
        // Keep the derivative exactly Hermitian.
        for i in 0..n {
            out[(i, i)].im = 0.0;
            for j in (i + 1)..n {
                let s = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = s;
                out[(j, i)] = s.conj();
            }
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin_comb(base: &DMatrix<Complex64>, h: f64, terms: &[(f64, &DMatrix<Complex64>)], out: &mut DMatrix<Complex64>) {
    out.copy_from(base);
    for (coef, k) in terms {
        if *coef != 0.0 {
            out.zip_apply(*k, |o, kv| *o += kv * (h * coef));
        }
    }
}

fn integrate_segment(
    gen: &Generator,
    rho: &mut DMatrix<Complex64>,
    t_start: f64,
    duration: f64,
    settings: &EvolveSettings,
    steps_used: &mut usize,
) -> Result<()> {
    let n = rho.nrows();
    let zeros = || DMatrix::from_element(n, n, ZERO);
    let (mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (zeros(), zeros(), zeros(), zeros(), zeros(), zeros(), zeros());
    let mut tmp = zeros();
    let mut y_new = zeros();

    let t_end = t_start + duration;
    let mut t = t_start;
    let max_step = settings.max_step.unwrap_or(f64::INFINITY).min(duration);

    gen.rhs(t, rho, &mut k1);

    // Initial step from the scale of the derivative.
    let scale_norm = |y: &DMatrix<Complex64>, v: &DMatrix<Complex64>| -> f64 {
        let mut acc = 0.0;
        for (yi, vi) in y.iter().zip(v.iter()) {
            let sc = settings.abs_tol + settings.rel_tol * yi.norm();
            acc += (vi.norm() / sc).powi(2);
        }
        (acc / y.len() as f64).sqrt()
    };
    let d0 = scale_norm(rho, rho);
    let d1 = scale_norm(rho, &k1);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * duration
    } else {
        0.01 * d0 / d1
    };
    h = h.min(max_step).max(duration * 1e-12);

    loop {
        let remaining = t_end - t;
        if remaining <= duration * 1e-14 {
            break;
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        *steps_used += 1;
        if *steps_used > settings.max_steps {
            return Err(Error::Integration {
                time: t,
                reason: format!("exceeded {} steps", settings.max_steps),
            });
        }

        lin_comb(rho, h, &[(A21, &k1)], &mut tmp);
        gen.rhs(t + C2 * h, &tmp, &mut k2);
        lin_comb(rho, h, &[(A31, &k1), (A32, &k2)], &mut tmp);
        gen.rhs(t + C3 * h, &tmp, &mut k3);
        lin_comb(rho, h, &[(A41, &k1), (A42, &k2), (A43, &k3)], &mut tmp);
        gen.rhs(t + C4 * h, &tmp, &mut k4);
        lin_comb(rho, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &mut tmp);
        gen.rhs(t + C5 * h, &tmp, &mut k5);
        lin_comb(
            rho,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            &mut tmp,
        );
        gen.rhs(t + h, &tmp, &mut k6);
        lin_comb(
            rho,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            &mut y_new,
        );
        gen.rhs(t + h, &y_new, &mut k7);

        let mut err_acc = 0.0;
        for idx in 0..y_new.len() {
            let e = (k1[idx] * E1 + k3[idx] * E3 + k4[idx] * E4 + k5[idx] * E5 + k6[idx] * E6 + k7[idx] * E7) * h;
            let sc = settings.abs_tol + settings.rel_tol * rho[idx].norm().max(y_new[idx].norm());
            err_acc += (e.norm() / sc).powi(2);
        }
        let err = (err_acc / y_new.len() as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration {
                time: t,
                reason: "non-finite error estimate".into(),
            });
        }

        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            rho.copy_from(&y_new);
            std::mem::swap(&mut k1, &mut k7);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(max_step);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < 1e-14 * t.abs().max(duration) {
                return Err(Error::Integration {
                    time: t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
        }
    }
    Ok(())
}

/// Column-stacking Liouvillian superoperator of a time-independent segment.
fn liouvillian(segment: &TimeSegment, collapses: &[CollapseOp]) -> DMatrix<Complex64> {
    let n = segment.hamiltonian.rows();
    let mut h = segment.hamiltonian.as_matrix().clone();
    if let Some(d) = &segment.drive {
        let a = d.lowering.as_matrix();
        let ph = Complex64::from_polar(1.0, d.phase);
        h += (a.adjoint() * ph.conj() + a * ph) * Complex64::new(d.amplitude, 0.0);
    }
    let id = DMatrix::<Complex64>::identity(n, n);
    // vec(A X B) = (Bᵀ ⊗ A) vec(X)
    let mut sup = (id.kronecker(&h) - h.transpose().kronecker(&id)) * (-I);
    for c in collapses.iter().filter(|c| c.rate > 0.0) {
        let l = c.op.as_matrix();
        let ldl = l.adjoint() * l;
        let r = Complex64::new(c.rate, 0.0);
        sup += (l.conjugate().kronecker(l)
            - id.kronecker(&ldl) * Complex64::new(0.5, 0.0)
            - ldl.transpose().kronecker(&id) * Complex64::new(0.5, 0.0))
            * r;
    }
    sup
}

fn propagate_exact(segment: &TimeSegment, collapses: &[CollapseOp], rho: &mut DMatrix<Complex64>) {
    let n = rho.nrows();
    let prop = (liouvillian(segment, collapses) * Complex64::new(segment.duration, 0.0)).exp();
    let v = DVector::from_iterator(n * n, rho.iter().copied());
    let out = prop * v;
    *rho = DMatrix::from_iterator(n, n, out.iter().copied());
    for i in 0..n {
        rho[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let s = (rho[(i, j)] + rho[(j, i)].conj()) * 0.5;
            rho[(i, j)] = s;
            rho[(j, i)] = s.conj();
        }
    }
}

/// Evolves `state` through `segments` in order under the given collapses.
pub fn evolve(
    state: &QuantumState,
    segments: &[TimeSegment],
    collapses: &[CollapseOp],
    settings: &EvolveSettings,
) -> Result<QuantumState> {
    settings.validate()?;
    let dim = state.dim();
    for c in collapses {
        if c.op.rows() != dim {
            return Err(Error::InvalidDimension(format!(
                "collapse operator `{}` is {}x{}, state dimension is {dim}",
                c.label,
                c.op.rows(),
                c.op.cols()
            )));
        }
    }
    for s in segments {
        s.validate(dim)?;
    }

    let mut rho = state.density().as_matrix().clone();
    let mut t = 0.0;
    let mut steps = 0usize;
    for seg in segments {
        if settings.method == Method::Exponential && seg.is_time_independent() {
            propagate_exact(seg, collapses, &mut rho);
        } else {
            let gen = Generator::new(seg, collapses);
            integrate_segment(&gen, &mut rho, t, seg.duration, settings, &mut steps)?;
        }
        t += seg.duration;
    }

    let out = QuantumState::from_parts(ComplexMatrix::from_matrix(rho), state.dims().to_vec())?;
    check_output(&out, t)?;
    Ok(out)
}

fn check_output(state: &QuantumState, t: f64) -> Result<()> {
    let tr = state.trace();
    if (tr - 1.0).abs() > TRACE_TOLERANCE {
        return Err(Error::Integration {
            time: t,
            reason: format!("trace drifted to {tr}"),
        });
    }
    let herm = state.density().hermiticity_error();
    if herm > HERMITICITY_TOLERANCE {
        return Err(Error::Integration {
            time: t,
            reason: format!("Hermiticity error {herm:e}"),
        });
    }
    let min_ev = state.min_eigenvalue();
    if min_ev < -POSITIVITY_FLOOR {
        return Err(Error::Integration {
            time: t,
            reason: format!("negative eigenvalue {min_ev:e}"),
        });
    }
    Ok(())
}

/// Steady occupation `4Ω²/Γ²` of a resonantly driven oscillator damped into
/// a zero-temperature bath.
pub fn steady_occupation_analytic(drive: f64, decay: f64) -> Result<f64> {
    if !(decay > 0.0) {
        return Err(Error::param("decay", format!("must be > 0, got {decay}")));
    }
    Ok(4.0 * drive * drive / (decay * decay))
}

/// Largest drive-to-decay ratio accepted by [`evolve_to_steady`].
pub const WEAK_DRIVE_LIMIT: f64 = 0.1;
/// Decay times integrated before giving up on convergence.
pub const STEADY_MAX_DECAY_TIMES: usize = 50;
/// Relative change of ⟨n⟩ per decay time that counts as converged.
pub const STEADY_REL_CHANGE: f64 = 1e-6;

/// Integrates the rotating-frame driven-damped oscillator from vacuum until
/// ⟨n⟩ stops changing, returning the numerical steady occupation.
pub fn evolve_to_steady(
    drive: f64,
    decay: f64,
    layout: &HilbertLayout,
    settings: &EvolveSettings,
) -> Result<f64> {
    if !(decay > 0.0) {
        return Err(Error::param("decay", format!("must be > 0, got {decay}")));
    }
    if !(drive >= 0.0) {
        return Err(Error::param("drive", format!("must be >= 0, got {drive}")));
    }
    if drive / decay > WEAK_DRIVE_LIMIT {
        return Err(Error::param(
            "drive",
            format!(
                "drive/decay = {} exceeds the weak-drive limit {WEAK_DRIVE_LIMIT}",
                drive / decay
            ),
        ));
    }
    let dim = layout.fock_cutoff;
    let a = annihilation(dim)?;
    let n_op = number(dim)?;
    let segment = TimeSegment::new(1.0 / decay, ComplexMatrix::zeros(dim, dim)).with_drive(
        Drive {
            lowering: a.clone(),
            amplitude: drive,
            carrier: 0.0,
            phase: 0.0,
        },
        Frame::Rotating,
    );
    let collapses = [CollapseOp::new(a, decay, "phonon decay")?];

    let mut state = QuantumState::basis(0, vec![dim])?;
    let mut previous = 0.0;
    let mut last_change = f64::INFINITY;
    for _ in 0..STEADY_MAX_DECAY_TIMES {
        state = evolve(&state, std::slice::from_ref(&segment), &collapses, settings)?;
        let occ = crate::hilbert::expectation(&n_op, &state)?;
        let change = (occ - previous).abs();
        previous = occ;
        if change <= settings.abs_tol && occ <= settings.abs_tol {
            return Ok(occ);
        }
        last_change = change / occ.abs().max(f64::MIN_POSITIVE);
        if last_change < STEADY_REL_CHANGE {
            let top = state.populations()[dim - 1];
            if top > HilbertLayout::TOP_LEVEL_GUARD {
                return Err(Error::NumericalConsistency(format!(
                    "top Fock level population {top:e} exceeds the truncation guard"
                )));
            }
            return Ok(occ);
        }
    }
    Err(Error::Convergence {
        decay_times: STEADY_MAX_DECAY_TIMES,
        last_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{embed, expectation, qutrit_ops, Slot};

    fn decay_setup(dim: usize, gamma: f64) -> (QuantumState, Vec<CollapseOp>) {
        let a = annihilation(dim).unwrap();
        (
            QuantumState::basis(1, vec![dim]).unwrap(),
            vec![CollapseOp::new(a, gamma, "decay").unwrap()],
        )
    }

    #[test]
    fn pure_exponential_decay() {
        let gamma = 1.0 / 112e-6;
        let (state, cols) = decay_setup(4, gamma);
        let seg = TimeSegment::new(1.0 / gamma, ComplexMatrix::zeros(4, 4));
        let out = evolve(&state, &[seg], &cols, &EvolveSettings::default()).unwrap();
        let n = expectation(&number(4).unwrap(), &out).unwrap();
        assert!((n - (-1.0f64).exp()).abs() < 1e-6, "n = {n}");
    }

    #[test]
    fn exponential_method_agrees_with_runge_kutta() {
        let gamma = 2.0;
        let (state, cols) = decay_setup(4, gamma);
        let seg = TimeSegment::new(0.7, ComplexMatrix::zeros(4, 4)).with_drive(
            Drive {
                lowering: annihilation(4).unwrap(),
                amplitude: 0.1,
                carrier: 0.0,
                phase: 0.3,
            },
            Frame::Rotating,
        );
        let rk = evolve(&state, std::slice::from_ref(&seg), &cols, &EvolveSettings::default()).unwrap();
        let settings = EvolveSettings {
            method: Method::Exponential,
            ..Default::default()
        };
        let ex = evolve(&state, &[seg], &cols, &settings).unwrap();
        let diff = (rk.density() - ex.density()).max_abs();
        assert!(diff < 1e-8, "diff = {diff}");
    }

    #[test]
    fn resonant_pi_pulse() {
        let q = qutrit_ops();
        let omega_r = 2.0 * std::f64::consts::PI * 10e6;
        // H = (Ω_R/2)(σ + σ†) gives a full g→e transfer at t = π/Ω_R.
        let h = (&q.sigma_ge + &q.sigma_ge.dagger()).scale_real(omega_r / 2.0);
        let seg = TimeSegment::new(std::f64::consts::PI / omega_r, h);
        let g = QuantumState::basis(0, vec![3]).unwrap();
        let out = evolve(&g, &[seg], &[], &EvolveSettings::default()).unwrap();
        let pe = expectation(&q.proj_e, &out).unwrap();
        assert!((pe - 1.0).abs() < 1e-8, "p_e = {pe}");
    }

    #[test]
    fn unitary_evolution_preserves_purity() {
        let layout = HilbertLayout::new(3, 4).unwrap();
        let q = qutrit_ops();
        let a = embed(&annihilation(4).unwrap(), Slot::Phonon, &layout).unwrap();
        let s = embed(&q.sigma_ge, Slot::Qubit, &layout).unwrap();
        let h = &(&a.dagger() * &s) + &(&a * &s.dagger());
        let h = h.scale_real(1.0e6);
        // Start from a superposition of |g,1⟩ and |e,0⟩.
        let psi = ComplexMatrix::from_fn(12, 1, |i, _| {
            if i == 1 || i == 4 {
                Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
            } else {
                ZERO
            }
        });
        let rho = &psi * &psi.dagger();
        let state = QuantumState::new(rho, vec![3, 4]).unwrap();
        let out = evolve(&state, &[TimeSegment::new(3.3e-6, h)], &[], &EvolveSettings::default()).unwrap();
        assert!((out.purity() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn thermal_qubit_relaxes_to_detailed_balance() {
        let q = qutrit_ops();
        let omega = crate::constants::angular(5.0688e9);
        let nth = crate::constants::bose_occupation(omega, 0.040);
        let t1 = 28e-6;
        let cols = vec![
            CollapseOp::new(q.sigma_ge.clone(), (1.0 + nth) / t1, "down").unwrap(),
            CollapseOp::new(q.sigma_ge.dagger(), nth / t1, "up").unwrap(),
        ];
        let g = QuantumState::basis(0, vec![3]).unwrap();
        let seg = TimeSegment::new(40.0 * t1, ComplexMatrix::zeros(3, 3));
        let out = evolve(&g, &[seg], &cols, &EvolveSettings::default()).unwrap();
        let pe = expectation(&q.proj_e, &out).unwrap();
        let oracle = nth / (1.0 + 2.0 * nth);
        assert!((pe - oracle).abs() / oracle < 1e-6, "{pe} vs {oracle}");
        assert!((pe - 2.3e-3).abs() < 0.05e-3);
    }

    #[test]
    fn dephasing_rate_calibration() {
        // The g–e coherence must decay as exp(−t/T_φ).
        let q = qutrit_ops();
        let t_phi = 20e-6;
        let col = CollapseOp::dephasing(q.excitation_number(), 1.0 / t_phi, "dephasing").unwrap();
        let plus = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i < 2 && j < 2 {
                Complex64::new(0.5, 0.0)
            } else {
                ZERO
            }
        });
        let state = QuantumState::new(plus, vec![3]).unwrap();
        let seg = TimeSegment::new(t_phi, ComplexMatrix::zeros(3, 3));
        let out = evolve(&state, &[seg], &[col], &EvolveSettings::default()).unwrap();
        let coh = out.density()[(0, 1)].norm();
        assert!((coh - 0.5 * (-1.0f64).exp()).abs() < 1e-9, "coherence {coh}");
    }

    #[test]
    fn rejects_negative_rate() {
        assert!(CollapseOp::new(ComplexMatrix::identity(2), -1.0, "x").is_err());
    }

    #[test]
    fn rejects_mismatched_segment() {
        let s = QuantumState::basis(0, vec![3]).unwrap();
        let seg = TimeSegment::new(1.0, ComplexMatrix::zeros(4, 4));
        assert!(matches!(
            evolve(&s, &[seg], &[], &EvolveSettings::default()),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn step_budget_exhaustion_reports_time() {
        let (state, cols) = decay_setup(3, 1.0);
        let seg = TimeSegment::new(100.0, ComplexMatrix::identity(3).scale_real(1e3));
        let settings = EvolveSettings {
            max_steps: 3,
            max_step: Some(1e-3),
            ..Default::default()
        };
        match evolve(&state, &[seg], &cols, &settings) {
            Err(Error::Integration { time, .. }) => assert!(time >= 0.0 && time < 100.0),
            other => panic!("expected integration error, got {other:?}"),
        }
    }

    #[test]
    fn analytic_steady_occupation() {
        assert_eq!(steady_occupation_analytic(0.0, 3.0).unwrap(), 0.0);
        assert!((steady_occupation_analytic(1.5, 3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(steady_occupation_analytic(1.0, 0.0).is_err());
        assert!(steady_occupation_analytic(1.0, -1.0).is_err());
    }

    #[test]
    fn numeric_steady_state_zero_drive() {
        let layout = HilbertLayout::new(3, 8).unwrap();
        let n = evolve_to_steady(0.0, 1.0 / 112e-6, &layout, &EvolveSettings::default()).unwrap();
        assert!(n.abs() <= 1e-12);
    }

    #[test]
    fn numeric_steady_state_rejects_strong_drive() {
        let layout = HilbertLayout::new(3, 8).unwrap();
        assert!(evolve_to_steady(0.5, 1.0, &layout, &EvolveSettings::default()).is_err());
    }

    #[test]
    fn lab_frame_drive_matches_rotating_wave_result() {
        // Scaled-down oscillator: ω ≫ Γ, Ω so the rotating-wave result holds
        // up to O(Ω/ω) corrections.
        let dim = 6;
        let a = annihilation(dim).unwrap();
        let omega = 200.0;
        let gamma = 1.0;
        let drive = 0.05;
        let h0 = number(dim).unwrap().scale_real(omega);
        let seg = TimeSegment::new(30.0, h0).with_drive(
            Drive {
                lowering: a.clone(),
                amplitude: drive,
                carrier: omega,
                phase: 0.0,
            },
            Frame::Lab,
        );
        let cols = [CollapseOp::new(a, gamma, "decay").unwrap()];
        let settings = EvolveSettings {
            rel_tol: 1e-8,
            abs_tol: 1e-11,
            ..Default::default()
        };
        let out = evolve(&QuantumState::basis(0, vec![dim]).unwrap(), &[seg], &cols, &settings).unwrap();
        let n = expectation(&number(dim).unwrap(), &out).unwrap();
        let expected = steady_occupation_analytic(drive, gamma).unwrap();
        assert!((n - expected).abs() / expected < 0.03, "{n} vs {expected}");
    }
}
