//! Acceptance gate. Runs every criterion at its pinned tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use hqs_core::bounds::{csl_bound, h0_bound, kappa_bound, project, xi_33, DeviceScenario};
use hqs_core::device::DeviceParams;
use hqs_core::hilbert::HilbertLayout;
use hqs_core::lindblad::{evolve_to_steady, EvolveSettings};
use hqs_core::protocol::{
    run_protocol, sweep, InversionCurves, Numerics, ProtocolSettings, SweepParameter, SweepSpec,
};
use hqs_core::stats::{
    block_statistics, effective_temperature, fit_bose, synthetic_blocks, synthetic_thermometry,
    weighted_mean, PopulationRecord,
};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

const MS: Duration = Duration::from_millis(1);

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn within_rel(got: f64, want: f64, rel: f64) -> bool {
    ((got - want) / want).abs() <= rel
}

/// Collects sub-checks; the criterion fails if any of them does.
#[derive(Default)]
struct Checks {
    parts: Vec<String>,
    failed: bool,
}

impl Checks {
    fn check(&mut self, ok: bool, msg: String) {
        self.failed |= !ok;
        self.parts.push(if ok { msg } else { format!("MISS {msg}") });
    }

    fn finish(self) -> Outcome {
        let text = self.parts.join("; ");
        if self.failed {
            Err(text)
        } else {
            Ok(text)
        }
    }
}

fn rel_check(c: &mut Checks, label: &str, got: f64, want: f64, rel: f64) {
    c.check(
        within_rel(got, want, rel),
        format!("{label} = {got:.4e} (want {want:.1e} ±{}%)", rel * 100.0),
    );
}

fn gw() -> Outcome {
    let d = DeviceParams::table1();
    let mut c = Checks::default();
    rel_check(&mut c, "h0(6.7e-5)", h0_bound(6.7e-5, &d).map_err(|e| e.to_string())?.h0, 5.5e-18, 0.02);
    rel_check(&mut c, "h0(1.9e-5)", h0_bound(1.9e-5, &d).map_err(|e| e.to_string())?.h0, 2.9e-18, 0.02);
    c.finish()
}

fn dark_photon() -> Outcome {
    let d = DeviceParams::table1();
    let mut c = Checks::default();
    for (p, e33, want) in [(6.7e-5, 0.4, 4.4e-9), (6.7e-5, 2.0, 8.8e-10), (1.9e-5, 0.4, 2.3e-9), (1.9e-5, 2.0, 4.7e-10)] {
        let k = kappa_bound(p, &d, e33).map_err(|e| e.to_string())?.kappa;
        rel_check(&mut c, &format!("kappa(P={p:e}, e33={e33})"), k, want, 0.03);
    }
    c.finish()
}

fn csl() -> Outcome {
    let mut c = Checks::default();
    let r = csl_bound(6.7e-5, 112e-6).map_err(|e| e.to_string())?;
    rel_check(&mut c, "tau_e", r.tau_e, 5.9e13, 0.03);
    rel_check(&mut c, "lambda(6.7e-5)", r.lambda_csl, 5.7e-8, 0.03);
    let r = csl_bound(1.9e-5, 112e-6).map_err(|e| e.to_string())?;
    rel_check(&mut c, "lambda(1.9e-5)", r.lambda_csl, 1.6e-8, 0.03);
    c.finish()
}

fn projection() -> Outcome {
    let mut c = Checks::default();
    let next = project(&DeviceScenario::next_generation()).map_err(|e| e.to_string())?;
    rel_check(&mut c, "next h0", next.gw.h0, 1.8e-19, 0.10);
    let kappa = next.dp.as_ref().map(|d| d.kappa).ok_or("next_generation has no dp result")?;
    rel_check(&mut c, "next kappa", kappa, 3.0e-11, 0.10);
    let mhz_scenario = DeviceScenario::mhz_device();
    let mhz = project(&mhz_scenario).map_err(|e| e.to_string())?;
    let ratio = mhz.gw.h0 / 8.6e-22;
    c.check(
        (0.2..=5.0).contains(&ratio),
        format!("mhz h0 = {:.3e} (want 8.6e-22 within x5, ratio {ratio:.2})", mhz.gw.h0),
    );
    c.check(mhz_scenario.assumption_flag, "mhz assumption flag set".into());
    c.finish()
}

fn steady_state() -> Outcome {
    let layout = HilbertLayout::new(3, 8).map_err(|e| e.to_string())?;
    let decay = DeviceParams::table1().phonon_decay_rate();
    let mut c = Checks::default();
    for ratio in [1e-3, 1e-2, 5e-2] {
        let drive = ratio * decay;
        let numeric = evolve_to_steady(drive, decay, &layout, &EvolveSettings::default())
            .map_err(|e| e.to_string())?;
        // Independent closed form, not the library's helper.
        let analytic = 4.0 * ratio * ratio;
        rel_check(&mut c, &format!("n(Ω/Γ={ratio:e})"), numeric, analytic, 0.01);
    }
    c.finish()
}

/// Composite Simpson weights on `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h))
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// ∫ z·u dV for the lowest Laguerre–Gaussian transverse profile times the
/// n-th standing wave, in cylindrical coordinates about the slab midplane.
fn overlap_numeric(length: f64, waist: f64, n: u32) -> f64 {
    let amp = (2.0 / (length * waist * waist)).sqrt() * (2.0 / PI).sqrt();
    let radial = 2.0 * PI * simpson(|r| r * (-(r * r) / (waist * waist)).exp(), 0.0, 10.0 * waist, 4_000);
    let k = n as f64 * PI / length;
    let axial = simpson(
        |z| z * if n % 2 == 1 { (k * z).sin() } else { (k * z).cos() },
        -length / 2.0,
        length / 2.0,
        100 * n as usize + 1_000,
    );
    (amp * radial * axial).abs()
}

fn mode_overlap() -> Outcome {
    let (l, mu) = (435e-6, 27e-6);
    let mut c = Checks::default();
    for n in [1u32, 3, 401, 403] {
        let closed = xi_33(l, mu, n as i64).map_err(|e| e.to_string())?;
        let numeric = overlap_numeric(l, mu, n);
        let rel = (closed - numeric).abs() / numeric;
        c.check(rel <= 1e-3, format!("n={n} rel {rel:.1e}"));
    }
    for n in [2i64, 400, 402, 404] {
        let v = xi_33(l, mu, n).map_err(|e| e.to_string())?;
        c.check(v == 0.0, format!("n={n} -> {v}"));
    }
    c.finish()
}

fn protocol_identity() -> Outcome {
    let d = DeviceParams::ideal();
    let mut c = Checks::default();
    for p in [1e-5, 1e-4, 1e-3] {
        let r = run_protocol(&d, p, &ProtocolSettings::default(), &Numerics::default())
            .map_err(|e| e.to_string())?;
        let err = (r.population - p).abs();
        c.check(err <= 1e-7, format!("P={p:e} err {err:.1e}"));
    }
    c.finish()
}

fn error_budget() -> Outcome {
    let d = DeviceParams::table1();
    let settings = ProtocolSettings::default();
    let numerics = Numerics::default();
    let mut c = Checks::default();
    for bath in [0.037, 0.045, 0.053] {
        let dev = DeviceParams {
            t_qb_bath: bath,
            ..d.clone()
        };
        let p = run_protocol(&dev, 1.9e-5, &settings, &numerics).map_err(|e| e.to_string())?.population;
        c.check(
            (3.3e-5..=1.4e-4).contains(&p),
            format!("extracted@{:.0}mK = {p:.3e} (want [3.3e-5, 1.4e-4])", bath * 1e3),
        );
    }
    let curves = InversionCurves::build(&d, [0.037, 0.053], &settings, &numerics)
        .map_err(|e| e.to_string())?;
    match curves.infer(6.7e-5) {
        Ok(v) => {
            let ratio = v / 1.9e-5;
            c.check(
                (0.5..=2.0).contains(&ratio),
                format!("infer(6.7e-5) = {v:.3e} (want 1.9e-5 within x2, ratio {ratio:.2})"),
            );
        }
        Err(e) => c.check(false, format!("infer(6.7e-5) failed: {e}")),
    }
    c.finish()
}

fn list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn sweep_trends() -> Outcome {
    let d = DeviceParams::table1();
    let settings = ProtocolSettings::default();
    let numerics = Numerics::default();
    let panels: [(SweepParameter, [f64; 5]); 6] = [
        (SweepParameter::T1Ge, [10e-6, 20e-6, 28e-6, 50e-6, 100e-6]),
        (SweepParameter::TQbBath, [0.030, 0.037, 0.045, 0.053, 0.060]),
        (SweepParameter::T1Ef, [5e-6, 10e-6, 20e-6, 40e-6, 80e-6]),
        (SweepParameter::AIswap, [0.8, 0.9, 1.0, 1.1, 1.2]),
        (SweepParameter::TPhi, [10e-6, 20e-6, 50e-6, 100e-6, 200e-6]),
        (SweepParameter::FRo, [0.7, 0.8, 0.9, 0.95, 1.0]),
    ];
    let mut c = Checks::default();
    for (parameter, values) in panels {
        let spec = SweepSpec {
            parameter,
            values: values.to_vec(),
            true_population: 1.9e-5,
        };
        let rows = sweep(&d, &spec, &settings, &numerics).map_err(|e| e.to_string())?;
        let pops: Vec<f64> = rows.iter().map(|r| r.population).collect();
        let pairs = || pops.windows(2).map(|w| (w[0], w[1]));
        let name = parameter.name();
        match parameter {
            SweepParameter::T1Ge | SweepParameter::TPhi => {
                c.check(pairs().all(|(a, b)| b <= a), format!("{name} non-increasing {}", list(&pops)))
            }
            SweepParameter::TQbBath => {
                c.check(pairs().all(|(a, b)| b >= a), format!("{name} non-decreasing {}", list(&pops)))
            }
            SweepParameter::FRo => {
                let spread = pops.iter().cloned().fold(f64::MIN, f64::max)
                    - pops.iter().cloned().fold(f64::MAX, f64::min);
                c.check(spread <= 1e-6, format!("{name} spread {spread:.1e}"))
            }
            SweepParameter::T1Ef | SweepParameter::AIswap => {
                c.check(pops.iter().all(|p| p.is_finite()), format!("{name} ran"))
            }
        }
    }
    c.finish()
}

fn thermometry() -> Outcome {
    let mut c = Checks::default();
    let t = effective_temperature(6.7e-5, 5.0486e9).map_err(|e| e.to_string())?;
    rel_check(&mut c, "T_eff", t, 25.2e-3, 0.01);

    let temps: Vec<f64> = (0..12).map(|i| 0.010 + 0.015 * i as f64).collect();
    let offset = 3e-5;
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    for seed in 0..100 {
        let pts = synthetic_thermometry(&temps, 5.0486e9, offset, 0.05, seed).map_err(|e| e.to_string())?;
        let fit = fit_bose(&pts, 5.0486e9).map_err(|e| e.to_string())?;
        let pull = (fit.offset - offset).abs() / fit.offset_sigma;
        worst = worst.max(pull);
        misses += usize::from(pull > 3.0);
    }
    c.check(misses == 0, format!("offset round trip: {misses}/100 seeds beyond 3σ, worst pull {worst:.2}"));
    c.finish()
}

fn statistics() -> Outcome {
    let mut c = Checks::default();
    let series = synthetic_blocks(10_000, 1.2e-5, 5.5e-3, 0).map_err(|e| e.to_string())?;
    let slope = block_statistics(&series).and_then(|s| s.sem_slope()).map_err(|e| e.to_string())?;
    c.check((slope + 0.5).abs() <= 0.02, format!("SEM slope {slope:.4} (want -0.5 ±0.02)"));

    let rec = |mean: f64, variance: f64| PopulationRecord {
        label: String::new(),
        mean,
        variance,
        n_shots: 1,
        timestamp: None,
    };
    let w = weighted_mean(&[rec(1e-4, 1e-8), rec(3e-4, 4e-8)]).map_err(|e| e.to_string())?;
    c.check(w.mean == 1.4e-4, format!("weighted mean {:e} (want 1.4e-4)", w.mean));
    c.check(w.variance == 8e-9, format!("weighted variance {:e} (want 8e-9)", w.variance));
    c.finish()
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hqs"))
        .args(args)
        .env_remove("HQS_CONFIG_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let mut c = Checks::default();
    let runs: [(&[&str], &[&str]); 5] = [
        (&["simulate"], &["simulate"]),
        (&["sweep", "--jobs", "1"], &["sweep", "--jobs", "4"]),
        (&["project", "--scenario", "next_generation"], &["project", "--scenario", "next_generation"]),
        (&["stats", "--mode", "blocks", "--seed", "7"], &["stats", "--mode", "blocks", "--seed", "7"]),
        (
            &["stats", "--mode", "fit-bose", "--input", "synthetic_thermometry.csv"],
            &["stats", "--mode", "fit-bose", "--input", "synthetic_thermometry.csv"],
        ),
    ];
    for (a, b) in runs {
        let (x, y) = (run_cli(a)?, run_cli(b)?);
        c.check(!x.is_empty() && x == y, format!("{} ({} bytes)", a[0], x.len()));
    }
    c.finish()
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "GW bound", limit: MS, run: gw },
        Criterion { id: 2, name: "dark-photon bound", limit: MS, run: dark_photon },
        Criterion { id: 3, name: "CSL bound", limit: MS, run: csl },
        Criterion { id: 4, name: "projection", limit: MS, run: projection },
        Criterion { id: 5, name: "steady-state oracle", limit: secs(10), run: steady_state },
        Criterion { id: 6, name: "mode-overlap oracle", limit: secs(30), run: mode_overlap },
        Criterion { id: 7, name: "protocol identity", limit: secs(60), run: protocol_identity },
        Criterion { id: 8, name: "error budget", limit: secs(300), run: error_budget },
        Criterion { id: 9, name: "sweep trends", limit: secs(600), run: sweep_trends },
        Criterion { id: 10, name: "thermometry", limit: secs(30), run: thermometry },
        Criterion { id: 11, name: "statistics", limit: secs(10), run: statistics },
        Criterion { id: 12, name: "determinism", limit: Duration::MAX, run: determinism },
    ];

    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for c in &criteria {
        let tag = format!("{} {}", c.id, c.name);
        if !filter.is_empty() && !filter.iter().any(|f| tag.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) => (elapsed <= c.limit, d),
            Err(d) => (false, d),
        };
        let budget = if c.limit == Duration::MAX {
            String::new()
        } else {
            format!(" / limit {:?}", c.limit)
        };
        println!(
            "[{}] {tag}: {detail} ({elapsed:.2?}{budget})",
            if ok { "PASS" } else { "FAIL" }
        );
        failures += usize::from(!ok);
    }
    println!("acceptance: {} criteria failed", failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
