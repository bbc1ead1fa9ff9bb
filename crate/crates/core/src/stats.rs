//! Bose–Einstein thermometry and measurement statistics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, PLANCK};
use crate::error::{Error, Result};

/// One averaged population measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationRecord {
    pub label: String,
    pub mean: f64,
    pub variance: f64,
    pub n_shots: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl PopulationRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.variance >= 0.0) || !self.variance.is_finite() {
            return Err(Error::param(
                "variance",
                format!("must be finite and >= 0, got {}", self.variance),
            ));
        }
        // Negative means are legitimate near zero population; only reject
        // values far outside the noise.
        let floor = -5.0 * self.variance.sqrt();
        if !(self.mean >= floor && self.mean <= 1.0) {
            return Err(Error::param(
                "mean",
                format!("{} lies outside [{floor:e}, 1]", self.mean),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermometryPoint {
    /// Kelvin.
    pub temperature: f64,
    pub population: f64,
    pub sigma: f64,
}

/// `x = exp(−h f / k_B T)`; 0 at T = 0.
fn boltzmann_x(temperature: f64, freq_hz: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    (-PLANCK * freq_hz / (BOLTZMANN * temperature)).exp()
}

/// First-excited population of a thermal mode plus a constant offset,
/// `(1 − x) x + offset`.
pub fn bose_population(temperature: f64, freq_hz: f64, offset: f64) -> Result<f64> {
    if !(temperature >= 0.0) {
        return Err(Error::param(
            "temperature",
            format!("must be >= 0, got {temperature}"),
        ));
    }
    let x = boltzmann_x(temperature, freq_hz);
    Ok((1.0 - x) * x + offset)
}

/// Temperature whose thermal first-excited population equals `population`.
pub fn effective_temperature(population: f64, freq_hz: f64) -> Result<f64> {
    if !(freq_hz > 0.0) {
        return Err(Error::param("freq", format!("must be > 0, got {freq_hz}")));
    }
    if population >= 0.25 {
        return Err(Error::NoSolution(format!(
            "population {population} is not reachable by a thermal state (max 0.25)"
        )));
    }
    if !(population > 0.0) {
        return Err(Error::param(
            "population",
            format!("must be > 0, got {population}"),
        ));
    }
    // Rationalised root of x² − x + P = 0; stable for tiny P.
    let x = 2.0 * population / (1.0 + (1.0 - 4.0 * population).sqrt());
    Ok(PLANCK * freq_hz / (BOLTZMANN * (1.0 / x).ln()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoseFit {
    pub offset: f64,
    /// One-sigma uncertainty of the offset.
    pub offset_sigma: f64,
    pub reduced_chi_sq: f64,
    pub iterations: usize,
}

pub const FIT_MAX_ITERATIONS: usize = 200;

/// Weighted Levenberg–Marquardt fit of the offset in `(1 − x) x + offset`,
/// temperatures taken as given.
pub fn fit_bose(points: &[ThermometryPoint], freq_hz: f64) -> Result<BoseFit> {
    if points.len() < 4 {
        return Err(Error::param("points", format!("need >= 4 points, got {}", points.len())));
    }
    for p in points {
        if !(p.temperature > 0.0) {
            return Err(Error::param("temperature", format!("must be > 0, got {}", p.temperature)));
        }
        if !(p.sigma > 0.0) {
            return Err(Error::param("sigma", format!("must be > 0, got {}", p.sigma)));
        }
    }
    let t_min = points.iter().map(|p| p.temperature).fold(f64::INFINITY, f64::min);
    let t_max = points.iter().map(|p| p.temperature).fold(0.0, f64::max);
    if t_max < 3.0 * t_min {
        return Err(Error::param(
            "points",
            format!("temperatures must span a factor 3, got [{t_min}, {t_max}] K"),
        ));
    }

    let thermal: Vec<f64> = points
        .iter()
        .map(|p| bose_population(p.temperature, freq_hz, 0.0))
        .collect::<Result<_>>()?;
    let chi_sq = |offset: f64| -> f64 {
        points
            .iter()
            .zip(&thermal)
            .map(|(p, m)| ((p.population - m - offset) / p.sigma).powi(2))
            .sum()
    };
    // The model is linear in the offset, so the Jacobian is constant.
    let jtj: f64 = points.iter().map(|p| p.sigma.powi(-2)).sum();

    let mut offset = 0.0;
    let mut lambda = 1e-3;
    let mut chi = chi_sq(offset);
    for iteration in 1..=FIT_MAX_ITERATIONS {
        let jtr: f64 = points
            .iter()
            .zip(&thermal)
            .map(|(p, m)| (p.population - m - offset) / p.sigma.powi(2))
            .sum();
        let step = jtr / (jtj * (1.0 + lambda));
        let trial = offset + step;
        let trial_chi = chi_sq(trial);
        if trial_chi <= chi {
            offset = trial;
            let improvement = chi - trial_chi;
            chi = trial_chi;
            lambda /= 10.0;
            if improvement <= 1e-12 * chi.max(1e-300) || step.abs() <= 1e-15 * offset.abs().max(1e-300) {
                return Ok(BoseFit {
                    offset,
                    offset_sigma: jtj.powf(-0.5),
                    reduced_chi_sq: chi / (points.len() - 1) as f64,
                    iterations: iteration,
                });
            }
        } else {
            lambda *= 10.0;
        }
    }
    Err(Error::Fit(format!(
        "offset fit did not converge in {FIT_MAX_ITERATIONS} iterations"
    )))
}

/// Inverse-variance weighted mean of several records.
pub fn weighted_mean(records: &[PopulationRecord]) -> Result<PopulationRecord> {
    if records.is_empty() {
        return Err(Error::param("records", "need at least one record"));
    }
    let mut wsum = 0.0;
    let mut msum = 0.0;
    let mut shots = 0u64;
    for r in records {
        if !(r.variance > 0.0) {
            return Err(Error::param(
                "variance",
                format!("record `{}` has variance {}, weights need > 0", r.label, r.variance),
            ));
        }
        let w = 1.0 / r.variance;
        wsum += w;
        msum += w * r.mean;
        shots += r.n_shots;
    }
    Ok(PopulationRecord {
        label: if records.len() == 1 {
            records[0].label.clone()
        } else {
            "weighted_mean".into()
        },
        mean: msum / wsum,
        variance: 1.0 / wsum,
        n_shots: shots,
        timestamp: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockStatistics {
    pub mean: f64,
    /// Sample standard deviation of all blocks (N − 1 normalisation).
    pub sigma_total: f64,
    /// (k, SEM after the first k blocks), k = 2..=N.
    pub sem_curve: Vec<(usize, f64)>,
    /// (k, σ_total / √k), k = 2..=N.
    pub reference_curve: Vec<(usize, f64)>,
}

impl BlockStatistics {
    /// Least-squares slope of log SEM against log k over every k with a
    /// non-zero SEM.
    pub fn sem_slope(&self) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .sem_curve
            .iter()
            .filter(|&&(_, s)| s > 0.0)
            .map(|&(k, s)| ((k as f64).ln(), s.ln()))
            .collect();
        if pts.len() < 2 {
            return Err(Error::Fit("SEM curve has fewer than two non-zero points".into()));
        }
        Ok(linear_slope(&pts))
    }
}

fn linear_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Cumulative mean and standard error of a series of block means.
pub fn block_statistics(series: &[f64]) -> Result<BlockStatistics> {
    if series.len() < 2 {
        return Err(Error::param("series", format!("need >= 2 blocks, got {}", series.len())));
    }
    // Welford accumulation.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut sem_curve = Vec::with_capacity(series.len() - 1);
    for (i, &v) in series.iter().enumerate() {
        let k = (i + 1) as f64;
        let d = v - mean;
        mean += d / k;
        m2 += d * (v - mean);
        if i >= 1 {
            let s = (m2.max(0.0) / (k - 1.0)).sqrt();
            sem_curve.push((i + 1, s / k.sqrt()));
        }
    }
    let sigma_total = (m2.max(0.0) / (series.len() - 1) as f64).sqrt();
    let reference_curve = (2..=series.len())
        .map(|k| (k, sigma_total / (k as f64).sqrt()))
        .collect();
    Ok(BlockStatistics {
        mean,
        sigma_total,
        sem_curve,
        reference_curve,
    })
}

/// iid gaussian block means.
pub fn synthetic_blocks(n: usize, mean: f64, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    let normal = Normal::new(mean, sigma).map_err(|e| Error::param("sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
}

/// Points on `(1 − x) x + offset` with gaussian noise of `noise_frac`
/// times each point's value; the quoted sigma is that same noise level.
pub fn synthetic_thermometry(
    temperatures: &[f64],
    freq_hz: f64,
    offset: f64,
    noise_frac: f64,
    seed: u64,
) -> Result<Vec<ThermometryPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    temperatures
        .iter()
        .map(|&t| {
            let value = bose_population(t, freq_hz, offset)?;
            let sigma = noise_frac * value.abs();
            let noise = if sigma > 0.0 { sigma * std_normal.sample(&mut rng) } else { 0.0 };
            Ok(ThermometryPoint {
                temperature: t,
                population: value + noise,
                sigma: if sigma > 0.0 { sigma } else { 1e-12 },
            })
        })
        .collect()
}
