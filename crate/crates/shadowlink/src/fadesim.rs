//! Correlated shadowing generation and fading-dip-duration statistics.
//!
//! Shadowing realizations are zero-mean Gaussian sequences over the link
//! travel-distance axis. A single-exponential autocorrelation is realized
//! exactly by a first-order autoregression with coefficient
//! a = exp(−step_m/d_c) and innovation variance σ²(1 − a²); the
//! double-exponential model is the sum of two independent such processes
//! with variances r·σ² and (1−r)·σ². Every process starts from its
//! stationary distribution, so dip statistics carry no burn-in bias.
//!
//! Seeding is splittable and documented: component k of a generation call
//! with seed s uses `ChaCha8Rng::seed_from_u64(s)` on stream k. Generating
//! traces concurrently therefore never changes results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlate::AutocorrModel;
use crate::models::{pathloss, LinkGeometry, ModelError, PathlossModel};

#[derive(Debug, Error)]
pub enum FadesimError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("trace length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Simulation scenario: a fixed-separation convoy at constant speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Fixed TX-RX distance (m).
    #[serde(default = "default_distance")]
    pub tx_rx_distance_m: f64,
    /// Common constant speed of both cars (m/s).
    #[serde(default = "default_speed")]
    pub speed_mps: f64,
    /// Sampling interval (s).
    #[serde(default = "default_step")]
    pub sample_step_s: f64,
    /// Simulated duration (s).
    pub duration_s: f64,
    /// Fading-dip threshold on channel gain (dB).
    #[serde(default = "default_threshold")]
    pub threshold_db: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_distance() -> f64 {
    100.0
}
fn default_speed() -> f64 {
    25.0
}
fn default_step() -> f64 {
    0.4
}
fn default_threshold() -> f64 {
    -90.0
}

impl Scenario {
    pub fn validate(&self) -> Result<(), FadesimError> {
        for (name, v) in [
            ("tx_rx_distance_m", self.tx_rx_distance_m),
            ("speed_mps", self.speed_mps),
            ("sample_step_s", self.sample_step_s),
            ("duration_s", self.duration_s),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(FadesimError::Scenario(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.threshold_db >= 0.0 {
            return Err(FadesimError::Scenario(format!(
                "threshold_db must be negative, got {}",
                self.threshold_db
            )));
        }
        Ok(())
    }

    /// Spatial step per sample (m): both cars move, the shadowing lag axis
    /// is the link travel distance.
    pub fn step_m(&self) -> f64 {
        self.speed_mps * self.sample_step_s
    }

    /// Number of samples covering the duration.
    pub fn n_samples(&self) -> usize {
        (self.duration_s / self.sample_step_s).round().max(1.0) as usize
    }
}

/// Autocorrelation shape of a generated shadowing process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShadowModel {
    /// No correlation between samples (δ autocorrelation).
    Delta,
    SingleExp { d_c_m: f64 },
    DoubleExp { r: f64, d_c1_m: f64, d_c2_m: f64 },
}

impl ShadowModel {
    /// Theoretical autocorrelation at travel-distance lag `delta_d_m`.
    pub fn acf(&self, delta_d_m: f64) -> f64 {
        let dd = delta_d_m.abs();
        match *self {
            ShadowModel::Delta => {
                if dd == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ShadowModel::SingleExp { d_c_m } => (-dd / d_c_m).exp(),
            ShadowModel::DoubleExp { r, d_c1_m, d_c2_m } => {
                r * (-dd / d_c1_m).exp() + (1.0 - r) * (-dd / d_c2_m).exp()
            }
        }
    }
}

impl From<AutocorrModel> for ShadowModel {
    fn from(m: AutocorrModel) -> Self {
        match m {
            AutocorrModel::SingleExp { d_c_m } => ShadowModel::SingleExp { d_c_m },
            AutocorrModel::DoubleExp { r, d_c1_m, d_c2_m } => ShadowModel::DoubleExp {
                r,
                d_c1_m,
                d_c2_m,
            },
        }
    }
}

/// Variance and autocorrelation of one link's shadowing process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowSpec {
    pub sigma_db: f64,
    pub model: ShadowModel,
}

fn component_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stationary AR(1) sequence with coefficient `a` and marginal std `sigma`.
fn ar1_sequence(rng: &mut ChaCha8Rng, a: f64, sigma: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let innov_std = sigma * (1.0 - a * a).max(0.0).sqrt();
    let mut x = sigma * rng.sample::<f64, _>(StandardNormal);
    out.push(x);
    for _ in 1..n {
        x = a * x + innov_std * rng.sample::<f64, _>(StandardNormal);
        out.push(x);
    }
    out
}

fn ar_coefficient(d_c_m: f64, step_m: f64) -> f64 {
    (-step_m / d_c_m).exp()
}

/// Correlated shadowing sequence with autocorrelation exp(−Δd/d_c) sampled
/// every `step_m` meters. Deterministic for a given seed.
pub fn gen_shadow_single_exp(
    sigma_db: f64,
    d_c_m: f64,
    step_m: f64,
    n: usize,
    seed: u64,
) -> Vec<f64> {
    assert!(sigma_db >= 0.0, "sigma must be >= 0");
    assert!(d_c_m > 0.0, "d_c must be > 0");
    assert!(step_m > 0.0, "step must be > 0");
    let mut rng = component_rng(seed, 0);
    ar1_sequence(&mut rng, ar_coefficient(d_c_m, step_m), sigma_db, n)
}

/// Sum of two independent single-exponential processes with variance shares
/// r and 1−r; the total autocorrelation is the weighted sum of the two
/// exponentials exactly.
pub fn gen_shadow_double_exp(
    sigma_db: f64,
    r: f64,
    d_c1_m: f64,
    d_c2_m: f64,
    step_m: f64,
    n: usize,
    seed: u64,
) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&r), "r must be in [0, 1]");
    assert!(d_c1_m > 0.0 && d_c2_m > 0.0, "decay distances must be > 0");
    let mut rng1 = component_rng(seed, 0);
    let mut rng2 = component_rng(seed, 1);
    let fast = ar1_sequence(
        &mut rng1,
        ar_coefficient(d_c1_m, step_m),
        sigma_db * r.sqrt(),
        n,
    );
    let slow = ar1_sequence(
        &mut rng2,
        ar_coefficient(d_c2_m, step_m),
        sigma_db * (1.0 - r).sqrt(),
        n,
    );
    fast.iter().zip(&slow).map(|(a, b)| a + b).collect()
}

/// One shadowing sequence under the given spec, using streams
/// `base_stream..base_stream+2` of the seed.
fn gen_shadow_component(
    spec: &ShadowSpec,
    step_m: f64,
    n: usize,
    seed: u64,
    base_stream: u64,
) -> Vec<f64> {
    match spec.model {
        ShadowModel::Delta => {
            let mut rng = component_rng(seed, base_stream);
            // a = 0: independent samples at full variance.
            ar1_sequence(&mut rng, 0.0, spec.sigma_db, n)
        }
        ShadowModel::SingleExp { d_c_m } => {
            let mut rng = component_rng(seed, base_stream);
            ar1_sequence(&mut rng, ar_coefficient(d_c_m, step_m), spec.sigma_db, n)
        }
        ShadowModel::DoubleExp { r, d_c1_m, d_c2_m } => {
            let mut rng1 = component_rng(seed, base_stream);
            let mut rng2 = component_rng(seed, base_stream + 1);
            let fast = ar1_sequence(
                &mut rng1,
                ar_coefficient(d_c1_m, step_m),
                spec.sigma_db * r.sqrt(),
                n,
            );
            let slow = ar1_sequence(
                &mut rng2,
                ar_coefficient(d_c2_m, step_m),
                spec.sigma_db * (1.0 - r).sqrt(),
                n,
            );
            fast.iter().zip(&slow).map(|(a, b)| a + b).collect()
        }
    }
}

/// Single shadowing sequence under `spec`.
pub fn gen_shadow(spec: &ShadowSpec, step_m: f64, n: usize, seed: u64) -> Vec<f64> {
    gen_shadow_component(spec, step_m, n, seed, 0)
}

/// Two shadowing sequences with zero-lag cross-correlation `rho` and
/// identical marginal statistics under `spec`.
///
/// Common-component construction: S_i = √ρ·C + √(1−ρ)·I_i with C, I_1, I_2
/// independent processes sharing the spec's autocorrelation and variance.
/// Each marginal keeps the autocorrelation exactly; the cross-correlation
/// is ρ at every lag the autocorrelation assigns to itself.
pub fn gen_multilink(
    rho: f64,
    spec: &ShadowSpec,
    step_m: f64,
    n: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>), FadesimError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(FadesimError::Scenario(format!(
            "cross-correlation must be in [0, 1], got {rho}"
        )));
    }
    // Streams 0-1: common component; 2-3: link 1; 4-5: link 2.
    let common = gen_shadow_component(spec, step_m, n, seed, 0);
    let ind1 = gen_shadow_component(spec, step_m, n, seed, 2);
    let ind2 = gen_shadow_component(spec, step_m, n, seed, 4);
    let (wc, wi) = (rho.sqrt(), (1.0 - rho).sqrt());
    let s1 = common
        .iter()
        .zip(&ind1)
        .map(|(c, i)| wc * c + wi * i)
        .collect();
    let s2 = common
        .iter()
        .zip(&ind2)
        .map(|(c, i)| wc * c + wi * i)
        .collect();
    Ok((s1, s2))
}

/// A sampled channel-gain realization: deterministic pathloss plus shadowing.
#[derive(Debug, Clone)]
pub struct ShadowTrace {
    pub t_s: Vec<f64>,
    pub shadow_db: Vec<f64>,
    pub gain_db: Vec<f64>,
    /// Sampling interval (s); carried explicitly so run durations stay
    /// bit-stable regardless of the time origin.
    pub sample_step_s: f64,
    pub model_id: String,
}

impl ShadowTrace {
    pub fn len(&self) -> usize {
        self.gain_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gain_db.is_empty()
    }

    pub fn write_csv<W: std::io::Write>(
        &self,
        fmt: impl Fn(f64) -> String,
        mut w: W,
    ) -> std::io::Result<()> {
        writeln!(w, "t_s,shadow_db,gain_db")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{}",
                fmt(self.t_s[i]),
                fmt(self.shadow_db[i]),
                fmt(self.gain_db[i])
            )?;
        }
        Ok(())
    }
}

/// Composes a shadow sequence with the deterministic gain at the scenario's
/// fixed TX-RX distance.
pub fn gain_trace(
    scenario: &Scenario,
    model: &PathlossModel,
    geom: &LinkGeometry,
    shadow_db: Vec<f64>,
    model_id: impl Into<String>,
) -> Result<ShadowTrace, FadesimError> {
    scenario.validate()?;
    let det_gain = -pathloss(scenario.tx_rx_distance_m, model, geom)?;
    let t_s: Vec<f64> = (0..shadow_db.len())
        .map(|i| i as f64 * scenario.sample_step_s)
        .collect();
    let gain_db: Vec<f64> = shadow_db.iter().map(|s| det_gain + s).collect();
    Ok(ShadowTrace {
        t_s,
        shadow_db,
        gain_db,
        sample_step_s: scenario.sample_step_s,
        model_id: model_id.into(),
    })
}

/// Durations of maximal below-threshold runs and their empirical CDF.
#[derive(Debug, Clone)]
pub struct DipStats {
    /// One duration per maximal run (s), in order of occurrence.
    pub durations_s: Vec<f64>,
    /// Empirical CDF over run durations: (duration, P(D ≤ duration)),
    /// at run-length resolution. Empty when no dip occurred.
    pub cdf: Vec<(f64, f64)>,
    pub sample_step_s: f64,
}

impl DipStats {
    fn from_run_lengths(runs: Vec<usize>, step_s: f64) -> Self {
        let durations_s: Vec<f64> = runs.iter().map(|&l| l as f64 * step_s).collect();
        let mut sorted = durations_s.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut cdf = Vec::new();
        let mut i = 0;
        while i < n {
            let d = sorted[i];
            let mut j = i;
            while j < n && sorted[j] == d {
                j += 1;
            }
            cdf.push((d, j as f64 / n as f64));
            i = j;
        }
        DipStats {
            durations_s,
            cdf,
            sample_step_s: step_s,
        }
    }

    pub fn n_dips(&self) -> usize {
        self.durations_s.len()
    }

    /// Empirical P(D ≤ d).
    pub fn cdf_at(&self, d: f64) -> f64 {
        match self.cdf.iter().rev().find(|&&(x, _)| x <= d) {
            Some(&(_, p)) => p,
            None => 0.0,
        }
    }

    /// Empirical P(D > d).
    pub fn survival(&self, d: f64) -> f64 {
        if self.cdf.is_empty() {
            0.0
        } else {
            1.0 - self.cdf_at(d)
        }
    }

    /// Fraction of dips persisting beyond their first sample by more than
    /// `t_s` seconds, i.e. with (run_length − 1)·step > t_s. Computed on
    /// integer run lengths so float noise cannot move the boundary.
    pub fn survival_beyond_onset(&self, t_s: f64) -> f64 {
        if self.durations_s.is_empty() {
            return 0.0;
        }
        let count = self
            .durations_s
            .iter()
            .filter(|&&d| {
                let len = (d / self.sample_step_s).round() as i64;
                (len - 1) as f64 * self.sample_step_s > t_s * (1.0 + 1e-12)
            })
            .count();
        count as f64 / self.durations_s.len() as f64
    }

    /// Kolmogorov distance against another empirical CDF, evaluated over the
    /// union of both supports.
    pub fn kolmogorov_distance(&self, other: &DipStats) -> f64 {
        let mut support: Vec<f64> = self
            .cdf
            .iter()
            .chain(other.cdf.iter())
            .map(|&(d, _)| d)
            .collect();
        support.sort_by(f64::total_cmp);
        support.dedup();
        support
            .iter()
            .map(|&d| (self.cdf_at(d) - other.cdf_at(d)).abs())
            .fold(0.0, f64::max)
    }

    /// Kolmogorov distance against an analytic CDF.
    pub fn kolmogorov_distance_to(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.cdf
            .iter()
            .map(|&(d, p)| (p - f(d)).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: std::io::Write>(
        &self,
        fmt: impl Fn(f64) -> String,
        mut w: W,
    ) -> std::io::Result<()> {
        writeln!(w, "duration_s,cdf")?;
        for &(d, p) in &self.cdf {
            writeln!(w, "{},{}", fmt(d), fmt(p))?;
        }
        Ok(())
    }
}

fn run_lengths(below: impl Iterator<Item = bool>) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut current = 0usize;
    for b in below {
        if b {
            current += 1;
        } else if current > 0 {
            runs.push(current);
            current = 0;
        }
    }
    if current > 0 {
        runs.push(current);
    }
    runs
}

/// Maximal runs of samples with gain strictly below `threshold_db`.
pub fn dip_durations(trace: &ShadowTrace, threshold_db: f64) -> DipStats {
    DipStats::from_run_lengths(
        run_lengths(trace.gain_db.iter().map(|&g| g < threshold_db)),
        trace.sample_step_s,
    )
}

/// Maximal runs where both traces are simultaneously below `threshold_db`.
pub fn simultaneous_dip_durations(
    trace_a: &ShadowTrace,
    trace_b: &ShadowTrace,
    threshold_db: f64,
) -> Result<DipStats, FadesimError> {
    if trace_a.len() != trace_b.len() {
        return Err(FadesimError::LengthMismatch(trace_a.len(), trace_b.len()));
    }
    let below = trace_a
        .gain_db
        .iter()
        .zip(&trace_b.gain_db)
        .map(|(&a, &b)| a < threshold_db && b < threshold_db);
    Ok(DipStats::from_run_lengths(
        run_lengths(below),
        trace_a.sample_step_s,
    ))
}
