//! Pathloss parameter estimation from binned samples.
//!
//! Censoring is handled Tobit-style: uncensored samples contribute a
//! Gaussian log-density around the deterministic model gain, censored ones
//! contribute the log-probability mass below the censoring bound. Lost
//! packets therefore still inform the fit through their distances.

use serde::Serialize;
use thiserror::Error;

use crate::ingest::{quality_check, BinnedSample, QualityReport};
use crate::models::{
    two_ray_pathloss_with_reflection, wrap_degrees, LinkGeometry, ModelError, SingleSlopeParams,
    TwoRayParams, DEFAULT_REF_DISTANCE_M,
};
use crate::optim::NelderMead;
use crate::stats::{ln_norm_cdf, ln_norm_pdf};

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("need at least {needed} uncensored samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("degenerate design: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Fitted parameter set, one variant per model family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum FittedParams {
    SingleSlope(SingleSlopeParams),
    TwoRay(TwoRayParams),
}

impl FittedParams {
    pub fn single_slope(&self) -> Option<&SingleSlopeParams> {
        match self {
            FittedParams::SingleSlope(p) => Some(p),
            _ => None,
        }
    }

    pub fn two_ray(&self) -> Option<&TwoRayParams> {
        match self {
            FittedParams::TwoRay(p) => Some(p),
            _ => None,
        }
    }
}

/// Outcome of a fit: parameters, objective, sample accounting and the
/// advisory quality report. Quality failures warn, they never block.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub params: FittedParams,
    /// Final log-likelihood; absent for OLS.
    pub loglik: Option<f64>,
    /// Samples used.
    pub m: usize,
    /// Censored samples used.
    pub m_c: usize,
    pub converged: bool,
    pub quality: QualityReport,
    pub warnings: Vec<String>,
}

/// Censored (Tobit) log-likelihood of binned samples under a pathloss mean
/// function `mean_pl` (dB) and fading standard deviation `sigma` (dB).
///
/// Uncensored: ln φ((gain − (−mean_pl(d)))/σ) − ln σ.
/// Censored:   ln Φ((bound − (−mean_pl(d)))/σ).
pub fn censored_loglik<F: Fn(f64) -> f64>(
    samples: &[BinnedSample],
    mean_pl: F,
    sigma: f64,
    censor_bound: f64,
) -> f64 {
    assert!(sigma > 0.0, "sigma must be positive, got {sigma}");
    let mut ll = 0.0;
    for s in samples {
        let mean_gain = -mean_pl(s.d_m);
        if s.censored {
            ll += ln_norm_cdf((censor_bound - mean_gain) / sigma);
        } else {
            ll += ln_norm_pdf((s.gain_db - mean_gain) / sigma) - sigma.ln();
        }
    }
    ll
}

fn quality_with_warnings(samples: &[BinnedSample]) -> (QualityReport, Vec<String>) {
    let quality = quality_check(samples);
    let mut warnings = Vec::new();
    if !quality.distance_ratio_ok {
        warnings.push(format!(
            "distance ratio d_max/d_min = {:.2} is below 10",
            quality.d_max_m / quality.d_min_m
        ));
    }
    if !quality.sample_count_ok {
        warnings.push(format!("only {} samples, need more than 1000", quality.m));
    }
    if quality.largest_relative_gap > 0.3 {
        warnings.push(format!(
            "largest relative distance gap {:.2} suggests uneven coverage",
            quality.largest_relative_gap
        ));
    }
    (quality, warnings)
}

/// Ordinary least squares for the single-slope model on uncensored samples:
/// regresses gain (dB) on 10 log10(d/d0). Censored samples are ignored.
/// Sigma is the residual standard deviation with an n−2 denominator.
pub fn fit_single_slope_ols(samples: &[BinnedSample]) -> Result<FitResult, EstimateError> {
    let d0 = DEFAULT_REF_DISTANCE_M;
    let uncensored: Vec<&BinnedSample> = samples.iter().filter(|s| !s.censored).collect();
    let n = uncensored.len();
    if n < 2 {
        return Err(EstimateError::TooFewSamples { needed: 2, got: n });
    }

    let xs: Vec<f64> = uncensored.iter().map(|s| 10.0 * (s.d_m / d0).log10()).collect();
    let ys: Vec<f64> = uncensored.iter().map(|s| s.gain_db).collect();
    let x_mean = xs.iter().sum::<f64>() / n as f64;
    let y_mean = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    if sxx <= 0.0 {
        return Err(EstimateError::Degenerate(
            "all sample distances are equal".into(),
        ));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    // gain = -PL(d0) - alpha * x
    let alpha = -slope;
    let pl_d0 = -intercept;

    let (quality, mut warnings) = quality_with_warnings(samples);
    let sigma = if n > 2 {
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| {
                let r = y - (intercept + slope * x);
                r * r
            })
            .sum();
        (ss_res / (n - 2) as f64).sqrt()
    } else {
        warnings.push("two-point fit: sigma is undefined, reported as 0".into());
        0.0
    };

    Ok(FitResult {
        params: FittedParams::SingleSlope(SingleSlopeParams {
            pl_d0_db: pl_d0,
            alpha,
            sigma_db: sigma,
            d0_m: d0,
        }),
        loglik: None,
        m: samples.len(),
        m_c: samples.iter().filter(|s| s.censored).count(),
        converged: true,
        quality,
        warnings,
    })
}

/// Multi-start Nelder-Mead driver: runs every start, restarts once around
/// the best point to polish, and reports overall convergence.
fn multi_start<F: Fn(&[f64]) -> f64>(
    objective: F,
    starts: &[Vec<f64>],
    step: &[f64],
) -> (Vec<f64>, f64, bool) {
    let nm = NelderMead::default();
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for s in starts {
        let res = nm.minimize(&objective, s, step);
        if best.as_ref().map(|b| res.fx < b.1).unwrap_or(true) {
            best = Some((res.x, res.fx, res.converged));
        }
    }
    let (x, _, mut conv) = best.expect("at least one start");
    // Polish with a fresh simplex around the incumbent.
    let polish_step: Vec<f64> = step.iter().map(|s| 0.1 * s).collect();
    let res = nm.minimize(&objective, &x, &polish_step);
    conv = conv && res.converged;
    (res.x, res.fx, conv)
}

/// Censored maximum-likelihood fit of the single-slope model over
/// (PL(d0), α, σ). With zero censored samples this agrees with the Gaussian
/// MLE (OLS slope/intercept) to optimizer tolerance.
pub fn fit_single_slope_ml(
    samples: &[BinnedSample],
    censor_bound: f64,
) -> Result<FitResult, EstimateError> {
    if !censor_bound.is_finite() {
        return Err(EstimateError::Invalid(format!(
            "censor bound must be finite, got {censor_bound}"
        )));
    }
    let d0 = DEFAULT_REF_DISTANCE_M;
    let n_unc = samples.iter().filter(|s| !s.censored).count();
    if n_unc == 0 {
        return Err(EstimateError::TooFewSamples { needed: 1, got: 0 });
    }

    // Precompute the regressor once; the likelihood is evaluated thousands
    // of times.
    let xs: Vec<f64> = samples.iter().map(|s| 10.0 * (s.d_m / d0).log10()).collect();
    let objective = |p: &[f64]| -> f64 {
        let (pl_d0, alpha, log_sigma) = (p[0], p[1], p[2]);
        if !(-10.0..=10.0).contains(&log_sigma) {
            return f64::INFINITY;
        }
        let sigma = log_sigma.exp();
        let mut ll = 0.0;
        for (s, x) in samples.iter().zip(&xs) {
            let mean_gain = -(pl_d0 + alpha * x);
            if s.censored {
                ll += ln_norm_cdf((censor_bound - mean_gain) / sigma);
            } else {
                ll += ln_norm_pdf((s.gain_db - mean_gain) / sigma) - log_sigma;
            }
        }
        -ll
    };

    // Seed from OLS on the uncensored part; fall back to a coarse default
    // when OLS is degenerate.
    let seed = fit_single_slope_ols(samples)
        .ok()
        .and_then(|r| r.params.single_slope().copied())
        .unwrap_or(SingleSlopeParams::new(60.0, 2.0, 5.0));
    let sigma0 = seed.sigma_db.max(0.5);
    let starts = vec![
        vec![seed.pl_d0_db, seed.alpha, sigma0.ln()],
        vec![seed.pl_d0_db, seed.alpha + 0.7, (sigma0 * 1.5).ln()],
        vec![seed.pl_d0_db - 5.0, seed.alpha + 1.2, sigma0.ln()],
    ];
    let (x, fx, converged) = multi_start(objective, &starts, &[1.0, 0.2, 0.2]);

    let (quality, mut warnings) = quality_with_warnings(samples);
    if !converged {
        warnings.push("optimizer did not converge; best-found parameters reported".into());
    }
    Ok(FitResult {
        params: FittedParams::SingleSlope(SingleSlopeParams {
            pl_d0_db: x[0],
            alpha: x[1],
            sigma_db: x[2].exp(),
            d0_m: d0,
        }),
        loglik: Some(-fx),
        m: samples.len(),
        m_c: samples.iter().filter(|s| s.censored).count(),
        converged,
        quality,
        warnings,
    })
}

/// Censored maximum-likelihood fit of the two-ray model over
/// (ḡ_LOS, ḡ_gr/ḡ_LOS, Δφ, σ). The phase offset is searched from a full
/// circle of starts; the returned Δφ is wrapped into [0°, 360°).
pub fn fit_two_ray_ml(
    samples: &[BinnedSample],
    geom: &LinkGeometry,
    censor_bound: f64,
) -> Result<FitResult, EstimateError> {
    geom.validate()?;
    if !censor_bound.is_finite() {
        return Err(EstimateError::Invalid(format!(
            "censor bound must be finite, got {censor_bound}"
        )));
    }
    let n_unc = samples.iter().filter(|s| !s.censored).count();
    if n_unc == 0 {
        return Err(EstimateError::TooFewSamples { needed: 1, got: 0 });
    }
    for s in samples {
        if s.d_m <= 0.0 {
            return Err(EstimateError::Invalid(format!(
                "sample distance must be > 0, got {}",
                s.d_m
            )));
        }
    }

    // Geometry terms are parameter-independent; precompute per sample.
    use num_complex::Complex64;
    let k = 2.0 * std::f64::consts::PI / geom.wavelength_m;
    let friis_const = 20.0 * (4.0 * std::f64::consts::PI / geom.wavelength_m).log10();
    struct Pre {
        los_term: Complex64,
        gr_term: Complex64,
        censored: bool,
        gain_db: f64,
    }
    let pre: Vec<Pre> = samples
        .iter()
        .map(|s| {
            let d_los = crate::models::los_distance(s.d_m, geom);
            let d_gr = crate::models::ground_distance(s.d_m, geom);
            let gamma = crate::models::reflection_coefficient(s.d_m, geom);
            Pre {
                los_term: Complex64::from_polar(1.0 / d_los, -k * d_los),
                gr_term: Complex64::from_polar(1.0 / d_gr, -k * d_gr) * gamma,
                censored: s.censored,
                gain_db: s.gain_db,
            }
        })
        .collect();

    let objective = |p: &[f64]| -> f64 {
        let (g_los, ratio_db, phi_deg, log_sigma) = (p[0], p[1], p[2], p[3]);
        if !(-10.0..=10.0).contains(&log_sigma) || !(-60.0..=60.0).contains(&ratio_db) {
            return f64::INFINITY;
        }
        let sigma = log_sigma.exp();
        let amp = 10f64.powf(ratio_db / 20.0);
        let rot = Complex64::from_polar(amp, phi_deg.to_radians());
        let mut ll = 0.0;
        for s in &pre {
            let field = s.los_term + rot * s.gr_term;
            let pl = friis_const - g_los - 20.0 * field.norm().log10();
            let mean_gain = -pl;
            if s.censored {
                ll += ln_norm_cdf((censor_bound - mean_gain) / sigma);
            } else {
                ll += ln_norm_pdf((s.gain_db - mean_gain) / sigma) - log_sigma;
            }
        }
        -ll
    };

    // Seed ḡ_LOS from the median residual against plain free space at the
    // LOS propagation distance.
    let mut friis_resid: Vec<f64> = samples
        .iter()
        .filter(|s| !s.censored)
        .map(|s| {
            let d_los = crate::models::los_distance(s.d_m, geom);
            friis_const + 20.0 * d_los.log10() + s.gain_db
        })
        .collect();
    friis_resid.sort_by(f64::total_cmp);
    let g_los_seed = friis_resid[friis_resid.len() / 2];

    let sigma0: f64 = 3.0;
    let mut starts = Vec::new();
    for phi in [0.0, 90.0, 180.0, 270.0] {
        for ratio in [-15.0, -5.0, 0.0] {
            starts.push(vec![g_los_seed, ratio, phi, sigma0.ln()]);
        }
    }
    let (x, fx, converged) = multi_start(objective, &starts, &[1.0, 1.0, 20.0, 0.2]);

    let (quality, mut warnings) = quality_with_warnings(samples);
    if !converged {
        warnings.push("optimizer did not converge; best-found parameters reported".into());
    }
    Ok(FitResult {
        params: FittedParams::TwoRay(TwoRayParams {
            g_los_db: x[0],
            gain_ratio_db: x[1],
            delta_phi_deg: wrap_degrees(x[2]),
            sigma_db: x[3].exp(),
        }),
        loglik: Some(-fx),
        m: samples.len(),
        m_c: samples.iter().filter(|s| s.censored).count(),
        converged,
        quality,
        warnings,
    })
}

/// Evaluates the two-ray mean pathloss the same way the fit objective does;
/// used by tests to cross-check the specialized fast path against the
/// general model evaluation.
pub fn two_ray_mean_pl(d: f64, params: &TwoRayParams, geom: &LinkGeometry) -> f64 {
    two_ray_pathloss_with_reflection(d, params, geom, crate::models::reflection_coefficient(d, geom))
}
