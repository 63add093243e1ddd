//! Deterministic pathloss models: log-distance single slope and the
//! modified two-ray ground-reflection model with effective permittivity.
//!
//! All operations return the deterministic part of the pathloss only; the
//! stochastic large-scale fading term is realized separately in [`crate::fadesim`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default carrier frequency (Hz) for the 5.9 GHz ITS band.
pub const DEFAULT_CARRIER_HZ: f64 = 5.9e9;

/// Default reference distance d0 (m) for the single-slope model.
pub const DEFAULT_REF_DISTANCE_M: f64 = 10.0;

/// Wavelength (m) at the default 5.9 GHz carrier.
pub fn default_wavelength_m() -> f64 {
    SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("distance {d} m is below the reference distance {d0} m")]
    BelowReferenceDistance { d: f64, d0: f64 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Antenna polarization for the ground-reflection coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    #[default]
    Vertical,
    Horizontal,
}

/// Log-distance single-slope pathloss parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleSlopeParams {
    /// Pathloss at the reference distance (dB).
    pub pl_d0_db: f64,
    /// Pathloss exponent.
    pub alpha: f64,
    /// Large-scale fading standard deviation (dB).
    pub sigma_db: f64,
    /// Reference distance (m).
    #[serde(default = "default_d0")]
    pub d0_m: f64,
}

fn default_d0() -> f64 {
    DEFAULT_REF_DISTANCE_M
}

impl SingleSlopeParams {
    pub fn new(pl_d0_db: f64, alpha: f64, sigma_db: f64) -> Self {
        Self {
            pl_d0_db,
            alpha,
            sigma_db,
            d0_m: DEFAULT_REF_DISTANCE_M,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.sigma_db < 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "sigma_db must be >= 0, got {}",
                self.sigma_db
            )));
        }
        if self.d0_m <= 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "d0_m must be > 0, got {}",
                self.d0_m
            )));
        }
        Ok(())
    }
}

/// Two-ray pathloss parameters: combined mean antenna gain of the LOS
/// component, gain ratio of the ground-reflected component, and the combined
/// phase offset between the two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoRayParams {
    /// Combined mean LOS antenna gain (dB).
    pub g_los_db: f64,
    /// Ground-to-LOS combined gain ratio (dB).
    pub gain_ratio_db: f64,
    /// Combined phase offset between ground and LOS components (degrees),
    /// stored normalized to [0, 360).
    pub delta_phi_deg: f64,
    /// Large-scale fading standard deviation (dB).
    pub sigma_db: f64,
}

impl TwoRayParams {
    /// Builds the parameter set, wrapping `delta_phi_deg` into [0, 360).
    pub fn new(g_los_db: f64, gain_ratio_db: f64, delta_phi_deg: f64, sigma_db: f64) -> Self {
        Self {
            g_los_db,
            gain_ratio_db,
            delta_phi_deg: wrap_degrees(delta_phi_deg),
            sigma_db,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.sigma_db < 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "sigma_db must be >= 0, got {}",
                self.sigma_db
            )));
        }
        Ok(())
    }
}

/// Wraps an angle in degrees into [0, 360).
pub fn wrap_degrees(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    if w == 360.0 {
        0.0
    } else {
        w
    }
}

/// Link geometry for the ground-reflection path: antenna heights, wavelength,
/// and effective ground permittivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// TX antenna height above ground (m).
    pub h_tx_m: f64,
    /// RX antenna height above ground (m).
    pub h_rx_m: f64,
    /// Carrier wavelength (m).
    pub wavelength_m: f64,
    /// Effective relative permittivity of the ground, ε' − jε''.
    pub eps_r: Complex64,
    pub polarization: Polarization,
}

impl Default for LinkGeometry {
    /// Roof antenna heights of the reference station-wagon-to-sedan link
    /// (1.60 m / 1.45 m), 5.9 GHz, ε_r = 5 − j0.2, vertical polarization.
    fn default() -> Self {
        Self {
            h_tx_m: 1.60,
            h_rx_m: 1.45,
            wavelength_m: default_wavelength_m(),
            eps_r: Complex64::new(5.0, -0.2),
            polarization: Polarization::Vertical,
        }
    }
}

impl LinkGeometry {
    pub fn with_heights(h_tx_m: f64, h_rx_m: f64) -> Self {
        Self {
            h_tx_m,
            h_rx_m,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.h_tx_m <= 0.0 || self.h_rx_m <= 0.0 {
            return Err(ModelError::InvalidGeometry(format!(
                "antenna heights must be > 0, got {} / {}",
                self.h_tx_m, self.h_rx_m
            )));
        }
        if self.wavelength_m <= 0.0 {
            return Err(ModelError::InvalidGeometry(format!(
                "wavelength must be > 0, got {}",
                self.wavelength_m
            )));
        }
        if self.eps_r.re < 1.0 {
            return Err(ModelError::InvalidGeometry(format!(
                "Re(eps_r) must be >= 1, got {}",
                self.eps_r.re
            )));
        }
        Ok(())
    }
}

/// Either pathloss model, for callers that dispatch on the link condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PathlossModel {
    SingleSlope(SingleSlopeParams),
    TwoRay(TwoRayParams),
}

impl PathlossModel {
    pub fn sigma_db(&self) -> f64 {
        match self {
            PathlossModel::SingleSlope(p) => p.sigma_db,
            PathlossModel::TwoRay(p) => p.sigma_db,
        }
    }
}

/// Direct-ray propagation distance sqrt(d² + (h_tx − h_rx)²).
pub fn los_distance(d: f64, geom: &LinkGeometry) -> f64 {
    (d * d + (geom.h_tx_m - geom.h_rx_m).powi(2)).sqrt()
}

/// Ground-reflected-ray propagation distance sqrt(d² + (h_tx + h_rx)²).
pub fn ground_distance(d: f64, geom: &LinkGeometry) -> f64 {
    (d * d + (geom.h_tx_m + geom.h_rx_m).powi(2)).sqrt()
}

/// Effective ground reflection coefficient for the configured polarization.
///
/// Uses the grazing-angle geometry sin θ = (h_tx + h_rx)/d_gr,
/// cos θ = d/d_gr. Satisfies |Γ| ≤ 1 for Re(ε_r) ≥ 1 and tends to −1 as
/// the incidence becomes grazing (d → ∞).
pub fn reflection_coefficient(d: f64, geom: &LinkGeometry) -> Complex64 {
    let d_gr = ground_distance(d, geom);
    let sin_theta = (geom.h_tx_m + geom.h_rx_m) / d_gr;
    let cos_theta = d / d_gr;
    let root = (geom.eps_r - cos_theta * cos_theta).sqrt();
    match geom.polarization {
        Polarization::Vertical => {
            (geom.eps_r * sin_theta - root) / (geom.eps_r * sin_theta + root)
        }
        Polarization::Horizontal => (sin_theta - root) / (sin_theta + root),
    }
}

/// Deterministic two-ray pathloss (dB) at horizontal separation `d`.
pub fn two_ray_pathloss(d: f64, params: &TwoRayParams, geom: &LinkGeometry) -> Result<f64, ModelError> {
    if d <= 0.0 {
        return Err(ModelError::NonPositiveDistance(d));
    }
    geom.validate()?;
    Ok(two_ray_pathloss_with_reflection(
        d,
        params,
        geom,
        reflection_coefficient(d, geom),
    ))
}

/// Two-ray pathloss with an explicitly supplied reflection coefficient.
///
/// With `gamma = 0` the model reduces to free-space pathloss at the LOS
/// propagation distance minus the combined LOS antenna gain.
pub fn two_ray_pathloss_with_reflection(
    d: f64,
    params: &TwoRayParams,
    geom: &LinkGeometry,
    gamma: Complex64,
) -> f64 {
    let d_los = los_distance(d, geom);
    let d_gr = ground_distance(d, geom);
    let k = 2.0 * std::f64::consts::PI / geom.wavelength_m;
    let amp_ratio = 10f64.powf(params.gain_ratio_db / 20.0);
    let delta_phi = params.delta_phi_deg.to_radians();

    let los_term = Complex64::from_polar(1.0 / d_los, -k * d_los);
    let gr_term = Complex64::from_polar(amp_ratio / d_gr, delta_phi - k * d_gr) * gamma;
    let field = los_term + gr_term;

    20.0 * (4.0 * std::f64::consts::PI / geom.wavelength_m).log10() - params.g_los_db
        - 20.0 * field.norm().log10()
}

/// Single-slope pathloss (dB): PL(d0) + 10 α log10(d/d0), valid for d ≥ d0.
pub fn single_slope_pathloss(d: f64, params: &SingleSlopeParams) -> Result<f64, ModelError> {
    params.validate()?;
    if d < params.d0_m {
        return Err(ModelError::BelowReferenceDistance {
            d,
            d0: params.d0_m,
        });
    }
    Ok(params.pl_d0_db + 10.0 * params.alpha * (d / params.d0_m).log10())
}

/// Deterministic pathloss under either model.
pub fn pathloss(d: f64, model: &PathlossModel, geom: &LinkGeometry) -> Result<f64, ModelError> {
    match model {
        PathlossModel::SingleSlope(p) => single_slope_pathloss(d, p),
        PathlossModel::TwoRay(p) => two_ray_pathloss(d, p, geom),
    }
}

/// Deterministic channel gain, i.e. the negated pathloss.
pub fn deterministic_channel_gain(
    d: f64,
    model: &PathlossModel,
    geom: &LinkGeometry,
) -> Result<f64, ModelError> {
    pathloss(d, model, geom).map(|pl| -pl)
}
