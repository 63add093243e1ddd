//! Serializable configuration types tying the library modules together:
//! link geometry, simulation scenarios, and model references by id.

use serde::{Deserialize, Serialize};

use crate::fadesim::{Scenario, ShadowModel, ShadowSpec};
use crate::models::{
    default_wavelength_m, LinkGeometry, PathlossModel, Polarization, SPEED_OF_LIGHT,
};

/// Geometry block of a config file; converts into [`LinkGeometry`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub h_tx_m: f64,
    pub h_rx_m: f64,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    #[serde(default = "default_eps_real")]
    pub eps_real: f64,
    #[serde(default = "default_eps_imag")]
    pub eps_imag: f64,
    #[serde(default)]
    pub polarization: Polarization,
}

fn default_carrier() -> f64 {
    crate::models::DEFAULT_CARRIER_HZ
}
fn default_eps_real() -> f64 {
    5.0
}
fn default_eps_imag() -> f64 {
    -0.2
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            h_tx_m: 1.60,
            h_rx_m: 1.45,
            carrier_hz: default_carrier(),
            eps_real: default_eps_real(),
            eps_imag: default_eps_imag(),
            polarization: Polarization::Vertical,
        }
    }
}

impl From<GeometryConfig> for LinkGeometry {
    fn from(c: GeometryConfig) -> Self {
        LinkGeometry {
            h_tx_m: c.h_tx_m,
            h_rx_m: c.h_rx_m,
            wavelength_m: if c.carrier_hz > 0.0 {
                SPEED_OF_LIGHT / c.carrier_hz
            } else {
                default_wavelength_m()
            },
            eps_r: num_complex::Complex64::new(c.eps_real, c.eps_imag),
            polarization: c.polarization,
        }
    }
}

/// One simulated link: pathloss model, shadowing autocorrelation, geometry.
/// The shadowing standard deviation comes from the pathloss parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub id: String,
    pub pathloss: PathlossModel,
    pub shadow: ShadowModel,
    #[serde(default)]
    pub geometry: GeometryConfig,
}

impl LinkSpec {
    pub fn shadow_spec(&self) -> ShadowSpec {
        ShadowSpec {
            sigma_db: self.pathloss.sigma_db(),
            model: self.shadow,
        }
    }
}

/// Cross-correlation block for two-link scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSpec {
    pub rho: f64,
}

/// Full simulation scenario config as read from a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(flatten)]
    pub scenario: Scenario,
    pub link: LinkSpec,
    /// When present, a second link with the same spec is generated and
    /// simultaneous dip statistics are extracted.
    #[serde(default)]
    pub cross: Option<CrossSpec>,
}
