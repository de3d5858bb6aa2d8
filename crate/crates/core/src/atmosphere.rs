//! Fog attenuation from visibility.
//!
//! The extinction coefficient follows the visibility-scaled power law
//!
//! ```text
//! beta(V, lambda) = (-ln T_th / V) * (lambda / lambda_0)^(-q(V))
//! ```
//!
//! where `T_th` is the visual transmittance threshold (2% by default), the
//! reference wavelength `lambda_0` is 550 nm, and `q` is the particle-size
//! exponent of either the Kruse or the Kim model. Piecewise boundaries are
//! half-open upward: a visibility exactly on a boundary takes the branch
//! above it (Kim `q(1) = 0.5`, `q(6) = 1.3`, `q(50) = 1.6`).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Decibels per neper-like unit of `exp(-x)`: `10 * log10(e)`.
pub const DB_PER_NEPER: f64 = 10.0 * std::f64::consts::LOG10_E;

pub const DEFAULT_REFERENCE_WAVELENGTH_NM: f64 = 550.0;
pub const DEFAULT_TRANSMITTANCE_THRESHOLD: f64 = 0.02;

/// Particle-size exponent model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttenuationModel {
    #[default]
    Kruse,
    Kim,
}

impl std::str::FromStr for AttenuationModel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kruse" => Ok(Self::Kruse),
            "kim" => Ok(Self::Kim),
            other => domain(format!("unknown attenuation model `{other}` (kruse|kim)")),
        }
    }
}

impl std::fmt::Display for AttenuationModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Kruse => "kruse",
            Self::Kim => "kim",
        })
    }
}

/// A horizontal optical path through fog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalPath {
    wavelength_nm: f64,
    range_km: f64,
    visibility_km: f64,
    reference_wavelength_nm: f64,
    transmittance_threshold: f64,
}

impl OpticalPath {
    /// Path with the default 550 nm reference and 2% threshold.
    pub fn new(wavelength_nm: f64, range_km: f64, visibility_km: f64) -> Result<Self> {
        Self::with_reference(
            wavelength_nm,
            range_km,
            visibility_km,
            DEFAULT_REFERENCE_WAVELENGTH_NM,
            DEFAULT_TRANSMITTANCE_THRESHOLD,
        )
    }

    pub fn with_reference(
        wavelength_nm: f64,
        range_km: f64,
        visibility_km: f64,
        reference_wavelength_nm: f64,
        transmittance_threshold: f64,
    ) -> Result<Self> {
        if !(wavelength_nm.is_finite() && wavelength_nm > 0.0) {
            return domain(format!("wavelength must be positive, got {wavelength_nm} nm"));
        }
        if !(range_km.is_finite() && range_km >= 0.0) {
            return domain(format!("range must be nonnegative, got {range_km} km"));
        }
        if !(visibility_km.is_finite() && visibility_km > 0.0) {
            return domain(format!("visibility must be positive, got {visibility_km} km"));
        }
        if !(reference_wavelength_nm.is_finite() && reference_wavelength_nm > 0.0) {
            return domain("reference wavelength must be positive");
        }
        if !(transmittance_threshold > 0.0 && transmittance_threshold < 1.0) {
            return domain(format!(
                "transmittance threshold must lie in (0, 1), got {transmittance_threshold}"
            ));
        }
        Ok(Self {
            wavelength_nm,
            range_km,
            visibility_km,
            reference_wavelength_nm,
            transmittance_threshold,
        })
    }

    pub fn wavelength_nm(&self) -> f64 {
        self.wavelength_nm
    }
    pub fn range_km(&self) -> f64 {
        self.range_km
    }
    pub fn visibility_km(&self) -> f64 {
        self.visibility_km
    }
    pub fn reference_wavelength_nm(&self) -> f64 {
        self.reference_wavelength_nm
    }
    pub fn transmittance_threshold(&self) -> f64 {
        self.transmittance_threshold
    }
}

/// Particle-size exponent `q(V)`.
pub fn particle_size_exponent(visibility_km: f64, model: AttenuationModel) -> Result<f64> {
    if !(visibility_km.is_finite() && visibility_km > 0.0) {
        return domain(format!("visibility must be positive, got {visibility_km} km"));
    }
    let v = visibility_km;
    let q = if v >= 50.0 {
        1.6
    } else if v >= 6.0 {
        1.3
    } else {
        match model {
            AttenuationModel::Kruse => 0.585 * v.cbrt(),
            AttenuationModel::Kim => {
                if v >= 1.0 {
                    0.16 * v + 0.34
                } else if v >= 0.5 {
                    v - 0.5
                } else {
                    0.0
                }
            }
        }
    };
    Ok(q)
}

/// Extinction coefficient in km⁻¹ (natural-log convention).
pub fn extinction_coefficient(path: &OpticalPath, model: AttenuationModel) -> f64 {
    // visibility was validated when the path was built
    let q = particle_size_exponent(path.visibility_km, model).expect("validated path");
    let base = -path.transmittance_threshold.ln() / path.visibility_km;
    if q == 0.0 {
        return base;
    }
    base * (path.wavelength_nm / path.reference_wavelength_nm).powf(-q)
}

/// Shorthand for the default reference wavelength and threshold.
pub fn extinction_per_km(
    visibility_km: f64,
    wavelength_nm: f64,
    model: AttenuationModel,
) -> Result<f64> {
    let path = OpticalPath::new(wavelength_nm, 0.0, visibility_km)?;
    Ok(extinction_coefficient(&path, model))
}

/// Beer–Lambert transmittance `exp(-beta * L)`.
pub fn transmittance(beta_per_km: f64, range_km: f64) -> Result<f64> {
    check_nonnegative(beta_per_km, range_km)?;
    Ok((-beta_per_km * range_km).exp())
}

/// Path loss in dB, `10 log10(e) * beta * L`.
pub fn path_attenuation_db(beta_per_km: f64, range_km: f64) -> Result<f64> {
    check_nonnegative(beta_per_km, range_km)?;
    Ok(DB_PER_NEPER * beta_per_km * range_km)
}

/// Convert a km⁻¹ extinction coefficient to dB/km.
pub fn beta_to_db_per_km(beta_per_km: f64) -> f64 {
    DB_PER_NEPER * beta_per_km
}

fn check_nonnegative(beta_per_km: f64, range_km: f64) -> Result<()> {
    if !(beta_per_km >= 0.0 && beta_per_km.is_finite()) {
        return domain(format!("extinction coefficient must be nonnegative, got {beta_per_km}"));
    }
    if !(range_km >= 0.0 && range_km.is_finite()) {
        return domain(format!("range must be nonnegative, got {range_km}"));
    }
    Ok(())
}
