//! Physical constants loaded from a small key-value (TOML) file.
//!
//! All rates are stored in units of Γ_S and all times in units of
//! τ_S = 1/Γ_S. The bundled defaults live in `data/kaon_constants.toml`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The bundled constants file.
pub const DEFAULT_CONSTANTS: &str = include_str!("../data/kaon_constants.toml");

/// Mean decoherence strength extracted from the CPLEAR asymmetry data, in MeV.
pub const LAMBDA_MEAN_MEV: f64 = 1.84e-12;
/// Upper bound on the decoherence strength from the same data, in MeV.
pub const LAMBDA_UPPER_MEV: f64 = 4.34e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    /// Γ_L / Γ_S.
    pub gamma_l_over_gamma_s: f64,
    /// Δm / Γ_S with Δm = m_L − m_S.
    pub delta_m_over_gamma_s: f64,
    /// Γ_S in MeV, used to convert λ between Γ_S units and MeV.
    pub gamma_s_mev: f64,
    /// cτ_S in cm.
    pub c_tau_s_cm: f64,
    /// Neutral kaon mass in MeV.
    pub kaon_mass_mev: f64,
    /// Proper time in τ_S per cm of flight (linear geometry anchor).
    pub tau_s_per_cm: f64,
}

impl Constants {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Constants =
            toml::from_str(s).map_err(|e| Error::Config(format!("constants file: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma_s_mev", self.gamma_s_mev),
            ("c_tau_s_cm", self.c_tau_s_cm),
            ("kaon_mass_mev", self.kaon_mass_mev),
            ("tau_s_per_cm", self.tau_s_per_cm),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gamma_l_over_gamma_s.is_finite() && self.gamma_l_over_gamma_s >= 0.0) {
            return Err(Error::Config(format!(
                "gamma_l_over_gamma_s must be non-negative, got {}",
                self.gamma_l_over_gamma_s
            )));
        }
        if !self.delta_m_over_gamma_s.is_finite() {
            return Err(Error::Config("delta_m_over_gamma_s must be finite".into()));
        }
        Ok(())
    }

    /// λ in MeV → Λ = λ/Γ_S.
    pub fn lambda_from_mev(&self, lambda_mev: f64) -> f64 {
        lambda_mev / self.gamma_s_mev
    }

    /// Λ = λ/Γ_S → λ in MeV.
    pub fn lambda_to_mev(&self, lambda: f64) -> f64 {
        lambda * self.gamma_s_mev
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_CONSTANTS).expect("bundled constants file is valid")
    }
}
