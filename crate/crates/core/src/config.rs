//! Discretization parameters for the polar spectral representation.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VortexError};

/// Resolution and solver parameters.  The defaults resolve Gaussian-class
/// vorticity fields on the disk of radius 16 to close to machine accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralConfig {
    /// Outer radius of the computational disk.
    pub r_max: f64,
    /// Number of radial collocation nodes.
    pub n_r: usize,
    /// Highest retained azimuthal wavenumber.
    pub n_modes: usize,
    /// Oversampling factor for the physical angular grid used in products.
    pub dealias_factor: f64,
    /// Relative residual target for the fixed-point solver.
    pub picard_tol: f64,
    /// Iteration cap for the fixed-point solver.
    pub picard_max_iter: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            r_max: 16.0,
            n_r: 512,
            n_modes: 8,
            dealias_factor: 1.5,
            picard_tol: 1e-10,
            picard_max_iter: 100,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.r_max.is_finite() || self.r_max <= 0.0 {
            return Err(VortexError::config(
                "r_max",
                format!("must be positive and finite, got {}", self.r_max),
            ));
        }
        if self.n_r < 16 {
            return Err(VortexError::config(
                "n_r",
                format!("need at least 16 radial nodes, got {}", self.n_r),
            ));
        }
        if self.n_modes < 2 {
            return Err(VortexError::config(
                "n_modes",
                format!("need at least 2 azimuthal modes, got {}", self.n_modes),
            ));
        }
        if !self.dealias_factor.is_finite() || self.dealias_factor < 1.0 {
            return Err(VortexError::config(
                "dealias_factor",
                format!("must be >= 1, got {}", self.dealias_factor),
            ));
        }
        if !self.picard_tol.is_finite() || self.picard_tol <= 0.0 {
            return Err(VortexError::config(
                "picard_tol",
                format!("must be positive, got {}", self.picard_tol),
            ));
        }
        if self.picard_max_iter == 0 {
            return Err(VortexError::config("picard_max_iter", "must be at least 1"));
        }
        Ok(())
    }

    pub fn with_n_r(mut self, n_r: usize) -> Self {
        self.n_r = n_r;
        self
    }

    pub fn with_n_modes(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    /// Number of angular sample points satisfying the product dealiasing
    /// rule for quadratic terms, rounded up to a multiple of four.
    pub fn theta_points(&self) -> usize {
        let min = (self.dealias_factor * (2 * self.n_modes + 1) as f64).ceil() as usize;
        min.div_ceil(4) * 4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = SpectralConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.r_max, 16.0);
        assert_eq!(cfg.n_r, 512);
        assert_eq!(cfg.n_modes, 8);
    }

    #[test]
    fn rejects_bad_fields_by_name() {
        let bad = SpectralConfig {
            n_r: 4,
            ..Default::default()
        };
        match bad.validate() {
            Err(crate::error::VortexError::Config { field, .. }) => assert_eq!(field, "n_r"),
            other => panic!("expected config error, got {other:?}"),
        }

        let bad = SpectralConfig {
            r_max: -1.0,
            ..Default::default()
        };
        match bad.validate() {
            Err(crate::error::VortexError::Config { field, .. }) => assert_eq!(field, "r_max"),
            other => panic!("expected config error, got {other:?}"),
        }

        let bad = SpectralConfig {
            dealias_factor: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn theta_points_covers_quadratic_products() {
        let cfg = SpectralConfig::default();
        // Quadratic products of band-limited fields need 3*n_modes + 1
        // angular samples to project alias-free onto the retained band.
        assert!(cfg.theta_points() >= 3 * cfg.n_modes + 1);
        assert_eq!(cfg.theta_points() % 4, 0);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = SpectralConfig::default().with_n_r(256);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: SpectralConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
