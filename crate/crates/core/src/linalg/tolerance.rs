use crate::error::{GwError, Result};

/// Numerical tolerances used throughout the crate.
///
/// * `eq_tol`: entrywise and Frobenius comparisons of matrices.
/// * `spec_tol`: comparisons of spectra and angles.
/// * `rank_tol`: rounding of traces and eigenvalues to integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    pub eq_tol: f64,
    pub spec_tol: f64,
    pub rank_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eq_tol: 1e-9,
            spec_tol: 1e-8,
            rank_tol: 1e-6,
        }
    }
}

impl ToleranceConfig {
    pub fn new(eq_tol: f64, spec_tol: f64, rank_tol: f64) -> Result<Self> {
        let cfg = Self {
            eq_tol,
            spec_tol,
            rank_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eq_tol", self.eq_tol),
            ("spec_tol", self.spec_tol),
            ("rank_tol", self.rank_tol),
        ] {
            if !(v > 0.0 && v < 1e-2) {
                return Err(GwError::InvalidTolerance(format!(
                    "{name} = {v} must lie in (0, 1e-2)"
                )));
            }
        }
        Ok(())
    }

    pub fn with_eq_tol(self, eq_tol: f64) -> Result<Self> {
        Self::new(eq_tol, self.spec_tol, self.rank_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let t = ToleranceConfig::default();
        assert!(t.validate().is_ok());
        assert_eq!(t.eq_tol, 1e-9);
        assert_eq!(t.spec_tol, 1e-8);
        assert_eq!(t.rank_tol, 1e-6);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ToleranceConfig::new(0.0, 1e-8, 1e-6).is_err());
        assert!(ToleranceConfig::new(1e-9, 0.5, 1e-6).is_err());
        assert!(ToleranceConfig::new(1e-9, 1e-8, -1.0).is_err());
        assert!(ToleranceConfig::new(1e-9, 1e-8, f64::NAN).is_err());
    }
}
