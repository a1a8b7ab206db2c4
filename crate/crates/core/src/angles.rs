//! Principal angles between equal-rank subspaces.
//!
//! Two independent routes are provided. The spectral route takes the
//! eigenvalues of `QPQ` (the squared cosines); the SVD route takes the
//! singular values of `S_P* S_Q` for orthonormal bases (the cosines).

use serde::{Deserialize, Serialize};

use crate::error::{GwError, Result};
use crate::linalg::{hermitian_eig, svd, ToleranceConfig};
use crate::projection::{subspace_from_projector, Projection, Subspace};

/// Angles below this are recomputed from sines.
const SMALL_ANGLE: f64 = 1e-4;

/// Principal angles of an equal-rank pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalAngles {
    /// Ascending, each in `[0, π/2]`; one per dimension of the subspaces.
    #[serde(rename = "angles_radians")]
    pub angles: Vec<f64>,
    /// Descending squared cosines, padded with zeros to the ambient dimension.
    pub cos2_spectrum: Vec<f64>,
}

impl PrincipalAngles {
    fn from_cos2(cos2_spectrum: Vec<f64>, n: usize) -> Self {
        let angles = cos2_spectrum[..n]
            .iter()
            .map(|&c| c.clamp(0.0, 1.0).sqrt().acos())
            .collect();
        Self {
            angles,
            cos2_spectrum,
        }
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.to_degrees()).collect()
    }

    pub fn max_angle_diff(&self, other: &PrincipalAngles) -> f64 {
        assert_eq!(self.angles.len(), other.angles.len());
        self.angles
            .iter()
            .zip(&other.angles)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_pair(p: &Projection, q: &Projection) -> Result<()> {
    if p.ambient_dim() != q.ambient_dim() {
        return Err(GwError::DimensionMismatch(format!(
            "ambient dimensions {} and {}",
            p.ambient_dim(),
            q.ambient_dim()
        )));
    }
    Ok(())
}

/// Clamps values into `[0, 1]`, failing if any leaves the interval by more
/// than `spec_tol`.
fn clamp_unit(values: &mut [f64], what: &'static str, tol: &ToleranceConfig) -> Result<()> {
    for v in values.iter_mut() {
        let excursion = (-*v).max(*v - 1.0);
        if excursion > tol.spec_tol {
            return Err(GwError::SpectrumExcursion { what, excursion });
        }
        *v = v.clamp(0.0, 1.0);
    }
    Ok(())
}

/// Full eigenvalue multiset of `QPQ`, descending and clamped to `[0, 1]`.
pub fn qpq_spectrum(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Result<Vec<f64>> {
    check_pair(p, q)?;
    let qpq = &(q.matrix() * p.matrix()) * q.matrix();
    let mut values = hermitian_eig(&qpq, tol)?.values;
    values.reverse();
    clamp_unit(&mut values, "QPQ", tol)?;
    Ok(values)
}

/// Principal angles as `arccos √λ` over the top eigenvalues of `QPQ`.
pub fn principal_angles_spectral(
    p: &Projection,
    q: &Projection,
    tol: &ToleranceConfig,
) -> Result<PrincipalAngles> {
    check_pair(p, q)?;
    if p.rank() != q.rank() {
        return Err(GwError::RankMismatch {
            left: p.rank(),
            right: q.rank(),
        });
    }
    let spectrum = qpq_spectrum(p, q, tol)?;
    Ok(PrincipalAngles::from_cos2(spectrum, p.rank()))
}

/// Principal angles as `arccos σ` over the singular values of `S_P* S_Q`.
pub fn principal_angles_svd(
    sp: &Subspace,
    sq: &Subspace,
    tol: &ToleranceConfig,
) -> Result<PrincipalAngles> {
    if sp.ambient_dim() != sq.ambient_dim() {
        return Err(GwError::DimensionMismatch(format!(
            "ambient dimensions {} and {}",
            sp.ambient_dim(),
            sq.ambient_dim()
        )));
    }
    if sp.rank() != sq.rank() {
        return Err(GwError::RankMismatch {
            left: sp.rank(),
            right: sq.rank(),
        });
    }
    let overlap = &sp.basis().adjoint() * sq.basis();
    let mut cosines = svd(&overlap, tol)?.singular_values;
    clamp_unit(&mut cosines, "S_P* S_Q", tol)?;
    let angles = cosines.iter().map(|c| c.acos()).collect();
    let mut cos2_spectrum: Vec<f64> = cosines.iter().map(|c| c * c).collect();
    cos2_spectrum.resize(sp.ambient_dim(), 0.0);
    Ok(PrincipalAngles {
        angles,
        cos2_spectrum,
    })
}

/// Spectral angles, with angles below `SMALL_ANGLE` recomputed from sines.
///
/// `arccos √λ` loses half the digits near `λ = 1`, so an intersection shows up
/// as an angle near `1e-8`. The singular values of `(I − P) S_Q` are the sines
/// in ascending angle order, and `arcsin` of those is accurate there.
pub fn principal_angles(
    p: &Projection,
    q: &Projection,
    tol: &ToleranceConfig,
) -> Result<PrincipalAngles> {
    let mut spectral = principal_angles_spectral(p, q, tol)?;
    if spectral.angles.first().is_some_and(|&a| a < SMALL_ANGLE) {
        let sq = subspace_from_projector(q, tol)?;
        let pc = p.complement();
        let residual = pc.matrix() * sq.basis();
        let mut sines = svd(&residual, tol)?.singular_values;
        sines.reverse();
        clamp_unit(&mut sines, "(I - P) S_Q", tol)?;
        for (angle, s) in spectral.angles.iter_mut().zip(sines) {
            if *angle < std::f64::consts::FRAC_PI_4 {
                *angle = s.asin();
            }
        }
    }
    Ok(spectral)
}

/// `max_i |λ_i(QPQ) − λ_i(Q₂P₂Q₂)|` over the sorted full spectra.
pub fn spectrum_discrepancy(
    p: &Projection,
    q: &Projection,
    p2: &Projection,
    q2: &Projection,
    tol: &ToleranceConfig,
) -> Result<f64> {
    let d = p.ambient_dim();
    if [q, p2, q2].iter().any(|x| x.ambient_dim() != d) {
        return Err(GwError::DimensionMismatch(
            "all four projections must share an ambient dimension".into(),
        ));
    }
    if p.rank() != p2.rank() {
        return Err(GwError::RankMismatch {
            left: p.rank(),
            right: p2.rank(),
        });
    }
    if q.rank() != q2.rank() {
        return Err(GwError::RankMismatch {
            left: q.rank(),
            right: q2.rank(),
        });
    }
    let a = qpq_spectrum(p, q, tol)?;
    let b = qpq_spectrum(p2, q2, tol)?;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Whether `∠(P, Q) = ∠(P₂, Q₂)`, i.e. `QPQ` and `Q₂P₂Q₂` are unitarily
/// equivalent: their spectra with multiplicity agree within `eps`.
pub fn angles_equal(
    p: &Projection,
    q: &Projection,
    p2: &Projection,
    q2: &Projection,
    eps: f64,
    tol: &ToleranceConfig,
) -> Result<bool> {
    Ok(spectrum_discrepancy(p, q, p2, q2, tol)? <= eps)
}
