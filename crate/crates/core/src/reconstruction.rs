//! Recovering the symmetry behind an angle-preserving map.
//!
//! Given a map `φ` on rank-`n` projections, [`reconstruct`] either finds a
//! unitary `V` and a flag `a` with `φ(P) = V·τ_a(P)·V*` (`τ` is entrywise
//! conjugation when `a` holds), finds that `φ(P) = I − V·τ_a(P)·V*` in the
//! exceptional case `d = 2n`, returns a pair of projections whose angles are
//! not preserved, or gives up with a note when the map preserves angles on
//! every sample but fits neither form.
//!
//! The pipeline:
//! 1. screen random pairs for angle and trace-form preservation;
//! 2. evaluate the extension `Φ` on the standard basis dyads `e_i e_i*`;
//!    rank-one images mean a conjugation, images of the form
//!    `(1/n)I − (rank one)` at `d = 2n` mean a complement of one;
//! 3. read column `i` of `V` off the range of `Φ(e_i e_i*)`, fixing relative
//!    phases with `Φ` on `(e₁ + e_j)/√2`;
//! 4. decide linear vs conjugate-linear with `Φ` on `(e₁ + i·e_j)/√2`;
//! 5. verify on fresh random projections.

use num_complex::Complex64;
use serde::Serialize;

use crate::angles::spectrum_discrepancy;
use crate::error::{GwError, Result};
use crate::extension::{check_map_input, extend_to_rank1, CachedMap, RankNMap};
use crate::linalg::{hermitian_eig, seeded_rng, Field, Matrix, ToleranceConfig};
use crate::projection::{random_projection, trace_of_product, Projection};

#[derive(Debug, Clone, Copy)]
pub struct ReconstructionConfig {
    pub accept_tol: f64,
    pub screen_samples: usize,
    pub verify_samples: usize,
    pub seed: u64,
    pub tol: ToleranceConfig,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            accept_tol: 1e-7,
            screen_samples: 20,
            verify_samples: 50,
            seed: 0,
            tol: ToleranceConfig::default(),
        }
    }
}

impl ReconstructionConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.tol.validate()?;
        if self.screen_samples == 0 || self.verify_samples == 0 {
            return Err(GwError::InvalidTolerance(
                "sample counts must be positive".into(),
            ));
        }
        if self.accept_tol.is_nan() || self.accept_tol < 10.0 * self.tol.spec_tol {
            return Err(GwError::InvalidTolerance(format!(
                "accept_tol {} must be at least 10 * spec_tol = {}",
                self.accept_tol,
                10.0 * self.tol.spec_tol
            )));
        }
        Ok(())
    }

    /// Tolerances for checking approximate outputs of the extension.
    fn loose_tol(&self) -> ToleranceConfig {
        ToleranceConfig {
            eq_tol: self.accept_tol,
            ..self.tol
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ReconstructionResult {
    /// `φ(P) = V·τ(P)·V*`.
    Conjugation {
        #[serde(rename = "V")]
        v: Matrix,
        antiunitary: bool,
        residual: f64,
    },
    /// `φ(P) = I − V·τ(P)·V*`, only at `d = 2n`, `n > 1`.
    ExceptionalComplement {
        #[serde(rename = "V")]
        v: Matrix,
        antiunitary: bool,
        residual: f64,
    },
    /// `∠(φ(P), φ(Q)) ≠ ∠(P, Q)`.
    NotAnglePreserving {
        #[serde(rename = "P")]
        p: Projection,
        #[serde(rename = "Q")]
        q: Projection,
        #[serde(rename = "phi_P")]
        phi_p: Projection,
        #[serde(rename = "phi_Q")]
        phi_q: Projection,
        discrepancy: f64,
    },
    PreservingUnclassified { notes: String },
}

impl ReconstructionResult {
    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::Conjugation { .. } => "conjugation",
            Self::ExceptionalComplement { .. } => "exceptional_complement",
            Self::NotAnglePreserving { .. } => "not_angle_preserving",
            Self::PreservingUnclassified { .. } => "preserving_unclassified",
        }
    }

    /// The recovered unitary and antiunitarity flag, if any.
    pub fn unitary(&self) -> Option<(&Matrix, bool)> {
        match self {
            Self::Conjugation { v, antiunitary, .. }
            | Self::ExceptionalComplement { v, antiunitary, .. } => Some((v, *antiunitary)),
            _ => None,
        }
    }
}

/// `V·P·V*`, or `V·conj(P)·V*` when `antiunitary`. `V` must be unitary.
pub fn apply_conjugation(v: &Matrix, antiunitary: bool, p: &Projection) -> Result<Projection> {
    if !v.is_square() || v.rows() != p.ambient_dim() {
        return Err(GwError::DimensionMismatch(format!(
            "cannot conjugate a {}-dimensional projection by a {}x{} matrix",
            p.ambient_dim(),
            v.rows(),
            v.cols()
        )));
    }
    let inner = if antiunitary {
        p.matrix().conj()
    } else {
        p.matrix().clone()
    };
    let m = &(v * &inner) * &v.adjoint();
    Ok(Projection::new_unchecked(m, p.rank()))
}

fn max_residual(
    phi: &(impl RankNMap + ?Sized),
    num_samples: usize,
    seed: u64,
    expected: impl Fn(&Projection) -> Result<Matrix>,
) -> Result<f64> {
    let mut rng = seeded_rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..num_samples {
        let p = random_projection(&mut rng, phi.ambient_dim(), phi.rank(), phi.field())?;
        let got = phi.evaluate(&p)?;
        worst = worst.max(got.matrix().distance(&expected(&p)?));
    }
    Ok(worst)
}

/// `max_P ‖φ(P) − V·τ(P)·V*‖_F` over random rank-`n` projections.
pub fn verify_conjugation(
    phi: &(impl RankNMap + ?Sized),
    v: &Matrix,
    antiunitary: bool,
    num_samples: usize,
    seed: u64,
) -> Result<f64> {
    max_residual(phi, num_samples, seed, |p| {
        Ok(apply_conjugation(v, antiunitary, p)?.into_matrix())
    })
}

/// `max_P ‖φ(P) − (I − V·τ(P)·V*)‖_F` over random rank-`n` projections.
pub fn verify_exceptional(
    phi: &(impl RankNMap + ?Sized),
    v: &Matrix,
    antiunitary: bool,
    num_samples: usize,
    seed: u64,
) -> Result<f64> {
    max_residual(phi, num_samples, seed, |p| {
        Ok(apply_conjugation(v, antiunitary, p)?.complement().into_matrix())
    })
}

/// `ψ(P) = I − φ(I − P)` on rank-`(d − n)` projections.
pub struct DualMap<M> {
    inner: M,
}

pub fn dualize<M: RankNMap>(phi: M) -> Result<DualMap<M>> {
    let (d, n) = (phi.ambient_dim(), phi.rank());
    if n == 0 || n >= d {
        return Err(GwError::BadRank(format!(
            "the dual of a rank-{n} map on dimension {d} has rank {}; need 1..={}",
            d.saturating_sub(n),
            d.saturating_sub(1)
        )));
    }
    Ok(DualMap { inner: phi })
}

impl<M: RankNMap> RankNMap for DualMap<M> {
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }
    fn rank(&self) -> usize {
        self.inner.ambient_dim() - self.inner.rank()
    }
    fn field(&self) -> Field {
        self.inner.field()
    }
    fn evaluate(&self, p: &Projection) -> Result<Projection> {
        check_map_input(self, p)?;
        let out = self.inner.evaluate(&p.complement())?.complement();
        if out.rank() != self.rank() {
            return Err(GwError::RankMismatch {
                left: out.rank(),
                right: self.rank(),
            });
        }
        Ok(out)
    }
    fn descriptor(&self) -> String {
        format!("dual({})", self.inner.descriptor())
    }
}

/// `P ↦ I − φ(P)`, a map on rank-`n` projections when `d = 2n`.
struct ComplementOf<M> {
    inner: M,
}

impl<M: RankNMap> RankNMap for ComplementOf<M> {
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }
    fn rank(&self) -> usize {
        self.inner.rank()
    }
    fn field(&self) -> Field {
        self.inner.field()
    }
    fn evaluate(&self, p: &Projection) -> Result<Projection> {
        Ok(self.inner.evaluate(p)?.complement())
    }
    fn descriptor(&self) -> String {
        format!("complement ∘ {}", self.inner.descriptor())
    }
}

/// A pair whose angles or trace form are not preserved.
#[derive(Debug, Clone)]
pub struct Witness {
    pub p: Projection,
    pub q: Projection,
    pub phi_p: Projection,
    pub phi_q: Projection,
    /// Largest difference between the sorted spectra of `QPQ` and
    /// `φ(Q)φ(P)φ(Q)`.
    pub spectral: f64,
    /// `|tr φ(P)φ(Q) − tr PQ|`.
    pub trace: f64,
}

#[derive(Debug, Clone)]
pub struct ScreenReport {
    pub max_spectral: f64,
    pub max_trace: f64,
    /// Sample with the largest spectral discrepancy.
    pub worst: Option<Witness>,
}

impl ScreenReport {
    pub fn max_discrepancy(&self) -> f64 {
        self.max_spectral.max(self.max_trace)
    }
}

/// Compares angles and `tr PQ` before and after `φ` on random pairs.
pub fn screen(
    phi: &(impl RankNMap + ?Sized),
    num_samples: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<ScreenReport> {
    let (d, n, field) = (phi.ambient_dim(), phi.rank(), phi.field());
    let mut rng = seeded_rng(seed);
    let mut report = ScreenReport {
        max_spectral: 0.0,
        max_trace: 0.0,
        worst: None,
    };
    for _ in 0..num_samples {
        let p = random_projection(&mut rng, d, n, field)?;
        let q = random_projection(&mut rng, d, n, field)?;
        let phi_p = phi.evaluate(&p)?;
        let phi_q = phi.evaluate(&q)?;
        let spectral = spectrum_discrepancy(&p, &q, &phi_p, &phi_q, tol)?;
        let trace = (trace_of_product(phi_p.matrix(), phi_q.matrix())
            - trace_of_product(p.matrix(), q.matrix()))
        .abs();
        report.max_trace = report.max_trace.max(trace);
        if report.worst.is_none() || spectral > report.max_spectral {
            report.max_spectral = spectral;
            report.worst = Some(Witness {
                p,
                q,
                phi_p,
                phi_q,
                spectral,
                trace,
            });
        }
    }
    Ok(report)
}

/// Multiplies by the unimodular scalar that makes the largest-magnitude
/// entry of the first column real and positive; ties go to the lowest row.
pub fn canonicalize_phase(v: &Matrix) -> Matrix {
    let mut best = (0usize, 0.0_f64);
    for i in 0..v.rows() {
        let m = v.get(i, 0).norm();
        if m > best.1 {
            best = (i, m);
        }
    }
    if best.1 == 0.0 {
        return v.clone();
    }
    let z = v.get(best.0, 0);
    let mut out = v.scale_complex(z.conj() / best.1);
    // exact, rather than real up to roundoff
    out.set(best.0, 0, Complex64::new(best.1, 0.0));
    out
}

/// Largest entrywise deviation `max |c·a − b|` after choosing the
/// unimodular `c` that best aligns `a` with `b`.
pub fn phase_aligned_deviation(a: &Matrix, b: &Matrix) -> f64 {
    let overlap = (&a.adjoint() * b).trace();
    let c = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.scale_complex(c).max_abs_diff(b)
}

enum Assembly {
    Found { v: Matrix, antiunitary: bool },
    Unclassified(String),
}

fn superposition(d: usize, j: usize, coeff: Complex64) -> Matrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut entries = vec![Complex64::new(0.0, 0.0); d];
    entries[0] = Complex64::new(h, 0.0);
    entries[j] = coeff * h;
    Matrix::column_vector(&entries)
}

/// Top eigenvector of a numerically rank-one projection.
fn range_vector(q: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    let eig = hermitian_eig(q, tol)?;
    Ok(eig.vectors.column(q.rows() - 1))
}

/// Steps 3 and 4: columns of `V` from the rank-one images, relative phases,
/// and the linear/conjugate-linear decision.
fn assemble(
    phi: &(impl RankNMap + ?Sized),
    images: &[Matrix],
    cfg: &ReconstructionConfig,
) -> Result<Assembly> {
    let d = phi.ambient_dim();
    let tol = &cfg.tol;
    let mut columns = Vec::with_capacity(d);
    for q in images {
        columns.push(range_vector(q, tol)?);
    }
    columns[0] = canonicalize_phase(&columns[0]);

    for j in 1..d {
        let w = superposition(d, j, Complex64::new(1.0, 0.0));
        let t = extend_to_rank1(phi, &w, tol)?;
        // T = ½(αv₁ + βv_j)(αv₁ + βv_j)*, so 2·v_j*·T·v₁ = β·ᾱ.
        let c = (&(&columns[j].adjoint() * &t) * &columns[0]).get(0, 0) * 2.0;
        if (c.norm() - 1.0).abs() > 0.5 {
            return Ok(Assembly::Unclassified(format!(
                "phase overlap for column {} has modulus {:.6}",
                j + 1,
                c.norm()
            )));
        }
        columns[j] = columns[j].scale_complex(c / c.norm());
    }

    let mut antiunitary = None;
    if phi.field() == Field::Complex {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, 1.0);
        for j in 1..d {
            let w = superposition(d, j, i);
            let s = extend_to_rank1(phi, &w, tol)?;
            let lin = (&columns[0] + &columns[j].scale_complex(i)).scale(h);
            let anti = (&columns[0] - &columns[j].scale_complex(i)).scale(h);
            let dl = s.distance(&Matrix::dyad(&lin, &lin));
            let da = s.distance(&Matrix::dyad(&anti, &anti));
            let verdict = if dl <= cfg.accept_tol {
                false
            } else if da <= cfg.accept_tol {
                true
            } else {
                return Ok(Assembly::Unclassified(format!(
                    "probe (e1 + i e{}) fits neither form (linear {dl:.3e}, conjugate-linear {da:.3e})",
                    j + 1
                )));
            };
            match antiunitary {
                None => antiunitary = Some(verdict),
                Some(prev) if prev != verdict => {
                    return Ok(Assembly::Unclassified(
                        "probes disagree on linear vs conjugate-linear".into(),
                    ))
                }
                Some(_) => {}
            }
        }
    }
    Ok(Assembly::Found {
        v: Matrix::from_columns(&columns)?,
        antiunitary: antiunitary.unwrap_or(false),
    })
}

fn rank_one_images(phi: &(impl RankNMap + ?Sized), tol: &ToleranceConfig) -> Result<Vec<Matrix>> {
    (0..phi.ambient_dim())
        .map(|i| extend_to_rank1(phi, &Matrix::basis_vector(phi.ambient_dim(), i), tol))
        .collect()
}

fn all_rank_one(images: &[Matrix], tol: &ToleranceConfig) -> bool {
    images
        .iter()
        .all(|m| Projection::with_rank(m.clone(), 1, tol).is_ok())
}

/// Steps 2–5 for a map whose rank-one images are rank-one projections.
fn linear_path(
    phi: &(impl RankNMap + ?Sized),
    images: &[Matrix],
    cfg: &ReconstructionConfig,
) -> Result<std::result::Result<(Matrix, bool, f64), String>> {
    match assemble(phi, images, cfg)? {
        Assembly::Unclassified(note) => Ok(Err(note)),
        Assembly::Found { v, antiunitary } => {
            let residual = verify_conjugation(
                phi,
                &v,
                antiunitary,
                cfg.verify_samples,
                cfg.seed.wrapping_add(1),
            )?;
            if residual <= cfg.accept_tol {
                Ok(Ok((v, antiunitary, residual)))
            } else {
                Ok(Err(format!(
                    "assembled unitary fails verification (residual {residual:.3e})"
                )))
            }
        }
    }
}

/// Recovers the unitary or antiunitary inducing `phi`; see the module docs.
pub fn reconstruct(
    phi: &(impl RankNMap + ?Sized),
    cfg: &ReconstructionConfig,
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    let (d, n) = (phi.ambient_dim(), phi.rank());
    if n == 0 || n >= d {
        return Err(GwError::BadRank(format!(
            "reconstruction needs 1 <= n < d, got n = {n}, d = {d}"
        )));
    }
    let phi = CachedMap::new(phi);

    let report = screen(&phi, cfg.screen_samples, cfg.seed, &cfg.tol)?;
    if report.max_discrepancy() > cfg.accept_tol {
        let w = report.worst.expect("at least one sample");
        return Ok(ReconstructionResult::NotAnglePreserving {
            p: w.p,
            q: w.q,
            phi_p: w.phi_p,
            phi_q: w.phi_q,
            discrepancy: w.spectral.max(w.trace),
        });
    }

    let loose = cfg.loose_tol();
    let images = rank_one_images(&phi, &cfg.tol)?;
    if all_rank_one(&images, &loose) {
        return Ok(match linear_path(&phi, &images, cfg)? {
            Ok((v, antiunitary, residual)) => ReconstructionResult::Conjugation {
                v,
                antiunitary,
                residual,
            },
            Err(notes) => ReconstructionResult::PreservingUnclassified { notes },
        });
    }

    if d == 2 * n && n > 1 {
        let shift = Matrix::identity(d, Field::Real).scale(1.0 / n as f64);
        let shifted: Vec<Matrix> = images.iter().map(|q| &shift - q).collect();
        if all_rank_one(&shifted, &loose) {
            let flipped = ComplementOf { inner: &phi };
            let flipped_images = rank_one_images(&flipped, &cfg.tol)?;
            if !all_rank_one(&flipped_images, &loose) {
                return Ok(ReconstructionResult::PreservingUnclassified {
                    notes: "complemented map does not send rank-one projections to rank-one projections".into(),
                });
            }
            return Ok(match linear_path(&flipped, &flipped_images, cfg)? {
                Ok((v, antiunitary, residual)) => ReconstructionResult::ExceptionalComplement {
                    v,
                    antiunitary,
                    residual,
                },
                Err(notes) => ReconstructionResult::PreservingUnclassified { notes },
            });
        }
    }

    Ok(ReconstructionResult::PreservingUnclassified {
        notes: "angles are preserved on every sample, but the extension does not send \
                rank-one projections to rank-one projections or to (1/n)I minus one"
            .into(),
    })
}

/// Reconstructs through `ψ(P) = I − φ(I − P)` and checks the answer against
/// `phi` directly.
pub fn reconstruct_via_dual(
    phi: &(impl RankNMap + ?Sized),
    cfg: &ReconstructionConfig,
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    let psi = dualize(CachedMap::new(phi))?;
    let verify_seed = cfg.seed.wrapping_add(2);
    Ok(match reconstruct(&psi, cfg)? {
        ReconstructionResult::Conjugation { v, antiunitary, .. } => {
            // I − ψ(P) = φ(I − P) = V·τ(I − P)·V*, so V induces φ as well.
            let residual =
                verify_conjugation(&psi.inner, &v, antiunitary, cfg.verify_samples, verify_seed)?;
            if residual <= cfg.accept_tol {
                ReconstructionResult::Conjugation {
                    v,
                    antiunitary,
                    residual,
                }
            } else {
                ReconstructionResult::PreservingUnclassified {
                    notes: format!("dual unitary fails on the original map (residual {residual:.3e})"),
                }
            }
        }
        ReconstructionResult::ExceptionalComplement { v, antiunitary, .. } => {
            let residual =
                verify_exceptional(&psi.inner, &v, antiunitary, cfg.verify_samples, verify_seed)?;
            if residual <= cfg.accept_tol {
                ReconstructionResult::ExceptionalComplement {
                    v,
                    antiunitary,
                    residual,
                }
            } else {
                ReconstructionResult::PreservingUnclassified {
                    notes: format!(
                        "dual complement form fails on the original map (residual {residual:.3e})"
                    ),
                }
            }
        }
        ReconstructionResult::NotAnglePreserving { p, q, .. } => {
            let (p, q) = (p.complement(), q.complement());
            let phi_p = psi.inner.evaluate(&p)?;
            let phi_q = psi.inner.evaluate(&q)?;
            let spectral = spectrum_discrepancy(&p, &q, &phi_p, &phi_q, &cfg.tol)?;
            let trace = (trace_of_product(phi_p.matrix(), phi_q.matrix())
                - trace_of_product(p.matrix(), q.matrix()))
            .abs();
            ReconstructionResult::NotAnglePreserving {
                p,
                q,
                phi_p,
                phi_q,
                discrepancy: spectral.max(trace),
            }
        }
        other @ ReconstructionResult::PreservingUnclassified { .. } => other,
    })
}
