//! Orthogonal projections and the subspaces they project onto.
//!
//! A [`Projection`] is a Hermitian idempotent matrix of known integer rank.
//! Constructors are the only place where the invariants are checked; the
//! rank is stored and never recomputed afterwards.

use serde::Serialize;

use crate::error::{GwError, Result};
use crate::linalg::{
    hermitian_eig, orthonormalize, subspace_from_rng, Field, Matrix, MatrixJson, ToleranceConfig,
};

/// An `n`-dimensional subspace of a `d`-dimensional space, held as an
/// orthonormal `d × n` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Validates that the columns are orthonormal within `eq_tol`.
    pub fn new(basis: Matrix, tol: &ToleranceConfig) -> Result<Self> {
        let defect = basis.unitarity_defect();
        if defect > tol.eq_tol {
            return Err(GwError::InvalidMatrix(format!(
                "basis columns are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(Self { basis })
    }

    /// Orthonormalizes arbitrary independent columns first.
    pub fn spanned_by(columns: &Matrix, tol: &ToleranceConfig) -> Result<Self> {
        Ok(Self {
            basis: orthonormalize(columns, tol)?,
        })
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn field(&self) -> Field {
        self.basis.field()
    }
}

/// Hermitian idempotent matrix of rank `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: Matrix,
    rank: usize,
}

impl Projection {
    /// Checks Hermiticity, idempotency and integrality of the trace.
    pub fn from_matrix(matrix: Matrix, tol: &ToleranceConfig) -> Result<Self> {
        let rank = projection_rank(&matrix, tol)?;
        Ok(Self { matrix, rank })
    }

    /// As [`Projection::from_matrix`], additionally requiring a given rank.
    pub fn with_rank(matrix: Matrix, rank: usize, tol: &ToleranceConfig) -> Result<Self> {
        let p = Self::from_matrix(matrix, tol)?;
        if p.rank != rank {
            return Err(GwError::RankMismatch {
                left: p.rank,
                right: rank,
            });
        }
        Ok(p)
    }

    /// Trusted constructor for matrices that are projections by construction,
    /// e.g. unitary conjugates of a validated projection.
    pub(crate) fn new_unchecked(matrix: Matrix, rank: usize) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix, rank }
    }

    /// Rank-one projection onto the span of a unit vector.
    pub fn rank_one(u: &Matrix, tol: &ToleranceConfig) -> Result<Self> {
        let norm = u.norm();
        if u.cols() != 1 || (norm - 1.0).abs() > tol.eq_tol {
            return Err(GwError::NotUnit { norm });
        }
        Ok(Self::new_unchecked(Matrix::dyad(u, u), 1))
    }

    pub fn zero(d: usize, field: Field) -> Self {
        Self::new_unchecked(Matrix::zeros(d, d, field), 0)
    }

    pub fn identity(d: usize, field: Field) -> Self {
        Self::new_unchecked(Matrix::identity(d, field), d)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn field(&self) -> Field {
        self.matrix.field()
    }

    /// `I − P`.
    pub fn complement(&self) -> Projection {
        let d = self.ambient_dim();
        Projection::new_unchecked(
            &Matrix::identity(d, self.field()) - &self.matrix,
            d - self.rank,
        )
    }

    /// Frobenius distance; projection equality is `distance ≤ eq_tol`.
    pub fn distance(&self, other: &Projection) -> f64 {
        self.matrix.distance(&other.matrix)
    }

    pub fn approx_eq(&self, other: &Projection, tol: &ToleranceConfig) -> bool {
        self.ambient_dim() == other.ambient_dim() && self.distance(other) <= tol.eq_tol
    }

    pub fn to_json(&self) -> MatrixJson {
        let mut j = MatrixJson::from(&self.matrix);
        j.kind = Some("projection".into());
        j.rank = Some(self.rank);
        j
    }

    /// Loads a projection, validating the optional `kind` and `rank` fields.
    pub fn from_json(j: &MatrixJson, tol: &ToleranceConfig) -> Result<Self> {
        if let Some(kind) = &j.kind {
            if kind != "projection" {
                return Err(GwError::InvalidMatrix(format!(
                    "expected kind \"projection\", found {kind:?}"
                )));
            }
        }
        let m = Matrix::try_from(j)?;
        match j.rank {
            Some(r) => Self::with_rank(m, r, tol),
            None => Self::from_matrix(m, tol),
        }
    }
}

impl Serialize for Projection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// `P = R + R′`, `Q = R + R″` with `R, R′, R″` pairwise orthogonal.
#[derive(Debug, Clone)]
pub struct CommutingDecomposition {
    pub r: Projection,
    pub r_prime: Projection,
    pub r_doubleprime: Projection,
}

/// `basis · basis*`.
pub fn projector_from_subspace(s: &Subspace) -> Projection {
    Projection::new_unchecked(Matrix::dyad(s.basis(), s.basis()), s.rank())
}

/// Projection onto a Haar-random `n`-dimensional subspace.
pub fn random_projection<R: rand::Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    n: usize,
    field: Field,
) -> Result<Projection> {
    let basis = subspace_from_rng(rng, d, n, field)?;
    Ok(Projection::new_unchecked(Matrix::dyad(&basis, &basis), n))
}

/// Orthonormal basis of the range, from the eigenvectors of eigenvalue 1.
pub fn subspace_from_projector(p: &Projection, tol: &ToleranceConfig) -> Result<Subspace> {
    let eig = hermitian_eig(p.matrix(), tol)?;
    for &v in &eig.values {
        if v.abs() > tol.rank_tol && (v - 1.0).abs() > tol.rank_tol {
            return Err(GwError::NotAProjection(format!(
                "eigenvalue {v} is neither 0 nor 1"
            )));
        }
    }
    let d = p.ambient_dim();
    let n = p.rank();
    if n == 0 {
        return Err(GwError::BadRank("the zero projection has no basis".into()));
    }
    Ok(Subspace {
        basis: eig.vectors.columns(d - n, n),
    })
}

/// Rank of a projection matrix, i.e. its rounded trace.
pub fn projection_rank(m: &Matrix, tol: &ToleranceConfig) -> Result<usize> {
    if !m.is_square() {
        return Err(GwError::NotAProjection(format!(
            "matrix is {}x{}, not square",
            m.rows(),
            m.cols()
        )));
    }
    let herm = m.hermitian_defect();
    if herm > tol.eq_tol {
        return Err(GwError::NotAProjection(format!(
            "Hermitian defect {herm:.3e}"
        )));
    }
    let idem = (m * m).distance(m);
    if idem > tol.eq_tol {
        return Err(GwError::NotAProjection(format!(
            "idempotency defect {idem:.3e}"
        )));
    }
    let tr = m.trace().re;
    let rounded = tr.round();
    if (tr - rounded).abs() > tol.rank_tol || rounded < 0.0 {
        return Err(GwError::NotAProjection(format!(
            "trace {tr} is not a nonnegative integer"
        )));
    }
    Ok(rounded as usize)
}

fn check_same_dim(p: &Projection, q: &Projection) -> Result<()> {
    if p.ambient_dim() != q.ambient_dim() {
        return Err(GwError::DimensionMismatch(format!(
            "ambient dimensions {} and {}",
            p.ambient_dim(),
            q.ambient_dim()
        )));
    }
    Ok(())
}

/// `Re tr(PQ)`, equal to `tr QPQ` and to the sum of squared cosines of the
/// principal angles.
pub fn trace_product(p: &Projection, q: &Projection) -> Result<f64> {
    check_same_dim(p, q)?;
    Ok(trace_of_product(p.matrix(), q.matrix()))
}

/// `Re tr(AB)` without forming the product.
pub(crate) fn trace_of_product(a: &Matrix, b: &Matrix) -> f64 {
    let (a, b) = (a.as_dmatrix(), b.as_dmatrix());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Orthogonality through the trace criterion `tr PQ = 0`.
///
/// When the trace criterion holds, `‖PQ‖_F ≤ √spec_tol · d` is checked as well;
/// a disagreement is reported as [`GwError::InternalInconsistency`].
pub fn are_orthogonal(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Result<bool> {
    let t = trace_product(p, q)?;
    let orthogonal = t <= tol.spec_tol;
    if orthogonal {
        let pq = (p.matrix() * q.matrix()).frobenius_norm();
        let bound = tol.spec_tol.sqrt() * p.ambient_dim() as f64;
        if pq > bound {
            return Err(GwError::InternalInconsistency(format!(
                "tr PQ = {t:.3e} but ‖PQ‖_F = {pq:.3e}"
            )));
        }
    }
    Ok(orthogonal)
}

/// Splits a commuting pair into `R = QPQ`, `R′ = P − R`, `R″ = Q − R`.
///
/// Commutation is decided twice: by idempotency of `QPQ` and by the
/// commutator norm. Both use `eq_tol`; if they disagree the pair sits in the
/// band where the numerics cannot decide and
/// [`GwError::InternalInconsistency`] is returned.
pub fn decompose_commuting(
    p: &Projection,
    q: &Projection,
    tol: &ToleranceConfig,
) -> Result<CommutingDecomposition> {
    check_same_dim(p, q)?;
    let (pm, qm) = (p.matrix(), q.matrix());
    let qpq = &(qm * pm) * qm;
    let defect = (&qpq * &qpq).distance(&qpq);
    let commutator = (pm * qm).distance(&(qm * pm));
    let idempotent = defect <= tol.eq_tol;
    let commuting = commutator <= tol.eq_tol;
    if idempotent != commuting {
        return Err(GwError::InternalInconsistency(format!(
            "QPQ idempotency defect {defect:.3e} and commutator {commutator:.3e} disagree"
        )));
    }
    if !idempotent {
        return Err(GwError::NotCommuting { commutator, defect });
    }
    let r = Projection::from_matrix(qpq, tol)?;
    let r_prime = Projection::from_matrix(pm - r.matrix(), tol)?;
    let r_doubleprime = Projection::from_matrix(qm - r.matrix(), tol)?;
    for (a, b) in [(&r, &r_prime), (&r, &r_doubleprime), (&r_prime, &r_doubleprime)] {
        let t = trace_product(a, b)?;
        if t > tol.spec_tol {
            return Err(GwError::InternalInconsistency(format!(
                "decomposition parts overlap (tr = {t:.3e})"
            )));
        }
    }
    Ok(CommutingDecomposition {
        r,
        r_prime,
        r_doubleprime,
    })
}
