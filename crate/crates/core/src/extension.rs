//! Real-linear extension of a map on rank-`n` projections.
//!
//! A map `φ` on rank-`n` projections that preserves `tr PQ` extends uniquely
//! to a real-linear map `Φ` on Hermitian matrices. `Φ` is evaluated on a
//! rank-one projection `uu*` by writing `uu*` as a real combination of `n + 1`
//! rank-`n` projections, and on a general Hermitian matrix through its
//! spectral decomposition.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{GwError, Result};
use crate::linalg::{hermitian_eig, seeded_rng, Field, Matrix, ToleranceConfig};
use crate::projection::{random_projection, trace_of_product, Projection};

/// A transformation on the rank-`n` projections of a `d`-dimensional space.
///
/// `evaluate` must be deterministic and return a rank-`n` projection.
pub trait RankNMap: Send + Sync {
    fn ambient_dim(&self) -> usize;
    fn rank(&self) -> usize;
    /// Field the inputs are sampled from.
    fn field(&self) -> Field;
    fn evaluate(&self, p: &Projection) -> Result<Projection>;
    /// Where the map came from, for reports.
    fn descriptor(&self) -> String;
}

macro_rules! forward_rank_n_map {
    ($($ty:ty),*) => {$(
        impl<T: RankNMap + ?Sized> RankNMap for $ty {
            fn ambient_dim(&self) -> usize {
                (**self).ambient_dim()
            }
            fn rank(&self) -> usize {
                (**self).rank()
            }
            fn field(&self) -> Field {
                (**self).field()
            }
            fn evaluate(&self, p: &Projection) -> Result<Projection> {
                (**self).evaluate(p)
            }
            fn descriptor(&self) -> String {
                (**self).descriptor()
            }
        }
    )*};
}

forward_rank_n_map!(&T, Box<T>, Arc<T>);

/// Rejects inputs that are not rank-`n` projections of the right dimension.
pub fn check_map_input(map: &(impl RankNMap + ?Sized), p: &Projection) -> Result<()> {
    if p.ambient_dim() != map.ambient_dim() {
        return Err(GwError::DimensionMismatch(format!(
            "map acts on dimension {}, input has dimension {}",
            map.ambient_dim(),
            p.ambient_dim()
        )));
    }
    if p.rank() != map.rank() {
        return Err(GwError::RankMismatch {
            left: p.rank(),
            right: map.rank(),
        });
    }
    Ok(())
}

/// Memoizes a map's outputs, keyed by the input rounded to 12 decimals.
pub struct CachedMap<M> {
    inner: M,
    cache: Mutex<HashMap<Vec<u8>, Projection>>,
}

impl<M: RankNMap> CachedMap<M> {
    pub fn new(inner: M) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.lock().expect("cache poisoned").len()
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<M: RankNMap> RankNMap for CachedMap<M> {
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
        let key = p.matrix().canonical_key();
        if let Some(hit) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let out = self.inner.evaluate(p)?;
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(key, out.clone());
        Ok(out)
    }

    fn descriptor(&self) -> String {
        self.inner.descriptor()
    }
}

/// `uu* = Σ_k λ_k P_k` with each `P_k` a rank-`n` projection.
#[derive(Debug, Clone, Serialize)]
pub struct CombinationCertificate {
    pub coefficients: Vec<f64>,
    pub projections: Vec<Projection>,
    pub target: Projection,
}

impl CombinationCertificate {
    /// `Σ_k λ_k P_k`.
    pub fn reassemble(&self) -> Matrix {
        let d = self.target.ambient_dim();
        self.coefficients
            .iter()
            .zip(&self.projections)
            .fold(Matrix::zeros(d, d, self.target.field()), |acc, (&c, p)| {
                &acc + &p.matrix().scale(c)
            })
    }
}

/// `u` followed by `count − 1` further orthonormal vectors, taken from the
/// standard basis in index order; candidates whose residual after
/// Gram–Schmidt is below `rank_tol` are skipped.
fn orthonormal_completion(u: &Matrix, count: usize, tol: &ToleranceConfig) -> Vec<Matrix> {
    let d = u.rows();
    let mut out = vec![u.clone()];
    for i in 0..d {
        if out.len() == count {
            break;
        }
        let mut v = Matrix::basis_vector(d, i);
        for _ in 0..2 {
            for q in &out {
                let coeff = (&q.adjoint() * &v).get(0, 0);
                v = &v - &q.scale_complex(coeff);
            }
        }
        let residual = v.norm();
        if residual >= tol.rank_tol {
            out.push(v.scale(1.0 / residual));
        }
    }
    out
}

/// Writes `uu*` as a real-linear combination of `n + 1` rank-`n` projections.
///
/// With `u = u₁, …, u_{n+1}` orthonormal and `E = Σ u_k u_k*`, the projections
/// are `P_k = E − u_k u_k*`. The coefficients solve `(J − I)λ = e₁`, where
/// `J` is the all-ones matrix, giving `λ_k = 1/n − [k = 1]`.
pub fn rank1_combination(
    u: &Matrix,
    n: usize,
    tol: &ToleranceConfig,
) -> Result<CombinationCertificate> {
    let d = u.rows();
    if n == 0 || d < n + 1 {
        return Err(GwError::BadRank(format!(
            "need 1 <= n and n + 1 <= d, got n = {n}, d = {d}"
        )));
    }
    let target = Projection::rank_one(u, tol)?;
    let frame = orthonormal_completion(u, n + 1, tol);
    debug_assert_eq!(frame.len(), n + 1);
    let dyads: Vec<Matrix> = frame.iter().map(|v| Matrix::dyad(v, v)).collect();
    let field = dyads.iter().fold(Field::Real, |f, m| f.join(m.field()));

    let projections = (0..=n)
        .map(|k| {
            let m = dyads
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .fold(Matrix::zeros(d, d, field), |acc, (_, x)| &acc + x);
            Projection::new_unchecked(m, n)
        })
        .collect();
    let inv_n = 1.0 / n as f64;
    let coefficients = (0..=n)
        .map(|k| if k == 0 { inv_n - 1.0 } else { inv_n })
        .collect();
    Ok(CombinationCertificate {
        coefficients,
        projections,
        target,
    })
}

/// `Φ(uu*) = Σ_k λ_k φ(P_k)`.
pub fn extend_to_rank1(
    phi: &(impl RankNMap + ?Sized),
    u: &Matrix,
    tol: &ToleranceConfig,
) -> Result<Matrix> {
    if u.rows() != phi.ambient_dim() {
        return Err(GwError::DimensionMismatch(format!(
            "vector has length {}, map acts on dimension {}",
            u.rows(),
            phi.ambient_dim()
        )));
    }
    let cert = rank1_combination(u, phi.rank(), tol)?;
    let d = phi.ambient_dim();
    let mut acc = Matrix::zeros(d, d, Field::Real);
    for (&c, p) in cert.coefficients.iter().zip(&cert.projections) {
        if c == 0.0 {
            continue;
        }
        let image = phi.evaluate(p)?;
        acc = &acc + &image.matrix().scale(c);
    }
    let tr = acc.trace().re;
    if (tr - 1.0).abs() > tol.spec_tol {
        return Err(GwError::InternalInconsistency(format!(
            "extension of a rank-one projection has trace {tr}"
        )));
    }
    Ok(acc)
}

/// `A = Σ μ_i u_i u_i*` with orthonormal `u_i` (the columns of `vectors`).
#[derive(Debug, Clone)]
pub struct HermitianDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: Matrix,
}

impl HermitianDecomposition {
    /// Builds a decomposition from explicit orthonormal vectors.
    pub fn new(eigenvalues: Vec<f64>, vectors: Matrix, tol: &ToleranceConfig) -> Result<Self> {
        if eigenvalues.len() != vectors.cols() {
            return Err(GwError::DimensionMismatch(format!(
                "{} eigenvalues for {} vectors",
                eigenvalues.len(),
                vectors.cols()
            )));
        }
        let defect = vectors.unitarity_defect();
        if defect > tol.eq_tol {
            return Err(GwError::InvalidMatrix(format!(
                "decomposition vectors are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(Self {
            eigenvalues,
            vectors,
        })
    }

    pub fn rank1_projections(&self) -> Vec<Projection> {
        (0..self.vectors.cols())
            .map(|i| {
                let v = self.vectors.column(i);
                Projection::new_unchecked(Matrix::dyad(&v, &v), 1)
            })
            .collect()
    }

    /// `Σ μ_i u_i u_i*`.
    pub fn reassemble(&self) -> Matrix {
        let d = self.vectors.rows();
        self.eigenvalues
            .iter()
            .zip(self.rank1_projections())
            .fold(Matrix::zeros(d, d, self.vectors.field()), |acc, (&mu, p)| {
                &acc + &p.matrix().scale(mu)
            })
    }
}

pub fn hermitian_decomposition(a: &Matrix, tol: &ToleranceConfig) -> Result<HermitianDecomposition> {
    let eig = hermitian_eig(a, tol)?;
    Ok(HermitianDecomposition {
        eigenvalues: eig.values,
        vectors: eig.vectors,
    })
}

/// `Σ μ_i Φ(u_i u_i*)` for a given decomposition.
pub fn extend_decomposition(
    phi: &(impl RankNMap + ?Sized),
    dec: &HermitianDecomposition,
    tol: &ToleranceConfig,
) -> Result<Matrix> {
    let d = phi.ambient_dim();
    let scale = dec.eigenvalues.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let mut acc = Matrix::zeros(d, d, Field::Real);
    for (i, &mu) in dec.eigenvalues.iter().enumerate() {
        // numerically zero eigenvalues contribute nothing
        if mu.abs() <= 1e-15 * scale {
            continue;
        }
        let image = extend_to_rank1(phi, &dec.vectors.column(i), tol)?;
        acc = &acc + &image.scale(mu);
    }
    Ok(acc)
}

/// `Φ(A)` for Hermitian `A`, through its spectral decomposition.
pub fn extend_to_hermitian(
    phi: &(impl RankNMap + ?Sized),
    a: &Matrix,
    tol: &ToleranceConfig,
) -> Result<Matrix> {
    let dec = hermitian_decomposition(a, tol)?;
    let out = extend_decomposition(phi, &dec, tol)?;
    let (ta, tb) = (a.trace().re, out.trace().re);
    if (ta - tb).abs() > tol.spec_tol * a.frobenius_norm().max(1.0) {
        return Err(GwError::InternalInconsistency(format!(
            "extension changed the trace from {ta} to {tb}"
        )));
    }
    Ok(out)
}

/// Largest observed `|tr φ(P)φ(Q) − tr PQ|` over random pairs.
#[derive(Debug, Clone)]
pub struct TraceFormReport {
    pub max_deviation: f64,
    /// The pair attaining the maximum.
    pub witness: Option<(Projection, Projection)>,
}

pub fn check_trace_form(
    phi: &(impl RankNMap + ?Sized),
    num_samples: usize,
    seed: u64,
) -> Result<TraceFormReport> {
    let (d, n, field) = (phi.ambient_dim(), phi.rank(), phi.field());
    let mut rng = seeded_rng(seed);
    let mut report = TraceFormReport {
        max_deviation: 0.0,
        witness: None,
    };
    for _ in 0..num_samples {
        let p = random_projection(&mut rng, d, n, field)?;
        let q = random_projection(&mut rng, d, n, field)?;
        let (fp, fq) = (phi.evaluate(&p)?, phi.evaluate(&q)?);
        let dev = (trace_of_product(fp.matrix(), fq.matrix())
            - trace_of_product(p.matrix(), q.matrix()))
        .abs();
        if report.witness.is_none() || dev > report.max_deviation {
            report.max_deviation = dev;
            report.witness = Some((p, q));
        }
    }
    Ok(report)
}
