use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use super::matrix::{Field, Matrix};
use super::tolerance::ToleranceConfig;
use crate::error::{GwError, Result};

const MAX_SWEEPS: usize = 10_000;
// Convergence thresholds tried in turn. nalgebra's iterations occasionally
// return a wrong factorization (a singular value of 1.0003 where the truth
// is 1, or garbage on rank-deficient complex input); every attempt is
// checked and the next threshold is tried on failure.
const CONVERGENCE_LADDER: [f64; 4] = [5.0 * f64::EPSILON, 1e-14, 1e-13, 1e-12];

/// Eigendecomposition `M = V·diag(values)·V*` with values ascending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Singular value decomposition `M = U·diag(s)·W*` with `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub w: Matrix,
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

fn permute_columns<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>, order: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), order.len(), |i, j| m[(i, order[j])])
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized before decomposition; the Hermitian check uses
/// `eq_tol · max(1, ‖M‖_F)`.
pub fn hermitian_eig(m: &Matrix, tol: &ToleranceConfig) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(GwError::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermitian_defect();
    if defect > tol.eq_tol * m.frobenius_norm().max(1.0) {
        return Err(GwError::NonHermitian { defect });
    }
    let h = m.hermitian_part();
    let bound = tol.eq_tol * h.frobenius_norm().max(1.0);
    for eps in CONVERGENCE_LADDER {
        let Some(eig) = decompose_hermitian(&h, eps) else {
            continue;
        };
        let rebuilt =
            &(&eig.vectors * &Matrix::from_diagonal(&eig.values)) * &eig.vectors.adjoint();
        if rebuilt.distance(&h) <= bound && eig.vectors.unitarity_defect() <= bound {
            return Ok(eig);
        }
    }
    Err(GwError::ConvergenceFailure("Hermitian eigensolver"))
}

fn decompose_hermitian(h: &Matrix, eps: f64) -> Option<HermitianEig> {
    match h.field() {
        Field::Real => {
            let eig = SymmetricEigen::try_new(h.real_part(), eps, MAX_SWEEPS)?;
            let raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            let order = ascending_order(&raw);
            Some(HermitianEig {
                values: order.iter().map(|&i| raw[i]).collect(),
                vectors: Matrix::from_real(&permute_columns(&eig.eigenvectors, &order)),
            })
        }
        Field::Complex => {
            let eig = SymmetricEigen::try_new(h.as_dmatrix().clone(), eps, MAX_SWEEPS)?;
            let raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            let order = ascending_order(&raw);
            Some(HermitianEig {
                values: order.iter().map(|&i| raw[i]).collect(),
                vectors: Matrix::from_complex(permute_columns(&eig.eigenvectors, &order)),
            })
        }
    }
}

/// Thin SVD. `U` is `rows × k`, `W` is `cols × k` with `k = min(rows, cols)`.
///
/// The factorization is checked against the input at `eq_tol · max(1, ‖M‖_F)`.
pub fn svd(m: &Matrix, tol: &ToleranceConfig) -> Result<Svd> {
    let bound = tol.eq_tol * m.frobenius_norm().max(1.0);
    for eps in CONVERGENCE_LADDER {
        let Some(out) = decompose_svd(m, eps) else {
            continue;
        };
        let sigma = Matrix::from_diagonal(&out.singular_values);
        let rebuilt = &(&out.u * &sigma) * &out.w.adjoint();
        if rebuilt.distance(m) <= bound
            && out.u.unitarity_defect() <= bound
            && out.w.unitarity_defect() <= bound
        {
            return Ok(out);
        }
    }
    Err(GwError::ConvergenceFailure("SVD"))
}

fn decompose_svd(m: &Matrix, eps: f64) -> Option<Svd> {
    fn finish<T: nalgebra::ComplexField<RealField = f64> + Copy>(
        svd: SVD<T, nalgebra::Dyn, nalgebra::Dyn>,
        wrap: impl Fn(DMatrix<T>) -> Matrix,
    ) -> Option<Svd> {
        let raw: Vec<f64> = svd.singular_values.iter().copied().collect();
        let mut order = ascending_order(&raw);
        order.reverse();
        let u = svd.u?;
        let w = svd.v_t?.adjoint();
        Some(Svd {
            u: wrap(permute_columns(&u, &order)),
            singular_values: order.iter().map(|&i| raw[i]).collect(),
            w: wrap(permute_columns(&w, &order)),
        })
    }

    match m.field() {
        Field::Real => {
            let s = SVD::try_new(m.real_part(), true, true, eps, MAX_SWEEPS)?;
            finish(s, |x| Matrix::from_real(&x))
        }
        Field::Complex => {
            let s = SVD::try_new(m.as_dmatrix().clone(), true, true, eps, MAX_SWEEPS)?;
            finish(s, Matrix::from_complex)
        }
    }
}

/// Orthonormal basis of the column span, by Gram–Schmidt with one round of
/// reorthogonalization. Columns are processed in order.
pub fn orthonormalize(m: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    let mut basis: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        let original = m.as_dmatrix().column(j).into_owned();
        let scale = original.norm().max(1.0);
        let mut v = original;
        for _ in 0..2 {
            for q in &basis {
                let coeff = q.dotc(&v);
                v -= q * coeff;
            }
        }
        let residual = v.norm();
        if residual < tol.rank_tol * scale {
            return Err(GwError::RankDeficient {
                column: j,
                residual,
            });
        }
        basis.push(v.unscale(residual));
    }
    let data = DMatrix::from_columns(&basis);
    Matrix::new(data, m.field())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_random_unitary;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn identity_spectrum() {
        let e = hermitian_eig(&Matrix::identity(3, Field::Real), &tol()).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        assert!(e.vectors.unitarity_defect() < 1e-12);
    }

    #[test]
    fn diagonal_spectrum_is_ascending() {
        let e = hermitian_eig(&Matrix::from_diagonal(&[1.0, 0.0]), &tol()).unwrap();
        assert_eq!(e.values, vec![0.0, 1.0]);
        assert!((e.vectors.get(1, 0).norm() - 1.0).abs() < 1e-12);
        assert!((e.vectors.get(0, 1).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = Matrix::from_real(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let e = hermitian_eig(&x, &tol()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = Matrix::from_real(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        assert!(matches!(
            hermitian_eig(&m, &tol()),
            Err(GwError::NonHermitian { .. })
        ));
    }

    #[test]
    fn real_input_keeps_real_eigenvectors() {
        let u = haar_random_unitary(5, 3, Field::Real);
        let m = &(&u * &Matrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0])) * &u.adjoint();
        let e = hermitian_eig(&m, &tol()).unwrap();
        assert_eq!(e.vectors.field(), Field::Real);
    }

    #[test]
    fn svd_of_zero_and_identity() {
        let z = svd(&Matrix::zeros(3, 2, Field::Real), &tol()).unwrap();
        assert_eq!(z.singular_values, vec![0.0, 0.0]);
        let i = svd(&Matrix::identity(2, Field::Complex), &tol()).unwrap();
        for s in i.singular_values {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_retries_when_first_attempt_is_wrong() {
        // Three unit singular values; nalgebra at its default threshold
        // reports 1.0003 for one of them.
        let data = [
            0.13276281364608628, 0.03879148069831839, 0.05334904593982141, 0.5211451629296716,
            -0.09782295459267938, -0.9403102424255922, 0.3170437298938188, -0.040593709791626326,
            -0.7870753285487407, 0.27337514739973723, 0.5315543280737594, -0.08172768121459487,
            -0.534540472511436, -0.18386976757428045, -0.7766429083852827, -0.1490748411571672,
        ];
        let m = Matrix::from_real(&DMatrix::from_row_slice(4, 4, &data));
        let s = svd(&m, &tol()).unwrap();
        for &v in &s.singular_values[..3] {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
        assert!((s.singular_values[3] - 0.466772416487).abs() < 1e-9);
    }

    #[test]
    fn svd_of_unit_dyad() {
        let x = haar_random_unitary(4, 1, Field::Complex).column(0);
        let y = haar_random_unitary(4, 2, Field::Complex).column(2);
        let s = svd(&Matrix::dyad(&x, &y), &tol()).unwrap();
        assert!((s.singular_values[0] - 1.0).abs() < 1e-12);
        for &v in &s.singular_values[1..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn orthonormalize_examples() {
        let t = tol();
        let single = Matrix::from_real(&DMatrix::from_column_slice(3, 1, &[2.0, 0.0, 0.0]));
        let q = orthonormalize(&single, &t).unwrap();
        assert_eq!(q.real_part(), DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]));

        let plane = Matrix::from_real(&DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]));
        let q = orthonormalize(&plane, &t).unwrap();
        assert!(q.unitarity_defect() < 1e-14);

        let u = haar_random_unitary(4, 11, Field::Complex);
        let q = orthonormalize(&u, &t).unwrap();
        assert!(q.max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn orthonormalize_detects_rank_deficiency() {
        let m = Matrix::from_real(&DMatrix::from_column_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]));
        assert!(matches!(
            orthonormalize(&m, &tol()),
            Err(GwError::RankDeficient { column: 1, .. })
        ));
    }
}
