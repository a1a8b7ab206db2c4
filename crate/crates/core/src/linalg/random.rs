use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{Field, Matrix};
use crate::error::{GwError, Result};

/// Portable seeded generator used for every random draw in the crate.
pub type GwRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> GwRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix of independent standard Gaussians. Complex entries have unit
/// variance split evenly between real and imaginary parts.
pub fn gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    field: Field,
) -> Matrix {
    match field {
        Field::Real => {
            let data = DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
            Matrix::from_real(&data)
        }
        Field::Complex => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let data = DMatrix::from_fn(rows, cols, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * s, im * s)
            });
            Matrix::from_complex(data)
        }
    }
}

/// Haar-distributed unitary (orthogonal for the real field) drawn from `rng`.
///
/// QR of a Gaussian matrix, with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary_from_rng<R: Rng + ?Sized>(rng: &mut R, d: usize, field: Field) -> Matrix {
    let g = gaussian_matrix(rng, d, d, field);
    match field {
        Field::Real => {
            let qr = g.real_part().qr();
            let (mut q, r) = (qr.q(), qr.r());
            for j in 0..d {
                if r[(j, j)] < 0.0 {
                    q.column_mut(j).neg_mut();
                }
            }
            Matrix::from_real(&q)
        }
        Field::Complex => {
            let qr = g.into_dmatrix().qr();
            let (mut q, r) = (qr.q(), qr.r());
            for j in 0..d {
                let rjj = r[(j, j)];
                let norm = rjj.norm();
                let phase = if norm > 0.0 {
                    rjj / norm
                } else {
                    Complex64::new(1.0, 0.0)
                };
                for i in 0..d {
                    q[(i, j)] *= phase;
                }
            }
            Matrix::from_complex(q)
        }
    }
}

/// Deterministic Haar-random unitary for `(d, seed, field)`.
pub fn haar_random_unitary(d: usize, seed: u64, field: Field) -> Matrix {
    haar_unitary_from_rng(&mut seeded_rng(seed), d, field)
}

/// First `n` columns of a Haar unitary drawn from `rng`.
pub fn subspace_from_rng<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    n: usize,
    field: Field,
) -> Result<Matrix> {
    if n == 0 || n > d {
        return Err(GwError::BadRank(format!(
            "subspace rank {n} must lie in 1..={d}"
        )));
    }
    Ok(haar_unitary_from_rng(rng, d, field).columns(0, n))
}

/// Orthonormal `d × n` basis: the first `n` columns of
/// `haar_random_unitary(d, seed, field)`.
pub fn random_subspace(d: usize, n: usize, seed: u64, field: Field) -> Result<Matrix> {
    subspace_from_rng(&mut seeded_rng(seed), d, n, field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_unitary_is_a_phase() {
        let u = haar_random_unitary(1, 5, Field::Complex);
        assert!((u.get(0, 0).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_per_seed() {
        for field in [Field::Real, Field::Complex] {
            let a = haar_random_unitary(5, 99, field);
            let b = haar_random_unitary(5, 99, field);
            assert_eq!(a, b);
            assert_ne!(a, haar_random_unitary(5, 100, field));
        }
    }

    #[test]
    fn d4_seed7_unitarity() {
        // direct multiplication check
        let u = haar_random_unitary(4, 7, Field::Complex);
        let gram = &u.adjoint() * &u;
        let id = Matrix::identity(4, Field::Real);
        assert!(gram.max_abs_diff(&id) <= 1e-12);
    }

    #[test]
    fn real_field_gives_orthogonal_matrix() {
        let u = haar_random_unitary(6, 3, Field::Real);
        assert_eq!(u.field(), Field::Real);
        assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn subspace_is_prefix_of_unitary() {
        let u = haar_random_unitary(5, 8, Field::Complex);
        let s = random_subspace(5, 2, 8, Field::Complex).unwrap();
        assert_eq!(s, u.columns(0, 2));
        assert_eq!(random_subspace(5, 5, 8, Field::Complex).unwrap(), u);
        let v = random_subspace(3, 1, 2, Field::Real).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-14);
        assert!(matches!(
            random_subspace(3, 4, 0, Field::Real),
            Err(GwError::BadRank(_))
        ));
    }

    #[test]
    fn haar_first_entry_mean() {
        // E|U_11|^2 = 1/d under the Haar measure.
        let mut rng = seeded_rng(2024);
        let samples = 2000;
        let mean: f64 = (0..samples)
            .map(|_| haar_unitary_from_rng(&mut rng, 4, Field::Complex).get(0, 0).norm_sqr())
            .sum::<f64>()
            / samples as f64;
        assert!((mean - 0.25).abs() <= 0.02, "mean {mean}");
    }
}
