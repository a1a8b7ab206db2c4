use gw_core::angles::angles_equal;
use gw_core::extension::{
    check_trace_form, extend_decomposition, extend_to_hermitian, extend_to_rank1,
    hermitian_decomposition, rank1_combination, CachedMap, HermitianDecomposition, RankNMap,
};
use gw_core::linalg::{gaussian_matrix, haar_unitary_from_rng, seeded_rng, subspace_from_rng};
use gw_core::maps::{ComplementMap, ConjugationMap, IdentityMap, NoisyMap};
use gw_core::projection::{projector_from_subspace, random_projection};
use gw_core::{Field, GwError, Matrix, Subspace, ToleranceConfig};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn field(complex: bool) -> Field {
    if complex {
        Field::Complex
    } else {
        Field::Real
    }
}

fn config(max_d: usize) -> impl Strategy<Value = (usize, usize, bool, u64)> {
    (2..=max_d).prop_flat_map(|d| (Just(d), 1..d, any::<bool>(), any::<u64>()))
}

fn conjugation(d: usize, n: usize, f: Field, seed: u64) -> ConjugationMap {
    let mut rng = seeded_rng(seed);
    let v = haar_unitary_from_rng(&mut rng, d, f);
    let anti = f == Field::Complex && seed % 2 == 1;
    ConjugationMap::new(v, anti, n, f, &tol()).unwrap()
}

fn unit_vector(d: usize, f: Field, seed: u64) -> Matrix {
    let u = gaussian_matrix(&mut seeded_rng(seed), d, 1, f);
    u.scale(1.0 / u.norm())
}

/// Solves `(J − I)λ = e₁` with a dense LU factorization.
fn oracle_coefficients(n: usize) -> Vec<f64> {
    let m = n + 1;
    let a = DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { 1.0 });
    let mut b = DVector::zeros(m);
    b[0] = 1.0;
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certificate_is_exact((d, n, complex, seed) in config(10)) {
        let t = tol();
        let f = field(complex);
        let u = unit_vector(d, f, seed);
        let cert = rank1_combination(&u, n, &t).unwrap();
        prop_assert!(cert.reassemble().distance(&Matrix::dyad(&u, &u)) <= 1e-12);
        let oracle = oracle_coefficients(n);
        for (c, o) in cert.coefficients.iter().zip(&oracle) {
            prop_assert!((c - o).abs() <= 1e-14);
        }
        // all parts live under E, the projection onto the first n + 1 frame vectors
        let e = cert.projections.iter().fold(Matrix::zeros(d, d, f), |acc, p| &acc + p.matrix()).scale(1.0 / n as f64);
        for p in &cert.projections {
            prop_assert_eq!(p.rank(), n);
            prop_assert!((&e * p.matrix()).distance(p.matrix()) < 1e-12);
        }
    }

    #[test]
    fn extension_of_rank_one_under_conjugation((d, n, complex, seed) in config(8)) {
        let t = tol();
        let f = field(complex);
        let phi = conjugation(d, n, f, seed);
        let u = unit_vector(d, f, seed ^ 1);
        let vu = if phi.is_antiunitary() { phi.unitary() * &u.conj() } else { phi.unitary() * &u };
        let image = extend_to_rank1(&phi, &u, &t).unwrap();
        prop_assert!(image.distance(&Matrix::dyad(&vu, &vu)) <= 1e-10);
    }

    #[test]
    fn extension_is_well_defined((d, n, complex, seed) in config(8)) {
        let t = tol();
        let f = field(complex);
        let phi = CachedMap::new(conjugation(d, n, f, seed));
        let mut rng = seeded_rng(seed ^ 2);
        let s = subspace_from_rng(&mut rng, d, n, f).unwrap();
        let w = haar_unitary_from_rng(&mut rng, n, f);
        let a = HermitianDecomposition::new(vec![1.0; n], s.clone(), &t).unwrap();
        let b = HermitianDecomposition::new(vec![1.0; n], &s * &w, &t).unwrap();
        let xa = extend_decomposition(&phi, &a, &t).unwrap();
        let xb = extend_decomposition(&phi, &b, &t).unwrap();
        prop_assert!(xa.distance(&xb) <= 1e-8);
        let p = projector_from_subspace(&Subspace::new(s, &t).unwrap());
        prop_assert!(xa.distance(phi.evaluate(&p).unwrap().matrix()) <= 1e-8);
    }

    #[test]
    fn extension_is_an_isometry((d, n, complex, seed) in config(8)) {
        let t = tol();
        let f = field(complex);
        let phi = CachedMap::new(conjugation(d, n, f, seed));
        let mut rng = seeded_rng(seed ^ 3);
        let mut sample = || {
            let g = gaussian_matrix(&mut rng, d, d, f);
            (&g + &g.adjoint()).scale(0.5)
        };
        let (a, b) = (sample(), sample());
        let fa = extend_to_hermitian(&phi, &a, &t).unwrap();
        let fb = extend_to_hermitian(&phi, &b, &t).unwrap();
        prop_assert!((fa.trace().re - a.trace().re).abs() <= 1e-9);
        prop_assert!(((&fa * &fb).trace().re - (&a * &b).trace().re).abs() <= 1e-8);
        prop_assert!(fa.hermitian_defect() <= 1e-10);
    }

    #[test]
    fn orthogonality_is_transported(n in 1usize..=3, extra in 0usize..=2, complex in any::<bool>(), seed in any::<u64>()) {
        let t = tol();
        let f = field(complex);
        let d = 2 * (n + 1) + extra;
        let phi = CachedMap::new(conjugation(d, n, f, seed));
        let u = haar_unitary_from_rng(&mut seeded_rng(seed ^ 4), d, f);
        let fp = extend_to_rank1(&phi, &u.column(0), &t).unwrap();
        let fq = extend_to_rank1(&phi, &u.column(1), &t).unwrap();
        prop_assert!((&fp * &fq).frobenius_norm() <= 1e-7);
    }

    #[test]
    fn conjugations_preserve_angles((d, n, complex, seed) in config(10)) {
        let t = tol();
        let f = field(complex);
        let phi = conjugation(d, n, f, seed);
        let mut rng = seeded_rng(seed ^ 5);
        for _ in 0..3 {
            let p = random_projection(&mut rng, d, n, f).unwrap();
            let q = random_projection(&mut rng, d, n, f).unwrap();
            let (fp, fq) = (phi.evaluate(&p).unwrap(), phi.evaluate(&q).unwrap());
            prop_assert!(angles_equal(&p, &q, &fp, &fq, 1e-9, &t).unwrap());
        }
    }
}

#[test]
fn small_certificates_match_closed_form() {
    let t = tol();
    let u = Matrix::basis_vector(4, 0);
    assert_eq!(rank1_combination(&u, 1, &t).unwrap().coefficients, vec![0.0, 1.0]);
    assert_eq!(
        rank1_combination(&u, 2, &t).unwrap().coefficients,
        vec![-0.5, 0.5, 0.5]
    );
    let c3 = rank1_combination(&u, 3, &t).unwrap().coefficients;
    let third = 1.0 / 3.0;
    assert_eq!(c3, vec![third - 1.0, third, third, third]);
    for (c, o) in c3.iter().zip(oracle_coefficients(3)) {
        assert!((c - o).abs() < 1e-15);
    }
}

#[test]
fn certificate_preconditions() {
    let t = tol();
    assert!(matches!(
        rank1_combination(&Matrix::basis_vector(3, 0), 3, &t),
        Err(GwError::BadRank(_))
    ));
    let long = Matrix::basis_vector(3, 0).scale(1.5);
    assert!(matches!(
        rank1_combination(&long, 1, &t),
        Err(GwError::NotUnit { .. })
    ));
}

#[test]
fn complement_extension_examples() {
    let t = tol();
    let phi = ComplementMap::new(4, 2, Field::Real).unwrap();
    let e1 = Matrix::basis_vector(4, 0);
    let image = extend_to_rank1(&phi, &e1, &t).unwrap();
    assert!(image.distance(&Matrix::from_diagonal(&[-0.5, 0.5, 0.5, 0.5])) < 1e-15);

    let id = Matrix::identity(4, Field::Real);
    assert!(extend_to_hermitian(&phi, &id, &t).unwrap().distance(&id) < 1e-14);
    let zero = Matrix::zeros(4, 4, Field::Real);
    assert!(extend_to_hermitian(&phi, &zero, &t).unwrap().distance(&zero) < 1e-15);
}

#[test]
fn identity_extension_is_identity() {
    let t = tol();
    let phi = IdentityMap::new(5, 2, Field::Complex);
    let u = unit_vector(5, Field::Complex, 9);
    assert!(extend_to_rank1(&phi, &u, &t).unwrap().distance(&Matrix::dyad(&u, &u)) < 1e-14);
    let mut rng = seeded_rng(10);
    let p = random_projection(&mut rng, 5, 2, Field::Complex).unwrap();
    assert!(extend_to_hermitian(&phi, p.matrix(), &t).unwrap().distance(p.matrix()) < 1e-8);
}

#[test]
fn non_hermitian_input_is_rejected() {
    let t = tol();
    let phi = IdentityMap::new(3, 1, Field::Real);
    let m = Matrix::from_real(&DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
    assert!(matches!(
        extend_to_hermitian(&phi, &m, &t),
        Err(GwError::NonHermitian { .. })
    ));
    assert!(hermitian_decomposition(&m, &t).is_err());
}

#[test]
fn trace_form_reports() {
    let conj = conjugation(5, 2, Field::Complex, 11);
    assert!(check_trace_form(&conj, 20, 1).unwrap().max_deviation <= 1e-10);
    let comp = ComplementMap::new(4, 2, Field::Complex).unwrap();
    assert!(check_trace_form(&comp, 20, 1).unwrap().max_deviation <= 1e-10);
    let noisy = NoisyMap::new(Box::new(IdentityMap::new(4, 2, Field::Complex)), 1e-2, 3).unwrap();
    let report = check_trace_form(&noisy, 20, 1).unwrap();
    assert!(report.max_deviation > 1e-4);
    assert!(report.witness.is_some());
}

#[test]
fn cache_reuses_evaluations() {
    let t = tol();
    let phi = CachedMap::new(conjugation(4, 2, Field::Complex, 12));
    let u = unit_vector(4, Field::Complex, 13);
    let first = extend_to_rank1(&phi, &u, &t).unwrap();
    let entries = phi.cached_entries();
    assert_eq!(entries, 3);
    let second = extend_to_rank1(&phi, &u, &t).unwrap();
    assert_eq!(phi.cached_entries(), entries);
    assert_eq!(first, second);
}
