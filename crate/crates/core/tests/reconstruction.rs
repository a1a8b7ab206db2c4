use gw_core::extension::RankNMap;
use gw_core::linalg::{haar_unitary_from_rng, seeded_rng};
use gw_core::maps::{
    instantiate, map_to_table, ComplementMap, ComposeMap, ConjugationMap, IdentityMap, MapSpec,
    NoisyMap, TableMap,
};
use gw_core::projection::random_projection;
use gw_core::reconstruction::{
    apply_conjugation, canonicalize_phase, dualize, phase_aligned_deviation, reconstruct,
    reconstruct_via_dual, screen, verify_conjugation,
};
use gw_core::{Field, GwError, Matrix, ReconstructionConfig, ReconstructionResult, ToleranceConfig};
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

fn planted(d: usize, n: usize, f: Field, anti: bool, seed: u64) -> ConjugationMap {
    let v = haar_unitary_from_rng(&mut seeded_rng(seed), d, f);
    ConjugationMap::new(v, anti, n, f, &tol()).unwrap()
}

/// Largest distance between two maps over random rank-`n` inputs.
fn map_distance(a: &dyn RankNMap, b: &dyn RankNMap, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    (0..10)
        .map(|_| {
            let p = random_projection(&mut rng, a.ambient_dim(), a.rank(), a.field()).unwrap();
            a.evaluate(&p).unwrap().distance(&b.evaluate(&p).unwrap())
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn planted_conjugations_are_recovered(d in 2usize..=6, complex in any::<bool>(), anti in any::<bool>(), seed in any::<u64>()) {
        let f = field(complex);
        let anti = anti && complex;
        let n = 1 + (seed as usize) % (d - 1);
        let phi = planted(d, n, f, anti, seed);
        let result = if 2 * n > d {
            reconstruct_via_dual(&phi, &ReconstructionConfig::default()).unwrap()
        } else {
            reconstruct(&phi, &ReconstructionConfig::default()).unwrap()
        };
        let (v, got_anti) = result.unitary().expect("a unitary");
        prop_assert_eq!(result.variant_name(), "conjugation");
        if n > 1 || complex {
            prop_assert_eq!(got_anti, anti);
        }
        prop_assert!(v.unitarity_defect() <= 1e-9);
        prop_assert!(verify_conjugation(&phi, v, got_anti, 20, seed ^ 7).unwrap() <= 1e-7);
    }

    #[test]
    fn canonical_phase_is_seed_independent(d in 2usize..=5, seed in any::<u64>()) {
        let n = 1 + (seed as usize) % (d - 1);
        let phi = planted(d, n, Field::Complex, false, seed);
        let run = |s: u64| {
            let cfg = ReconstructionConfig::default().with_seed(s);
            let r = if 2 * n > d { reconstruct_via_dual(&phi, &cfg) } else { reconstruct(&phi, &cfg) };
            r.unwrap().unitary().unwrap().0.clone()
        };
        let (a, b) = (run(1), run(2));
        prop_assert!(a.distance(&b) <= 1e-9);
        let truth = phi.unitary();
        prop_assert!(phase_aligned_deviation(truth, &a) <= 1e-7);
    }

    #[test]
    fn dual_of_conjugation_is_the_same_conjugation(d in 2usize..=6, complex in any::<bool>(), seed in any::<u64>()) {
        let f = field(complex);
        let n = 1 + (seed as usize) % (d - 1);
        let anti = complex && seed % 2 == 0;
        let phi = planted(d, n, f, anti, seed);
        let v = phi.unitary().clone();
        let dual = dualize(&phi).unwrap();
        prop_assert_eq!(dual.rank(), d - n);
        let mut rng = seeded_rng(seed ^ 9);
        let p = random_projection(&mut rng, d, d - n, f).unwrap();
        let expected = apply_conjugation(&v, anti, &p).unwrap();
        prop_assert!(dual.evaluate(&p).unwrap().distance(&expected) <= 1e-10);
        let twice = dualize(dual).unwrap();
        prop_assert!(map_distance(&twice, &phi, seed) <= 1e-10);
    }
}

#[test]
fn complement_is_self_dual() {
    for n in 1..=4 {
        let comp = ComplementMap::new(2 * n, n, Field::Complex).unwrap();
        let dual = dualize(&comp).unwrap();
        assert!(map_distance(&dual, &comp, n as u64) <= 1e-12);
    }
}

#[test]
fn dual_needs_proper_rank() {
    let full = IdentityMap::new(3, 3, Field::Real);
    assert!(matches!(dualize(&full), Err(GwError::BadRank(_))));
    assert!(matches!(
        reconstruct(&full, &ReconstructionConfig::default()),
        Err(GwError::BadRank(_))
    ));
}

#[test]
fn complement_twice_is_identity() {
    let comp = || Box::new(ComplementMap::new(6, 3, Field::Real).unwrap()) as Box<dyn RankNMap>;
    let twice = ComposeMap::new(vec![comp(), comp()]).unwrap();
    let id = IdentityMap::new(6, 3, Field::Real);
    assert!(map_distance(&twice, &id, 3) <= 1e-12);
    let result = reconstruct(&twice, &ReconstructionConfig::default()).unwrap();
    assert_eq!(result.variant_name(), "conjugation");
}

#[test]
fn conjugated_complement_is_exceptional() {
    let f = Field::Complex;
    let base = planted(4, 2, f, true, 21);
    let map = ComposeMap::new(vec![
        Box::new(ComplementMap::new(4, 2, f).unwrap()),
        Box::new(base.clone()),
    ])
    .unwrap();
    match reconstruct(&map, &ReconstructionConfig::default()).unwrap() {
        ReconstructionResult::ExceptionalComplement {
            v,
            antiunitary,
            residual,
        } => {
            assert!(antiunitary);
            assert!(residual <= 1e-7);
            assert!(phase_aligned_deviation(base.unitary(), &v) <= 1e-7);
        }
        other => panic!("got {}", other.variant_name()),
    }
}

#[test]
fn complement_at_rank_one_is_a_conjugation() {
    // for d = 2, n = 1 the complement of a line is a conjugation by a rotation
    let comp = ComplementMap::new(2, 1, Field::Complex).unwrap();
    let result = reconstruct(&comp, &ReconstructionConfig::default()).unwrap();
    assert_eq!(result.variant_name(), "conjugation");
}

#[test]
fn noisy_maps_are_rejected_both_ways() {
    let f = Field::Complex;
    let noisy = NoisyMap::new(Box::new(IdentityMap::new(5, 3, f)), 1e-2, 4).unwrap();
    let cfg = ReconstructionConfig::default();
    for result in [
        reconstruct(&noisy, &cfg).unwrap(),
        reconstruct_via_dual(&noisy, &cfg).unwrap(),
    ] {
        match result {
            ReconstructionResult::NotAnglePreserving {
                p,
                q,
                phi_p,
                phi_q,
                discrepancy,
            } => {
                assert!(discrepancy > cfg.accept_tol);
                assert_eq!(p.rank(), 3);
                assert_eq!(q.rank(), 3);
                assert!(phi_p.distance(&noisy.evaluate(&p).unwrap()) <= 1e-12);
                assert!(phi_q.distance(&noisy.evaluate(&q).unwrap()) <= 1e-12);
            }
            other => panic!("got {}", other.variant_name()),
        }
    }
}

#[test]
fn noiseless_noisy_map_equals_base() {
    let base = planted(4, 2, Field::Complex, false, 5);
    let noisy = NoisyMap::new(Box::new(base.clone()), 0.0, 1).unwrap();
    assert!(map_distance(&noisy, &base, 6) == 0.0);
    assert!(NoisyMap::new(Box::new(base), -1.0, 1).is_err());
}

#[test]
fn screening_finds_no_witness_for_conjugations() {
    let phi = planted(5, 2, Field::Complex, true, 8);
    let report = screen(&phi, 30, 1, &tol()).unwrap();
    assert!(report.max_discrepancy() <= 1e-9);
}

#[test]
fn canonical_phase_is_idempotent() {
    let v = haar_unitary_from_rng(&mut seeded_rng(3), 4, Field::Complex);
    let c = canonicalize_phase(&v);
    assert!(canonicalize_phase(&c).distance(&c) < 1e-15);
    let top = (0..4).map(|i| c.get(i, 0)).max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    assert!(top.im == 0.0 && top.re > 0.0);
    assert!(phase_aligned_deviation(&v, &c) < 1e-14);
}

#[test]
fn tables_round_trip() {
    let t = tol();
    let phi = planted(4, 2, Field::Complex, false, 10);
    let mut rng = seeded_rng(11);
    let inputs: Vec<_> = (0..5)
        .map(|_| random_projection(&mut rng, 4, 2, Field::Complex).unwrap())
        .collect();
    let table = map_to_table(&phi, &inputs).unwrap();
    let text = serde_json::to_string(&table).unwrap();
    let back = TableMap::from_table(&serde_json::from_str(&text).unwrap(), &t).unwrap();
    for p in &inputs {
        assert!(back.evaluate(p).unwrap().distance(&phi.evaluate(p).unwrap()) <= 1e-12);
    }
    let unseen = random_projection(&mut rng, 4, 2, Field::Complex).unwrap();
    assert!(matches!(back.evaluate(&unseen), Err(GwError::UnknownInput)));
}

#[test]
fn specs_parse_and_validate() {
    let spec = MapSpec::from_json_str(
        r#"{"type": "compose", "maps": [{"type": "complement"}, {"type": "identity"}]}"#,
    )
    .unwrap();
    assert!(instantiate(&spec, 4, 2, Field::Real).is_ok());
    assert!(instantiate(&spec, 5, 2, Field::Real).is_err());
    assert!(MapSpec::from_json_str(r#"{"type": "rotate"}"#).is_err());
    let empty = MapSpec::from_json_str(r#"{"type": "compose", "maps": []}"#).unwrap();
    assert!(matches!(
        instantiate(&empty, 4, 2, Field::Real),
        Err(GwError::InvalidMapSpec(_))
    ));
    let not_unitary = serde_json::json!({
        "type": "conjugation",
        "matrix": Matrix::from_diagonal(&[2.0, 1.0]),
    });
    let spec: MapSpec = serde_json::from_value(not_unitary).unwrap();
    assert!(instantiate(&spec, 2, 1, Field::Real).is_err());
}

#[test]
fn config_validation() {
    let mut cfg = ReconstructionConfig::default();
    assert!(cfg.validate().is_ok());
    cfg.verify_samples = 0;
    assert!(cfg.validate().is_err());
    let cfg = ReconstructionConfig {
        accept_tol: 1e-12,
        ..ReconstructionConfig::default()
    };
    assert!(cfg.validate().is_err());
}
