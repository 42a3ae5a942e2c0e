//! Discriminability: worked examples, certificates and invariants.

mod common;

use common::{polygon, random_ensemble, tetrahedron, trine, with_maximally_mixed};
use kcopy::bounds::{rebit_lower_so2, trine_certificate};
use kcopy::designs::{design_povm, Catalog};
use kcopy::discrim::{
    check_dual_certificate, discriminability, discriminability_gram, group_covariant_value, helstrom, pgm,
    success_probability,
};
use kcopy::qcore::{c, random_unitary, sym_dim, ComplexMatrix, DensityOperator, Ensemble, PureState, State};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[test]
fn reference_values() {
    let orth = Ensemble::from_pure(vec![PureState::from_bloch(0.0, 0.0), PureState::from_bloch(std::f64::consts::PI, 0.0)])
        .unwrap();
    assert!((discriminability(&orth, 1).unwrap().value - 1.0).abs() < 1e-7);
    let trine_value = (1.5 + SQRT2) / 3.0;
    assert!((discriminability(&trine(), 2).unwrap().value - trine_value).abs() < 1e-7);
    assert!((discriminability(&tetrahedron(), 2).unwrap().value - 0.75).abs() < 1e-7);
    let mixed = discriminability(&with_maximally_mixed(&trine()), 2).unwrap().value;
    assert!((mixed - 0.7911).abs() < 1e-4, "{mixed}");
}

#[test]
fn gram_examples() {
    assert!((discriminability_gram(&trine(), 2).unwrap().value - (1.5 + SQRT2) / 3.0).abs() < 1e-7);
    let zero = PureState::from_bloch(0.3, 0.2);
    let pair = Ensemble::from_pure(vec![zero.clone(), zero]).unwrap();
    for k in [1, 3, 10] {
        assert!((discriminability_gram(&pair, k).unwrap().value - 0.5).abs() < 1e-7);
    }
}

#[test]
fn trine_at_fifty_copies_matches_the_covariant_closed_form() {
    // Every pair overlap is ±1/2, so the fifty-copy Gram matrix is circulant with
    // off-diagonal a = 2^-50 and eigenvalues 1 + 2a, 1 - a, 1 - a. For a covariant
    // pure ensemble the square-root measurement succeeds with (Tr √(G/N))² / N.
    let a = 0.5f64.powi(50);
    let closed = ((1.0 + 2.0 * a) / 3.0).sqrt() + 2.0 * ((1.0 - a) / 3.0).sqrt();
    let closed = closed * closed / 3.0;
    let value = discriminability_gram(&trine(), 50).unwrap().value;
    assert!((value - closed).abs() < 1e-8, "{value} vs {closed}");
}

#[test]
fn pgm_examples() {
    let orth = Ensemble::from_pure(vec![PureState::from_bloch(0.0, 0.0), PureState::from_bloch(std::f64::consts::PI, 0.0)])
        .unwrap();
    let (povm, value) = pgm(&orth, 1).unwrap();
    assert!((value - 1.0).abs() < 1e-10);
    assert!((povm.elements[0][(0, 0)].re - 1.0).abs() < 1e-10 && povm.elements[0][(1, 1)].norm() < 1e-10);
    assert!(povm.completeness_error() < 1e-8);
    assert!((pgm(&trine(), 2).unwrap().1 - (1.5 + SQRT2) / 3.0).abs() < 1e-9);
    assert!((pgm(&tetrahedron(), 2).unwrap().1 - 0.75).abs() < 1e-9);
}

#[test]
fn covariant_value_examples() {
    assert!((group_covariant_value(&trine(), 2).unwrap() - (1.5 + SQRT2) / 3.0).abs() < 1e-10);
    let single = Ensemble::from_pure(vec![PureState::from_bloch(1.0, 2.0)]).unwrap();
    assert!((group_covariant_value(&single, 3).unwrap() - 1.0).abs() < 1e-10);
    for k in 1..=6 {
        let gon = polygon(k + 1);
        let so2 = rebit_lower_so2(k + 1, k).unwrap().value;
        assert!((group_covariant_value(&gon, k).unwrap() - so2).abs() < 1e-9, "k = {k}");
    }
    let skewed = Ensemble::new(trine().states, Some(vec![0.5, 0.25, 0.25])).unwrap();
    assert!(group_covariant_value(&skewed, 2).is_err());
}

#[test]
fn helstrom_examples() {
    let zero = State::Pure(PureState::from_bloch(0.0, 0.0)).density();
    let plus = State::Pure(PureState::from_bloch(std::f64::consts::FRAC_PI_2, 0.0)).density();
    let one = State::Pure(PureState::from_bloch(std::f64::consts::PI, 0.0)).density();
    assert!((helstrom(&zero, &zero, 0.5) - 0.5).abs() < 1e-12);
    assert!((helstrom(&zero, &one, 0.5) - 1.0).abs() < 1e-12);
    // 2x2 eigensolve by hand: (ρ0 - ρ1)/2 = [[1/4, -1/4], [-1/4, -1/4]] has eigenvalues ±1/(2√2).
    assert!((helstrom(&zero, &plus, 0.5) - (1.0 + 1.0 / SQRT2) / 2.0).abs() < 1e-12);
}

#[test]
fn dual_certificate_examples() {
    let cert = trine_certificate();
    let check = check_dual_certificate(&cert.x, &trine(), 2).unwrap();
    assert!(check.feasible);
    assert!((check.bound - (1.5 + SQRT2) / 3.0).abs() < 1e-12);
    for j in 0..64 {
        let rebits = Ensemble::uniform(vec![
            State::Pure(PureState::rebit(j as f64 * 0.1)),
            State::Pure(PureState::rebit(j as f64 * 0.37 + 1.0)),
            State::Pure(PureState::rebit(j as f64 * 0.05 - 0.4)),
        ])
        .unwrap();
        assert!(check_dual_certificate(&cert.x, &rebits, 2).unwrap().feasible);
    }
    let tet = tetrahedron();
    let id = check_dual_certificate(&ComplexMatrix::identity(4, 4), &tet, 2).unwrap();
    assert!(id.feasible && (id.bound - 4.0).abs() < 1e-12);
    assert!(!check_dual_certificate(&ComplexMatrix::zeros(4, 4), &tet, 2).unwrap().feasible);
}

#[test]
fn monotone_in_copies() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..100 {
        let n = 2 + trial % 3;
        let e = random_ensemble(2, n, trial % 2 == 0, &mut rng);
        let mut last = 0.0;
        for k in 1..=3 {
            let v = discriminability(&e, k).unwrap().value;
            assert!(v >= last - 1e-7, "trial {trial}: k = {k} gives {v} < {last}");
            assert!(v >= 1.0 / n as f64 - 1e-7 && v <= 1.0 + 1e-7);
            last = v;
        }
    }
}

#[test]
fn unitary_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for trial in 0..16 {
        let d = 2 + trial % 2;
        let e = random_ensemble(d, 3, trial % 3 == 0, &mut rng);
        let u = random_unitary(d, &mut rng);
        let k = if d == 2 { 2 } else { 1 };
        let before = discriminability(&e, k).unwrap().value;
        let after = discriminability(&e.rotated(&u).unwrap(), k).unwrap().value;
        assert!((before - after).abs() < 1e-7, "{before} vs {after}");
    }
}

#[test]
fn pgm_optimum_and_certificate_are_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..20 {
        let e = random_ensemble(2, 2 + trial % 3, trial % 2 == 1, &mut rng);
        let k = 1 + trial % 2;
        let r = discriminability(&e, k).unwrap();
        let (_, p) = pgm(&e, k).unwrap();
        assert!(p <= r.value + 1e-7, "{p} > {}", r.value);
        assert!(r.value <= r.certified_upper + 1e-7);
        assert!(r.povm.completeness_error() < 1e-8);
        let max_prior = e.weights.iter().cloned().fold(0.0, f64::max);
        assert!(r.value >= max_prior - 1e-7);
    }
}

#[test]
fn gram_reduction_matches_full_program() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for trial in 0..18 {
        let d = 2 + trial % 2;
        let n = 2 + trial % 4;
        let k = 1 + trial % 3;
        let e = random_ensemble(d, n, true, &mut rng);
        let full = discriminability(&e, k).unwrap().value;
        let gram = discriminability_gram(&e, k).unwrap().value;
        assert!((full - gram).abs() < 1e-6, "d={d} N={n} k={k}: {full} vs {gram}");
    }
}

#[test]
fn designs_reach_the_symmetric_dimension() {
    for (cat, k) in [(Catalog::Tetrahedron, 2), (Catalog::Octahedron, 3), (Catalog::Icosahedron, 5)] {
        let cand = cat.candidate().unwrap();
        let n = cand.ensemble.len();
        let expected = sym_dim(2, k) as f64 / n as f64;
        let povm = design_povm(&cand).unwrap();
        assert!((success_probability(&cand.ensemble, k, &povm).unwrap() - expected).abs() < 1e-8);
    }
}

#[test]
fn perfect_discrimination_iff_orthogonal_supports() {
    // Orthogonal supports: two mixed states on disjoint qutrit subspaces.
    let a = DensityOperator::new(ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c(0.5, 0.0),
        c(0.5, 0.0),
        c(0.0, 0.0),
    ])))
    .unwrap();
    let b = DensityOperator::new(ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(1.0, 0.0),
    ])))
    .unwrap();
    let e = Ensemble::uniform(vec![State::Mixed(a.clone()), State::Mixed(b)]).unwrap();
    assert!((discriminability(&e, 1).unwrap().value - 1.0).abs() < 1e-7);
    // Overlapping supports stay strictly below one at every copy number.
    let overlap = DensityOperator::new(ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c(0.0, 0.0),
        c(0.5, 0.0),
        c(0.5, 0.0),
    ])))
    .unwrap();
    let e = Ensemble::uniform(vec![State::Mixed(a), State::Mixed(overlap)]).unwrap();
    for k in 1..=3 {
        assert!(discriminability(&e, k).unwrap().value < 1.0 - 1e-3);
    }
}
