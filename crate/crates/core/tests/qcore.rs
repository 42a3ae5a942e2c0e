//! Linear-algebra primitives: worked examples and invariants.

use kcopy::qcore::{
    all_permutations, binomial, c, ket_power, eigvalsh, kron, max_abs, partial_trace, partial_transpose, permutation_matrix,
    psd_sqrt, random_pure_state, sym_dim, sym_projector, tensor_power, ComplexMatrix, ComplexVector, PermutationOperator,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

fn basis(dim: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[i] = c(1.0, 0.0);
    v
}

#[test]
fn tensor_power_examples() {
    assert_eq!(tensor_power(&ComplexMatrix::identity(2, 2), 3).unwrap(), ComplexMatrix::identity(8, 8));
    let xx = tensor_power(&pauli_x(), 2).unwrap();
    // Hand expansion: (X⊗X)_{ab} = X_{a1 b1} X_{a0 b0} is one exactly when b = 3 - a.
    for a in 0..4 {
        for b in 0..4 {
            let expected = if a + b == 3 { 1.0 } else { 0.0 };
            assert_eq!(xx[(a, b)], c(expected, 0.0));
        }
    }
    assert!(tensor_power(&pauli_x(), 0).is_err());
}

#[test]
fn permutation_examples() {
    let swap = permutation_matrix(2, &[1, 0]).unwrap();
    let mut expected = ComplexMatrix::zeros(4, 4);
    for (r, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        expected[(r, col)] = c(1.0, 0.0);
    }
    assert_eq!(swap, expected);
    assert_eq!(permutation_matrix(2, &[0, 1, 2]).unwrap(), ComplexMatrix::identity(8, 8));
    // |01> is index 0·3 + 1 = 1 and |10> is index 3.
    let qutrit_swap = permutation_matrix(3, &[1, 0]).unwrap();
    assert_eq!(qutrit_swap * basis(9, 1), basis(9, 3));
    assert!(permutation_matrix(2, &[0, 0]).is_err());
}

#[test]
fn symmetric_dimension_matches_projector_trace() {
    assert_eq!(sym_dim(4, 2), 10);
    assert_eq!(sym_dim(2, 5), 6);
    for d in 1..=5 {
        for k in 1..=6 {
            assert_eq!(sym_dim(d, k) as u64, binomial((d + k - 1) as u64, k as u64));
            // Materialized projectors stay within the default entry cap.
            if d.pow(k as u32) <= 1 << 10 {
                let tr = sym_projector(d, k).unwrap().trace();
                assert!((tr.re - sym_dim(d, k) as f64).abs() < 1e-10 && tr.im.abs() < 1e-12);
            }
        }
    }
    assert_eq!(sym_projector(3, 1).unwrap(), ComplexMatrix::identity(3, 3));
}

#[test]
fn symmetric_projector_is_an_invariant_idempotent() {
    for (d, k) in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2), (2, 6)] {
        let p = sym_projector(d, k).unwrap();
        assert!(max_abs(&(&p * &p - &p)) < 1e-10);
        for perm in all_permutations(k).iter().take(24) {
            let v = permutation_matrix(d, perm).unwrap();
            assert!(max_abs(&(&p * v - &p)) < 1e-10);
        }
    }
}

#[test]
fn partial_trace_examples() {
    // Index contraction by hand: (Tr_A SWAP)_{b b'} = Σ_a <a b|SWAP|a b'> = Σ_a δ_{a b'} δ_{b a} = δ_{b b'}.
    let swap = permutation_matrix(2, &[1, 0]).unwrap();
    assert!(max_abs(&(partial_trace(&swap, &[2, 2], &[0]).unwrap() - ComplexMatrix::identity(2, 2))) < 1e-15);
    let rho = ComplexMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
    let sigma = ComplexMatrix::from_row_slice(2, 2, &[c(0.4, 0.0), c(0.0, 0.1), c(0.0, -0.1), c(0.6, 0.0)]);
    let prod = kron(&rho, &sigma);
    assert!(max_abs(&(partial_trace(&prod, &[2, 2], &[1]).unwrap() - &rho)) < 1e-15);
    let all = partial_trace(&prod, &[2, 2], &[0, 1]).unwrap();
    assert_eq!(all.shape(), (1, 1));
    assert!((all[(0, 0)] - prod.trace()).norm() < 1e-15);
}

#[test]
fn partial_transpose_examples() {
    let rho = ComplexMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
    let sigma = ComplexMatrix::from_row_slice(2, 2, &[c(0.4, 0.0), c(0.0, 0.1), c(0.0, -0.1), c(0.6, 0.0)]);
    let pt = partial_transpose(&kron(&rho, &sigma), &[2, 2], &[1]).unwrap();
    assert!(max_abs(&(pt - kron(&rho, &sigma.transpose()))) < 1e-15);
    // |φ+><φ+|^{T_B} is SWAP/2, whose eigenvalues are ±1/2.
    let mut phi = ComplexMatrix::zeros(4, 4);
    for (r, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        phi[(r, col)] = c(0.5, 0.0);
    }
    let pt = partial_transpose(&phi, &[2, 2], &[1]).unwrap();
    assert!((eigvalsh(&pt)[0] + 0.5).abs() < 1e-12);
    let full = partial_transpose(&kron(&rho, &sigma), &[2, 2], &[0, 1]).unwrap();
    assert!(max_abs(&(full - kron(&rho, &sigma).transpose())) < 1e-15);
}

#[test]
fn psd_sqrt_examples() {
    assert!(max_abs(&(psd_sqrt(&ComplexMatrix::identity(3, 3)).unwrap() - ComplexMatrix::identity(3, 3))) < 1e-12);
    let diag = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c(4.0, 0.0), c(9.0, 0.0)]));
    let root = psd_sqrt(&diag).unwrap();
    assert!((root[(0, 0)].re - 2.0).abs() < 1e-12 && (root[(1, 1)].re - 3.0).abs() < 1e-12);
    // Π/3 has eigenvalue 1/3 three times, so Tr √(Π/3) = 3/√3.
    let p = sym_projector(2, 2).unwrap() / c(3.0, 0.0);
    assert!((psd_sqrt(&p).unwrap().trace().re - 3.0 / 3f64.sqrt()).abs() < 1e-10);
}

fn perm_strategy(k: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..k).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutations_form_a_representation(
        (p, q) in (2usize..=4).prop_flat_map(|k| (perm_strategy(k), perm_strategy(k))),
        d in 2usize..=3,
    ) {
        let a = PermutationOperator::new(d, p.clone()).unwrap();
        let b = PermutationOperator::new(d, q.clone()).unwrap();
        let product = a.matrix().unwrap() * b.matrix().unwrap();
        prop_assert_eq!(product, a.compose(&b).matrix().unwrap());
        let m = a.matrix().unwrap();
        prop_assert!(max_abs(&(&m * m.adjoint() - ComplexMatrix::identity(m.nrows(), m.nrows()))) == 0.0);
    }

    #[test]
    fn product_states_lie_in_the_symmetric_subspace(seed in any::<u64>(), d in 2usize..=3, k in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_pure_state(d, &mut rng);
        let power = ket_power(&v, k);
        let p = sym_projector(d, k).unwrap();
        prop_assert!((&p * &power - &power).norm() < 1e-9);
    }

    #[test]
    fn partial_transpose_is_an_involution(entries in prop::collection::vec(-1.0f64..1.0, 128), which in prop::collection::vec(0usize..3, 1..3)) {
        let m = ComplexMatrix::from_fn(8, 8, |i, j| c(entries[i * 8 + j], entries[64 + i * 8 + j]));
        let mut which = which;
        which.sort_unstable();
        which.dedup();
        let once = partial_transpose(&m, &[2, 2, 2], &which).unwrap();
        let twice = partial_transpose(&once, &[2, 2, 2], &which).unwrap();
        prop_assert!(max_abs(&(twice - m)) < 1e-15);
    }

    #[test]
    fn partial_trace_is_linear_on_mixtures(a in prop::collection::vec(-1.0f64..1.0, 32), b in prop::collection::vec(-1.0f64..1.0, 32), t in 0.0f64..1.0) {
        let ma = ComplexMatrix::from_fn(4, 4, |i, j| c(a[i * 4 + j], a[16 + i * 4 + j]));
        let mb = ComplexMatrix::from_fn(4, 4, |i, j| c(b[i * 4 + j], b[16 + i * 4 + j]));
        let mix = &ma * c(t, 0.0) + &mb * c(1.0 - t, 0.0);
        let lhs = partial_trace(&mix, &[2, 2], &[0]).unwrap();
        let rhs = partial_trace(&ma, &[2, 2], &[0]).unwrap() * c(t, 0.0) + partial_trace(&mb, &[2, 2], &[0]).unwrap() * c(1.0 - t, 0.0);
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-14);
        prop_assert!((partial_trace(&mix, &[2, 2], &[1]).unwrap().trace() - mix.trace()).norm() < 1e-14);
    }
}
