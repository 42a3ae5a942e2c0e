//! Brute-force reference implementations. They share nothing with the library
//! beyond matrix types and Kronecker products.

use kcopy::qcore::{c, kron, ComplexMatrix, ComplexVector, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Oracle value next to the fast path value.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub quantity: &'static str,
    pub oracle: f64,
    pub fast: f64,
    /// Samples drawn or terms enumerated.
    pub size: usize,
}

impl OracleReport {
    pub fn diff(&self) -> f64 {
        (self.oracle - self.fast).abs()
    }

    pub fn assert_within(&self, tol: f64) {
        assert!(self.diff() <= tol, "{}: oracle {} vs fast {} (diff {:e}, tol {tol:e}, size {})", self.quantity, self.oracle, self.fast, self.diff(), self.size);
    }
}

/// `(1/N) Σ_{j_1..j_k} max_i ∏_l p(j_l|i)` by enumerating all `d^k` strings.
pub fn naive_classical_discr(rows: &[Vec<f64>], k: usize) -> f64 {
    let n = rows.len();
    let d = rows[0].len();
    let total = d.pow(k as u32);
    let mut sum = 0.0;
    for mut idx in 0..total {
        let mut string = Vec::with_capacity(k);
        for _ in 0..k {
            string.push(idx % d);
            idx /= d;
        }
        let best = rows.iter().map(|row| string.iter().map(|&j| row[j]).product::<f64>()).fold(0.0, f64::max);
        sum += best;
    }
    sum / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    /// Haar-random complex unit vectors.
    Unitary,
    /// Uniform real unit vectors.
    Orthogonal,
}

/// Monte-Carlo estimate of `∫ (|ψ><ψ|)^{⊗k} dψ`.
pub fn mc_moment(d: usize, k: usize, samples: usize, seed: u64, group: Group) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = d.pow(k as u32);
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for _ in 0..samples {
        let v = ComplexVector::from_fn(d, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = if group == Group::Unitary { StandardNormal.sample(&mut rng) } else { 0.0 };
            c(re, im)
        });
        let v = &v / c(v.norm(), 0.0);
        let p = &v * v.adjoint();
        let mut m = p.clone();
        for _ in 1..k {
            m = kron(&m, &p);
        }
        acc += m;
    }
    acc / c(samples as f64, 0.0)
}

fn power(v: &ComplexVector, k: usize) -> ComplexVector {
    let mut out = ComplexVector::from_element(1, c(1.0, 0.0));
    for _ in 0..k {
        let next = ComplexVector::from_fn(out.len() * v.len(), |i, _| out[i / v.len()] * v[i % v.len()]);
        out = next;
    }
    out
}

/// Best two-outcome projective measurement on a `grid x grid` mesh of rank-one
/// projectors inside the span of the two `k`-copy states. A lower bound on
/// the optimum that converges to it as the mesh refines.
pub fn tiny_exhaustive_discr(kets: [&ComplexVector; 2], weights: [f64; 2], k: usize, grid: usize) -> f64 {
    let a = power(kets[0], k);
    let b = power(kets[1], k);
    let overlap = a.dotc(&b);
    let rest = &b - &a * overlap;
    let norm = rest.norm();
    if norm < 1e-12 {
        return weights[0].max(weights[1]);
    }
    let e2 = rest / c(norm, 0.0);
    let mut best: f64 = 0.0;
    for ti in 0..=grid {
        let theta = std::f64::consts::PI * ti as f64 / grid as f64;
        for pi in 0..grid {
            let phi = 2.0 * std::f64::consts::PI * pi as f64 / grid as f64;
            let v = &a * c((theta / 2.0).cos(), 0.0) + &e2 * C64::from_polar((theta / 2.0).sin(), phi);
            let pa = v.dotc(&a).norm_sqr();
            let pb = v.dotc(&b).norm_sqr();
            best = best.max(weights[0] * pa + weights[1] * (1.0 - pb));
            best = best.max(weights[1] * pb + weights[0] * (1.0 - pa));
        }
    }
    best
}
