//! Closed-form bounds on the best achievable multi-copy success probability.

use crate::qcore::{binomial, c, eigvalsh, sym_dim, sym_projector, ComplexMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Upper,
    Lower,
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    pub kind: BoundKind,
    pub assumptions: Vec<String>,
    /// Short description of where the number comes from.
    pub derivation: &'static str,
}

fn check(d: usize, n: usize, k: usize) -> Result<()> {
    if d < 2 || n < 1 || k < 1 {
        return Err(Error::InvalidArgument(format!("need d >= 2, N >= 1, k >= 1 (got {d}, {n}, {k})")));
    }
    Ok(())
}

/// Smallest known number of qubit states forming a `k`-design (spherical
/// `k`-designs on the Bloch sphere). `None` when not tabulated.
pub fn minimal_design_size(d: usize, k: usize) -> Option<usize> {
    match (d, k) {
        (_, 1) => Some(d),
        (2, 2) => Some(4),
        (2, 3) => Some(6),
        (2, 4) | (2, 5) => Some(12),
        _ => None,
    }
}

/// `min(1, binom(d+k-1, k) / N)` for pure ensembles.
pub fn pure_upper(d: usize, n: usize, k: usize) -> Result<BoundValue> {
    check(d, n, k)?;
    let value = (sym_dim(d, k) as f64 / n as f64).min(1.0);
    let exact = minimal_design_size(d, k).is_some_and(|m| n >= m);
    let mut assumptions = vec!["pure states".to_string()];
    if exact {
        assumptions.push(format!("exact: {k}-design exists at N={n}"));
    }
    Ok(BoundValue {
        value,
        kind: BoundKind::Upper,
        assumptions,
        derivation: "rank of the symmetric subspace",
    })
}

/// `min(1, binom(d²+k-1, k) / N)` for arbitrary ensembles.
pub fn mixed_upper(d: usize, n: usize, k: usize) -> Result<BoundValue> {
    check(d, n, k)?;
    let value = (binomial((d * d + k - 1) as u64, k as u64) as f64 / n as f64).min(1.0);
    Ok(BoundValue {
        value,
        kind: BoundKind::Upper,
        assumptions: vec!["arbitrary states".into()],
        derivation: "dimension of permutation-invariant operators",
    })
}

/// `(N-1)/N · reference + (1/N)(1 - binom(d+k-1,k)/d^k)`, where `reference` is
/// a value achieved by some pure ensemble of `N-1` states.
pub fn mixed_lower(d: usize, n: usize, k: usize, reference: f64) -> Result<BoundValue> {
    check(d, n, k)?;
    if n < 2 {
        return Err(Error::InvalidArgument("need N >= 2".into()));
    }
    let dk = (d as f64).powi(k as i32);
    let value = (n - 1) as f64 / n as f64 * reference + (1.0 - sym_dim(d, k) as f64 / dk) / n as f64;
    Ok(BoundValue {
        value,
        kind: BoundKind::Lower,
        assumptions: vec![format!("pure reference value {reference} at N-1 = {}", n - 1)],
        derivation: "pure ensemble plus the maximally mixed state",
    })
}

/// `n!! = n (n-2) (n-4) ...`, with `0!! = (-1)!! = 1`.
pub fn double_factorial(n: i64) -> f64 {
    let mut r = 1.0;
    let mut m = n;
    while m > 1 {
        r *= m as f64;
        m -= 2;
    }
    r
}

/// Binomial coefficient that is zero for a negative top argument.
fn binom_signed(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        0.0
    } else {
        binomial(n as u64, k as u64) as f64
    }
}

/// Eigenvalues of the average of `(|ψ><ψ|)^{⊗k}` over real unit vectors
/// `ψ ∈ R^d`, indexed by `j = 0..=k/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RebitSpectrum {
    pub d: usize,
    pub k: usize,
    /// `(λ_j, m_j)` pairs.
    pub levels: Vec<(f64, usize)>,
}

impl RebitSpectrum {
    pub fn trace(&self) -> f64 {
        self.levels.iter().map(|(l, m)| l * *m as f64).sum()
    }

    /// `Σ_j m_j √λ_j`.
    pub fn sqrt_trace(&self) -> f64 {
        self.levels.iter().map(|(l, m)| *m as f64 * l.sqrt()).sum()
    }
}

pub fn rebit_spectrum(d: usize, k: usize) -> Result<RebitSpectrum> {
    if d < 2 || k < 1 {
        return Err(Error::InvalidArgument("need d >= 2, k >= 1".into()));
    }
    let (dd, kk) = (d as i64, k as i64);
    let kf: f64 = (1..=kk).map(|v| v as f64).product();
    let levels = (0..=kk / 2)
        .map(|j| {
            let lam = kf * double_factorial(dd - 2) / (double_factorial(2 * j) * double_factorial(dd + 2 * kk - 2 * j - 2));
            let mult = binom_signed(dd + kk - 2 * j - 1, dd - 1) - binom_signed(dd + kk - 2 * j - 3, dd - 1);
            (lam, mult as usize)
        })
        .collect();
    Ok(RebitSpectrum { d, k, levels })
}

/// `(1/N)(Σ_j m_j √λ_j)²`, capped at 1.
pub fn rebit_lower_sod(d: usize, n: usize, k: usize) -> Result<BoundValue> {
    check(d, n, k)?;
    let s = rebit_spectrum(d, k)?.sqrt_trace();
    Ok(BoundValue {
        value: (s * s / n as f64).min(1.0),
        kind: BoundKind::Lower,
        assumptions: vec!["real pure states".into(), "N at least the size of a real group k-design".into()],
        derivation: "square root of the real moment operator",
    })
}

/// Qubit case of [`rebit_lower_sod`]: `(1/N)(1/2^k)(Σ_j √binom(k, j))²`.
pub fn rebit_lower_so2(n: usize, k: usize) -> Result<BoundValue> {
    check(2, n, k)?;
    let s: f64 = (0..=k).map(|j| (binomial(k as u64, j as u64) as f64).sqrt()).sum();
    Ok(BoundValue {
        value: (s * s / 2f64.powi(k as i32) / n as f64).min(1.0),
        kind: BoundKind::Lower,
        assumptions: vec!["real qubit pure states".into(), format!("N >= {}", k + 1), "conjectured tight".into()],
        derivation: "square root of the circle moment operator",
    })
}

/// `((1-ε)/(1+ε)) · binom(d+k-1,k) / N` for an `ε`-approximate `k`-design.
pub fn epsilon_design_lower(d: usize, n: usize, k: usize, eps: f64) -> Result<BoundValue> {
    check(d, n, k)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("ε must be in [0, 1), got {eps}")));
    }
    Ok(BoundValue {
        value: (1.0 - eps) / (1.0 + eps) * sym_dim(d, k) as f64 / n as f64,
        kind: BoundKind::Lower,
        assumptions: vec![format!("{n} states forming a {eps}-approximate {k}-design")],
        derivation: "design measurement on an approximate design",
    })
}

/// Dual certificate for real qubit states at two copies:
/// `N X = α Π_sym + β |φ+><φ+|` with `α = (2+√2)/4`, `β = √2/4`.
#[derive(Debug, Clone)]
pub struct TrineCertificate {
    /// Number of states the certificate is normalized for.
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `X` itself, including the `1/N`.
    pub x: ComplexMatrix,
    /// `α Π_sym + β φ+ - |00><00|` and its eigenvalues in closed form.
    pub m: ComplexMatrix,
    pub m_eigenvalues: [f64; 4],
}

/// The certificate for three states.
pub fn trine_certificate() -> TrineCertificate {
    TrineCertificate::new(3).expect("N = 3 is valid")
}

impl TrineCertificate {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("need N >= 1".into()));
        }
        let alpha = (2.0 + 2f64.sqrt()) / 4.0;
        let beta = 2f64.sqrt() / 4.0;
        let pi = sym_projector(2, 2)?;
        let mut phi = ComplexMatrix::zeros(4, 4);
        for (r, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            phi[(r, col)] = c(0.5, 0.0);
        }
        let nx = pi * c(alpha, 0.0) + phi * c(beta, 0.0);
        let mut m = nx.clone();
        m[(0, 0)] -= c(1.0, 0.0);
        let r = (beta * beta + 1.0).sqrt();
        let m_eigenvalues = [0.0, alpha, alpha + (beta - 1.0 + r) / 2.0, alpha + (beta - 1.0 - r) / 2.0];
        Ok(Self { n, alpha, beta, x: nx / c(n as f64, 0.0), m, m_eigenvalues })
    }

    /// `Tr X`, an upper bound on the success probability of any `N` real qubit states.
    pub fn bound(&self) -> f64 {
        self.x.trace().re
    }

    /// `λ_min(N X - (|ψ><ψ|)^{⊗2})` for the real state at Bloch angle `theta`.
    pub fn margin_at(&self, theta: f64) -> f64 {
        let (a, b) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let v = [a * a, a * b, b * a, b * b];
        let mut m = &self.x * c(self.n as f64, 0.0);
        for r in 0..4 {
            for col in 0..4 {
                m[(r, col)] -= c(v[r] * v[col], 0.0);
            }
        }
        eigvalsh(&m)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_upper_examples() {
        assert_eq!(pure_upper(2, 4, 2).unwrap().value, 0.75);
        let b = pure_upper(2, 4, 2).unwrap();
        assert_eq!(b.kind, BoundKind::Upper);
        assert!(b.assumptions.iter().any(|a| a == "exact: 2-design exists at N=4"));
        assert_eq!(pure_upper(3, 2, 1).unwrap().value, 1.0);
        assert_eq!(pure_upper(2, 7, 4).unwrap().kind, BoundKind::Upper);
        assert!(pure_upper(0, 3, 2).is_err());
    }

    #[test]
    fn mixed_upper_caps_at_one() {
        assert_eq!(mixed_upper(2, 4, 2).unwrap().value, 1.0);
        assert_eq!(mixed_upper(2, 20, 2).unwrap().value, 0.5);
    }

    #[test]
    fn mixed_lower_examples() {
        let v = mixed_lower(2, 7, 3, 4.0 / 6.0).unwrap().value;
        assert!((v - 9.0 / 14.0).abs() < 1e-15);
        let trine = (1.5 + 2f64.sqrt()) / 3.0;
        assert!((mixed_lower(2, 4, 2, trine).unwrap().value - 0.7910534).abs() < 1e-6);
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1), 1.0);
        assert_eq!(double_factorial(0), 1.0);
        assert_eq!(double_factorial(5), 15.0);
        assert_eq!(double_factorial(6), 48.0);
    }

    #[test]
    fn rebit_spectrum_qubits() {
        let s = rebit_spectrum(2, 2).unwrap();
        assert_eq!(s.levels, vec![(0.25, 2), (0.5, 1)]);
        for k in 1..9 {
            let s = rebit_spectrum(2, k).unwrap();
            assert!((s.trace() - 1.0).abs() < 1e-14);
            let dims: usize = s.levels.iter().map(|p| p.1).sum();
            assert_eq!(dims, k + 1);
        }
    }

    #[test]
    fn rebit_spectrum_trace_one_in_higher_dimension() {
        for d in 3..6 {
            for k in 1..6 {
                let s = rebit_spectrum(d, k).unwrap();
                assert!((s.trace() - 1.0).abs() < 1e-12, "d={d} k={k}");
                let dims: usize = s.levels.iter().map(|p| p.1).sum();
                assert_eq!(dims, sym_dim(d, k));
            }
        }
    }

    #[test]
    fn so2_matches_general_formula() {
        for k in 1..10 {
            let a = rebit_lower_so2(100, k).unwrap().value;
            let b = rebit_lower_sod(2, 100, k).unwrap().value;
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn trine_certificate_trace() {
        let t = TrineCertificate::new(3).unwrap();
        assert!((3.0 * t.bound() - (1.5 + 2f64.sqrt())).abs() < 1e-14);
        let mut vals = eigvalsh(&t.m);
        let mut expect = t.m_eigenvalues.to_vec();
        vals.sort_by(f64::total_cmp);
        expect.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(t.m_eigenvalues[3].abs() < 1e-15);
    }
}
