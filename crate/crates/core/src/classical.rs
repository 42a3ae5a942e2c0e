//! Classical (diagonal) ensembles: outcome-type enumeration, the capacity
//! closed forms and optimal classical ensembles.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::qcore::{binomial, c, checked_pow, compositions, ComplexMatrix, Ensemble, Limits, Povm, State};
use crate::{Error, Result};

const ROW_TOL: f64 = 1e-12;

/// `N` probability vectors over `d` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    pub d: usize,
    pub rows: Vec<Vec<f64>>,
}

impl ClassicalEnsemble {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map(Vec::len).ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
        if d == 0 {
            return Err(Error::InvalidArgument("empty alphabet".into()));
        }
        for r in &rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch(format!("row of length {} in a {d}-symbol ensemble", r.len())));
            }
            if r.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidArgument("probabilities must be non-negative".into()));
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidArgument(format!("row sums to {s}")));
            }
        }
        Ok(Self { d, rows })
    }

    /// Bits `a_i |0><0| + (1 - a_i) |1><1|`.
    pub fn bits(a: &[f64]) -> Result<Self> {
        Self::new(a.iter().map(|&x| vec![x, 1.0 - x]).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The same states as diagonal density operators, uniform prior.
    pub fn to_ensemble(&self) -> Result<Ensemble> {
        let states = self.rows.iter().map(|r| State::classical(r.clone())).collect::<Result<Vec<_>>>()?;
        Ensemble::uniform(states)
    }
}

/// A count vector over the alphabet together with the number of strings having it.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeType {
    pub counts: Vec<usize>,
    pub multiplicity: f64,
}

/// `k! / ∏ t_j!` as a float.
fn multinomial(counts: &[usize]) -> f64 {
    let mut left = counts.iter().sum::<usize>() as u64;
    let mut m = 1.0;
    for &t in counts {
        m *= binomial(left, t as u64) as f64;
        left -= t as u64;
    }
    m
}

pub fn outcome_types(d: usize, k: usize) -> Vec<OutcomeType> {
    compositions(k, d)
        .into_iter()
        .map(|counts| {
            let multiplicity = multinomial(&counts);
            OutcomeType { counts, multiplicity }
        })
        .collect()
}

fn type_likelihood(row: &[f64], counts: &[usize]) -> f64 {
    row.iter().zip(counts).map(|(p, &t)| if t == 0 { 1.0 } else { p.powi(t as i32) }).product()
}

/// Best success probability with `k` copies and a uniform prior:
/// `(1/N) Σ_strings max_i p(string | i)`, summed type by type.
pub fn classical_discr(e: &ClassicalEnsemble, k: usize) -> f64 {
    discr_over_types(&e.rows, &outcome_types(e.d, k))
}

/// [`classical_discr`] with the outcome types precomputed.
pub(crate) fn discr_over_types(rows: &[Vec<f64>], types: &[OutcomeType]) -> f64 {
    types
        .iter()
        .map(|t| t.multiplicity * rows.iter().map(|r| type_likelihood(r, &t.counts)).fold(0.0, f64::max))
        .sum::<f64>()
        / rows.len() as f64
}

/// Maximum-likelihood decision rule on `d^k` strings as a diagonal POVM;
/// ties go to the lowest index. Optimal for a uniform prior.
pub fn ml_povm(e: &ClassicalEnsemble, k: usize) -> Result<Povm> {
    let dim = checked_pow(e.d, k)?;
    Limits::default().check(dim, dim)?;
    let mut elements = vec![ComplexMatrix::zeros(dim, dim); e.len()];
    let mut counts = vec![0usize; e.d];
    for s in 0..dim {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut rest = s;
        for _ in 0..k {
            counts[rest % e.d] += 1;
            rest /= e.d;
        }
        let best = e
            .rows
            .iter()
            .map(|r| type_likelihood(r, &counts))
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
            .0;
        elements[best][(s, s)] = c(1.0, 0.0);
    }
    Ok(Povm::new(elements))
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

/// `cap_d(k) = (k!/k^k) Σ_{t_1+..+t_d=k} ∏ t_j^{t_j}/t_j!` in exact arithmetic.
pub fn cap_exact(d: usize, k: usize) -> BigRational {
    let k64 = k as u64;
    let kfact: BigInt = (1..=k64).map(big).product();
    let mut sum = BigRational::zero();
    for counts in compositions(k, d) {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for &t in &counts {
            num *= big(t as u64).pow(t as u32);
            den *= (1..=t as u64).map(big).product::<BigInt>();
        }
        sum += BigRational::new(num, den);
    }
    sum * BigRational::new(kfact, big(k64).pow(k as u32))
}

/// `cap_d(k)` through `cap_d = cap_{d-1} + k/(d-2) cap_{d-2}` from `d = 1, 2`.
pub fn cap_recursive(d: usize, k: usize) -> BigRational {
    let mut prev = BigRational::one();
    if d <= 1 {
        return prev;
    }
    let mut cur = cap_exact(2, k);
    for dd in 3..=d {
        let next = &cur + BigRational::new(big(k as u64), big(dd as u64 - 2)) * &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

pub fn cap(d: usize, k: usize) -> f64 {
    if d == 2 {
        return schenker_bit_value(k);
    }
    cap_exact(d, k).to_f64().unwrap_or(f64::NAN)
}

/// `cap_2(k) = (k!/k^k) Σ_l k^l/l! = Σ_m ∏_{i<m} (1 - i/k)`.
pub fn schenker_bit_value(k: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 0..k {
        term *= 1.0 - i as f64 / k as f64;
        sum += term;
    }
    sum
}

/// `(1/k^k) Σ_l binom(k,l) l^l (k-l)^{k-l}` with `0^0 = 1`.
pub fn schenker_binomial_sum(k: usize) -> f64 {
    let kf = k as f64;
    (0..=k)
        .map(|l| {
            let (a, b) = (l as f64 / kf, (k - l) as f64 / kf);
            binomial(k as u64, l as u64) as f64 * a.powi(l as i32) * b.powi((k - l) as i32)
        })
        .sum()
}

/// Asymptotic sandwich `(lower, upper)` around `cap_2(k)`.
pub fn smith_sandwich(k: usize) -> (f64, f64) {
    let kf = k as f64;
    let pi = std::f64::consts::PI;
    let upper = (pi * kf / 2.0).sqrt() + 2.0 / 3.0 + (pi / (2.0 * kf)).sqrt() / 12.0;
    (upper - 4.0 / (135.0 * kf), upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimality {
    /// Attains the capacity bound.
    Capacity,
    /// Exact optimum below the capacity bound.
    Exact,
    /// Best found by local optimization.
    Heuristic,
}

#[derive(Debug, Clone)]
pub struct OptimalClassical {
    pub ensemble: ClassicalEnsemble,
    pub value: f64,
    pub optimality: Optimality,
}

/// Maximizer of `P(l1 <= X <= l2)` over `p`, where `X ~ Binomial(k, p)`.
fn block_optimum(k: usize, l1: usize, l2: usize) -> (f64, f64) {
    let p = if l1 == 0 {
        0.0
    } else if l2 == k {
        1.0
    } else {
        let r = binomial(k as u64 - 1, l1 as u64 - 1) as f64 / binomial(k as u64 - 1, l2 as u64) as f64;
        let s = r.powf(1.0 / (l2 - l1 + 1) as f64);
        s / (1.0 + s)
    };
    let mass = (l1..=l2)
        .map(|l| binomial(k as u64, l as u64) as f64 * p.powi(l as i32) * (1.0 - p).powi((k - l) as i32))
        .sum();
    (p, mass)
}

/// Exact optimum for bits: each state collects a contiguous block of
/// Hamming weights, found by dynamic programming over block boundaries.
fn optimal_bits(n: usize, k: usize) -> (Vec<f64>, f64) {
    let types = k + 1;
    let blocks = n.min(types);
    // best[j][m]: best total mass covering weights 0..m with j blocks.
    let mut best = vec![vec![f64::NEG_INFINITY; types + 1]; blocks + 1];
    let mut cut = vec![vec![0usize; types + 1]; blocks + 1];
    best[0][0] = 0.0;
    for j in 1..=blocks {
        for m in j..=types {
            for s in (j - 1)..m {
                if best[j - 1][s].is_finite() {
                    let v = best[j - 1][s] + block_optimum(k, s, m - 1).1;
                    if v > best[j][m] {
                        best[j][m] = v;
                        cut[j][m] = s;
                    }
                }
            }
        }
    }
    let mut ones = Vec::with_capacity(n);
    let mut m = types;
    for j in (1..=blocks).rev() {
        let s = cut[j][m];
        ones.push(block_optimum(k, s, m - 1).0);
        m = s;
    }
    ones.reverse();
    // Probability of symbol 0 is one minus the probability of symbol 1.
    let mut a: Vec<f64> = ones.iter().map(|p| 1.0 - p).collect();
    while a.len() < n {
        a.push(a[a.len() % blocks]);
    }
    (a, best[blocks][types])
}

/// Alternating assignment of types to states followed by a majorize-minimize
/// update of each state's distribution.
fn local_classical(d: usize, n: usize, k: usize) -> ClassicalEnsemble {
    let types = outcome_types(d, k);
    let nt = types.len();
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| types[(i * nt) / n].counts.iter().map(|&t| t as f64 / k as f64).collect())
        .collect();
    for _ in 0..500 {
        let mut acc = vec![vec![0.0; d]; n];
        let mut hits = vec![0.0; n];
        for t in &types {
            let (best, w) = rows
                .iter()
                .enumerate()
                .map(|(i, r)| (i, type_likelihood(r, &t.counts)))
                .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
            let w = w * t.multiplicity;
            for (j, &c) in t.counts.iter().enumerate() {
                acc[best][j] += w * c as f64;
            }
            hits[best] += w;
        }
        let mut moved = 0.0f64;
        for i in 0..n {
            if hits[i] > 0.0 {
                let z: f64 = acc[i].iter().sum();
                for j in 0..d {
                    let v = acc[i][j] / z;
                    moved = moved.max((v - rows[i][j]).abs());
                    rows[i][j] = v;
                }
            }
        }
        if moved < 1e-13 {
            break;
        }
    }
    ClassicalEnsemble { d, rows }
}

/// Most discriminable `N`-state classical ensemble over `d` symbols at `k` copies.
pub fn optimal_classical_ensemble(d: usize, n: usize, k: usize) -> Result<OptimalClassical> {
    if d < 1 || n < 1 || k < 1 {
        return Err(Error::InvalidArgument("need d, N, k >= 1".into()));
    }
    let ntypes = binomial((d + k - 1) as u64, k as u64) as usize;
    if d == 1 {
        let ensemble = ClassicalEnsemble::new(vec![vec![1.0]; n])?;
        return Ok(OptimalClassical { ensemble, value: 1.0 / n as f64, optimality: Optimality::Capacity });
    }
    if d == 2 {
        let (a, _) = optimal_bits(n, k);
        let ensemble = ClassicalEnsemble::bits(&a)?;
        let value = classical_discr(&ensemble, k);
        let optimality = if n >= ntypes { Optimality::Capacity } else { Optimality::Exact };
        return Ok(OptimalClassical { ensemble, value, optimality });
    }
    if n >= ntypes {
        let types = outcome_types(d, k);
        let rows = (0..n).map(|i| types[i % ntypes].counts.iter().map(|&t| t as f64 / k as f64).collect()).collect();
        let ensemble = ClassicalEnsemble::new(rows)?;
        let value = classical_discr(&ensemble, k);
        return Ok(OptimalClassical { ensemble, value, optimality: Optimality::Capacity });
    }
    let ensemble = local_classical(d, n, k);
    let value = classical_discr(&ensemble, k);
    Ok(OptimalClassical { ensemble, value, optimality: Optimality::Heuristic })
}
