//! Permutations of tensor factors, the symmetric subspace, partial trace and
//! partial transpose, and a basis of permutation-invariant operators.
//!
//! Tensor indices put the first factor in the most significant digit, so
//! `kron(a, b)` acts with `a` on factor 0.

use crate::qcore::linalg::{checked_pow, ComplexMatrix, Limits, C64};
use crate::{Error, Result};

/// Digits of `index` in base `dims`, most significant first.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for s in (0..dims.len()).rev() {
        out[s] = index % dims[s];
        index /= dims[s];
    }
    out
}

pub fn undigits(ds: &[usize], dims: &[usize]) -> usize {
    ds.iter().zip(dims).fold(0, |acc, (x, d)| acc * d + x)
}

/// The operator `V_π` on `k` copies of `C^d`, where `perm[s] = π(s)`: the
/// content of factor `s` moves to factor `π(s)`, so `V_π V_σ = V_{π∘σ}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationOperator {
    pub d: usize,
    pub perm: Vec<usize>,
}

impl PermutationOperator {
    pub fn new(d: usize, perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(Self { d, perm })
    }

    pub fn k(&self) -> usize {
        self.perm.len()
    }

    /// Image of a basis index.
    pub fn apply_index(&self, index: usize) -> usize {
        let k = self.k();
        let dims = vec![self.d; k];
        let src = digits(index, &dims);
        let mut dst = vec![0; k];
        for s in 0..k {
            dst[self.perm[s]] = src[s];
        }
        undigits(&dst, &dims)
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        let dim = checked_pow(self.d, self.k())?;
        Limits::default().check(dim, dim)?;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(self.apply_index(i), i)] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { d: self.d, perm: other.perm.iter().map(|&s| self.perm[s]).collect() }
    }
}

pub fn permutation_matrix(d: usize, perm: &[usize]) -> Result<ComplexMatrix> {
    PermutationOperator::new(d, perm.to_vec())?.matrix()
}

/// All permutations of `0..k` in lexicographic order.
pub fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

/// `binom(d + k - 1, k)`.
pub fn sym_dim(d: usize, k: usize) -> usize {
    crate::qcore::linalg::binomial((d + k - 1) as u64, k as u64) as usize
}

/// Occupation numbers of a basis index: how many factors hold each level.
fn occupation(index: usize, d: usize, k: usize) -> Vec<usize> {
    let mut occ = vec![0; d];
    for x in digits(index, &vec![d; k]) {
        occ[x] += 1;
    }
    occ
}

/// Projector onto the symmetric subspace, built from its type-class form:
/// `Π[x, y] = 1 / |class|` when `x` and `y` have the same occupation numbers.
pub fn sym_projector(d: usize, k: usize) -> Result<ComplexMatrix> {
    sym_projector_with(d, k, &Limits::default())
}

pub fn sym_projector_with(d: usize, k: usize, limits: &Limits) -> Result<ComplexMatrix> {
    let dim = checked_pow(d, k)?;
    limits.check(dim, dim)?;
    let mut classes: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
    for i in 0..dim {
        classes.entry(occupation(i, d, k)).or_default().push(i);
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for members in classes.values() {
        let v = C64::new(1.0 / members.len() as f64, 0.0);
        for &r in members {
            for &c in members {
                m[(r, c)] = v;
            }
        }
    }
    Ok(m)
}

/// Orthonormal basis of the symmetric subspace as columns (`d^k x sym_dim`).
pub fn sym_basis(d: usize, k: usize) -> Result<ComplexMatrix> {
    let dim = checked_pow(d, k)?;
    Limits::default().check(dim, sym_dim(d, k))?;
    let mut classes: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
    for i in 0..dim {
        classes.entry(occupation(i, d, k)).or_default().push(i);
    }
    let mut b = ComplexMatrix::zeros(dim, classes.len());
    for (col, members) in classes.values().enumerate() {
        let v = C64::new(1.0 / (members.len() as f64).sqrt(), 0.0);
        for &r in members {
            b[(r, col)] = v;
        }
    }
    Ok(b)
}

fn check_dims(m: &ComplexMatrix, dims: &[usize], which: &[usize]) -> Result<usize> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "matrix {}x{} vs subsystem dims {dims:?}",
            m.nrows(),
            m.ncols()
        )));
    }
    if let Some(&w) = which.iter().find(|&&w| w >= dims.len()) {
        return Err(Error::InvalidArgument(format!("subsystem {w} out of range")));
    }
    Ok(total)
}

/// Trace out the subsystems listed in `traced`.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], traced: &[usize]) -> Result<ComplexMatrix> {
    let total = check_dims(m, dims, traced)?;
    let kept: Vec<usize> = (0..dims.len()).filter(|s| !traced.contains(s)).collect();
    let kdims: Vec<usize> = kept.iter().map(|&s| dims[s]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&s| dims[s]).collect();
    let kdim: usize = kdims.iter().product();
    let split: Vec<(usize, usize)> = (0..total)
        .map(|i| {
            let ds = digits(i, dims);
            let kd: Vec<usize> = kept.iter().map(|&s| ds[s]).collect();
            let td: Vec<usize> = traced.iter().map(|&s| ds[s]).collect();
            (undigits(&kd, &kdims), undigits(&td, &tdims))
        })
        .collect();
    let mut by_traced: Vec<Vec<(usize, usize)>> = vec![Vec::new(); tdims.iter().product()];
    for (i, &(k, t)) in split.iter().enumerate() {
        by_traced[t].push((i, k));
    }
    let mut out = ComplexMatrix::zeros(kdim, kdim);
    for group in &by_traced {
        for &(r, kr) in group {
            for &(cc, kc) in group {
                out[(kr, kc)] += m[(r, cc)];
            }
        }
    }
    Ok(out)
}

/// Transpose the subsystems listed in `which`.
pub fn partial_transpose(m: &ComplexMatrix, dims: &[usize], which: &[usize]) -> Result<ComplexMatrix> {
    let total = check_dims(m, dims, which)?;
    let ds: Vec<Vec<usize>> = (0..total).map(|i| digits(i, dims)).collect();
    let mut out = ComplexMatrix::zeros(total, total);
    let mut rd = vec![0; dims.len()];
    let mut cd = vec![0; dims.len()];
    for r in 0..total {
        for cc in 0..total {
            rd.copy_from_slice(&ds[r]);
            cd.copy_from_slice(&ds[cc]);
            for &s in which {
                std::mem::swap(&mut rd[s], &mut cd[s]);
            }
            out[(undigits(&rd, dims), undigits(&cd, dims))] = m[(r, cc)];
        }
    }
    Ok(out)
}

/// Hermitian orthogonal basis of `d x d` matrices: identity, then symmetric,
/// antisymmetric and diagonal generalized Gell-Mann matrices. For `d = 2`
/// this is `I, X, Y, Z`.
pub fn gell_mann(d: usize) -> Vec<ComplexMatrix> {
    let mut out = vec![ComplexMatrix::identity(d, d)];
    for j in 0..d {
        for k in j + 1..d {
            let mut s = ComplexMatrix::zeros(d, d);
            s[(j, k)] = C64::new(1.0, 0.0);
            s[(k, j)] = C64::new(1.0, 0.0);
            out.push(s);
            let mut a = ComplexMatrix::zeros(d, d);
            a[(j, k)] = C64::new(0.0, -1.0);
            a[(k, j)] = C64::new(0.0, 1.0);
            out.push(a);
        }
    }
    for l in 1..d {
        let f = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = C64::new(f, 0.0);
        }
        m[(l, l)] = C64::new(-f * l as f64, 0.0);
        out.push(m);
    }
    out
}

/// All count vectors of length `n` summing to `k`, in reverse lexicographic order.
pub fn compositions(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slot: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[slot] = v;
            rec(left - v, slot + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(k, 0, &mut vec![0; n], &mut out);
    out
}

/// Distinct arrangements of a multiset given by counts.
pub fn arrangements(counts: &[usize]) -> Vec<Vec<usize>> {
    fn rec(counts: &mut [usize], cur: &mut Vec<usize>, len: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for a in 0..counts.len() {
            if counts[a] > 0 {
                counts[a] -= 1;
                cur.push(a);
                rec(counts, cur, len, out);
                cur.pop();
                counts[a] += 1;
            }
        }
    }
    let len = counts.iter().sum();
    let mut out = Vec::new();
    rec(&mut counts.to_vec(), &mut Vec::with_capacity(len), len, &mut out);
    out
}

/// Basis of Hermitian operators on `(C^d)^{⊗k}` invariant under conjugation by
/// every `V_π`. Element `t` is the sum of all distinct tensor products of
/// Gell-Mann matrices with label counts `types[t]`, scaled to unit Frobenius
/// norm. Elements are pairwise orthogonal.
#[derive(Debug, Clone)]
pub struct PermBasis {
    pub d: usize,
    pub k: usize,
    pub types: Vec<Vec<usize>>,
    pub elements: Vec<ComplexMatrix>,
}

impl PermBasis {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        Self::with_limits(d, k, &Limits::default())
    }

    pub fn with_limits(d: usize, k: usize, limits: &Limits) -> Result<Self> {
        let dim = checked_pow(d, k)?;
        limits.check(dim, dim)?;
        let types = compositions(k, d * d);
        let count = types.len();
        // Total storage is count * dim^2 entries.
        if count.saturating_mul(dim * dim) > 64 * limits.max_entries {
            return Err(Error::SizeCap { rows: count * dim, cols: dim, cap: 64 * limits.max_entries });
        }
        let single = gell_mann(d);
        let mut elements = Vec::with_capacity(count);
        for t in &types {
            let mut acc = ComplexMatrix::zeros(dim, dim);
            for arr in arrangements(t) {
                let mut m = ComplexMatrix::identity(1, 1);
                for &a in &arr {
                    m = m.kronecker(&single[a]);
                }
                acc += m;
            }
            let n = acc.norm();
            elements.push(acc / C64::new(n, 0.0));
        }
        Ok(Self { d, k, types, elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Whether element `t` has purely real entries in the computational basis.
    pub fn is_real(&self, t: usize) -> bool {
        self.elements[t].iter().all(|z| z.im == 0.0)
    }
}

/// `(1/k!) Σ_π V_π M V_π†`.
pub fn twirl(m: &ComplexMatrix, d: usize, k: usize) -> Result<ComplexMatrix> {
    let dim = checked_pow(d, k)?;
    if m.nrows() != dim {
        return Err(Error::DimensionMismatch(format!("{} vs {d}^{k}", m.nrows())));
    }
    let perms = all_permutations(k);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for p in &perms {
        let op = PermutationOperator { d, perm: p.clone() };
        let map: Vec<usize> = (0..dim).map(|i| op.apply_index(i)).collect();
        for cc in 0..dim {
            for r in 0..dim {
                out[(map[r], map[cc])] += m[(r, cc)];
            }
        }
    }
    Ok(out / C64::new(perms.len() as f64, 0.0))
}
