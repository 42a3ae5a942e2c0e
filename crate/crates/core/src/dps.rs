//! Upper bounds from symmetric extensions with PPT cuts, for qubits.
//!
//! Each state-measurement pair is replaced by `Φ_i` on `S ⊗ M`, where `S`
//! holds `k + ℓ` copies of the state and `M` the `k` measured copies, together
//! with a state-side variable `Ψ_i` on `S`:
//!
//! ```text
//! max (1/N) Σ Tr[(I ⊗ F_{S_k M}) Φ_i]
//! s.t. Φ_i ⪰ 0, Ψ_i ⊗ I_M - Φ_i ⪰ 0, Ψ_i ⪰ 0, partial transposes of both ⪰ 0,
//!      Σ Tr_S Φ_i = I_M, Tr Ψ_i = 1.
//! ```
//!
//! Variables are expanded in the permutation-invariant Pauli-type basis. The
//! default build also uses the label symmetry (all `Φ_i` equal) and complex
//! conjugation (all variables real), which leave the optimum unchanged.

use nalgebra::DMatrix;

use kcopy_sdp::{embed, entries_from_dense, solve, Constraint, SdpOptions, SdpProblem, SdpSolution, SdpStatus, Sense};

use crate::bounds::{BoundKind, BoundValue};
use crate::qcore::{
    arrangements, c, checked_pow, compositions, eigvalsh, kron, partial_trace, partial_transpose, permutation_matrix,
    trace_product, ComplexMatrix, Ensemble, Limits, Povm,
};
use crate::{Error, Result};

/// Caveat attached to every bound from this module.
pub const CORRELATION_CAVEAT: &str = "allows classically correlated state preparations and measurements";

/// Counts of `(I, X, Y, Z)` factors in a Pauli string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliType(pub [usize; 4]);

impl PauliType {
    pub fn copies(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn y(&self) -> usize {
        self.0[2]
    }

    pub fn is_identity(&self) -> bool {
        self.0[1] == 0 && self.0[2] == 0 && self.0[3] == 0
    }
}

pub fn pauli_types(k: usize) -> Vec<PauliType> {
    compositions(k, 4).into_iter().map(|v| PauliType([v[0], v[1], v[2], v[3]])).collect()
}

fn pauli(a: usize) -> ComplexMatrix {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match a {
        0 => ComplexMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => ComplexMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => ComplexMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => ComplexMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Sum of the distinct Pauli strings of type `t`.
fn type_sum(t: PauliType) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = (0..4).map(pauli).collect();
    let dim = 1usize << t.copies();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for arr in arrangements(&t.0) {
        let mut m = ComplexMatrix::identity(1, 1);
        for a in arr {
            m = kron(&m, &factors[a]);
        }
        out += m;
    }
    out
}

/// The operators `b_k[t] = Σ_{π ∈ S_k} V_π P_t V_π†` for all Pauli types of `k` copies.
#[derive(Debug, Clone)]
pub struct PermInvBasis {
    pub k: usize,
    pub types: Vec<PauliType>,
}

impl PermInvBasis {
    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn operator(&self, i: usize) -> ComplexMatrix {
        let t = self.types[i];
        let mult: f64 = t.0.iter().map(|&v| crate::qcore::factorial(v as u64)).product();
        type_sum(t) * c(mult, 0.0)
    }
}

pub fn build_basis(k: usize) -> Result<PermInvBasis> {
    let dim = checked_pow(2, k)?;
    Limits::default().check(dim, dim)?;
    Ok(PermInvBasis { k, types: pauli_types(k) })
}

#[derive(Debug, Clone)]
pub struct RelaxationConfig {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    /// Add `Tr(F_12 Ψ) = 1`.
    pub pure: bool,
    /// Restrict `Ψ` to real, transpose-invariant operators.
    pub rebit: bool,
    /// Use the label and conjugation symmetries.
    pub reduced: bool,
    pub sdp: SdpOptions,
    pub limits: Limits,
}

impl RelaxationConfig {
    pub fn new(n: usize, k: usize, ell: usize) -> Self {
        Self { n, k, ell, pure: false, rebit: false, reduced: true, sdp: SdpOptions::default(), limits: Limits::default() }
    }

    pub fn pure(mut self, on: bool) -> Self {
        self.pure = on;
        self
    }

    pub fn rebit(mut self, on: bool) -> Self {
        self.rebit = on;
        self
    }

    pub fn reduced(mut self, on: bool) -> Self {
        self.reduced = on;
        self
    }

    fn check(&self) -> Result<()> {
        if self.n < 1 || self.k < 1 {
            return Err(Error::InvalidArgument("need N >= 1 and k >= 1".into()));
        }
        if self.pure && self.k + self.ell < 2 {
            return Err(Error::InvalidArgument("the purity constraint needs k + ℓ >= 2".into()));
        }
        let dim = checked_pow(2, 2 * self.k + self.ell)?;
        self.limits.check(dim, dim)
    }

    fn class_name(&self) -> &'static str {
        match (self.pure, self.rebit) {
            (true, true) => "real pure states",
            (false, true) => "real states",
            (true, false) => "pure states",
            (false, false) => "arbitrary states",
        }
    }
}

/// A built relaxation: the real SDP in minimization form whose value bounds
/// the success probability from above.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub problem: SdpProblem,
    pub variables: usize,
    pub eliminated: usize,
}

/// Swap of qubits `a` and `b` among `n`.
fn swap(n: usize, a: usize, b: usize) -> Result<ComplexMatrix> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(a, b);
    permutation_matrix(2, &perm)
}

/// `Π_j SWAP(S_j, M_j)` for `j < k`.
fn pairing_operator(k: usize, ell: usize) -> Result<ComplexMatrix> {
    let ns = k + ell;
    let n = ns + k;
    let mut w = ComplexMatrix::identity(1 << n, 1 << n);
    for j in 0..k {
        w = swap(n, j, ns + j)? * w;
    }
    Ok(w)
}

struct Assembly {
    blocks: Vec<usize>,
    complex: bool,
    /// Per variable, its contribution to each block (native complex form).
    vars: Vec<Vec<(usize, DMatrix<f64>)>>,
    eq_rows: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    objective: Vec<f64>,
}

impl Assembly {
    fn real_block(&self, m: &ComplexMatrix) -> DMatrix<f64> {
        if self.complex {
            embed(m)
        } else {
            m.map(|z| z.re)
        }
    }
}

/// Blocks for one label: Φ, Φ⊥, Ψ, then (PT_n Φ, PT_n Φ⊥) for n = 1..k+ℓ.
fn label_blocks(ns: usize) -> usize {
    3 + 2 * ns
}

fn assemble(cfg: &RelaxationConfig) -> Result<Assembly> {
    cfg.check()?;
    let (k, ns) = (cfg.k, cfg.k + cfg.ell);
    let nq = ns + k;
    let dim = 1usize << nq;
    let dim_s = 1usize << ns;
    let dim_m = 1usize << k;
    let labels = if cfg.reduced { 1 } else { cfg.n };
    let complex = !cfg.reduced;
    let width = if complex { 2 } else { 1 };
    let per = label_blocks(ns);
    let mut blocks = Vec::with_capacity(labels * per);
    for _ in 0..labels {
        blocks.push(dim * width);
        blocks.push(dim * width);
        blocks.push(dim_s * width);
        for _ in 0..ns {
            blocks.push(dim * width);
            blocks.push(dim * width);
        }
    }
    let mut asm = Assembly {
        blocks,
        complex,
        vars: Vec::new(),
        eq_rows: Vec::new(),
        eq_rhs: Vec::new(),
        objective: Vec::new(),
    };

    let s_types = pauli_types(ns);
    let m_types = pauli_types(k);
    let s_ops: Vec<ComplexMatrix> = s_types.iter().map(|&t| type_sum(t)).collect();
    let m_ops: Vec<ComplexMatrix> = m_types.iter().map(|&t| type_sum(t)).collect();
    let dims = vec![2usize; nq];
    let dims_s = vec![2usize; ns];
    let pairing = pairing_operator(k, cfg.ell)?;
    let flip12 = if cfg.pure {
        Some(kron(&swap(2, 0, 1)?, &ComplexMatrix::identity(dim_s / 4, dim_s / 4)))
    } else {
        None
    };
    let id_m = ComplexMatrix::identity(dim_m, dim_m);
    // Equality functionals on M: Tr_S Φ tested against each M type.
    let m_tests: Vec<usize> = (0..m_types.len()).filter(|&j| complex || m_types[j].y() % 2 == 0).collect();
    let psi_types: Vec<usize> = (0..s_types.len())
        .filter(|&j| {
            let t = s_types[j];
            if cfg.rebit {
                t.y() == 0
            } else {
                complex || t.y() % 2 == 0
            }
        })
        .collect();

    // Equality rows: per label the Ψ trace (and purity), plus the shared Tr_S rows.
    let n_rows_label = 1 + usize::from(cfg.pure);
    let n_rows = labels * n_rows_label + m_tests.len();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut rhs = vec![0.0; n_rows];
    let shared = labels * n_rows_label;
    for (r, &tj) in m_tests.iter().enumerate() {
        let q = &m_ops[tj];
        let target = if cfg.reduced { 1.0 / cfg.n as f64 } else { 1.0 };
        rhs[shared + r] = target * q.trace().re;
    }
    for l in 0..labels {
        rhs[l * n_rows_label] = 1.0;
        if cfg.pure {
            rhs[l * n_rows_label + 1] = 1.0;
        }
    }

    for l in 0..labels {
        let base = l * per;
        // Φ variables.
        for (ti, &ts) in s_types.iter().enumerate() {
            for (tj, &tm) in m_types.iter().enumerate() {
                if !complex && (ts.y() + tm.y()) % 2 == 1 {
                    continue;
                }
                // Real states carry no Y factor.
                if cfg.rebit && ts.y() > 0 {
                    continue;
                }
                let mut b = kron(&s_ops[ti], &m_ops[tj]);
                let norm = b.norm();
                b /= c(norm, 0.0);
                let mut col = vec![0.0; n_rows];
                for (r, &mj) in m_tests.iter().enumerate() {
                    col[shared + r] = trace_product(&b, &kron(&ComplexMatrix::identity(dim_s, dim_s), &m_ops[mj]));
                }
                let mut contrib = Vec::with_capacity(2 + 2 * ns);
                let rb = asm.real_block(&b);
                contrib.push((base, rb.clone()));
                contrib.push((base + 1, -rb));
                for n in 1..=ns {
                    let which: Vec<usize> = (0..n).collect();
                    let pt = asm.real_block(&partial_transpose(&b, &dims, &which)?);
                    contrib.push((base + 3 + 2 * (n - 1), pt.clone()));
                    contrib.push((base + 4 + 2 * (n - 1), -pt));
                }
                asm.objective.push(trace_product(&pairing, &b) / labels as f64);
                asm.vars.push(contrib);
                cols.push(col);
            }
        }
        // Ψ variables.
        for &ti in &psi_types {
            let mut p = s_ops[ti].clone();
            let norm = p.norm();
            p /= c(norm, 0.0);
            let mut col = vec![0.0; n_rows];
            col[l * n_rows_label] = p.trace().re;
            if let Some(f) = &flip12 {
                col[l * n_rows_label + 1] = trace_product(f, &p);
            }
            let pi = kron(&p, &id_m);
            let mut contrib = Vec::with_capacity(2 + ns);
            contrib.push((base + 1, asm.real_block(&pi)));
            contrib.push((base + 2, asm.real_block(&p)));
            for n in 1..=ns {
                let which: Vec<usize> = (0..n).collect();
                let pt = kron(&partial_transpose(&p, &dims_s, &which)?, &id_m);
                contrib.push((base + 4 + 2 * (n - 1), asm.real_block(&pt)));
            }
            asm.objective.push(0.0);
            asm.vars.push(contrib);
            cols.push(col);
        }
    }
    asm.eq_rows = (0..n_rows).map(|r| cols.iter().map(|col| col[r]).collect()).collect();
    asm.eq_rhs = rhs;
    Ok(asm)
}

/// Reduced row echelon form with partial pivoting; returns pivot columns.
fn rref(rows: &mut [Vec<f64>], rhs: &mut [f64]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let (best, val) = (r..rows.len()).map(|i| (i, rows[i][col].abs())).fold((r, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        if val < 1e-12 {
            continue;
        }
        rows.swap(r, best);
        rhs.swap(r, best);
        let p = rows[r][col];
        for v in rows[r].iter_mut() {
            *v /= p;
        }
        rhs[r] /= p;
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0.0 {
                let f = rows[i][col];
                let (src, dst) = if i < r {
                    let (a, b) = rows.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = rows.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= f * s;
                }
                rhs[i] -= f * rhs[r];
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

fn add_scaled(target: &mut Vec<(usize, DMatrix<f64>)>, source: &[(usize, DMatrix<f64>)], f: f64) {
    for (b, m) in source {
        match target.iter_mut().find(|(tb, _)| tb == b) {
            Some((_, t)) => t.zip_apply(m, |x, y| *x += f * y),
            None => target.push((*b, m * f)),
        }
    }
}

pub fn build_relaxation(cfg: &RelaxationConfig) -> Result<Relaxation> {
    let asm = assemble(cfg)?;
    let nvars = asm.vars.len();
    let mut rows = asm.eq_rows.clone();
    let mut rhs = asm.eq_rhs.clone();
    let pivots = rref(&mut rows, &mut rhs);
    for (i, row) in rows.iter().enumerate().skip(pivots.len()) {
        if rhs[i].abs() > 1e-9 || row.iter().any(|v| v.abs() > 1e-9) {
            return Err(Error::InvalidArgument("inconsistent equality constraints".into()));
        }
    }
    let is_pivot: Vec<bool> = (0..nvars).map(|j| pivots.contains(&j)).collect();

    // v_p = rhs_p - Σ_f R[p][f] v_f for each pivot row p.
    let mut constant: Vec<(usize, DMatrix<f64>)> = Vec::new();
    let mut offset = 0.0;
    for (r, &p) in pivots.iter().enumerate() {
        add_scaled(&mut constant, &asm.vars[p], rhs[r]);
        offset += rhs[r] * asm.objective[p];
    }
    let mut problem = SdpProblem::new(asm.blocks.clone(), Sense::Minimize);
    for (b, m) in &constant {
        problem.objective.extend(entries_from_dense(*b, m, 1.0));
    }
    for f in (0..nvars).filter(|&j| !is_pivot[j]) {
        let mut coeff = asm.vars[f].clone();
        let mut obj = asm.objective[f];
        for (r, &p) in pivots.iter().enumerate() {
            let rf = rows[r][f];
            if rf != 0.0 {
                add_scaled(&mut coeff, &asm.vars[p], -rf);
                obj -= rf * asm.objective[p];
            }
        }
        let mut ents = Vec::new();
        for (b, m) in &coeff {
            ents.extend(entries_from_dense(*b, m, -1.0));
        }
        problem.constraints.push(Constraint { entries: ents, rhs: obj });
    }
    problem.offset = offset;
    Ok(Relaxation { problem, variables: nvars, eliminated: pivots.len() })
}

#[derive(Debug, Clone)]
pub struct DpsBound {
    pub bound: BoundValue,
    pub status: SdpStatus,
    /// Value of the maximization side, close to `bound.value` at optimality.
    pub inner_value: f64,
    pub iterations: usize,
    pub relaxation_variables: usize,
}

pub fn solve_built(cfg: &RelaxationConfig, rel: &Relaxation) -> Result<(DpsBound, SdpSolution)> {
    let sol = solve(&rel.problem, &cfg.sdp)?;
    if !sol.status.is_usable() {
        return Err(Error::Solver(sol.status));
    }
    let mut assumptions = vec![
        cfg.class_name().to_string(),
        format!("{} symmetric extension{}", cfg.ell, if cfg.ell == 1 { "" } else { "s" }),
        CORRELATION_CAVEAT.to_string(),
    ];
    if sol.status != SdpStatus::Optimal {
        assumptions.push(format!("solver status {}", sol.status));
    }
    let bound = BoundValue {
        value: sol.primal_value.min(1.0),
        kind: BoundKind::Upper,
        assumptions,
        derivation: "symmetric-extension relaxation with PPT cuts",
    };
    Ok((
        DpsBound {
            bound,
            status: sol.status,
            inner_value: sol.dual_value,
            iterations: sol.iterations,
            relaxation_variables: rel.variables - rel.eliminated,
        },
        sol,
    ))
}

pub fn solve_relaxation(cfg: &RelaxationConfig) -> Result<DpsBound> {
    let rel = build_relaxation(cfg)?;
    Ok(solve_built(cfg, &rel)?.0)
}

/// Largest violation of the `ℓ = 0` constraints by the honest point
/// `Φ_i = ρ_i^{⊗k} ⊗ M_i`, `Ψ_i = ρ_i^{⊗k}`, and its objective value.
#[derive(Debug, Clone, Copy)]
pub struct HonestCheck {
    pub max_violation: f64,
    pub objective: f64,
}

pub fn check_honest(e: &Ensemble, povm: &Povm, k: usize) -> Result<HonestCheck> {
    if e.d != 2 {
        return Err(Error::InvalidArgument("qubits only".into()));
    }
    let n = e.len();
    let guesses = &povm.elements[..povm.elements.len() - usize::from(povm.residual)];
    if guesses.len() != n {
        return Err(Error::DimensionMismatch("one measurement outcome per state".into()));
    }
    let dims = vec![2usize; 2 * k];
    let dim_m = 1usize << k;
    let pairing = pairing_operator(k, 0)?;
    let mut worst: f64 = 0.0;
    let mut objective = 0.0;
    let mut marginal = ComplexMatrix::zeros(dim_m, dim_m);
    for i in 0..n {
        let psi = e.power(i, k)?;
        let phi = kron(&psi, &guesses[i]) * c(e.weights[i] * n as f64, 0.0);
        let perp = kron(&psi, &ComplexMatrix::identity(dim_m, dim_m)) - &phi;
        worst = worst.max(-eigvalsh(&phi)[0]).max(-eigvalsh(&perp)[0]).max(-eigvalsh(&psi)[0]);
        for m in 1..=k {
            let which: Vec<usize> = (0..m).collect();
            worst = worst.max(-eigvalsh(&partial_transpose(&phi, &dims, &which)?)[0]);
            worst = worst.max(-eigvalsh(&partial_transpose(&perp, &dims, &which)?)[0]);
        }
        worst = worst.max((psi.trace().re - 1.0).abs());
        marginal += partial_trace(&phi, &dims, &(0..k).collect::<Vec<_>>())?;
        objective += trace_product(&pairing, &phi) / n as f64;
    }
    let id = ComplexMatrix::identity(dim_m, dim_m);
    worst = worst.max(crate::qcore::max_abs(&(marginal - id)));
    Ok(HonestCheck { max_violation: worst, objective })
}
