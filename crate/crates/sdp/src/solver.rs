//! Primal-dual interior-point method (HKM search direction, Mehrotra
//! predictor-corrector) for the block problem in [`crate::problem`].
//!
//! Internally everything is a minimization: `min <C, X>` s.t. `A(X) = b`,
//! with dual `max b'y` s.t. `Z = C - A*(y) ⪰ 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::problem::{SdpProblem, Sense};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SdpOptions {
    /// Target for relative gap and relative primal/dual infeasibility.
    pub tol: f64,
    pub max_iter: usize,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 500, verbose: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    /// Tolerances met only after loosening them by at most 100x.
    NearOptimal,
    Infeasible,
    NumericalFailure,
}

impl SdpStatus {
    pub fn is_usable(self) -> bool {
        matches!(self, SdpStatus::Optimal | SdpStatus::NearOptimal)
    }
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::NearOptimal => "near-optimal",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::NumericalFailure => "numerical-failure",
        };
        f.write_str(s)
    }
}

/// Result of [`solve`]. Values are reported in the sense of the problem and
/// include its offset. For a maximization the dual slack is `A*(y) - C`, for a
/// minimization it is `C - A*(y)`; in both cases it is `z`.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    pub x: Vec<DMatrix<f64>>,
    pub y: Vec<f64>,
    pub z: Vec<DMatrix<f64>>,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
}

impl SdpSolution {
    pub fn gap(&self) -> f64 {
        (self.primal_value - self.dual_value).abs()
    }
}

enum Coeff {
    /// Expanded list: both `(r, c)` and `(c, r)` for off-diagonals.
    Sparse(Vec<(usize, usize, f64)>),
    Dense(DMatrix<f64>),
}

impl Coeff {
    fn dot(&self, g: &DMatrix<f64>) -> f64 {
        match self {
            Coeff::Sparse(list) => list.iter().map(|&(r, c, v)| v * g[(r, c)]).sum(),
            Coeff::Dense(d) => d.dot(g),
        }
    }

    fn axpy_into(&self, alpha: f64, s: &mut DMatrix<f64>) {
        match self {
            Coeff::Sparse(list) => {
                for &(r, c, v) in list {
                    s[(r, c)] += alpha * v;
                }
            }
            Coeff::Dense(d) => s.zip_apply(d, |a, b| *a += alpha * b),
        }
    }

    fn norm(&self) -> f64 {
        match self {
            Coeff::Sparse(list) => list.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt(),
            Coeff::Dense(d) => d.norm(),
        }
    }
}

struct BlockCons {
    j: usize,
    a: Coeff,
}

struct Block {
    n: usize,
    c: DMatrix<f64>,
    cons: Vec<BlockCons>,
}

struct Data {
    blocks: Vec<Block>,
    b: DVector<f64>,
    m: usize,
}

impl Data {
    fn new(p: &SdpProblem) -> Self {
        let sign = match p.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut blocks: Vec<Block> = p
            .blocks
            .iter()
            .enumerate()
            .map(|(k, &n)| Block { n, c: p.block_matrix(&p.objective, k) * sign, cons: Vec::new() })
            .collect();
        for (j, con) in p.constraints.iter().enumerate() {
            let mut per_block: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); blocks.len()];
            for e in &con.entries {
                per_block[e.block].push((e.row, e.col, e.value));
                if e.row != e.col {
                    per_block[e.block].push((e.col, e.row, e.value));
                }
            }
            for (k, list) in per_block.into_iter().enumerate() {
                if list.is_empty() {
                    continue;
                }
                let n = blocks[k].n;
                let mut acc = DMatrix::<f64>::zeros(n, n);
                for &(r, c, v) in &list {
                    acc[(r, c)] += v;
                }
                let nnz = acc.iter().filter(|v| **v != 0.0).count();
                let a = if nnz > 2 * n {
                    Coeff::Dense(acc)
                } else {
                    let mut entries = Vec::with_capacity(nnz);
                    for c in 0..n {
                        for r in 0..n {
                            if acc[(r, c)] != 0.0 {
                                entries.push((r, c, acc[(r, c)]));
                            }
                        }
                    }
                    Coeff::Sparse(entries)
                };
                blocks[k].cons.push(BlockCons { j, a });
            }
        }
        let b = DVector::from_iterator(p.constraints.len(), p.constraints.iter().map(|c| c.rhs));
        Data { blocks, b, m: p.constraints.len() }
    }

    fn op_a(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (blk, xb) in self.blocks.iter().zip(x) {
            for bc in &blk.cons {
                out[bc.j] += bc.a.dot(xb);
            }
        }
        out
    }

    fn op_at(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.blocks
            .iter()
            .map(|blk| {
                let mut s = DMatrix::zeros(blk.n, blk.n);
                for bc in &blk.cons {
                    let yj = y[bc.j];
                    if yj != 0.0 {
                        bc.a.axpy_into(yj, &mut s);
                    }
                }
                s
            })
            .collect()
    }

    /// `M_jl = <A_j, X A_l W>` summed over blocks.
    fn schur(&self, x: &[DMatrix<f64>], w: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.m, self.m);
        for ((blk, xb), wb) in self.blocks.iter().zip(x).zip(w) {
            let n = blk.n;
            for (a, ba) in blk.cons.iter().enumerate() {
                let g = match &ba.a {
                    Coeff::Dense(d) => xb * (d * wb),
                    Coeff::Sparse(entries) => {
                        let mut g = DMatrix::zeros(n, n);
                        for &(r, c, v) in entries {
                            // g += v * X[:, r] * W[c, :]
                            for q in 0..n {
                                let wcq = v * wb[(c, q)];
                                if wcq != 0.0 {
                                    let mut col = g.column_mut(q);
                                    col.axpy(wcq, &xb.column(r), 1.0);
                                }
                            }
                        }
                        g
                    }
                };
                for bb in &blk.cons[a..] {
                    let s = bb.a.dot(&g);
                    m[(ba.j, bb.j)] += s;
                    if ba.j != bb.j {
                        m[(bb.j, ba.j)] += s;
                    }
                }
            }
        }
        m
    }
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn fro(a: &[DMatrix<f64>]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().cholesky().map(|c| sym(c.inverse()))
}

/// Largest `a` with `x + a dx ⪰ 0`, infinite when `dx ⪰ 0`.
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(ch) = x.clone().cholesky() else { return 0.0 };
    let l = ch.l();
    let Some(t1) = l.solve_lower_triangular(dx) else { return 0.0 };
    let Some(t) = l.solve_lower_triangular(&t1.transpose()) else { return 0.0 };
    let lmin = SymmetricEigen::new(sym(t)).eigenvalues.min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

struct SchurFactor {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl SchurFactor {
    fn new(mut m: DMatrix<f64>) -> Option<Self> {
        if m.nrows() == 0 {
            return DMatrix::<f64>::identity(0, 0).cholesky().map(|chol| Self { chol });
        }
        let scale = m.diagonal().amax().max(1e-300);
        for attempt in 0..8 {
            if let Some(chol) = m.clone().cholesky() {
                return Some(Self { chol });
            }
            let shift = scale * 1e-15 * 10f64.powi(2 * attempt);
            for i in 0..m.nrows() {
                m[(i, i)] += shift;
            }
        }
        None
    }

    fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(r)
    }
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    dz: Vec<DMatrix<f64>>,
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    z: Vec<DMatrix<f64>>,
}

pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let data = Data::new(problem);
    let nb = data.blocks.len();
    let nt: usize = data.blocks.iter().map(|b| b.n).sum();
    let norm_b = data.b.norm();
    let norm_c = data.blocks.iter().map(|b| b.c.norm_squared()).sum::<f64>().sqrt();

    // Starting point scaled to the data.
    let mut it = Iterate {
        x: Vec::with_capacity(nb),
        y: DVector::zeros(data.m),
        z: Vec::with_capacity(nb),
    };
    for blk in &data.blocks {
        let n = blk.n as f64;
        let mut xi: f64 = 10f64.max(n.sqrt());
        let mut eta: f64 = 10f64.max(n.sqrt()).max(blk.c.norm());
        for bc in &blk.cons {
            let an = bc.a.norm();
            xi = xi.max(n * (1.0 + data.b[bc.j].abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        it.x.push(DMatrix::identity(blk.n, blk.n) * xi);
        it.z.push(DMatrix::identity(blk.n, blk.n) * eta);
    }

    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let cs: Vec<DMatrix<f64>> = data.blocks.iter().map(|b| b.c.clone()).collect();

    let residuals = |it: &Iterate| {
        let rp = &data.b - data.op_a(&it.x);
        let aty = data.op_at(&it.y);
        let rd: Vec<DMatrix<f64>> = (0..nb).map(|k| &cs[k] - &it.z[k] - &aty[k]).collect();
        let pobj = inner(&cs, &it.x);
        let dobj = data.b.dot(&it.y);
        let pinf = rp.norm() / (1.0 + norm_b);
        let dinf = fro(&rd) / (1.0 + norm_c);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        (rp, rd, pobj, dobj, pinf, dinf, gap)
    };

    let mut best: Option<(f64, Iterate, usize)> = None;
    let mut status = None;
    let mut iterations = 0;
    let mut stalled = 0;

    for iter in 0..opts.max_iter {
        iterations = iter;
        let (rp, rd, pobj, dobj, pinf, dinf, gap) = residuals(&it);
        let err = pinf.max(dinf).max(gap);
        if opts.verbose {
            eprintln!(
                "iter {iter:3} pobj {:+.10e} dobj {:+.10e} pinf {pinf:.2e} dinf {dinf:.2e} gap {gap:.2e}",
                sign * pobj,
                sign * dobj
            );
        }
        let improved = best.as_ref().is_none_or(|(e, _, _)| err < 0.9 * *e);
        if best.as_ref().is_none_or(|(e, _, _)| err < *e) {
            best = Some((err, Iterate { x: it.x.clone(), y: it.y.clone(), z: it.z.clone() }, iter));
        }
        stalled = if improved { 0 } else { stalled + 1 };
        if err <= opts.tol {
            status = Some(SdpStatus::Optimal);
            break;
        }
        if !err.is_finite() {
            break;
        }
        let xnorm = fro(&it.x);
        let ynorm = it.y.amax();
        if xnorm > 1e12 * (1.0 + norm_c) || ynorm > 1e12 * (1.0 + norm_b) {
            status = Some(SdpStatus::Infeasible);
            break;
        }
        if stalled >= 30 {
            break;
        }

        let mu = inner(&it.x, &it.z) / nt as f64;
        let Some(w) = it.z.iter().map(spd_inverse).collect::<Option<Vec<_>>>() else { break };
        let Some(fac) = SchurFactor::new(data.schur(&it.x, &w)) else { break };
        let xrdw: Vec<DMatrix<f64>> = (0..nb).map(|k| &it.x[k] * (&rd[k] * &w[k])).collect();
        let a_xrdw = data.op_a(&xrdw);

        let direction = |rc: Vec<DMatrix<f64>>| -> Direction {
            let rhs = &rp - data.op_a(&rc) + &a_xrdw;
            let dy = fac.solve(&rhs);
            let aty = data.op_at(&dy);
            let dz: Vec<DMatrix<f64>> = (0..nb).map(|k| &rd[k] - &aty[k]).collect();
            let dx: Vec<DMatrix<f64>> = (0..nb)
                .map(|k| sym(&rc[k] + &it.x[k] * ((&aty[k] - &rd[k]) * &w[k])))
                .collect();
            Direction { dx, dy, dz }
        };
        let steps = |d: &Direction, gamma: f64| -> (f64, f64) {
            let ap = (0..nb).map(|k| max_step(&it.x[k], &d.dx[k])).fold(f64::INFINITY, f64::min);
            let ad = (0..nb).map(|k| max_step(&it.z[k], &d.dz[k])).fold(f64::INFINITY, f64::min);
            ((gamma * ap).min(1.0), (gamma * ad).min(1.0))
        };

        // Predictor.
        let pred = direction(it.x.iter().map(|x| -x).collect());
        let (ap, ad) = steps(&pred, 1.0);
        let mut mu_aff = 0.0;
        for k in 0..nb {
            let xa = &it.x[k] + &pred.dx[k] * ap;
            let za = &it.z[k] + &pred.dz[k] * ad;
            mu_aff += xa.dot(&za);
        }
        mu_aff /= nt as f64;
        let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };
        let sigma = sigma.max(if pinf.max(dinf) > 1e-2 { 0.1 } else { 0.0 });

        // Corrector.
        let rc: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| &w[k] * (sigma * mu) - &it.x[k] - &pred.dx[k] * (&pred.dz[k] * &w[k]))
            .collect();
        let corr = direction(rc);
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let (ap, ad) = steps(&corr, gamma);
        if !(ap.is_finite() && ad.is_finite()) || (ap < 1e-12 && ad < 1e-12) {
            break;
        }
        for k in 0..nb {
            it.x[k] += &corr.dx[k] * ap;
            it.z[k] += &corr.dz[k] * ad;
        }
        it.y += &corr.dy * ad;
    }

    let (best_err, chosen) = match status {
        Some(SdpStatus::Optimal) => (0.0, it),
        _ => match best {
            Some((e, b, _)) => (e, b),
            None => (f64::INFINITY, it),
        },
    };
    let status = match status {
        Some(s) => s,
        None if best_err <= 100.0 * opts.tol => SdpStatus::NearOptimal,
        None => SdpStatus::NumericalFailure,
    };
    let (_, _, pobj, dobj, pinf, dinf, gap) = residuals(&chosen);
    if !pobj.is_finite() || !dobj.is_finite() {
        return Err(Error::NonFinite);
    }
    let y: Vec<f64> = chosen.y.iter().map(|v| sign * v).collect();
    Ok(SdpSolution {
        status,
        primal_value: sign * pobj + problem.offset,
        dual_value: sign * dobj + problem.offset,
        x: chosen.x,
        y,
        z: chosen.z,
        iterations,
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        relative_gap: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Constraint, Entry};

    fn e(block: usize, row: usize, col: usize, value: f64) -> Entry {
        Entry { block, row, col, value }
    }

    #[test]
    fn max_trace_below_identity() {
        // max Tr(M) s.t. M + S = I on 2x2 blocks.
        let mut p = SdpProblem::new(vec![2, 2], Sense::Maximize);
        p.objective = vec![e(0, 0, 0, 1.0), e(0, 1, 1, 1.0)];
        for (r, c, rhs) in [(0, 0, 1.0), (1, 1, 1.0), (0, 1, 0.0)] {
            p.constraints.push(Constraint { entries: vec![e(0, r, c, 1.0), e(1, r, c, 1.0)], rhs });
        }
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.primal_value - 2.0).abs() < 1e-7, "{}", s.primal_value);
        assert!((s.dual_value - 2.0).abs() < 1e-7);
    }

    #[test]
    fn min_eigenvalue_as_sdp() {
        // max t s.t. A - t I ⪰ 0 written as min <A, X>, Tr X = 1.
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let mut p = SdpProblem::new(vec![3], Sense::Minimize);
        p.objective = crate::problem::entries_from_dense(0, &a, 1.0);
        p.constraints.push(Constraint { entries: (0..3).map(|i| e(0, i, i, 1.0)).collect(), rhs: 1.0 });
        let s = solve(&p, &SdpOptions::default()).unwrap();
        let lmin = SymmetricEigen::new(a).eigenvalues.min();
        assert!((s.primal_value - lmin).abs() < 1e-7);
        assert!((s.dual_value - lmin).abs() < 1e-7);
    }

    #[test]
    fn detects_infeasibility() {
        let mut p = SdpProblem::new(vec![2], Sense::Minimize);
        p.objective = vec![e(0, 0, 0, 1.0)];
        p.constraints.push(Constraint { entries: vec![e(0, 0, 0, 1.0), e(0, 1, 1, 1.0)], rhs: -1.0 });
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert!(!s.status.is_usable(), "{:?}", s.status);
    }

    #[test]
    fn scalar_lp_blocks() {
        // min x1 + 2 x2 s.t. x1 + x2 = 1 with 1x1 blocks.
        let mut p = SdpProblem::new(vec![1, 1], Sense::Minimize);
        p.objective = vec![e(0, 0, 0, 1.0), e(1, 0, 0, 2.0)];
        p.constraints.push(Constraint { entries: vec![e(0, 0, 0, 1.0), e(1, 0, 0, 1.0)], rhs: 1.0 });
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.primal_value - 1.0).abs() < 1e-8);
        assert!((s.y[0] - 1.0).abs() < 1e-6);
    }
}
