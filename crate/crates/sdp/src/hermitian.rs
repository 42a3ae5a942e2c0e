//! Complex Hermitian blocks on top of the real solver.
//!
//! A Hermitian `n x n` block is represented by the real `2n x 2n` matrix
//! `[[Re A, -Im A], [Im A, Re A]]`. Since `Re Tr(A X) = Tr(E(A) E(X)) / 2`,
//! coefficient matrices are embedded with a factor one half. This is the only
//! place where the embedding happens.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::problem::{entries_from_dense, Constraint, SdpProblem, Sense};
use crate::solver::SdpSolution;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

pub fn embed(a: &CMatrix) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for c in 0..n {
        for r in 0..n {
            let z = a[(r, c)];
            out[(r, c)] = z.re;
            out[(r + n, c + n)] = z.re;
            out[(r + n, c)] = z.im;
            out[(r, c + n)] = -z.im;
        }
    }
    out
}

/// Inverse of [`embed`], averaging the two copies so that an arbitrary
/// symmetric `2n x 2n` matrix maps to the nearest structured one.
pub fn unembed(x: &DMatrix<f64>) -> CMatrix {
    let n = x.nrows() / 2;
    CMatrix::from_fn(n, n, |r, c| {
        Complex64::new(
            0.5 * (x[(r, c)] + x[(r + n, c + n)]),
            0.5 * (x[(r + n, c)] - x[(r, c + n)]),
        )
    })
}

/// Optimize `sum_b Re Tr(C_b X_b)` subject to `sum_b Re Tr(A_jb X_b) = b_j`
/// over Hermitian positive semidefinite blocks.
#[derive(Debug, Clone)]
pub struct HermitianSdp {
    pub blocks: Vec<(usize, Field)>,
    pub objective: Vec<(usize, CMatrix)>,
    pub constraints: Vec<(Vec<(usize, CMatrix)>, f64)>,
    pub sense: Sense,
    pub offset: f64,
    /// Bound on `sum_b Tr X_b`.
    pub trace_bound: Option<f64>,
}

impl HermitianSdp {
    pub fn new(blocks: Vec<(usize, Field)>, sense: Sense) -> Self {
        Self { blocks, objective: Vec::new(), constraints: Vec::new(), sense, offset: 0.0, trace_bound: None }
    }

    fn real_entries(&self, block: usize, a: &CMatrix) -> Vec<crate::problem::Entry> {
        match self.blocks[block].1 {
            Field::Real => entries_from_dense(block, &a.map(|z| z.re), 1.0),
            Field::Complex => entries_from_dense(block, &embed(a), 0.5),
        }
    }

    pub fn to_real(&self) -> SdpProblem {
        let sizes = self
            .blocks
            .iter()
            .map(|&(n, f)| match f {
                Field::Real => n,
                Field::Complex => 2 * n,
            })
            .collect();
        let mut p = SdpProblem::new(sizes, self.sense);
        p.offset = self.offset;
        let any_complex = self.blocks.iter().any(|b| b.1 == Field::Complex);
        p.trace_bound = self.trace_bound.map(|t| if any_complex { 2.0 * t } else { t });
        for (b, c) in &self.objective {
            p.objective.extend(self.real_entries(*b, c));
        }
        for (terms, rhs) in &self.constraints {
            let mut entries = Vec::new();
            for (b, a) in terms {
                entries.extend(self.real_entries(*b, a));
            }
            p.constraints.push(Constraint { entries, rhs: *rhs });
        }
        p
    }

    /// Primal block `X_b` of a solution of [`Self::to_real`].
    pub fn primal_block(&self, sol: &SdpSolution, block: usize) -> CMatrix {
        let x = &sol.x[block];
        match self.blocks[block].1 {
            Field::Real => x.map(|v| Complex64::new(v, 0.0)),
            Field::Complex => unembed(x),
        }
    }

    /// Dual slack `Z_b` at the complex level.
    pub fn dual_block(&self, sol: &SdpSolution, block: usize) -> CMatrix {
        let z = &sol.z[block];
        match self.blocks[block].1 {
            Field::Real => z.map(|v| Complex64::new(v, 0.0)),
            Field::Complex => unembed(z) * Complex64::new(2.0, 0.0),
        }
    }
}

/// `max c'y + offset` subject to `F0_b + sum_j y_j F_jb ⪰ 0` for every block.
#[derive(Debug, Clone)]
pub struct Lmi {
    pub blocks: Vec<(usize, Field)>,
    pub constant: Vec<CMatrix>,
    /// For each variable, its nonzero coefficient matrices by block.
    pub coefficients: Vec<Vec<(usize, CMatrix)>>,
    pub objective: Vec<f64>,
    pub offset: f64,
}

impl Lmi {
    /// The LMI is the dual side of the returned problem: its optimal value is
    /// the solution's `dual_value`, its variables are `y`, its slack is `z`.
    pub fn to_hermitian(&self) -> HermitianSdp {
        let mut p = HermitianSdp::new(self.blocks.clone(), Sense::Minimize);
        p.offset = self.offset;
        p.objective = self.constant.iter().cloned().enumerate().collect();
        for (terms, c) in self.coefficients.iter().zip(&self.objective) {
            let neg = terms.iter().map(|(b, f)| (*b, -f)).collect();
            p.constraints.push((neg, *c));
        }
        p
    }
}
