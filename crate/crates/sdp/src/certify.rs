//! Rigorous bounds from approximately feasible dual points.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::problem::{SdpProblem, Sense};
use crate::{Error, Result};

/// Largest dual infeasibility that is still repaired rather than rejected.
pub const MAX_REPAIRABLE_RESIDUAL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedBound {
    pub bound: f64,
    /// Magnitude of the most negative eigenvalue of the dual slack (0 if feasible).
    pub residual: f64,
}

/// Upper bound on a maximization problem from a dual vector `y`.
///
/// The slack `A*(y) - C` is shifted by `eps I` where `-eps` is its smallest
/// eigenvalue, which costs `eps * trace_bound` in the objective.
pub fn rigorous_upper_from_dual(problem: &SdpProblem, y: &[f64]) -> Result<CertifiedBound> {
    if problem.sense != Sense::Maximize {
        return Err(Error::MissingData("a maximization problem"));
    }
    if y.len() != problem.constraints.len() {
        return Err(Error::Malformed("dual vector length mismatch".into()));
    }
    let mut eps: f64 = 0.0;
    for k in 0..problem.blocks.len() {
        let mut z: DMatrix<f64> = -problem.block_matrix(&problem.objective, k);
        for (c, yj) in problem.constraints.iter().zip(y) {
            if *yj != 0.0 {
                z += problem.block_matrix(&c.entries, k) * *yj;
            }
        }
        let lmin = SymmetricEigen::new(z).eigenvalues.min();
        eps = eps.max(-lmin);
    }
    let dual: f64 = problem.constraints.iter().zip(y).map(|(c, yj)| c.rhs * yj).sum::<f64>() + problem.offset;
    if eps == 0.0 {
        return Ok(CertifiedBound { bound: dual, residual: 0.0 });
    }
    if eps > MAX_REPAIRABLE_RESIDUAL {
        return Err(Error::ResidualTooLarge(eps));
    }
    let t = problem.trace_bound.ok_or(Error::MissingData("a primal trace bound"))?;
    Ok(CertifiedBound { bound: dual + eps * t, residual: eps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Constraint, Entry};
    use crate::solver::{solve, SdpOptions};

    fn max_trace() -> SdpProblem {
        let e = |block, row, col, value| Entry { block, row, col, value };
        let mut p = SdpProblem::new(vec![2, 2], Sense::Maximize);
        p.objective = vec![e(0, 0, 0, 1.0), e(0, 1, 1, 1.0)];
        for (r, c, rhs) in [(0, 0, 1.0), (1, 1, 1.0), (0, 1, 0.0)] {
            p.constraints.push(Constraint { entries: vec![e(0, r, c, 1.0), e(1, r, c, 1.0)], rhs });
        }
        p.trace_bound = Some(4.0);
        p
    }

    #[test]
    fn exact_dual_gives_its_objective() {
        let p = max_trace();
        let b = rigorous_upper_from_dual(&p, &[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(b.bound, 2.0);
        assert_eq!(b.residual, 0.0);
    }

    #[test]
    fn perturbed_dual_stays_above_primal() {
        let p = max_trace();
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        let y: Vec<f64> = sol.y.iter().map(|v| v - 1e-9).collect();
        let b = rigorous_upper_from_dual(&p, &y).unwrap();
        assert!(b.bound >= sol.primal_value - 1e-12);
        assert!((b.bound - 2.0).abs() < 1e-7);
    }

    #[test]
    fn refuses_large_residuals() {
        let p = max_trace();
        assert!(matches!(rigorous_upper_from_dual(&p, &[0.5, 1.0, 0.0]), Err(Error::ResidualTooLarge(_))));
    }
}
