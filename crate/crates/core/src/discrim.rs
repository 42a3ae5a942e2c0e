//! Optimal multi-copy discrimination.
//!
//! The value `max Σ_i p_i Tr(ρ_i^{⊗k} M_i)` over measurements is computed from
//! its dual `min Tr X` s.t. `X ⪰ p_i ρ_i^{⊗k}`. Every `ρ_i^{⊗k}` commutes with
//! the factor permutations, so `X` can be restricted to permutation-invariant
//! operators without loss; the measurement is read off the primal side and
//! symmetrized the same way.

use kcopy_sdp::{solve, Field, HermitianSdp, Lmi, SdpOptions, SdpStatus};
use crate::qcore::{
    c, checked_pow, eigh, eigvalsh, hermitize, max_abs, min_eigenvalue, pinv_sqrt, psd_sqrt, spectral_map,
    trace_norm, trace_product, twirl, ComplexMatrix, Ensemble, Limits, PermBasis, Povm, State,
};
use crate::{Error, Result};

/// Relative eigenvalue cutoff for pseudo-inverses.
pub const PINV_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Default)]
pub struct DiscrOptions {
    pub sdp: SdpOptions,
    pub limits: Limits,
}

#[derive(Debug, Clone)]
pub struct DiscrResult {
    /// Success probability achieved by the primal measurement.
    pub value: f64,
    /// `Tr X` of the dual operator returned by the solver.
    pub dual_value: f64,
    /// Upper bound from the dual operator after repairing its infeasibility.
    pub certified_upper: f64,
    pub povm: Povm,
    pub dual: ComplexMatrix,
    pub status: SdpStatus,
}

/// Optimal success probability for `k` copies of the ensemble.
pub fn discriminability(e: &Ensemble, k: usize) -> Result<DiscrResult> {
    discriminability_with(e, k, &DiscrOptions::default())
}

pub fn discriminability_with(e: &Ensemble, k: usize, opts: &DiscrOptions) -> Result<DiscrResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one copy".into()));
    }
    let dim = checked_pow(e.d, k)?;
    opts.limits.check(dim, dim)?;
    let n = e.len();
    let real = e.is_real();
    let basis = PermBasis::with_limits(e.d, k, &opts.limits)?;
    let used: Vec<usize> = (0..basis.len()).filter(|&t| !real || basis.is_real(t)).collect();
    let field = if real { Field::Real } else { Field::Complex };
    let sigma: Vec<ComplexMatrix> =
        (0..n).map(|i| Ok(e.power(i, k)? * c(e.weights[i], 0.0))).collect::<Result<_>>()?;

    let lmi = Lmi {
        blocks: vec![(dim, field); n],
        constant: sigma.iter().map(|s| -s).collect(),
        coefficients: used
            .iter()
            .map(|&t| (0..n).map(|i| (i, basis.elements[t].clone())).collect())
            .collect(),
        objective: used.iter().map(|&t| -basis.elements[t].trace().re).collect(),
        offset: 0.0,
    };
    let mut prog = lmi.to_hermitian();
    prog.trace_bound = Some(dim as f64);
    let sol = solve(&prog.to_real(), &opts.sdp)?;
    if !sol.status.is_usable() {
        return Err(Error::Solver(sol.status));
    }

    let mut x = ComplexMatrix::zeros(dim, dim);
    for (&t, y) in used.iter().zip(&sol.y) {
        x += &basis.elements[t] * c(*y, 0.0);
    }
    let x = hermitize(&x);
    let check = dual_margin(&x, &sigma);
    let certified_upper = x.trace().re + dim as f64 * (-check).max(0.0);

    let mut elements: Vec<ComplexMatrix> = (0..n)
        .map(|i| Ok(hermitize(&twirl(&prog.primal_block(&sol, i), e.d, k)?)))
        .collect::<Result<_>>()?;
    normalize_povm(&mut elements)?;
    let povm = Povm::new(elements);
    let value = povm.success(e, k)?;

    Ok(DiscrResult {
        value,
        dual_value: -sol.dual_value,
        certified_upper,
        povm,
        dual: x,
        status: sol.status,
    })
}

/// Makes `Σ M_i = I` exactly via `M_i -> S^{-1/2} M_i S^{-1/2}`.
fn normalize_povm(elements: &mut [ComplexMatrix]) -> Result<()> {
    let n = elements[0].nrows();
    let mut s = ComplexMatrix::zeros(n, n);
    for m in elements.iter_mut() {
        *m = spectral_map(m, |v| v.max(0.0));
        s += &*m;
    }
    let lmin = min_eigenvalue(&s);
    if lmin <= 0.5 {
        return Err(Error::NotPsd(lmin));
    }
    let inv = spectral_map(&s, |v| 1.0 / v.sqrt());
    for m in elements.iter_mut() {
        *m = hermitize(&(&inv * &*m * &inv));
    }
    Ok(())
}

/// `min_i λ_min(X - σ_i)`.
pub fn dual_margin(x: &ComplexMatrix, sigma: &[ComplexMatrix]) -> f64 {
    sigma.iter().map(|s| min_eigenvalue(&(x - s))).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualCheck {
    pub feasible: bool,
    pub margin: f64,
    /// `Tr X + dim · max(0, -margin)`: a valid upper bound on the value.
    pub bound: f64,
}

/// Tolerance on the dual margin for calling a certificate feasible.
pub const DUAL_FEASIBILITY_TOL: f64 = 1e-10;

pub fn check_dual_certificate(x: &ComplexMatrix, e: &Ensemble, k: usize) -> Result<DualCheck> {
    let dim = checked_pow(e.d, k)?;
    if x.nrows() != dim || x.ncols() != dim {
        return Err(Error::DimensionMismatch(format!("dual operator must be {dim}x{dim}")));
    }
    let sigma: Vec<ComplexMatrix> =
        (0..e.len()).map(|i| Ok(e.power(i, k)? * c(e.weights[i], 0.0))).collect::<Result<_>>()?;
    let margin = dual_margin(x, &sigma);
    Ok(DualCheck {
        feasible: margin >= -DUAL_FEASIBILITY_TOL,
        margin,
        bound: x.trace().re + dim as f64 * (-margin).max(0.0),
    })
}

/// `G_ij = <ψ_i|ψ_j>^k` for a pure ensemble.
pub fn gram_matrix(e: &Ensemble, k: usize) -> Result<ComplexMatrix> {
    let kets = e.kets().ok_or_else(|| Error::InvalidArgument("Gram route needs pure states".into()))?;
    let n = kets.len();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| kets[i].dotc(kets[j]).powu(k as u32)))
}

#[derive(Debug, Clone)]
pub struct GramResult {
    pub value: f64,
    pub dual_value: f64,
    pub status: SdpStatus,
    pub gram: ComplexMatrix,
    /// Optimal `W_i` with `Σ W_i = G`.
    pub w: Vec<ComplexMatrix>,
}

/// The same value for pure states from an `N x N` program:
/// `max Σ p_i (W_i)_ii` s.t. `W_i ⪰ 0`, `Σ W_i = G`. Its size does not grow with `k`.
pub fn discriminability_gram(e: &Ensemble, k: usize) -> Result<GramResult> {
    discriminability_gram_with(e, k, &SdpOptions::default())
}

pub fn discriminability_gram_with(e: &Ensemble, k: usize, opts: &SdpOptions) -> Result<GramResult> {
    let g = gram_matrix(e, k)?;
    let (vals, vecs) = eigh(&g);
    let top = vals.last().copied().unwrap_or(0.0);
    let kept: Vec<usize> = (0..vals.len()).filter(|&j| vals[j] > PINV_CUTOFF * top).collect();
    let range = ComplexMatrix::from_fn(g.nrows(), kept.len(), |r, j| vecs[(r, kept[j])]);
    let lam: Vec<f64> = kept.iter().map(|&j| vals[j]).collect();
    let (sol, prog) = solve_gram(&range, &lam, &e.weights, opts)?;
    if !sol.status.is_usable() {
        return Err(Error::Solver(sol.status));
    }
    let n = e.len();
    Ok(GramResult {
        value: sol.primal_value,
        dual_value: sol.dual_value,
        status: sol.status,
        w: (0..n).map(|i| hermitize(&(&range * prog.primal_block(&sol, i) * range.adjoint()))).collect(),
        gram: g,
    })
}

/// The Gram program restricted to the range of `G = V diag(λ) V†`: variables
/// `w_i` with `W_i = V w_i V†` and `Σ w_i = diag(λ)`, which keeps a strictly
/// feasible point when the states are linearly dependent.
fn solve_gram(
    range: &ComplexMatrix,
    lam: &[f64],
    weights: &[f64],
    opts: &SdpOptions,
) -> Result<(kcopy_sdp::SdpSolution, HermitianSdp)> {
    let r = lam.len();
    let real = range.iter().all(|z| z.im.abs() < 1e-15);
    let field = if real { Field::Real } else { Field::Complex };
    let mut prog = HermitianSdp::new(vec![(r, field); weights.len()], kcopy_sdp::Sense::Maximize);
    for (i, w) in weights.iter().enumerate() {
        let u = range.row(i).adjoint();
        prog.objective.push((i, &u * u.adjoint() * c(*w, 0.0)));
    }
    for a in 0..r {
        for b in a..r {
            let mut re = ComplexMatrix::zeros(r, r);
            if a == b {
                re[(a, a)] = c(1.0, 0.0);
            } else {
                re[(a, b)] = c(0.5, 0.0);
                re[(b, a)] = c(0.5, 0.0);
            }
            let rhs = if a == b { lam[a] } else { 0.0 };
            prog.constraints.push(((0..weights.len()).map(|i| (i, re.clone())).collect(), rhs));
            if a != b && !real {
                let mut im = ComplexMatrix::zeros(r, r);
                im[(a, b)] = c(0.0, 0.5);
                im[(b, a)] = c(0.0, -0.5);
                prog.constraints.push(((0..weights.len()).map(|i| (i, im.clone())).collect(), 0.0));
            }
        }
    }
    prog.trace_bound = Some(lam.iter().sum());
    let sol = solve(&prog.to_real(), opts)?;
    Ok((sol, prog))
}

/// Lifts Gram-frame variables to a measurement on `(C^d)^{⊗k}`:
/// `M_i = Ψ G⁺ W_i G⁺ Ψ†` where the columns of `Ψ` are `ψ_i^{⊗k}`, plus a
/// residual outcome on the complement of their span.
pub fn lift_gram_povm(e: &Ensemble, k: usize, w: &[ComplexMatrix]) -> Result<Povm> {
    let kets = e.kets().ok_or_else(|| Error::InvalidArgument("Gram route needs pure states".into()))?;
    let dim = checked_pow(e.d, k)?;
    Limits::default().check(dim, dim)?;
    let n = kets.len();
    let mut psi = ComplexMatrix::zeros(dim, n);
    for (i, v) in kets.iter().enumerate() {
        psi.set_column(i, &crate::qcore::ket_power(v, k));
    }
    let g = psi.adjoint() * &psi;
    let (vals, vecs) = eigh(&g);
    let top = vals.last().copied().unwrap_or(0.0);
    let mut gp = ComplexMatrix::zeros(n, n);
    for (j, &v) in vals.iter().enumerate() {
        if v > PINV_CUTOFF * top {
            let col = vecs.column(j);
            gp += &col * col.adjoint() * c(1.0 / v, 0.0);
        }
    }
    let frame = &psi * &gp;
    let mut elements: Vec<ComplexMatrix> = w.iter().map(|wi| hermitize(&(&frame * wi * frame.adjoint()))).collect();
    let span = &psi * &gp * psi.adjoint();
    elements.push(hermitize(&(ComplexMatrix::identity(dim, dim) - span)));
    Ok(Povm { elements, residual: true })
}

/// Pretty-good measurement `ρ̄^{-1/2} p_i ρ_i^{⊗k} ρ̄^{-1/2}` with a residual
/// outcome on the kernel of `ρ̄ = Σ p_i ρ_i^{⊗k}`, and its success probability.
pub fn pgm(e: &Ensemble, k: usize) -> Result<(Povm, f64)> {
    let n = e.len();
    let sigma: Vec<ComplexMatrix> =
        (0..n).map(|i| Ok(e.power(i, k)? * c(e.weights[i], 0.0))).collect::<Result<_>>()?;
    let dim = sigma[0].nrows();
    let mut avg = ComplexMatrix::zeros(dim, dim);
    for s in &sigma {
        avg += s;
    }
    let (inv, proj) = pinv_sqrt(&avg, PINV_CUTOFF);
    let mut elements: Vec<ComplexMatrix> = sigma.iter().map(|s| hermitize(&(&inv * s * &inv))).collect();
    elements.push(hermitize(&(ComplexMatrix::identity(dim, dim) - proj)));
    let povm = Povm { elements, residual: true };
    let value = povm.success(e, k)?;
    Ok((povm, value))
}

/// Success probability of the pretty-good measurement for pure states,
/// `Σ_i ((√G')_ii)²` with `G'_ij = √(p_i p_j) <ψ_i|ψ_j>^k`.
pub fn pgm_value_gram(e: &Ensemble, k: usize) -> Result<f64> {
    let g = gram_matrix(e, k)?;
    let n = g.nrows();
    let sw: Vec<f64> = e.weights.iter().map(|w| w.sqrt()).collect();
    let gw = ComplexMatrix::from_fn(n, n, |i, j| g[(i, j)] * c(sw[i] * sw[j], 0.0));
    let root = psd_sqrt(&gw)?;
    Ok((0..n).map(|i| root[(i, i)].re.powi(2)).sum())
}

/// `(1/N) (Tr √ρ̄)²` with `ρ̄ = (1/N) Σ ρ_i^{⊗k}`: the optimal value for
/// ensembles that are orbits of a group acting by `U^{⊗k}`. Requires uniform priors.
pub fn group_covariant_value(e: &Ensemble, k: usize) -> Result<f64> {
    let n = e.len() as f64;
    if e.weights.iter().any(|w| (w - 1.0 / n).abs() > 1e-12) {
        return Err(Error::InvalidArgument("covariant value needs uniform priors".into()));
    }
    let eig: Vec<f64> = if e.kets().is_some() {
        eigvalsh(&(gram_matrix(e, k)? / c(n, 0.0)))
    } else {
        let dim = checked_pow(e.d, k)?;
        let mut avg = ComplexMatrix::zeros(dim, dim);
        for i in 0..e.len() {
            avg += e.power(i, k)?;
        }
        eigvalsh(&(avg / c(n, 0.0)))
    };
    if let Some(&l) = eig.first() {
        if l < -crate::qcore::PSD_CLAMP {
            return Err(Error::NotPsd(l));
        }
    }
    let tr: f64 = eig.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok(tr * tr / n)
}

/// Two-state optimum `(1 + ||p ρ_0 - (1-p) ρ_1||_1) / 2`.
pub fn helstrom(rho0: &ComplexMatrix, rho1: &ComplexMatrix, p: f64) -> f64 {
    let diff = rho0 * c(p, 0.0) - rho1 * c(1.0 - p, 0.0);
    0.5 * (1.0 + trace_norm(&diff))
}

/// Success probability of a given measurement.
pub fn success_probability(e: &Ensemble, k: usize, povm: &Povm) -> Result<f64> {
    povm.success(e, k)
}

/// `(1/N) Σ_i Tr(ρ_i^{⊗k} M_i)` from explicit matrices, for cross-checks.
pub fn success_from_matrices(sigma: &[ComplexMatrix], elements: &[ComplexMatrix]) -> f64 {
    sigma.iter().zip(elements).map(|(s, m)| trace_product(s, m)).sum()
}

/// Largest entry of `Σ_i M_i - I`.
pub fn completeness_residual(elements: &[ComplexMatrix]) -> f64 {
    let n = elements[0].nrows();
    let mut s = ComplexMatrix::zeros(n, n);
    for m in elements {
        s += m;
    }
    max_abs(&(s - ComplexMatrix::identity(n, n)))
}

/// Density matrix helper for mixed test ensembles: `(1 - q) ψ + q I/d`.
pub fn depolarized(state: &State, q: f64) -> Result<State> {
    let rho = state.density();
    let d = rho.nrows();
    let m = rho * c(1.0 - q, 0.0) + ComplexMatrix::identity(d, d) * c(q / d as f64, 0.0);
    Ok(State::Mixed(crate::qcore::DensityOperator::new(m)?))
}
