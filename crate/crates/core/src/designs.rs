//! State designs: a catalog of exact ones, verification against the Haar or
//! real-sphere moment operator, and the measurements built from them.

use std::f64::consts::PI;

use crate::qcore::{
    c, checked_pow, eigh, eigvalsh, max_abs, pinv_sqrt, projector, sym_basis, sym_dim, sym_projector, ComplexMatrix,
    ComplexVector, Ensemble, Limits, Povm, PureState, State,
};
use crate::{Error, Result};

/// Tolerance used when a measurement is built from a candidate.
pub const DESIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    /// Average matches the Haar moment `Π_sym / dim`.
    Complex,
    /// Average matches the moment over real unit vectors.
    Real,
}

#[derive(Debug, Clone)]
pub struct DesignCandidate {
    pub ensemble: Ensemble,
    pub k: usize,
    pub kind: DesignKind,
}

impl DesignCandidate {
    pub fn new(ensemble: Ensemble, k: usize, kind: DesignKind) -> Result<Self> {
        if ensemble.kets().is_none() {
            return Err(Error::InvalidArgument("design candidates must be pure".into()));
        }
        if kind == DesignKind::Real && !ensemble.is_real() {
            return Err(Error::InvalidArgument("real design candidates need real states".into()));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("need k >= 1".into()));
        }
        Ok(Self { ensemble, k, kind })
    }

    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignCheck {
    pub is_design: bool,
    /// Smallest `ε` with `(1-ε) T <= avg <= (1+ε) T` on the symmetric subspace.
    pub epsilon: f64,
    /// Largest entry of the part of the average outside the symmetric subspace.
    pub leakage: f64,
}

/// `Σ p_i (|ψ_i><ψ_i|)^{⊗k}`.
pub fn moment_operator(e: &Ensemble, k: usize) -> Result<ComplexMatrix> {
    let dim = checked_pow(e.d, k)?;
    Limits::default().check(dim, dim)?;
    let mut avg = ComplexMatrix::zeros(dim, dim);
    for i in 0..e.len() {
        avg += e.power(i, k)? * c(e.weights[i], 0.0);
    }
    Ok(avg)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Average of `(|ψ><ψ|)^{⊗k}` over real unit vectors, by a product quadrature
/// that is exact for polynomials of degree `2k` (`2k + 2` azimuthal points).
pub fn real_moment_operator(d: usize, k: usize) -> Result<ComplexMatrix> {
    let dim = checked_pow(d, k)?;
    Limits::default().check(dim, dim)?;
    let m = 2 * k + 2;
    let mut avg = ComplexMatrix::zeros(dim, dim);
    let mut add = |v: ComplexVector, w: f64| {
        let p = crate::qcore::ket_power(&v, k);
        avg += projector(&p) * c(w, 0.0);
    };
    match d {
        2 => {
            for j in 0..m {
                let a = PI * j as f64 / m as f64;
                add(ComplexVector::from_vec(vec![c(a.cos(), 0.0), c(a.sin(), 0.0)]), 1.0 / m as f64);
            }
        }
        3 => {
            for (z, wz) in gauss_legendre(k + 1) {
                let s = (1.0 - z * z).sqrt();
                for j in 0..m {
                    let phi = 2.0 * PI * j as f64 / m as f64;
                    let v = vec![c(s * phi.cos(), 0.0), c(s * phi.sin(), 0.0), c(z, 0.0)];
                    add(ComplexVector::from_vec(v), wz / 2.0 / m as f64);
                }
            }
        }
        _ => return Err(Error::InvalidArgument(format!("real moment operator only for d = 2, 3 (got {d})"))),
    }
    Ok(avg)
}

fn compress(b: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    b.adjoint() * m * b
}

pub fn verify_design(cand: &DesignCandidate, tol: f64) -> Result<DesignCheck> {
    let (d, k) = (cand.ensemble.d, cand.k);
    let avg = moment_operator(&cand.ensemble, k)?;
    let pi = sym_projector(d, k)?;
    let leakage = max_abs(&(&avg - &pi * &avg * &pi));
    let b = sym_basis(d, k)?;
    let a = compress(&b, &avg);
    let vals = match cand.kind {
        DesignKind::Complex => {
            let dim = sym_dim(d, k) as f64;
            eigvalsh(&a).into_iter().map(|v| v * dim).collect::<Vec<_>>()
        }
        DesignKind::Real => {
            let r = compress(&b, &real_moment_operator(d, k)?);
            let (inv, _) = pinv_sqrt(&r, 1e-12);
            eigvalsh(&(&inv * a * &inv))
        }
    };
    let lo = vals.first().copied().unwrap_or(0.0);
    let hi = vals.last().copied().unwrap_or(0.0);
    let epsilon = (1.0 - lo).max(hi - 1.0).max(0.0);
    Ok(DesignCheck { is_design: epsilon <= tol && leakage <= tol, epsilon, leakage })
}

/// Named exact designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Catalog {
    Basis(usize),
    Trine,
    Tetrahedron,
    Octahedron,
    Icosahedron,
    Ngon(usize),
}

fn from_bloch_vector(v: [f64; 3]) -> PureState {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    PureState::from_bloch((v[2] / r).clamp(-1.0, 1.0).acos(), v[1].atan2(v[0]))
}

impl Catalog {
    /// Parses `basis:D`, `trine`, `tetrahedron`, `octahedron`, `icosahedron`, `ngon:N`.
    pub fn parse(name: &str) -> Result<Self> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let num = |a: Option<&str>| -> Result<usize> {
            a.and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidArgument(format!("`{name}` needs a numeric parameter")))
        };
        Ok(match head.to_ascii_lowercase().as_str() {
            "basis" => Catalog::Basis(num(arg)?),
            "trine" => Catalog::Trine,
            "tetrahedron" => Catalog::Tetrahedron,
            "octahedron" => Catalog::Octahedron,
            "icosahedron" => Catalog::Icosahedron,
            "ngon" => Catalog::Ngon(num(arg)?),
            _ => return Err(Error::InvalidArgument(format!("unknown design `{name}`"))),
        })
    }

    pub fn name(&self) -> String {
        match self {
            Catalog::Basis(d) => format!("basis:{d}"),
            Catalog::Trine => "trine".into(),
            Catalog::Tetrahedron => "tetrahedron".into(),
            Catalog::Octahedron => "octahedron".into(),
            Catalog::Icosahedron => "icosahedron".into(),
            Catalog::Ngon(n) => format!("ngon:{n}"),
        }
    }

    pub fn candidate(&self) -> Result<DesignCandidate> {
        let bloch = |vs: Vec<[f64; 3]>| vs.into_iter().map(from_bloch_vector).collect::<Vec<_>>();
        let (kets, k, kind) = match *self {
            Catalog::Basis(d) => {
                if d < 1 {
                    return Err(Error::InvalidArgument("basis needs d >= 1".into()));
                }
                let kets = (0..d)
                    .map(|i| {
                        let mut v = ComplexVector::zeros(d);
                        v[i] = c(1.0, 0.0);
                        PureState::new(v)
                    })
                    .collect::<Result<Vec<_>>>()?;
                (kets, 1, DesignKind::Complex)
            }
            Catalog::Trine => (polygon(3), 2, DesignKind::Real),
            Catalog::Ngon(n) => {
                if n < 2 {
                    return Err(Error::InvalidArgument("ngon needs N >= 2".into()));
                }
                (polygon(n), n - 1, DesignKind::Real)
            }
            Catalog::Tetrahedron => {
                let s = 1.0 / 3f64.sqrt();
                (bloch(vec![[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]), 2, DesignKind::Complex)
            }
            Catalog::Octahedron => {
                let v = vec![[1., 0., 0.], [-1., 0., 0.], [0., 1., 0.], [0., -1., 0.], [0., 0., 1.], [0., 0., -1.]];
                (bloch(v), 3, DesignKind::Complex)
            }
            Catalog::Icosahedron => {
                let g = (1.0 + 5f64.sqrt()) / 2.0;
                let mut v = Vec::with_capacity(12);
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        v.push([0.0, s1, s2 * g]);
                        v.push([s1, s2 * g, 0.0]);
                        v.push([s2 * g, 0.0, s1]);
                    }
                }
                (bloch(v), 5, DesignKind::Complex)
            }
        };
        let e = Ensemble::from_pure(kets)?.labeled(self.name());
        DesignCandidate::new(e, k, kind)
    }
}

/// Regular `n`-gon of real qubit states on the XZ great circle.
fn polygon(n: usize) -> Vec<PureState> {
    (0..n).map(|j| PureState::from_bloch(2.0 * PI * j as f64 / n as f64, 0.0)).collect()
}

/// `(R^{-1/2}, Π)` with `R` the relevant moment operator on `(C^d)^{⊗k}`.
fn whitening(cand: &DesignCandidate) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (d, k) = (cand.ensemble.d, cand.k);
    let pi = sym_projector(d, k)?;
    let inv = match cand.kind {
        DesignKind::Complex => &pi * c((sym_dim(d, k) as f64).sqrt(), 0.0),
        DesignKind::Real => {
            let b = sym_basis(d, k)?;
            let r = compress(&b, &real_moment_operator(d, k)?);
            let (vals, vecs) = eigh(&r);
            let mut inv = ComplexMatrix::zeros(r.nrows(), r.ncols());
            for (j, v) in vals.iter().enumerate() {
                let col = vecs.column(j);
                inv += &col * col.adjoint() * c(1.0 / v.sqrt(), 0.0);
            }
            &b * inv * b.adjoint()
        }
    };
    Ok((inv, pi))
}

/// Elements `p_i R^{-1/2} |ψ_i><ψ_i|^{⊗k} R^{-1/2}`, summing to `Π_sym` on a design.
fn design_elements(cand: &DesignCandidate) -> Result<(Vec<ComplexMatrix>, ComplexMatrix)> {
    let check = verify_design(cand, DESIGN_TOL)?;
    if !check.is_design {
        return Err(Error::InvalidArgument(format!(
            "not a {}-design (ε = {:.3e}, leakage {:.3e})",
            cand.k, check.epsilon, check.leakage
        )));
    }
    let (inv, pi) = whitening(cand)?;
    let kets = cand.ensemble.kets().expect("checked pure");
    let els = kets
        .iter()
        .zip(&cand.ensemble.weights)
        .map(|(v, &w)| {
            let u = &inv * crate::qcore::ket_power(v, cand.k);
            projector(&u) * c(w, 0.0)
        })
        .collect();
    Ok((els, pi))
}

/// Measurement achieving `dim Sym / N` on a complex design (the covariant
/// square-root measurement on a real design), with `(I - Π_sym)/N` added to each element.
pub fn design_povm(cand: &DesignCandidate) -> Result<Povm> {
    let (els, pi) = design_elements(cand)?;
    let n = els.len();
    let rest = (ComplexMatrix::identity(pi.nrows(), pi.ncols()) - pi) * c(1.0 / n as f64, 0.0);
    Ok(Povm::new(els.into_iter().map(|m| m + &rest).collect()))
}

/// Appends `extra` zero elements, for ensembles that extend a design by arbitrary states.
pub fn pad_povm(povm: &Povm, extra: usize) -> Povm {
    let dim = povm.dim();
    let mut elements = povm.elements.clone();
    let at = elements.len() - usize::from(povm.residual);
    for _ in 0..extra {
        elements.insert(at, ComplexMatrix::zeros(dim, dim));
    }
    Povm { elements, residual: povm.residual }
}

/// The design states plus `I/d`, with the design measurement confined to the
/// symmetric subspace and `I - Π_sym` assigned to the mixed state.
pub fn mixed_witness_ensemble(base: &DesignCandidate) -> Result<(Ensemble, Povm)> {
    let (mut els, pi) = design_elements(base)?;
    let d = base.ensemble.d;
    els.push(ComplexMatrix::identity(pi.nrows(), pi.ncols()) - pi);
    let mixed = State::Mixed(crate::qcore::DensityOperator::maximally_mixed(d));
    let e = base.ensemble.with_extra(mixed)?;
    let label = base.ensemble.label.clone().unwrap_or_else(|| "design".into());
    Ok((e.labeled(format!("{label}+mixed")), Povm::new(els)))
}
