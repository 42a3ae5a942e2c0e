//! States, ensembles and measurements.

use nalgebra::DVector;

use crate::qcore::linalg::{
    c, eigvalsh, hermitian_deviation, ket_power, max_abs, projector, tensor_power, ComplexMatrix, ComplexVector, C64,
};
use crate::{Error, Result};

pub const STATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub amplitudes: ComplexVector,
    /// Polar and azimuthal Bloch angles, when the state was built from them.
    pub bloch: Option<(f64, f64)>,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let n = amplitudes.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("ket has norm {n}, expected 1")));
        }
        Ok(Self { amplitudes, bloch: None })
    }

    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let n = amplitudes.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero ket".into()));
        }
        Ok(Self { amplitudes: amplitudes / c(n, 0.0), bloch: None })
    }

    /// `cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`.
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        let a = DVector::from_vec(vec![
            c((theta / 2.0).cos(), 0.0),
            C64::from_polar((theta / 2.0).sin(), phi),
        ]);
        Self { amplitudes: a, bloch: Some((theta, phi)) }
    }

    /// Real qubit state `cos(a)|0> + sin(a)|1>`, Bloch angle `2a` in the XZ plane.
    pub fn rebit(a: f64) -> Self {
        Self::from_bloch(2.0 * a, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn density(&self) -> ComplexMatrix {
        projector(&self.amplitudes)
    }

    pub fn power(&self, k: usize) -> ComplexVector {
        ket_power(&self.amplitudes, k)
    }

    /// Bloch vector `(x, y, z)` of a qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        bloch_vector(&self.density())
    }
}

pub fn bloch_vector(rho: &ComplexMatrix) -> Result<[f64; 3]> {
    if rho.nrows() != 2 {
        return Err(Error::InvalidArgument("Bloch vectors need qubits".into()));
    }
    Ok([2.0 * rho[(0, 1)].re, -2.0 * rho[(0, 1)].im, (rho[(0, 0)] - rho[(1, 1)]).re])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    pub matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        let dev = hermitian_deviation(&matrix);
        if dev > STATE_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!("trace {tr}, expected 1")));
        }
        let lmin = eigvalsh(&matrix)[0];
        if lmin < -STATE_TOL {
            return Err(Error::NotPsd(lmin));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(d, d) / c(d as f64, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(PureState),
    Mixed(DensityOperator),
    /// Probability vector, i.e. a diagonal density matrix.
    Classical(Vec<f64>),
}

impl State {
    pub fn classical(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("probabilities must be non-negative".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!("probabilities sum to {s}")));
        }
        Ok(State::Classical(p))
    }

    pub fn dim(&self) -> usize {
        match self {
            State::Pure(p) => p.dim(),
            State::Mixed(m) => m.dim(),
            State::Classical(p) => p.len(),
        }
    }

    pub fn density(&self) -> ComplexMatrix {
        match self {
            State::Pure(p) => p.density(),
            State::Mixed(m) => m.matrix.clone(),
            State::Classical(p) => {
                ComplexMatrix::from_diagonal(&DVector::from_iterator(p.len(), p.iter().map(|v| c(*v, 0.0))))
            }
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            State::Pure(p) => p.amplitudes.iter().all(|z| z.im == 0.0),
            State::Mixed(m) => m.matrix.iter().all(|z| z.im == 0.0),
            State::Classical(_) => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub d: usize,
    pub states: Vec<State>,
    pub weights: Vec<f64>,
    pub label: Option<String>,
}

impl Ensemble {
    pub fn new(states: Vec<State>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty ensemble".into()));
        }
        let d = states[0].dim();
        if states.iter().any(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch("states of different dimension".into()));
        }
        let weights = weights.unwrap_or_else(|| vec![1.0 / n as f64; n]);
        if weights.len() != n {
            return Err(Error::DimensionMismatch("one weight per state".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument("weights must be a probability vector".into()));
        }
        Ok(Self { d, states, weights, label: None })
    }

    pub fn uniform(states: Vec<State>) -> Result<Self> {
        Self::new(states, None)
    }

    pub fn from_pure(kets: Vec<PureState>) -> Result<Self> {
        Self::uniform(kets.into_iter().map(State::Pure).collect())
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let n = self.len() as f64;
        self.weights.iter().all(|w| (w - 1.0 / n).abs() < 1e-12)
    }

    pub fn kets(&self) -> Option<Vec<&ComplexVector>> {
        self.states
            .iter()
            .map(|s| match s {
                State::Pure(p) => Some(&p.amplitudes),
                _ => None,
            })
            .collect()
    }

    pub fn is_real(&self) -> bool {
        self.states.iter().all(State::is_real)
    }

    pub fn is_classical(&self) -> bool {
        self.states.iter().all(|s| match s {
            State::Classical(_) => true,
            other => {
                let m = other.density();
                (0..m.nrows()).all(|r| (0..m.ncols()).all(|cc| r == cc || m[(r, cc)].norm() < 1e-14))
            }
        })
    }

    /// `ρ_i^{⊗k}`.
    pub fn power(&self, i: usize, k: usize) -> Result<ComplexMatrix> {
        match &self.states[i] {
            State::Pure(p) => {
                let dim = crate::qcore::linalg::checked_pow(self.d, k)?;
                crate::qcore::linalg::Limits::default().check(dim, dim)?;
                Ok(projector(&p.power(k)))
            }
            s => tensor_power(&s.density(), k),
        }
    }

    /// Appends a state and resets to uniform weights.
    pub fn with_extra(&self, state: State) -> Result<Self> {
        let mut states = self.states.clone();
        states.push(state);
        Self::uniform(states)
    }

    /// The ensemble `{U ρ_i U†}`.
    pub fn rotated(&self, u: &ComplexMatrix) -> Result<Self> {
        let states = self
            .states
            .iter()
            .map(|s| match s {
                State::Pure(p) => State::Pure(PureState { amplitudes: u * &p.amplitudes, bloch: None }),
                other => State::Mixed(DensityOperator { matrix: u * other.density() * u.adjoint() }),
            })
            .collect();
        let mut e = Self::new(states, Some(self.weights.clone()))?;
        e.label = self.label.clone();
        Ok(e)
    }
}

/// Measurement with one element per outcome. When `residual` is set the last
/// element is an extra outcome that never counts as a correct guess.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    pub elements: Vec<ComplexMatrix>,
    pub residual: bool,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Self {
        Self { elements, residual: false }
    }

    pub fn dim(&self) -> usize {
        self.elements.first().map_or(0, |e| e.nrows())
    }

    /// `max |Σ E_i - I|` entrywise.
    pub fn completeness_error(&self) -> f64 {
        let n = self.dim();
        let mut s = ComplexMatrix::zeros(n, n);
        for e in &self.elements {
            s += e;
        }
        max_abs(&(s - ComplexMatrix::identity(n, n)))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.elements.iter().map(|e| eigvalsh(e)[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.completeness_error() <= tol && self.min_eigenvalue() >= -tol
    }

    /// `Σ_i p_i Tr(ρ_i^{⊗k} E_i)` over the guessing outcomes.
    pub fn success(&self, ensemble: &Ensemble, k: usize) -> Result<f64> {
        let n = ensemble.len();
        let guesses = self.elements.len() - usize::from(self.residual);
        if guesses != n {
            return Err(Error::DimensionMismatch(format!("{guesses} outcomes for {n} states")));
        }
        let mut total = 0.0;
        for i in 0..n {
            let v = match &ensemble.states[i] {
                State::Pure(p) => {
                    let v = p.power(k);
                    (v.adjoint() * &self.elements[i] * &v)[(0, 0)].re
                }
                _ => crate::qcore::linalg::trace_product(&ensemble.power(i, k)?, &self.elements[i]),
            };
            total += ensemble.weights[i] * v;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bloch_round_trip() {
        let s = PureState::from_bloch(1.1, 0.4);
        let v = s.bloch_vector().unwrap();
        assert!((v[0] - 1.1f64.sin() * 0.4f64.cos()).abs() < 1e-14);
        assert!((v[1] - 1.1f64.sin() * 0.4f64.sin()).abs() < 1e-14);
        assert!((v[2] - 1.1f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::new(ComplexMatrix::identity(2, 2)).is_err());
        assert!(DensityOperator::new(DensityOperator::maximally_mixed(3).matrix).is_ok());
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.5, 0.0);
        m[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(DensityOperator::new(m), Err(Error::NotPsd(_))));
    }

    #[test]
    fn computational_basis_measurement() {
        let e = Ensemble::from_pure(vec![PureState::from_bloch(0.0, 0.0), PureState::from_bloch(std::f64::consts::PI, 0.0)])
            .unwrap();
        let povm = Povm::new(vec![e.states[0].density(), e.power(1, 1).unwrap()]);
        assert!(povm.is_valid(1e-12));
        assert!((povm.success(&e, 1).unwrap() - 1.0).abs() < 1e-12);
    }
}
