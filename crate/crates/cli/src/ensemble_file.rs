//! JSON ensemble files.

use kcopy::qcore::{c, ComplexMatrix, ComplexVector, DensityOperator, Ensemble, PureState, State};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum StateEntry {
    Pure { ket: Vec<[f64; 2]> },
    Mixed { rho: Vec<Vec<[f64; 2]>> },
    Classical { p: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub d: usize,
    pub states: Vec<StateEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl EnsembleFile {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_ensemble(&self) -> anyhow::Result<Ensemble> {
        let mut states = Vec::with_capacity(self.states.len());
        for (i, s) in self.states.iter().enumerate() {
            let state = match s {
                StateEntry::Pure { ket } => {
                    let v = ComplexVector::from_iterator(ket.len(), ket.iter().map(|z| c(z[0], z[1])));
                    State::Pure(PureState::new(v)?)
                }
                StateEntry::Mixed { rho } => {
                    let n = rho.len();
                    if rho.iter().any(|row| row.len() != n) {
                        anyhow::bail!("state {i}: density matrix must be square");
                    }
                    let m = ComplexMatrix::from_fn(n, n, |r, col| c(rho[r][col][0], rho[r][col][1]));
                    State::Mixed(DensityOperator::new(m)?)
                }
                StateEntry::Classical { p } => State::classical(p.clone())?,
            };
            if state.dim() != self.d {
                anyhow::bail!("state {i} has dimension {}, file declares d = {}", state.dim(), self.d);
            }
            states.push(state);
        }
        let e = Ensemble::new(states, self.weights.clone())?;
        Ok(match &self.label {
            Some(l) => e.labeled(l.clone()),
            None => e,
        })
    }

    pub fn from_ensemble(e: &Ensemble) -> Self {
        let states = e
            .states
            .iter()
            .map(|s| match s {
                State::Pure(p) => StateEntry::Pure { ket: p.amplitudes.iter().map(|z| [z.re, z.im]).collect() },
                State::Mixed(m) => {
                    let n = m.dim();
                    StateEntry::Mixed {
                        rho: (0..n).map(|r| (0..n).map(|col| [m.matrix[(r, col)].re, m.matrix[(r, col)].im]).collect()).collect(),
                    }
                }
                State::Classical(p) => StateEntry::Classical { p: p.clone() },
            })
            .collect();
        let weights = if e.is_uniform() { None } else { Some(e.weights.clone()) };
        Self { d: e.d, states, weights, label: e.label.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}
