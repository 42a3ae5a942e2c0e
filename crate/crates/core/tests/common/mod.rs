//! Shared helpers for the integration tests.

#![allow(dead_code)]

pub mod oracles;

use kcopy::designs::Catalog;
use kcopy::qcore::{c, random_pure_state, ComplexMatrix, DensityOperator, Ensemble, PureState, State};
use rand::Rng;

pub fn catalog(c: Catalog) -> Ensemble {
    c.candidate().expect("catalog entries build").ensemble
}

pub fn trine() -> Ensemble {
    catalog(Catalog::Trine)
}

pub fn tetrahedron() -> Ensemble {
    catalog(Catalog::Tetrahedron)
}

pub fn with_maximally_mixed(e: &Ensemble) -> Ensemble {
    e.with_extra(State::Mixed(DensityOperator::maximally_mixed(e.d))).expect("dimensions agree")
}

pub fn bloch(theta: f64, phi: f64) -> State {
    State::Pure(PureState::from_bloch(theta, phi))
}

/// Regular polygon of real qubit states in the XZ plane.
pub fn polygon(n: usize) -> Ensemble {
    let states = (0..n).map(|j| bloch(2.0 * std::f64::consts::PI * j as f64 / n as f64, 0.0)).collect();
    Ensemble::uniform(states).expect("valid states")
}

/// Density operator of random rank with random positive eigenweights.
pub fn random_density<R: Rng>(d: usize, rng: &mut R) -> State {
    let rank = rng.random_range(1..=d);
    let mut m = ComplexMatrix::zeros(d, d);
    for _ in 0..rank {
        let v = random_pure_state(d, rng);
        m += &v * v.adjoint() * c(rng.random::<f64>() + 0.05, 0.0);
    }
    let tr = m.trace();
    State::Mixed(DensityOperator::new(m / tr).expect("normalized PSD"))
}

/// Uniform ensemble of `n` random pure or mixed states.
pub fn random_ensemble<R: Rng>(d: usize, n: usize, pure: bool, rng: &mut R) -> Ensemble {
    let states = (0..n)
        .map(|_| {
            if pure {
                State::Pure(PureState::new(random_pure_state(d, rng)).expect("unit vector"))
            } else {
                random_density(d, rng)
            }
        })
        .collect();
    Ensemble::uniform(states).expect("valid states")
}
