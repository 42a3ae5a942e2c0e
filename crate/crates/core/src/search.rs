//! Heuristic lower bounds: Bloch-sphere grid search and Adam over an
//! unconstrained parameterization of states and measurements.

use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::classical::{classical_discr, discr_over_types, ml_povm, outcome_types, ClassicalEnsemble, OutcomeType};
use crate::discrim::{discriminability, discriminability_gram};
use crate::qcore::{
    c, checked_pow, eigvalsh, ket_power, max_eigenvalue, psd_sqrt, tensor_power, ComplexMatrix, ComplexVector,
    DensityOperator, Ensemble, Limits, Povm, PureState, State,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchClass {
    /// Pure complex states.
    Pure,
    /// Arbitrary density operators.
    Mixed,
    /// Real density operators.
    Real,
    /// Pure real states.
    RealPure,
    /// Diagonal states.
    Classical,
}

impl SearchClass {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "pure" => Self::Pure,
            "mixed" => Self::Mixed,
            "real" => Self::Real,
            "real-pure" => Self::RealPure,
            "classical" => Self::Classical,
            _ => return Err(Error::InvalidArgument(format!("unknown state class `{s}`"))),
        })
    }

    fn is_real(self) -> bool {
        matches!(self, Self::Real | Self::RealPure | Self::Classical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Grid,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub lr_start: f64,
    pub lr_end: f64,
    pub iterations: usize,
    pub restarts: usize,
    /// Relative central-difference step.
    pub fd_step: f64,
    pub seed: u64,
    /// Independent trajectories per restart; the restart reports the best.
    pub candidates: usize,
    /// For mixed classes, retry each restart with its weakest state replaced by `I/d`.
    pub kick: bool,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            lr_start: 0.1,
            lr_end: 1e-8,
            iterations: 10_000,
            restarts: 5,
            fd_step: 1e-6,
            seed: 0,
            candidates: 1,
            kick: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub class: SearchClass,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub method: Method,
    /// Polar steps over `[0, π]`.
    pub resolution: usize,
    /// Azimuthal steps over `[0, 2π)`.
    pub azimuth_resolution: usize,
    /// Fix the first state to `|0>` and the second to the XZ plane.
    pub reduce_symmetry: bool,
    pub max_candidates: usize,
    pub adam: AdamConfig,
    /// Re-optimize the measurement at the final states with an SDP.
    pub polish: bool,
}

impl SearchConfig {
    pub fn new(class: SearchClass, d: usize, n: usize, k: usize, method: Method) -> Self {
        Self {
            class,
            d,
            n,
            k,
            method,
            resolution: 24,
            azimuth_resolution: 48,
            reduce_symmetry: true,
            max_candidates: 200_000,
            adam: AdamConfig::default(),
            polish: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 || self.n < 1 || self.k < 1 {
            return Err(Error::InvalidArgument("need d >= 2, N >= 1, k >= 1".into()));
        }
        if self.resolution < 2 || self.azimuth_resolution < 2 {
            return Err(Error::InvalidArgument("grid resolution must be at least 2".into()));
        }
        let a = &self.adam;
        if a.candidates < 1 {
            return Err(Error::InvalidArgument("need at least one candidate per restart".into()));
        }
        if a.iterations < 1 || !(0.0 < a.beta1 && a.beta1 < 1.0) || !(0.0 < a.beta2 && a.beta2 < 1.0) {
            return Err(Error::InvalidArgument("need iterations >= 1 and 0 < β1, β2 < 1".into()));
        }
        if !(a.fd_step > 0.0) || !(a.lr_start > 0.0) || !(a.lr_end > 0.0) {
            return Err(Error::InvalidArgument("step sizes must be positive".into()));
        }
        Ok(())
    }
}

/// One line of the search trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    /// Restart index (Adam) or candidate index (grid).
    pub index: usize,
    pub value: f64,
    /// Adam value before the measurement polish.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub value: f64,
    /// Value of the search's own measurement, before any polish.
    pub raw_value: f64,
    pub ensemble: Ensemble,
    pub povm: Option<Povm>,
    pub trace: Vec<TraceRecord>,
    /// Certified upper value minus value of the polishing SDP.
    pub certificate_gap: Option<f64>,
    /// The candidate budget ran out before the grid was exhausted.
    pub partial: bool,
}

impl SearchResult {
    pub fn write_trace<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.trace {
            serde_json::to_writer(&mut w, r)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn search(cfg: &SearchConfig) -> Result<SearchResult> {
    match cfg.method {
        Method::Grid => grid_search(cfg),
        Method::Adam => adam_search(cfg),
    }
}

/// Sizes of the parameter blocks for one configuration.
struct Layout {
    class: SearchClass,
    d: usize,
    n: usize,
    k: usize,
    dim: usize,
    /// Outcome types, for the classical class.
    types: Vec<OutcomeType>,
}

impl Layout {
    fn new(cfg: &SearchConfig) -> Result<Self> {
        let dim = checked_pow(cfg.d, cfg.k)?;
        Limits::default().check(dim, dim)?;
        let types = if cfg.class == SearchClass::Classical { outcome_types(cfg.d, cfg.k) } else { Vec::new() };
        Ok(Self { class: cfg.class, d: cfg.d, n: cfg.n, k: cfg.k, dim, types })
    }

    fn state_len(&self) -> usize {
        let d = self.d;
        match self.class {
            SearchClass::Pure => 2 * d,
            SearchClass::RealPure | SearchClass::Classical => d,
            SearchClass::Mixed => 2 * d * d,
            SearchClass::Real => d * d,
        }
    }

    fn povm_len(&self) -> usize {
        let dim = self.dim;
        match self.class {
            // The maximum-likelihood rule is optimal, so only the states are free.
            SearchClass::Classical => 0,
            c if c.is_real() => dim * dim,
            _ => 2 * dim * dim,
        }
    }

    fn len(&self) -> usize {
        self.n * (self.state_len() + self.povm_len())
    }

    /// Square matrix from real (and, for complex classes, imaginary) parts.
    fn matrix(&self, x: &[f64], size: usize) -> ComplexMatrix {
        if self.class.is_real() {
            ComplexMatrix::from_fn(size, size, |r, cc| c(x[r * size + cc], 0.0))
        } else {
            let h = size * size;
            ComplexMatrix::from_fn(size, size, |r, cc| c(x[r * size + cc], x[h + r * size + cc]))
        }
    }

    /// Unnormalized `ρ_i^{⊗k}` (or its ket, for pure classes).
    fn state(&self, x: &[f64]) -> Operand {
        let d = self.d;
        match self.class {
            SearchClass::Pure => {
                let v = ComplexVector::from_fn(d, |r, _| c(x[r], x[d + r]));
                let n2 = v.norm_squared();
                Operand::Ket(ket_power(&v, self.k), n2.powi(self.k as i32))
            }
            SearchClass::RealPure => {
                let v = ComplexVector::from_fn(d, |r, _| c(x[r], 0.0));
                let n2 = v.norm_squared();
                Operand::Ket(ket_power(&v, self.k), n2.powi(self.k as i32))
            }
            SearchClass::Classical => unreachable!("classical states are scored by type enumeration"),
            SearchClass::Mixed | SearchClass::Real => {
                let a = self.matrix(x, d);
                let rho = a.adjoint() * &a;
                let t = rho.trace().re;
                let rho = rho / c(t, 0.0);
                Operand::Dense(tensor_power(&rho, self.k).expect("size checked in Layout::new"))
            }
        }
    }

    /// Probability vector `x_j² / Σ x²`.
    fn distribution(x: &[f64]) -> Vec<f64> {
        let p: Vec<f64> = x.iter().map(|v| v * v).collect();
        let z: f64 = p.iter().sum();
        p.into_iter().map(|v| v / z).collect()
    }

    fn classical_rows(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let s = self.state_len();
        (0..self.n).map(|i| Self::distribution(&x[i * s..(i + 1) * s])).collect()
    }

    /// Unnormalized element `B† B`.
    fn element(&self, x: &[f64]) -> ComplexMatrix {
        let b = self.matrix(x, self.dim);
        b.adjoint() * b
    }

    fn split<'a>(&self, x: &'a [f64]) -> (Vec<&'a [f64]>, Vec<&'a [f64]>) {
        let (s, p) = (self.state_len(), self.povm_len());
        let states = (0..self.n).map(|i| &x[i * s..(i + 1) * s]).collect();
        let off = self.n * s;
        let povm = (0..self.n).map(|i| &x[off + i * p..off + (i + 1) * p]).collect();
        (states, povm)
    }

    fn lambda_max(&self, total: &ComplexMatrix) -> f64 {
        if self.class.is_real() {
            total.map(|z| z.re).symmetric_eigenvalues().max()
        } else {
            max_eigenvalue(total)
        }
    }

    fn cache(&self, x: &[f64]) -> Cache {
        let (sp, pp) = self.split(x);
        let ops: Vec<Operand> = sp.iter().map(|st| self.state(st)).collect();
        let els: Vec<ComplexMatrix> = pp.iter().map(|p| self.element(p)).collect();
        let mut total = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &els {
            total += e;
        }
        let lambda = self.lambda_max(&total);
        let overlaps: Vec<f64> = ops.iter().zip(&els).map(|(o, e)| o.expectation(e)).collect();
        let sum = overlaps.iter().sum();
        Cache { ops, els, total, lambda, overlaps, sum }
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        if self.class == SearchClass::Classical {
            return discr_over_types(&self.classical_rows(x), &self.types);
        }
        let c = self.cache(x);
        c.sum / (self.n as f64 * c.lambda)
    }

    /// Objective after changing only the parameters of block `j`, given the cache at the rest.
    fn evaluate_block(&self, x: &[f64], c: &Cache, j: usize) -> f64 {
        let (s, p) = (self.state_len(), self.povm_len());
        let n = self.n as f64;
        if j < self.n {
            let op = self.state(&x[j * s..(j + 1) * s]);
            let v = op.expectation(&c.els[j]);
            (c.sum - c.overlaps[j] + v) / (n * c.lambda)
        } else {
            let i = j - self.n;
            let off = self.n * s + i * p;
            let e = self.element(&x[off..off + p]);
            let total = &c.total - &c.els[i] + &e;
            let v = c.ops[i].expectation(&e);
            (c.sum - c.overlaps[i] + v) / (n * self.lambda_max(&total))
        }
    }

    /// Parameter block (state `i` or element `N + i`) holding coordinate `idx`.
    fn block_of(&self, idx: usize) -> usize {
        let (s, p) = (self.state_len(), self.povm_len());
        if idx < self.n * s {
            idx / s
        } else {
            self.n + (idx - self.n * s) / p
        }
    }

    fn decode(&self, x: &[f64]) -> Result<(Ensemble, Povm)> {
        let (sp, pp) = self.split(x);
        let d = self.d;
        let states = sp
            .iter()
            .map(|st| -> Result<State> {
                Ok(match self.class {
                    SearchClass::Pure => {
                        State::Pure(PureState::normalized(ComplexVector::from_fn(d, |r, _| c(st[r], st[d + r])))?)
                    }
                    SearchClass::RealPure => {
                        State::Pure(PureState::normalized(ComplexVector::from_fn(d, |r, _| c(st[r], 0.0)))?)
                    }
                    SearchClass::Classical => State::classical(Self::distribution(st))?,
                    SearchClass::Mixed | SearchClass::Real => {
                        let a = self.matrix(st, d);
                        let rho = a.adjoint() * &a;
                        let t = rho.trace().re;
                        let rho = crate::qcore::hermitize(&(rho / c(t, 0.0)));
                        State::Mixed(DensityOperator::new(rho)?)
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if self.class == SearchClass::Classical {
            let povm = ml_povm(&ClassicalEnsemble::new(self.classical_rows(x))?, self.k)?;
            return Ok((Ensemble::uniform(states)?, povm));
        }
        let mut els: Vec<ComplexMatrix> = pp.iter().map(|p| self.element(p)).collect();
        let mut total = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &els {
            total += e;
        }
        let lam = max_eigenvalue(&total);
        for e in els.iter_mut() {
            *e /= c(lam, 0.0);
        }
        let residual = ComplexMatrix::identity(self.dim, self.dim) - total / c(lam, 0.0);
        els.push(crate::qcore::hermitize(&residual));
        Ok((Ensemble::uniform(states)?, Povm { elements: els, residual: true }))
    }
}

struct Cache {
    ops: Vec<Operand>,
    els: Vec<ComplexMatrix>,
    total: ComplexMatrix,
    lambda: f64,
    overlaps: Vec<f64>,
    sum: f64,
}

enum Operand {
    Ket(ComplexVector, f64),
    Dense(ComplexMatrix),
}

impl Operand {
    fn expectation(&self, m: &ComplexMatrix) -> f64 {
        match self {
            Operand::Ket(v, n2) => (v.adjoint() * m * v)[(0, 0)].re / n2,
            Operand::Dense(r) => crate::qcore::trace_product(r, m),
        }
    }
}

/// `(1/N) Σ Tr(ρ_i^{⊗k} M_i)` with `ρ_i` and `M_i` decoded from `params`; the
/// classical class decodes only states and uses the maximum-likelihood rule.
pub fn objective(params: &[f64], cfg: &SearchConfig) -> Result<f64> {
    let layout = Layout::new(cfg)?;
    if params.len() != layout.len() {
        return Err(Error::DimensionMismatch(format!("{} parameters, expected {}", params.len(), layout.len())));
    }
    Ok(layout.evaluate(params))
}

fn fd_gradient_layout(layout: &Layout, x: &mut [f64], h: f64, g: &mut [f64]) {
    if layout.class == SearchClass::Classical {
        for j in 0..x.len() {
            let orig = x[j];
            let step = h * orig.abs().max(1.0);
            x[j] = orig + step;
            let up = layout.evaluate(x);
            x[j] = orig - step;
            let down = layout.evaluate(x);
            x[j] = orig;
            g[j] = (up - down) / (2.0 * step);
        }
        return;
    }
    let cache = layout.cache(x);
    for j in 0..x.len() {
        let block = layout.block_of(j);
        let orig = x[j];
        let step = h * orig.abs().max(1.0);
        x[j] = orig + step;
        let up = layout.evaluate_block(x, &cache, block);
        x[j] = orig - step;
        let down = layout.evaluate_block(x, &cache, block);
        x[j] = orig;
        g[j] = (up - down) / (2.0 * step);
    }
}

/// Central differences with step `h · max(1, |x_j|)`.
pub fn fd_gradient(params: &[f64], cfg: &SearchConfig, h: f64) -> Result<Vec<f64>> {
    let layout = Layout::new(cfg)?;
    if params.len() != layout.len() {
        return Err(Error::DimensionMismatch(format!("{} parameters, expected {}", params.len(), layout.len())));
    }
    let mut x = params.to_vec();
    let mut g = vec![0.0; x.len()];
    fd_gradient_layout(&layout, &mut x, h, &mut g);
    Ok(g)
}

/// Parameters that decode to the given states and measurement. Pure states
/// must be given as kets for the pure classes; the POVM must have one element per state.
pub fn params_from(ensemble: &Ensemble, povm: &Povm, cfg: &SearchConfig) -> Result<Vec<f64>> {
    let layout = Layout::new(cfg)?;
    if ensemble.len() != cfg.n || povm.elements.len() - usize::from(povm.residual) != cfg.n {
        return Err(Error::DimensionMismatch("ensemble and measurement must have N elements".into()));
    }
    let mut x = Vec::with_capacity(layout.len());
    let push_matrix = |x: &mut Vec<f64>, m: &ComplexMatrix| {
        let n = m.nrows();
        for r in 0..n {
            for cc in 0..n {
                x.push(m[(r, cc)].re);
            }
        }
        if !cfg.class.is_real() {
            for r in 0..n {
                for cc in 0..n {
                    x.push(m[(r, cc)].im);
                }
            }
        }
    };
    for s in &ensemble.states {
        match (cfg.class, s) {
            (SearchClass::Pure, State::Pure(p)) => {
                x.extend(p.amplitudes.iter().map(|z| z.re));
                x.extend(p.amplitudes.iter().map(|z| z.im));
            }
            (SearchClass::RealPure, State::Pure(p)) => x.extend(p.amplitudes.iter().map(|z| z.re)),
            (SearchClass::Classical, st) => {
                let rho = st.density();
                x.extend((0..layout.d).map(|i| rho[(i, i)].re.max(0.0).sqrt()));
            }
            (SearchClass::Mixed | SearchClass::Real, st) => push_matrix(&mut x, &psd_sqrt(&st.density())?),
            _ => return Err(Error::InvalidArgument("pure classes need pure states".into())),
        }
    }
    if cfg.class != SearchClass::Classical {
        for e in &povm.elements[..cfg.n] {
            push_matrix(&mut x, &psd_sqrt(e)?);
        }
    }
    Ok(x)
}

struct RunOutcome {
    x: Vec<f64>,
    value: f64,
}

/// One Adam trajectory with the exponential learning-rate schedule.
struct AdamRun {
    x: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    t: usize,
    best: RunOutcome,
}

impl AdamRun {
    fn new(layout: &Layout, rng: &mut ChaCha8Rng) -> Option<Self> {
        let x: Vec<f64> = (0..layout.len()).map(|_| StandardNormal.sample(rng)).collect();
        Self::from_params(layout, x)
    }

    fn from_params(layout: &Layout, x: Vec<f64>) -> Option<Self> {
        let value = layout.evaluate(&x);
        if !value.is_finite() {
            return None;
        }
        let n = x.len();
        Some(Self { best: RunOutcome { value, x: x.clone() }, x, m: vec![0.0; n], v: vec![0.0; n], t: 0 })
    }

    /// Advances to iteration `until`; `None` on a non-finite objective or gradient.
    fn advance(&mut self, layout: &Layout, a: &AdamConfig, lr_start: f64, until: usize) -> Option<()> {
        let mut g = vec![0.0; self.x.len()];
        let t_max = a.iterations;
        let ratio = (a.lr_end / lr_start).ln();
        while self.t < until.min(t_max) {
            let t = self.t;
            let lr = lr_start * (ratio * t as f64 / (t_max.max(2) - 1) as f64).exp();
            fd_gradient_layout(layout, &mut self.x, a.fd_step, &mut g);
            if g.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let b1t = 1.0 - a.beta1.powi(t as i32 + 1);
            let b2t = 1.0 - a.beta2.powi(t as i32 + 1);
            for j in 0..self.x.len() {
                // Ascent on the success probability.
                self.m[j] = a.beta1 * self.m[j] + (1.0 - a.beta1) * g[j];
                self.v[j] = a.beta2 * self.v[j] + (1.0 - a.beta2) * g[j] * g[j];
                self.x[j] += lr * (self.m[j] / b1t) / ((self.v[j] / b2t).sqrt() + 1e-12);
            }
            let f = layout.evaluate(&self.x);
            if !f.is_finite() {
                return None;
            }
            if f > self.best.value {
                self.best = RunOutcome { value: f, x: self.x.clone() };
            }
            self.t += 1;
        }
        Some(())
    }
}

/// Runs `candidates` independent trajectories and keeps the best.
fn adam_run(layout: &Layout, a: &AdamConfig, lr_start: f64, rng: &mut ChaCha8Rng) -> Option<RunOutcome> {
    let mut best: Option<RunOutcome> = None;
    for _ in 0..a.candidates {
        let mut run = AdamRun::new(layout, rng)?;
        run.advance(layout, a, lr_start, a.iterations)?;
        if best.as_ref().is_none_or(|b| run.best.value > b.value) {
            best = Some(run.best);
        }
    }
    best
}

/// Learning rate for the run after a kick.
const KICK_LR: f64 = 0.01;

/// Replaces the state whose swap for `I/d` leaves the best optimal-measurement
/// value, then continues Adam from there with the matching measurement.
fn kick(layout: &Layout, cfg: &SearchConfig, x: &[f64]) -> Result<Option<(usize, RunOutcome)>> {
    if !matches!(cfg.class, SearchClass::Mixed | SearchClass::Real) || cfg.n < 2 {
        return Ok(None);
    }
    let (ensemble, _) = layout.decode(x)?;
    let mut best: Option<(f64, usize, Ensemble, Povm)> = None;
    for i in 0..ensemble.len() {
        let mut states = ensemble.states.clone();
        states[i] = State::Mixed(DensityOperator::maximally_mixed(cfg.d));
        let e = Ensemble::uniform(states)?;
        let res = discriminability(&e, cfg.k)?;
        if best.as_ref().is_none_or(|b| res.value > b.0) {
            best = Some((res.value, i, e, res.povm));
        }
    }
    let Some((_, i, e, povm)) = best else { return Ok(None) };
    let start = params_from(&e, &povm, cfg)?;
    let Some(mut run) = AdamRun::from_params(layout, start) else { return Ok(None) };
    if run.advance(layout, &cfg.adam, KICK_LR, cfg.adam.iterations).is_none() {
        return Ok(None);
    }
    Ok(Some((i, run.best)))
}

pub fn adam_search(cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let layout = Layout::new(cfg)?;
    let mut trace = Vec::new();
    let mut best: Option<(f64, f64, Ensemble, Povm, Option<f64>)> = None;
    for r in 0..cfg.adam.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.adam.seed.wrapping_add(r as u64));
        let mut lr = cfg.adam.lr_start;
        let mut note = None;
        let mut outcome = None;
        for _ in 0..8 {
            match adam_run(&layout, &cfg.adam, lr, &mut rng) {
                Some(o) => {
                    outcome = Some(o);
                    break;
                }
                None => {
                    lr /= 2.0;
                    note = Some(format!("non-finite objective, learning rate halved to {lr}"));
                }
            }
        }
        let Some(mut o) = outcome else {
            trace.push(TraceRecord { index: r, value: f64::NAN, raw_value: None, note });
            continue;
        };
        if cfg.adam.kick {
            if let Some((i, k)) = kick(&layout, cfg, &o.x)? {
                if k.value > o.value {
                    o = k;
                    note = Some(format!("state {i} reset to the maximally mixed state"));
                }
            }
        }
        let (ensemble, povm) = layout.decode(&o.x)?;
        let (value, povm, gap) = if cfg.polish && cfg.class != SearchClass::Classical {
            let res = discriminability(&ensemble, cfg.k)?;
            if res.value >= o.value - 1e-9 {
                (res.value, res.povm, Some(res.certified_upper - res.value))
            } else {
                (o.value, povm, Some(res.certified_upper - res.value))
            }
        } else {
            (o.value, povm, None)
        };
        trace.push(TraceRecord { index: r, value, raw_value: Some(o.value), note });
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, o.value, ensemble, povm, gap));
        }
    }
    let (value, raw_value, ensemble, povm, certificate_gap) =
        best.ok_or_else(|| Error::NonFinite)?;
    Ok(SearchResult { value, raw_value, ensemble, povm: Some(povm), trace, certificate_gap, partial: false })
}

/// Grid points `(θ, φ)`; poles appear once.
fn sphere_points(res: usize, azi: usize) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 0.0)];
    for i in 1..res {
        let theta = PI * i as f64 / res as f64;
        for j in 0..azi {
            pts.push((theta, 2.0 * PI * j as f64 / azi as f64));
        }
    }
    pts.push((PI, 0.0));
    pts
}

/// Bloch angles `θ_j = jπ/res` on the XZ great circle, `j = 0..2 res`.
fn circle_points(res: usize) -> Vec<(f64, f64)> {
    (0..2 * res).map(|j| (PI * j as f64 / res as f64, 0.0)).collect()
}

/// Next multiset of `len` indices below `m` in lexicographic order.
fn next_multiset(idx: &mut [usize], m: usize) -> bool {
    let len = idx.len();
    for p in (0..len).rev() {
        if idx[p] + 1 < m {
            let v = idx[p] + 1;
            for q in p..len {
                idx[q] = v;
            }
            return true;
        }
    }
    false
}

pub fn grid_search(cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    if cfg.d != 2 {
        return Err(Error::InvalidArgument("grid search uses the Bloch sphere and needs d = 2".into()));
    }
    let (first, second, rest): (Vec<(f64, f64)>, Vec<(f64, f64)>, Vec<(f64, f64)>) = match cfg.class {
        SearchClass::Pure => {
            let all = sphere_points(cfg.resolution, cfg.azimuth_resolution);
            if cfg.reduce_symmetry {
                let xz: Vec<(f64, f64)> = (0..=cfg.resolution).map(|i| (PI * i as f64 / cfg.resolution as f64, 0.0)).collect();
                (vec![(0.0, 0.0)], xz, all)
            } else {
                (all.clone(), all.clone(), all)
            }
        }
        SearchClass::RealPure | SearchClass::Classical => {
            let all = if cfg.class == SearchClass::Classical {
                // Bits a = cos²(θ/2) along the Z axis.
                (0..=cfg.resolution).map(|i| (PI * i as f64 / cfg.resolution as f64, 0.0)).collect()
            } else {
                circle_points(cfg.resolution)
            };
            if cfg.reduce_symmetry && cfg.class == SearchClass::RealPure {
                let half: Vec<(f64, f64)> = all.iter().copied().filter(|p| p.0 <= PI + 1e-12).collect();
                (vec![(0.0, 0.0)], half, all)
            } else if cfg.reduce_symmetry {
                (vec![(0.0, 0.0)], all.clone(), all)
            } else {
                (all.clone(), all.clone(), all)
            }
        }
        _ => return Err(Error::InvalidArgument("grid search covers pure, real-pure and classical states".into())),
    };
    let mk_state = |p: (f64, f64)| -> Result<State> {
        if cfg.class == SearchClass::Classical {
            let a = (p.0 / 2.0).cos().powi(2);
            State::classical(vec![a, 1.0 - a])
        } else {
            Ok(State::Pure(PureState::from_bloch(p.0, p.1)))
        }
    };
    let score = |states: Vec<State>| -> Result<(f64, Ensemble)> {
        let e = Ensemble::uniform(states)?;
        let v = if cfg.class == SearchClass::Classical {
            let rows = e.states.iter().map(|s| s.density().diagonal().iter().map(|z| z.re).collect()).collect();
            classical_discr(&ClassicalEnsemble::new(rows)?, cfg.k)
        } else if e.len() == 1 {
            1.0
        } else {
            discriminability_gram(&e, cfg.k)?.value
        };
        Ok((v, e))
    };

    let n = cfg.n;
    let mut trace = Vec::new();
    let mut best: Option<(f64, Ensemble)> = None;
    let mut count = 0usize;
    let mut partial = false;
    let mut consider = |points: Vec<(f64, f64)>, count: &mut usize| -> Result<bool> {
        if *count >= cfg.max_candidates {
            return Ok(false);
        }
        let states = points.into_iter().map(mk_state).collect::<Result<Vec<_>>>()?;
        let (v, e) = score(states)?;
        if best.as_ref().is_none_or(|b| v > b.0) {
            trace.push(TraceRecord { index: *count, value: v, raw_value: None, note: None });
            best = Some((v, e));
        }
        *count += 1;
        Ok(true)
    };
    'outer: for &p0 in &first {
        if n == 1 {
            if !consider(vec![p0], &mut count)? {
                partial = true;
            }
            break;
        }
        for &p1 in &second {
            if n == 2 {
                if !consider(vec![p0, p1], &mut count)? {
                    partial = true;
                    break 'outer;
                }
                continue;
            }
            let mut idx = vec![0usize; n - 2];
            loop {
                let mut pts = vec![p0, p1];
                pts.extend(idx.iter().map(|&i| rest[i]));
                if !consider(pts, &mut count)? {
                    partial = true;
                    break 'outer;
                }
                if !next_multiset(&mut idx, rest.len()) {
                    break;
                }
            }
        }
    }
    let (value, ensemble) = best.ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    Ok(SearchResult { value, raw_value: value, ensemble, povm: None, trace, certificate_gap: None, partial })
}

/// Largest Bloch-vector angle, in radians, between each target and its closest found state.
pub fn max_vertex_angle(found: &Ensemble, targets: &[[f64; 3]]) -> Result<f64> {
    let vs = found
        .states
        .iter()
        .map(|s| crate::qcore::bloch_vector(&s.density()))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for t in targets {
        let nt = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
        let best = vs
            .iter()
            .map(|v| {
                let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-300);
                ((v[0] * t[0] + v[1] * t[1] + v[2] * t[2]) / (nv * nt)).clamp(-1.0, 1.0).acos()
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Eigenvalues of a decoded POVM element sum, for diagnostics.
pub fn povm_spectrum(povm: &Povm) -> Vec<f64> {
    let dim = povm.dim();
    let mut s = ComplexMatrix::zeros(dim, dim);
    for e in &povm.elements {
        s += e;
    }
    eigvalsh(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{design_povm, Catalog};

    #[test]
    fn objective_at_design() {
        let cand = Catalog::Tetrahedron.candidate().unwrap();
        let povm = design_povm(&cand).unwrap();
        let cfg = SearchConfig::new(SearchClass::Pure, 2, 4, 2, Method::Adam);
        let x = params_from(&cand.ensemble, &povm, &cfg).unwrap();
        assert!((objective(&x, &cfg).unwrap() - 0.75).abs() < 1e-9);
        let cfg = SearchConfig::new(SearchClass::Mixed, 2, 4, 2, Method::Adam);
        let x = params_from(&cand.ensemble, &povm, &cfg).unwrap();
        assert!((objective(&x, &cfg).unwrap() - 0.75).abs() < 1e-9);
    }

    #[test]
    fn equal_states_give_one_over_n() {
        let cfg = SearchConfig::new(SearchClass::Mixed, 2, 3, 2, Method::Adam);
        let layout = Layout::new(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x: Vec<f64> = (0..layout.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = layout.state_len();
        let first = x[..s].to_vec();
        for i in 1..3 {
            x[i * s..(i + 1) * s].copy_from_slice(&first);
        }
        let (e, p) = layout.decode(&x).unwrap();
        assert!(p.is_valid(1e-9));
        let v = objective(&x, &cfg).unwrap();
        assert!(v <= 1.0 / 3.0 + 1e-12);
        let full: f64 = (0..3)
            .map(|i| crate::qcore::trace_product(&e.power(i, 2).unwrap(), &p.elements[i]))
            .sum::<f64>()
            / 3.0;
        assert!((v - full).abs() < 1e-12);
    }

    #[test]
    fn gradient_step_halving() {
        let cfg = SearchConfig::new(SearchClass::Pure, 2, 3, 2, Method::Adam);
        let layout = Layout::new(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..layout.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let g1 = fd_gradient(&x, &cfg, 1e-4).unwrap();
        let g2 = fd_gradient(&x, &cfg, 5e-5).unwrap();
        let norm: f64 = g2.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff: f64 = g1.iter().zip(&g2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(diff / norm < 1e-4);
    }

    #[test]
    fn grid_orthogonal_pair() {
        let mut cfg = SearchConfig::new(SearchClass::Pure, 2, 2, 1, Method::Grid);
        cfg.resolution = 4;
        cfg.azimuth_resolution = 4;
        let r = grid_search(&cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn classical_grid_matches_exact() {
        let mut cfg = SearchConfig::new(SearchClass::Classical, 2, 3, 2, Method::Grid);
        cfg.resolution = 4;
        let r = grid_search(&cfg).unwrap();
        assert!((r.value - 2.5 / 3.0).abs() < 1e-12);
    }
}
