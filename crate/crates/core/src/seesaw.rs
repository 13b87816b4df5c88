//! Alternating optimization of states and measurements.
//!
//! Every update is an exact minimization: the state update takes the ground state
//! of the Bell operator and each measurement update solves its POVM subproblem, so
//! the objective never moves away from violation within a restart.
//!
//! Restart `r` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `r`, which makes
//! every restart reproducible on its own and independent of the thread count.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::linalg::{self, CMat, CVec};
use crate::quantum::{
    bell_operator, evaluate, min_eig_state, visibility, Assemblage, Ket, Povm, QuantumModel, State, Visibility,
};
use crate::scenario::{BellExpression, Comparator};
use crate::sdp::{contract_costs, expectation, solve_povm_subproblem_with, PovmSubproblem, SdpOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeesawMode {
    Free,
    FixedState(Ket),
    FixedMeasurements(Assemblage),
    /// One state in the symmetric subspace and the same measurements for every party.
    Symmetric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfig {
    pub dims: Vec<usize>,
    pub restarts: usize,
    pub max_sweeps: usize,
    /// A restart stops once a full sweep improves by less than `tolerance * max(1, |value|)`.
    pub tolerance: f64,
    pub seed: u64,
    pub mode: SeesawMode,
    pub sdp: SdpOptions,
}

impl SeesawConfig {
    /// Defaults: 50 restarts when every `d <= 3`, 200 otherwise; 500 sweeps; tolerance `1e-9`.
    pub fn new(dims: Vec<usize>) -> Self {
        let restarts = if dims.iter().all(|&d| d <= 3) { 50 } else { 200 };
        Self {
            dims,
            restarts,
            max_sweeps: 500,
            tolerance: 1e-9,
            seed: 0,
            mode: SeesawMode::Free,
            sdp: SdpOptions::default(),
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: SeesawMode) -> Self {
        self.mode = mode;
        self
    }

    fn validate(&self, expr: &BellExpression) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        if self.dims.len() != expr.scenario().parties() || self.dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "{} parties but dimensions {:?}",
                expr.scenario().parties(),
                self.dims
            )));
        }
        match &self.mode {
            SeesawMode::FixedState(ket) if ket.dims() != self.dims.as_slice() => Err(Error::DimensionMismatch(format!(
                "state dimensions {:?} but config {:?}",
                ket.dims(),
                self.dims
            ))),
            SeesawMode::FixedMeasurements(a) if a.dims() != self.dims => Err(Error::DimensionMismatch(format!(
                "measurement dimensions {:?} but config {:?}",
                a.dims(),
                self.dims
            ))),
            SeesawMode::Symmetric => {
                let sc = expr.scenario();
                let same_dims = self.dims.windows(2).all(|w| w[0] == w[1]);
                let same_inputs = (1..sc.parties()).all(|p| sc.inputs(p) == sc.inputs(0));
                if same_dims && same_inputs {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig("symmetric mode needs equal dimensions and input counts".into()))
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub initial_value: f64,
    pub final_value: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Value after every accepted or rejected update, in order.
    pub history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawResult {
    pub value: f64,
    pub model: QuantumModel,
    pub visibility: Visibility,
    pub ranks: Vec<usize>,
    pub best_restart: usize,
    pub traces: Vec<RestartTrace>,
}

/// Random projective model: Haar state, and for each measurement a Haar basis split
/// into `K` consecutive groups whose sizes are a uniform composition of `d`.
pub fn initialize_random(dims: &[usize], k: usize, inputs: &[usize], seed: u64) -> Result<QuantumModel> {
    initialize_random_with(dims, k, inputs, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn initialize_random_with<R: Rng + ?Sized>(dims: &[usize], k: usize, inputs: &[usize], rng: &mut R) -> Result<QuantumModel> {
    if dims.len() != inputs.len() {
        return Err(Error::DimensionMismatch("one input count per party".into()));
    }
    let ket = random_ket(dims, rng)?;
    let povms = dims
        .iter()
        .zip(inputs)
        .map(|(&d, &m)| (0..m).map(|_| random_projective(d, k, rng)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    QuantumModel::new(ket, Assemblage::new(povms)?)
}

fn random_ket<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Ket> {
    let total: usize = dims.iter().product();
    let v: Vec<_> = (0..total).map(|_| linalg::random_complex_gaussian(rng)).collect();
    Ket::normalized(dims.to_vec(), v)
}

fn random_projective<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<Povm> {
    // stars and bars: K-1 bar positions among d+K-1 slots
    let mut bars = sample(rng, d + k - 1, k - 1).into_vec();
    bars.sort_unstable();
    let mut groups = Vec::with_capacity(k);
    let mut prev = 0;
    let mut col = 0;
    for (i, &b) in bars.iter().enumerate() {
        let size = b - prev - usize::from(i > 0);
        groups.push((col..col + size).collect());
        col += size;
        prev = b;
    }
    groups.push((col..d).collect());
    let u = linalg::haar_unitary(d, rng);
    Povm::from_basis_groups(&u, &groups)
}

/// Ground state of the Bell operator for fixed measurements.
pub fn seesaw_fixed_measurements(expr: &BellExpression, assemblage: &Assemblage) -> Result<(f64, Ket)> {
    let sign = direction(expr);
    let b = bell_operator(expr, assemblage)?;
    let (v, ket) = min_eig_state(&b.scale(sign), &assemblage.dims())?;
    Ok((sign * v, ket))
}

/// Optimizes the measurements for a fixed state.
pub fn seesaw_fixed_state(expr: &BellExpression, state: &Ket, config: &SeesawConfig) -> Result<SeesawResult> {
    let config = SeesawConfig {
        dims: state.dims().to_vec(),
        mode: SeesawMode::FixedState(state.clone()),
        ..config.clone()
    };
    seesaw(expr, &config)
}

pub fn seesaw(expr: &BellExpression, config: &SeesawConfig) -> Result<SeesawResult> {
    config.validate(expr)?;
    if let SeesawMode::FixedMeasurements(a) = &config.mode {
        let (value, ket) = seesaw_fixed_measurements(expr, a)?;
        let model = QuantumModel::new(ket, a.clone())?;
        let trace = RestartTrace {
            restart: 0,
            initial_value: value,
            final_value: value,
            sweeps: 0,
            converged: true,
            history: vec![value],
        };
        return finish(expr, vec![(model, trace)]);
    }
    let symmetric_basis = match config.mode {
        SeesawMode::Symmetric => Some(symmetric_subspace(&config.dims)),
        _ => None,
    };
    let runs = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            run_restart(expr, config, r, symmetric_basis.as_ref()).map_err(|e| Error::Restart {
                restart: r,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish(expr, runs)
}

fn direction(expr: &BellExpression) -> f64 {
    match expr.comparator() {
        Comparator::AtLeast => 1.0,
        Comparator::AtMost => -1.0,
    }
}

fn finish(expr: &BellExpression, runs: Vec<(QuantumModel, RestartTrace)>) -> Result<SeesawResult> {
    let cmp = expr.comparator();
    let mut best = 0;
    for (i, (_, t)) in runs.iter().enumerate() {
        if cmp.better(t.final_value, runs[best].1.final_value) {
            best = i;
        }
    }
    let model = runs[best].0.clone();
    let value = evaluate(expr, &model)?;
    let visibility = visibility(expr, &model)?;
    let ranks = model.state.reduced_ranks();
    Ok(SeesawResult {
        value,
        model,
        visibility,
        ranks,
        best_restart: best,
        traces: runs.into_iter().map(|(_, t)| t).collect(),
    })
}

struct Restart<'a> {
    expr: &'a BellExpression,
    config: &'a SeesawConfig,
    sign: f64,
    model: QuantumModel,
    /// Objective in the minimization direction, `sign * value`.
    objective: f64,
    history: Vec<f64>,
}

impl Restart<'_> {
    fn record(&mut self) {
        self.history.push(self.sign * self.objective);
    }

    fn subproblem(&self, party: usize, input: usize) -> Result<PovmSubproblem> {
        let sub = contract_costs(self.expr, &self.model, party, input)?;
        PovmSubproblem::new(sub.costs().iter().map(|f| f.scale(self.sign)).collect())
    }

    fn update_measurement(&mut self, party: usize, input: usize) -> Result<()> {
        let sub = self.subproblem(party, input)?;
        let sol = solve_povm_subproblem_with(&sub, &self.config.sdp)?;
        if sol.primal_value < self.objective {
            let mut next = self.model.assemblage.clone();
            next.set_povm(party, input, sol.povm);
            self.model.assemblage = next;
            self.objective = sol.primal_value;
        }
        self.record();
        Ok(())
    }

    /// Shared measurement for all parties: the summed linearization gives a descent
    /// direction, and the step along it is chosen by exact evaluation.
    fn update_shared_measurement(&mut self, input: usize) -> Result<()> {
        let n = self.model.assemblage.parties();
        let mut total: Option<Vec<CMat>> = None;
        for p in 0..n {
            let sub = self.subproblem(p, input)?;
            total = Some(match total {
                None => sub.costs().to_vec(),
                Some(acc) => acc.iter().zip(sub.costs()).map(|(a, b)| a + b).collect(),
            });
        }
        let sol = solve_povm_subproblem_with(&PovmSubproblem::new(total.unwrap_or_default())?, &self.config.sdp)?;
        let current = self.model.assemblage.povm(0, input).clone();
        let mut best: Option<(f64, Assemblage)> = None;
        let mut t = 1.0;
        for _ in 0..12 {
            let mixed: Vec<CMat> = current
                .elements()
                .iter()
                .zip(sol.povm.elements())
                .map(|(a, b)| a.scale(1.0 - t) + b.scale(t))
                .collect();
            let povm = Povm::new(mixed)?;
            let mut a = self.model.assemblage.clone();
            for p in 0..n {
                a.set_povm(p, input, povm.clone());
            }
            let value = self.sign * expectation(&bell_operator(self.expr, &a)?, &self.model.state);
            if value < best.as_ref().map_or(self.objective, |b| b.0) {
                best = Some((value, a));
            }
            t /= 2.0;
        }
        if let Some((value, a)) = best {
            self.model.assemblage = a;
            self.objective = value;
        }
        self.record();
        Ok(())
    }

    fn update_state(&mut self, basis: Option<&CMat>) -> Result<()> {
        let b = bell_operator(self.expr, &self.model.assemblage)?.scale(self.sign);
        let dims = self.model.assemblage.dims();
        let (value, ket) = match basis {
            None => min_eig_state(&b, &dims)?,
            Some(v) => {
                let (w, u) = linalg::eigh(&linalg::hermitize(&(v.adjoint() * &b * v)));
                let vec: CVec = v * u.column(0);
                (w[0], Ket::normalized(dims.clone(), vec.iter().copied().collect())?)
            }
        };
        if value < self.objective {
            self.model.state = State::Pure(ket);
            self.objective = value;
        }
        self.record();
        Ok(())
    }
}

fn run_restart(
    expr: &BellExpression,
    config: &SeesawConfig,
    restart: usize,
    symmetric_basis: Option<&CMat>,
) -> Result<(QuantumModel, RestartTrace)> {
    let sc = expr.scenario();
    let inputs: Vec<usize> = (0..sc.parties()).map(|p| sc.inputs(p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    let mut model = initialize_random_with(&config.dims, sc.outputs(), &inputs, &mut rng)?;
    match &config.mode {
        SeesawMode::FixedState(ket) => model.state = State::Pure(ket.clone()),
        SeesawMode::Symmetric => {
            let mut a = model.assemblage.clone();
            for p in 1..inputs.len() {
                for x in 0..inputs[0] {
                    a.set_povm(p, x, model.assemblage.povm(0, x).clone());
                }
            }
            model.assemblage = a;
            if let Some(v) = symmetric_basis {
                let coeffs: CVec = CVec::from_fn(v.ncols(), |_, _| linalg::random_complex_gaussian(&mut rng));
                let vec: CVec = v * coeffs;
                model.state = State::Pure(Ket::normalized(config.dims.clone(), vec.iter().copied().collect())?);
            }
        }
        _ => {}
    }
    let sign = direction(expr);
    let objective = sign * expectation(&bell_operator(expr, &model.assemblage)?, &model.state);
    let mut run = Restart {
        expr,
        config,
        sign,
        model,
        objective,
        history: Vec::new(),
    };
    run.record();
    let initial_value = sign * objective;
    let update_state = !matches!(config.mode, SeesawMode::FixedState(_));

    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < config.max_sweeps {
        sweeps += 1;
        let before = run.objective;
        match config.mode {
            SeesawMode::Symmetric => {
                for x in 0..inputs[0] {
                    run.update_shared_measurement(x)?;
                }
            }
            _ => {
                for (p, &m) in inputs.iter().enumerate() {
                    for x in 0..m {
                        run.update_measurement(p, x)?;
                    }
                }
            }
        }
        if update_state {
            run.update_state(symmetric_basis)?;
        }
        if before - run.objective < config.tolerance * run.objective.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    let final_value = sign * run.objective;
    Ok((
        run.model,
        RestartTrace {
            restart,
            initial_value,
            final_value,
            sweeps,
            converged,
            history: run.history,
        },
    ))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..n {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// Orthonormal basis (as columns) of the subspace invariant under every party permutation.
pub fn symmetric_subspace(dims: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    let perms = permutations(dims.len());
    let mut proj = CMat::zeros(total, total);
    for perm in &perms {
        let (_, map) = linalg::permute_indices(dims, perm);
        for (old, &new) in map.iter().enumerate() {
            proj[(new, old)] += linalg::c(1.0 / perms.len() as f64, 0.0);
        }
    }
    let (w, v) = linalg::eigh(&linalg::hermitize(&proj));
    let cols: Vec<usize> = (0..total).filter(|&i| w[i] > 0.5).collect();
    CMat::from_fn(total, cols.len(), |r, c| v[(r, cols[c])])
}
