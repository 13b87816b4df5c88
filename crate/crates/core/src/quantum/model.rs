//! Quantum models: induced behaviors, Bell operators, eigenstates and visibilities.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::{self, c, CMat, CVec};
use super::povm::{fourier_assemblage, Assemblage};
use super::state::{Ket, State, RANK_TOL};
use crate::error::{Error, Result};
use crate::scenario::{BellExpression, Behavior, Scenario};

/// A state paired with measurements on each of its tensor factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumModel {
    pub state: State,
    pub assemblage: Assemblage,
}

impl QuantumModel {
    pub fn new(state: impl Into<State>, assemblage: Assemblage) -> Result<Self> {
        let state = state.into();
        if state.dims() != assemblage.dims().as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "state dimensions {:?} but measurements act on {:?}",
                state.dims(),
                assemblage.dims()
            )));
        }
        Ok(Self { state, assemblage })
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let a = &self.assemblage;
        Scenario::new((0..a.parties()).map(|p| a.inputs(p)).collect(), a.outputs())
    }

    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        Self::new(self.state.permute_parties(perm)?, self.assemblage.permute_parties(perm)?)
    }
}

/// `<psi| M_1 (x) ... (x) M_n |psi>` for every outcome tuple of one setting, outcome-major.
fn outcome_block(psi: &CVec, dims: &[usize], ops: &[&[CMat]], out: &mut [f64], weight: f64) {
    fn rec(
        v: &CVec,
        p: usize,
        dims: &[usize],
        ops: &[&[CMat]],
        psi: &CVec,
        out: &mut [f64],
        offset: usize,
        weight: f64,
    ) {
        let k = ops[p].len();
        let stride = out.len() / k.pow(p as u32 + 1);
        for (a, m) in ops[p].iter().enumerate() {
            let base = offset + a * stride;
            if m.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let w = linalg::apply_local(m, p, dims, v);
            if p + 1 == ops.len() {
                out[base] += weight * psi.dotc(&w).re;
            } else {
                rec(&w, p + 1, dims, ops, psi, out, base, weight);
            }
        }
    }
    rec(psi, 0, dims, ops, psi, out, 0, weight);
}

/// Outcome distribution `P(a|x) = Tr(rho (x)_p M^{a_p}_{x_p})` for every setting.
pub fn behavior_of(model: &QuantumModel) -> Result<Behavior> {
    let sc = model.scenario()?;
    let dims = model.state.dims().to_vec();
    let components: Vec<(f64, CVec)> = match &model.state {
        State::Pure(k) => vec![(1.0, k.amplitudes().clone())],
        State::Mixed { rho, .. } => {
            let (w, v) = linalg::eigh(rho);
            w.iter()
                .enumerate()
                .filter(|(_, &x)| x > 1e-15)
                .map(|(i, &x)| (x, v.column(i).into_owned()))
                .collect()
        }
    };
    let outcomes = sc.outcome_count();
    let mut probs = vec![0.0; sc.behavior_len()];
    for s in 0..sc.setting_count() {
        let settings = sc.decode_settings(s);
        let ops: Vec<&[CMat]> = settings
            .iter()
            .enumerate()
            .map(|(p, &x)| model.assemblage.povm(p, x).elements())
            .collect();
        let block = &mut probs[s * outcomes..(s + 1) * outcomes];
        for (w, v) in &components {
            outcome_block(v, &dims, &ops, block, *w);
        }
    }
    // round-off below the positivity tolerance of the POVMs
    for p in &mut probs {
        if *p < 0.0 && *p > -1e-9 {
            *p = 0.0;
        }
    }
    Behavior::new(sc, probs)
}

/// Value of `expr` on the behavior of `model`.
pub fn evaluate(expr: &BellExpression, model: &QuantumModel) -> Result<f64> {
    expr.evaluate(&behavior_of(model)?)
}

fn check_compatible(expr: &BellExpression, assemblage: &Assemblage) -> Result<()> {
    let sc = expr.scenario();
    let ok = sc.parties() == assemblage.parties()
        && sc.outputs() == assemblage.outputs()
        && (0..sc.parties()).all(|p| sc.inputs(p) == assemblage.inputs(p));
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "expression scenario {:?} with K = {} does not match the measurements",
            sc.input_counts(),
            sc.outputs()
        )))
    }
}

/// `sum_a c(a|s) (x)_p M^{a_p}_{s_p}` for one setting `s`.
pub(crate) fn setting_operator(coeffs: &[f64], ops: &[&[CMat]]) -> Option<CMat> {
    let k = ops[0].len();
    let stride = coeffs.len() / k;
    let mut acc: Option<CMat> = None;
    for (a, m) in ops[0].iter().enumerate() {
        let sub = &coeffs[a * stride..(a + 1) * stride];
        if sub.iter().all(|&x| x == 0.0) || m.iter().all(|z| z.norm() == 0.0) {
            continue;
        }
        let term = if ops.len() == 1 {
            m.scale(sub[0])
        } else {
            match setting_operator(sub, &ops[1..]) {
                Some(rest) => linalg::kron(m, &rest),
                None => continue,
            }
        };
        acc = Some(match acc {
            Some(x) => x + term,
            None => term,
        });
    }
    acc
}

fn setting_operators(expr: &BellExpression, assemblage: &Assemblage) -> Result<Vec<CMat>> {
    check_compatible(expr, assemblage)?;
    let coeffs = expr.expand_to_coefficients();
    let sc = expr.scenario();
    let total: usize = assemblage.dims().iter().product();
    let outcomes = sc.outcome_count();
    Ok((0..sc.setting_count())
        .map(|s| {
            let settings = sc.decode_settings(s);
            let ops: Vec<&[CMat]> = settings
                .iter()
                .enumerate()
                .map(|(p, &x)| assemblage.povm(p, x).elements())
                .collect();
            setting_operator(&coeffs.data()[s * outcomes..(s + 1) * outcomes], &ops)
                .unwrap_or_else(|| CMat::zeros(total, total))
        })
        .collect())
}

/// Hermitian operator whose expectation in any state equals the value of `expr`.
pub fn bell_operator(expr: &BellExpression, assemblage: &Assemblage) -> Result<CMat> {
    let ops = setting_operators(expr, assemblage)?;
    let total: usize = assemblage.dims().iter().product();
    let sum = ops.into_iter().fold(CMat::zeros(total, total), |a, b| a + b);
    Ok(linalg::hermitize(&sum))
}

/// Smallest eigenvalue of a Hermitian operator and a unit eigenvector.
pub fn min_eig_state(b: &CMat, dims: &[usize]) -> Result<(f64, Ket)> {
    linalg::check_hermitian(b)?;
    let (w, v) = linalg::eigh(b);
    let ket = Ket::from_vector(dims.to_vec(), v.column(0).into_owned())?;
    Ok((w[0], ket))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Visibility {
    pub visibility: f64,
    /// False when the state does not violate the inequality; `visibility` is then 1.
    pub violates: bool,
    pub state_value: f64,
    pub noise_value: f64,
    /// Ranks of the reduced states, which fix the support of the noise.
    pub ranks: Vec<usize>,
}

/// Tensor product of the normalized support projectors of the reduced states.
pub fn local_noise(state: &State) -> (CMat, Vec<usize>) {
    let mut noise = linalg::identity(1);
    let mut ranks = Vec::new();
    for p in 0..state.dims().len() {
        let r = state.reduced(p);
        let proj = linalg::support_projector(&r, RANK_TOL);
        let d = linalg::rank(&r, RANK_TOL);
        ranks.push(d);
        noise = linalg::kron(&noise, &proj.scale(1.0 / d as f64));
    }
    (noise, ranks)
}

/// White-noise threshold `v = (S(noise) - bound) / (S(noise) - S(psi))`.
///
/// The noise is the maximally mixed state on the support of the reduced states,
/// i.e. on `C^{d_1} (x) C^{d_2} (x) C^{d_3}` with `d_j` the marginal ranks.
pub fn visibility(expr: &BellExpression, model: &QuantumModel) -> Result<Visibility> {
    let state_value = evaluate(expr, model)?;
    let (noise, ranks) = local_noise(&model.state);
    let noisy = QuantumModel::new(State::mixed(model.state.dims().to_vec(), noise)?, model.assemblage.clone())?;
    let noise_value = evaluate(expr, &noisy)?;
    let bound = expr.bound_f64();
    let violates = !expr.comparator().holds(state_value, bound);
    let visibility = if violates {
        (noise_value - bound) / (noise_value - state_value)
    } else {
        1.0
    };
    Ok(Visibility {
        visibility,
        violates,
        state_value,
        noise_value,
        ranks,
    })
}

/// GHZ_K value `floor((K-1)/2)` of the cyclic family and its visibility.
pub fn ghz_value_closed_form(k: usize) -> (f64, f64) {
    let m = (k - 1) / 2;
    (m as f64, (k - 1) as f64 / (2 * (k - 1) - m) as f64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FourierOptimum {
    /// `phases[p][x]`; inputs after the first carry the free parameters.
    pub phases: Vec<Vec<f64>>,
    pub value: f64,
    pub state: Ket,
    pub ranks: Vec<usize>,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct FourierSearch {
    /// Grid step in units where the phase period is `K`; `1/16` is an angle step of `pi/(8K)`.
    pub grid_step: f64,
    /// Coordinate descent stops once its step falls below this.
    pub refine_tol: f64,
}

impl Default for FourierSearch {
    fn default() -> Self {
        Self {
            grid_step: 1.0 / 16.0,
            refine_tol: 1e-7,
        }
    }
}

/// Minimizes the Bell-operator ground energy over Fourier measurement phases.
///
/// A diagonal unitary `diag(exp(2 pi i j t / K))` on one party shifts the phase of
/// both of its inputs by `t` and leaves the spectrum unchanged, so the first input
/// of every party is held at phase 0. The remaining phases are scanned on a grid
/// over one period `[0, K)` and the best point is polished by coordinate descent.
pub fn optimize_fourier_phases(expr: &BellExpression, search: &FourierSearch) -> Result<FourierOptimum> {
    let sc = expr.scenario();
    let k = sc.outputs();
    let n = sc.parties();
    let zero_phases: Vec<Vec<f64>> = (0..n).map(|p| vec![0.0; sc.inputs(p)]).collect();
    let base = fourier_assemblage(k, &zero_phases)?;
    let dims = vec![k; n];
    let ops = setting_operators(expr, &base)?;
    let settings: Vec<Vec<usize>> = (0..sc.setting_count()).map(|s| sc.decode_settings(s)).collect();
    let free: Vec<(usize, usize)> = (0..n).flat_map(|p| (1..sc.inputs(p)).map(move |x| (p, x))).collect();
    let total: usize = dims.iter().product();
    let digits: Vec<Vec<usize>> = (0..total)
        .map(|mut i| {
            let mut d = vec![0; n];
            for p in (0..n).rev() {
                d[p] = i % k;
                i /= k;
            }
            d
        })
        .collect();

    // U(t) M_o(0) U(t)^dagger = M_o(t) with U(t) = diag(exp(2 pi i j t / K))
    let operator = |params: &[f64]| -> CMat {
        let mut phase = vec![vec![0.0; 2]; n];
        for (i, &(p, x)) in free.iter().enumerate() {
            if phase[p].len() <= x {
                phase[p].resize(x + 1, 0.0);
            }
            phase[p][x] = params[i];
        }
        let mut b = CMat::zeros(total, total);
        for (op, s) in ops.iter().zip(&settings) {
            let angle: Vec<f64> = digits
                .iter()
                .map(|d| (0..n).map(|p| 2.0 * PI * d[p] as f64 * phase[p].get(s[p]).copied().unwrap_or(0.0) / k as f64).sum())
                .collect();
            for r in 0..total {
                for col in 0..total {
                    let z = op[(r, col)];
                    if z.re != 0.0 || z.im != 0.0 {
                        b[(r, col)] += z * Complex64::from_polar(1.0, angle[r] - angle[col]);
                    }
                }
            }
        }
        b
    };
    let energy = |params: &[f64]| linalg::min_eigenvalue(&operator(params));

    let steps = ((k as f64) / search.grid_step).round() as usize;
    let grid_points = steps.pow(free.len() as u32);
    let best = (0..grid_points)
        .into_par_iter()
        .map(|g| {
            let mut rest = g;
            let params: Vec<f64> = (0..free.len())
                .map(|_| {
                    let i = rest % steps;
                    rest /= steps;
                    i as f64 * search.grid_step
                })
                .collect();
            (energy(&params), g, params)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .ok_or_else(|| Error::InvalidConfig("empty phase grid".into()))?;

    let (mut value, _, mut params) = best;
    let mut evaluations = grid_points;
    let mut step = search.grid_step / 2.0;
    while step > search.refine_tol {
        let mut moved = false;
        for i in 0..params.len() {
            for dir in [1.0, -1.0] {
                let mut trial = params.clone();
                trial[i] += dir * step;
                let v = energy(&trial);
                evaluations += 1;
                if v < value - 1e-15 {
                    value = v;
                    params = trial;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }

    let mut phases = zero_phases;
    for (i, &(p, x)) in free.iter().enumerate() {
        phases[p][x] = params[i].rem_euclid(k as f64);
    }
    let assemblage = fourier_assemblage(k, &phases)?;
    let (value, state) = min_eig_state(&bell_operator(expr, &assemblage)?, &dims)?;
    let ranks = State::Pure(state.clone()).reduced_ranks();
    Ok(FourierOptimum {
        phases,
        value,
        state,
        ranks,
        evaluations,
    })
}

/// Residual `|B v - lambda v|`.
pub fn eigen_residual(b: &CMat, value: f64, ket: &Ket) -> f64 {
    let v = ket.amplitudes();
    (b * v - v * c(value, 0.0)).norm()
}
