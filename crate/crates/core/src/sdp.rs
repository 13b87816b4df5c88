//! Interior-point solver for the single-measurement POVM problem
//!
//! ```text
//! minimize   sum_k Tr(F_k M_k)     subject to  M_k >= 0,  sum_k M_k = I
//! maximize   Tr(Y)                 subject to  Y <= F_k  for every k
//! ```
//!
//! Iterates stay primal and dual feasible, so the gap `sum_k Tr(M_k (F_k - Y))` is
//! non-negative throughout. Search directions use Nesterov-Todd scaling; the only
//! linear system is the `d^2 x d^2` Schur complement in `dY`.

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::linalg::{self, CMat};
use crate::quantum::{bell_operator, Povm, QuantumModel, State};
use crate::scenario::BellExpression;

/// Costs `F_k` of one measurement with everything else held fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct PovmSubproblem {
    costs: Vec<CMat>,
}

impl PovmSubproblem {
    pub fn new(costs: Vec<CMat>) -> Result<Self> {
        let d = costs.first().map_or(0, CMat::nrows);
        if costs.len() < 2 || d == 0 {
            return Err(Error::InvalidConfig("need at least two non-empty cost operators".into()));
        }
        for f in &costs {
            if f.nrows() != d || f.ncols() != d {
                return Err(Error::DimensionMismatch("cost operators differ in size".into()));
            }
            linalg::check_hermitian(f)?;
        }
        Ok(Self {
            costs: costs.iter().map(linalg::hermitize).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.costs[0].nrows()
    }

    pub fn outputs(&self) -> usize {
        self.costs.len()
    }

    pub fn costs(&self) -> &[CMat] {
        &self.costs
    }

    /// `sum_k Tr(F_k M_k)`
    pub fn objective(&self, elements: &[CMat]) -> f64 {
        self.costs
            .iter()
            .zip(elements)
            .map(|(f, m)| linalg::trace_product(f, m).re)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub povm: Povm,
    #[serde(with = "crate::quantum::serde_cmat")]
    pub dual: CMat,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    /// `(primal, dual)` at every iterate.
    pub history: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    pub max_iterations: usize,
    /// Stop once the gap falls below `gap_tol * max(1, |primal|)`.
    pub gap_tol: f64,
    /// Largest gap still accepted when progress stalls.
    pub accept_gap: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gap_tol: 1e-9,
            accept_gap: 1e-7,
        }
    }
}

/// `sum_k Tr(F_k M_k)` as a function of measurement `(party, input)` of `model`.
///
/// Settings in which the measurement does not appear contribute a constant,
/// spread over the costs as `c/d * I`, so the objective equals the full value of
/// `expr` for every choice of the measurement.
pub fn contract_costs(expr: &BellExpression, model: &QuantumModel, party: usize, input: usize) -> Result<PovmSubproblem> {
    let a = &model.assemblage;
    let sc = expr.scenario();
    if party >= a.parties() || input >= a.inputs(party) {
        return Err(Error::IndexOutOfRange(format!("party {party} input {input}")));
    }
    // the target measurement replaced by a basis of delta operators is too costly;
    // instead contract the rest of the Bell operator against the state
    let dims = model.state.dims().to_vec();
    let dp = dims[party];
    let k = sc.outputs();
    let coeffs = expr.expand_to_coefficients();
    let outcomes = sc.outcome_count();
    let others: Vec<usize> = (0..sc.parties()).filter(|&q| q != party).collect();
    let rest_dims: Vec<usize> = others.iter().map(|&q| dims[q]).collect();
    let rest_total: usize = rest_dims.iter().product();
    let stride_p = k.pow((sc.parties() - 1 - party) as u32);

    let mut rest_ops = vec![CMat::zeros(rest_total, rest_total); k];
    let mut constant_settings = Vec::new();
    for s in 0..sc.setting_count() {
        let settings = sc.decode_settings(s);
        if settings[party] != input {
            constant_settings.push(s);
            continue;
        }
        let block = &coeffs.data()[s * outcomes..(s + 1) * outcomes];
        let ops: Vec<&[CMat]> = others.iter().map(|&q| a.povm(q, settings[q]).elements()).collect();
        for (kk, acc) in rest_ops.iter_mut().enumerate() {
            // outcomes with a_party = kk, remaining parties in order
            let sub: Vec<f64> = (0..outcomes / k)
                .map(|r| {
                    let hi = r / stride_p;
                    let lo = r % stride_p;
                    block[(hi * k + kk) * stride_p + lo]
                })
                .collect();
            if sub.iter().all(|&x| x == 0.0) {
                continue;
            }
            if ops.is_empty() {
                *acc += linalg::identity(1).scale(sub[0]);
            } else if let Some(op) = crate::quantum::setting_operator(&sub, &ops) {
                *acc += op;
            }
        }
    }

    let components: Vec<(f64, crate::quantum::linalg::CVec)> = match &model.state {
        State::Pure(ket) => vec![(1.0, ket.amplitudes().clone())],
        State::Mixed { rho, .. } => {
            let (w, v) = linalg::eigh(rho);
            w.iter()
                .enumerate()
                .filter(|(_, &x)| x > 1e-15)
                .map(|(i, &x)| (x, v.column(i).into_owned()))
                .collect()
        }
    };
    let mut costs = vec![CMat::zeros(dp, dp); k];
    for (w, v) in &components {
        let psi = linalg::party_matrix(v, &dims, party);
        for (f, o) in costs.iter_mut().zip(&rest_ops) {
            *f += (&psi * o.transpose() * psi.adjoint()).scale(*w);
        }
    }

    // remaining settings evaluated through the Bell operator restricted to them
    if !constant_settings.is_empty() {
        let total = bell_operator(expr, a)?;
        let with_target: f64 = {
            let current: Vec<CMat> = a.povm(party, input).elements().to_vec();
            costs.iter().zip(&current).map(|(f, m)| linalg::trace_product(f, m).re).sum()
        };
        let full = expectation(&total, &model.state);
        let c = (full - with_target) / dp as f64;
        for f in &mut costs {
            *f += linalg::identity(dp).scale(c);
        }
    }
    PovmSubproblem::new(costs.iter().map(linalg::hermitize).collect())
}

pub(crate) fn expectation(op: &CMat, state: &State) -> f64 {
    match state {
        State::Pure(k) => {
            let v = k.amplitudes();
            v.dotc(&(op * v)).re
        }
        State::Mixed { rho, .. } => linalg::trace_product(op, rho).re,
    }
}

fn scaled_min_eig(x: &CMat, dx: &CMat) -> f64 {
    // smallest eigenvalue of X^{-1/2} dX X^{-1/2}
    let r = linalg::psd_inv_sqrt(x);
    linalg::min_eigenvalue(&(&r * dx * &r))
}

fn max_step(xs: &[CMat], dxs: &[CMat]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (x, dx) in xs.iter().zip(dxs) {
        let m = scaled_min_eig(x, dx);
        if m < 0.0 {
            alpha = alpha.min(-1.0 / m);
        }
    }
    alpha
}

fn nt_scaling(x: &CMat, s: &CMat) -> CMat {
    let sh = linalg::psd_sqrt(s);
    let shi = linalg::psd_inv_sqrt(s);
    let mid = linalg::psd_sqrt(&linalg::hermitize(&(&sh * x * &sh)));
    linalg::hermitize(&(&shi * mid * &shi))
}

fn vec_index(i: usize, j: usize, d: usize) -> usize {
    i + j * d
}

/// Solves the POVM problem to a small duality gap.
pub fn solve_povm_subproblem(problem: &PovmSubproblem) -> Result<SdpSolution> {
    solve_povm_subproblem_with(problem, &SdpOptions::default())
}

pub fn solve_povm_subproblem_with(problem: &PovmSubproblem, opts: &SdpOptions) -> Result<SdpSolution> {
    let d = problem.dim();
    let k = problem.outputs();
    let scale = problem
        .costs
        .iter()
        .flat_map(|f| f.iter())
        .fold(0.0f64, |a, z| a.max(z.norm()))
        .max(1e-300);

    let identical = problem.costs.iter().all(|f| (f - &problem.costs[0]).iter().all(|z| z.norm() <= 1e-12 * scale.max(1.0)));
    if identical {
        let f = problem.costs[0].clone();
        let povm = Povm::uniform(d, k);
        let value = f.trace().re;
        return Ok(SdpSolution {
            povm,
            dual: f,
            primal_value: value,
            dual_value: value,
            gap: 0.0,
            iterations: 0,
            history: vec![(value, value)],
        });
    }

    let f: Vec<CMat> = problem.costs.iter().map(|m| m.scale(1.0 / scale)).collect();
    let low = f.iter().map(linalg::min_eigenvalue).fold(f64::INFINITY, f64::min);
    let mut x: Vec<CMat> = vec![linalg::identity(d).scale(1.0 / k as f64); k];
    let mut y = linalg::identity(d).scale(low - 1.0);
    let mut s: Vec<CMat> = f.iter().map(|fk| fk - &y).collect();
    let n = (k * d) as f64;
    let mut history = Vec::new();
    let values = |x: &[CMat], y: &CMat| {
        let p: f64 = f.iter().zip(x).map(|(a, b)| linalg::trace_product(a, b).re).sum();
        (p, y.trace().re)
    };

    let mut iterations = 0;
    let mut converged = false;
    let mut stalls = 0;
    while iterations < opts.max_iterations {
        let (p, du) = values(&x, &y);
        history.push((p * scale, du * scale));
        let gap: f64 = x.iter().zip(&s).map(|(a, b)| linalg::trace_product(a, b).re).sum();
        if gap <= opts.gap_tol * p.abs().max(1.0) {
            converged = true;
            break;
        }
        iterations += 1;
        let mu = gap / n;
        let w: Vec<CMat> = x.iter().zip(&s).map(|(a, b)| nt_scaling(a, b)).collect();
        let s_inv: Vec<CMat> = s.iter().map(|m| linalg::spectral_map(m, |v| 1.0 / v)).collect();

        let mut schur = CMat::zeros(d * d, d * d);
        for wk in &w {
            schur += wk.transpose().kronecker(wk);
        }
        let chol = match Cholesky::new(linalg::hermitize(&schur)) {
            Some(c) => c,
            None => break,
        };
        let direction = |sigma: f64| -> (Vec<CMat>, CMat) {
            let mut rhs = CMat::zeros(d, d);
            for (xk, sik) in x.iter().zip(&s_inv) {
                rhs += xk - sik.scale(sigma * mu);
            }
            let mut b = nalgebra::DVector::<Complex64>::zeros(d * d);
            for i in 0..d {
                for j in 0..d {
                    b[vec_index(i, j, d)] = rhs[(i, j)];
                }
            }
            let sol = chol.solve(&b);
            let dy = linalg::hermitize(&CMat::from_fn(d, d, |i, j| sol[vec_index(i, j, d)]));
            let dx: Vec<CMat> = x
                .iter()
                .zip(&s_inv)
                .zip(&w)
                .map(|((xk, sik), wk)| linalg::hermitize(&(sik.scale(sigma * mu) - xk + wk * &dy * wk)))
                .collect();
            (dx, dy)
        };
        let steps = |dx: &[CMat], dy: &CMat| {
            let ds: Vec<CMat> = (0..k).map(|_| -dy.clone()).collect();
            (max_step(&x, dx), max_step(&s, &ds))
        };

        let (dx_aff, dy_aff) = direction(0.0);
        let (ap, ad) = steps(&dx_aff, &dy_aff);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let gap_aff: f64 = x
            .iter()
            .zip(&dx_aff)
            .zip(&s)
            .map(|((xk, dxk), sk)| linalg::trace_product(&(xk + dxk.scale(ap)), &(sk - dy_aff.scale(ad))).re)
            .sum();
        let sigma = (gap_aff / gap).clamp(0.0, 1.0).powi(3);

        let (dx, dy) = direction(sigma);
        let (ap, ad) = steps(&dx, &dy);
        let ap = (0.98 * ap).min(1.0);
        let ad = (0.98 * ad).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        let next_x: Vec<CMat> = x.iter().zip(&dx).map(|(xk, dxk)| linalg::hermitize(&(xk + dxk.scale(ap)))).collect();
        let next_y = linalg::hermitize(&(&y + dy.scale(ad)));
        let next_s: Vec<CMat> = f.iter().map(|fk| fk - &next_y).collect();
        let next_gap: f64 = next_x.iter().zip(&next_s).map(|(a, b)| linalg::trace_product(a, b).re).sum();
        if !next_gap.is_finite() || next_x.iter().any(|m| m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            break;
        }
        stalls = if next_gap >= 0.999 * gap { stalls + 1 } else { 0 };
        x = next_x;
        y = next_y;
        s = next_s;
        if stalls >= 5 {
            break;
        }
    }

    // restore exact completeness and dual feasibility; the congruence keeps clipped blocks PSD
    let x: Vec<CMat> = x.iter().map(|xk| linalg::spectral_map(xk, |v| v.max(0.0))).collect();
    let total = x.iter().fold(CMat::zeros(d, d), |a, b| a + b);
    let t = linalg::psd_inv_sqrt(&linalg::hermitize(&total));
    let x: Vec<CMat> = x.iter().map(|xk| linalg::hermitize(&(&t * xk * &t))).collect();
    let shift = f.iter().map(|fk| linalg::min_eigenvalue(&(fk - &y))).fold(f64::INFINITY, f64::min);
    if shift < 0.0 {
        y -= linalg::identity(d).scale(-shift);
    }
    let (p, du) = values(&x, &y);
    let (p, du) = (p * scale, du * scale);
    history.push((p, du));
    let solution = SdpSolution {
        povm: Povm::new(x.iter().map(|m| m.scale(1.0)).collect())?,
        dual: y.scale(scale),
        primal_value: p,
        dual_value: du,
        gap: p - du,
        iterations,
        history,
    };
    if converged || solution.gap <= opts.accept_gap * p.abs().max(1.0) {
        Ok(solution)
    } else {
        Err(Error::SdpNotConverged {
            iterations,
            best: Box::new(solution),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::linalg::{c, haar_unitary, random_complex_gaussian};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMat {
        linalg::hermitize(&CMat::from_fn(d, d, |_, _| random_complex_gaussian(rng)))
    }

    fn check(sol: &SdpSolution, p: &PovmSubproblem) {
        assert!(sol.gap >= -1e-8 && sol.gap <= 1e-6, "gap {}", sol.gap);
        assert!(sol.povm.completeness_residual() <= 1e-9);
        for (f, m) in p.costs().iter().zip(sol.povm.elements()) {
            assert!(linalg::min_eigenvalue(&(f - &sol.dual)) >= -1e-8);
            assert!(linalg::min_eigenvalue(m) >= -1e-9);
        }
        assert!((p.objective(sol.povm.elements()) - sol.primal_value).abs() < 1e-9);
        for &(pv, dv) in &sol.history {
            assert!(dv <= pv + 1e-9);
        }
    }

    #[test]
    fn binary_case_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=5 {
            let f0 = random_hermitian(d, &mut rng);
            let f1 = random_hermitian(d, &mut rng);
            let p = PovmSubproblem::new(vec![f0.clone(), f1.clone()]).unwrap();
            let sol = solve_povm_subproblem(&p).unwrap();
            check(&sol, &p);
            // M0 = projector onto the negative part of F0 - F1
            let neg = linalg::spectral_map(&(&f0 - &f1), |v| if v < 0.0 { 1.0 } else { 0.0 });
            let expect = linalg::trace_product(&f1, &linalg::identity(d)).re + linalg::trace_product(&(&f0 - &f1), &neg).re;
            assert!((sol.primal_value - expect).abs() < 1e-7, "d={d}");
        }
    }

    #[test]
    fn commuting_costs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let d = 4;
        let diag: Vec<Vec<f64>> = (0..3).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let costs = diag
            .iter()
            .map(|v| CMat::from_diagonal(&nalgebra::DVector::from_iterator(d, v.iter().map(|&x| c(x, 0.0)))))
            .collect();
        let p = PovmSubproblem::new(costs).unwrap();
        let sol = solve_povm_subproblem(&p).unwrap();
        let expect: f64 = (0..d).map(|i| diag.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min)).sum();
        assert!((sol.primal_value - expect).abs() < 1e-7);
    }

    #[test]
    fn identical_costs_give_uniform_povm() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f = random_hermitian(3, &mut rng);
        let p = PovmSubproblem::new(vec![f.clone(); 4]).unwrap();
        let sol = solve_povm_subproblem(&p).unwrap();
        assert_eq!(sol.povm, Povm::uniform(3, 4));
        assert!((sol.primal_value - f.trace().re).abs() < 1e-12);
    }

    #[test]
    fn random_problems_close_the_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..100 {
            let d = rng.random_range(1..=6);
            let k = rng.random_range(2..=5);
            let scale = 10f64.powf(rng.random_range(-2.0..2.0));
            let costs = (0..k).map(|_| random_hermitian(d, &mut rng).scale(scale)).collect();
            let p = PovmSubproblem::new(costs).unwrap();
            let sol = solve_povm_subproblem(&p).unwrap();
            check(&sol, &p);
        }
    }

    #[test]
    fn beats_sampled_projective_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for k in 2..=3 {
            let costs: Vec<CMat> = (0..k).map(|_| random_hermitian(2, &mut rng)).collect();
            let p = PovmSubproblem::new(costs).unwrap();
            let sol = solve_povm_subproblem(&p).unwrap();
            let mut best = f64::INFINITY;
            for _ in 0..100_000 {
                let u = haar_unitary(2, &mut rng);
                // every assignment of the two basis vectors to outcomes, unused outcomes empty
                for a in 0..k {
                    for b in 0..k {
                        let mut els = vec![CMat::zeros(2, 2); k];
                        els[a] += u.column(0) * u.column(0).adjoint();
                        els[b] += u.column(1) * u.column(1).adjoint();
                        best = best.min(p.objective(&els));
                    }
                }
            }
            assert!(sol.primal_value <= best + 1e-6, "k={k}: {} vs {best}", sol.primal_value);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PovmSubproblem::new(vec![linalg::identity(2)]).is_err());
        assert!(PovmSubproblem::new(vec![linalg::identity(2), linalg::identity(3)]).is_err());
        let mut nh = linalg::identity(2);
        nh[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(PovmSubproblem::new(vec![nh, linalg::identity(2)]), Err(Error::NotHermitian(_))));
    }
}
