//! Scenarios and dense behavior tensors.
//!
//! A behavior is stored as one flat `Vec<f64>`: the setting index is the
//! outer (slow) axis and the outcome index the inner one. Both are mixed-radix
//! numbers with party 0 as the most significant digit, so for three parties
//! the entry `P(a,b,c|x,y,z)` lives at `setting(x,y,z) * K^3 + (a*K + b)*K + c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization tolerance for behaviors produced numerically.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Smallest entry tolerated in a numerically produced behavior.
pub const NEGATIVITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    inputs: Vec<usize>,
    outputs: usize,
}

impl Scenario {
    pub fn new(inputs: Vec<usize>, outputs: usize) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::InvalidScenario("at least one party is required".into()));
        }
        if inputs.contains(&0) {
            return Err(Error::InvalidScenario("every party needs at least one input".into()));
        }
        if outputs < 2 {
            return Err(Error::InvalidScenario(format!(
                "outputs must be at least 2, got {outputs}"
            )));
        }
        Ok(Self { inputs, outputs })
    }

    /// Three parties with two inputs each: the setting of every catalog entry.
    pub fn tripartite(outputs: usize) -> Result<Self> {
        Self::new(vec![2, 2, 2], outputs)
    }

    pub fn parties(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self, party: usize) -> usize {
        self.inputs[party]
    }

    pub fn input_counts(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn is_homogeneous(&self) -> bool {
        self.inputs.windows(2).all(|w| w[0] == w[1])
    }

    pub fn setting_count(&self) -> usize {
        self.inputs.iter().product()
    }

    pub fn outcome_count(&self) -> usize {
        self.outputs.pow(self.parties() as u32)
    }

    pub fn behavior_len(&self) -> usize {
        self.setting_count() * self.outcome_count()
    }

    /// Number of deterministic strategies, `prod_p K^(inputs_p)`, if it fits in a `u64`.
    pub fn strategy_count(&self) -> Option<u64> {
        let total: u32 = self.inputs.iter().map(|&m| m as u32).sum();
        (self.outputs as u64).checked_pow(total)
    }

    /// Total number of (party, input) pairs.
    pub fn total_inputs(&self) -> usize {
        self.inputs.iter().sum()
    }

    pub fn setting_index(&self, settings: &[usize]) -> usize {
        settings
            .iter()
            .zip(&self.inputs)
            .fold(0, |acc, (&x, &m)| acc * m + x)
    }

    pub fn outcome_index(&self, outcomes: &[usize]) -> usize {
        outcomes.iter().fold(0, |acc, &a| acc * self.outputs + a)
    }

    pub fn decode_settings(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.parties()];
        for p in (0..self.parties()).rev() {
            out[p] = index % self.inputs[p];
            index /= self.inputs[p];
        }
        out
    }

    pub fn decode_outcomes(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.parties()];
        for p in (0..self.parties()).rev() {
            out[p] = index % self.outputs;
            index /= self.outputs;
        }
        out
    }

    /// The scenario seen after moving party `p` to slot `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.parties())?;
        let mut inputs = vec![0; self.parties()];
        for (p, &q) in perm.iter().enumerate() {
            inputs[q] = self.inputs[p];
        }
        Self::new(inputs, self.outputs)
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::IndexOutOfRange(format!(
            "permutation of length {} for {n} parties",
            perm.len()
        )));
    }
    for &q in perm {
        if q >= n || seen[q] {
            return Err(Error::IndexOutOfRange(format!("{perm:?} is not a permutation")));
        }
        seen[q] = true;
    }
    Ok(())
}

/// Advances a mixed-radix odometer; returns false after the last state.
pub(crate) fn odometer_step(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// Joint conditional probabilities `P(outcomes | settings)` for a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Behavior {
    scenario: Scenario,
    probabilities: Vec<f64>,
}

impl Behavior {
    /// Validates normalization and (approximate) non-negativity.
    pub fn new(scenario: Scenario, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != scenario.behavior_len() {
            return Err(Error::DimensionMismatch(format!(
                "behavior needs {} entries, got {}",
                scenario.behavior_len(),
                probabilities.len()
            )));
        }
        let block = scenario.outcome_count();
        for (s, chunk) in probabilities.chunks(block).enumerate() {
            if let Some(v) = chunk.iter().find(|v| **v < -NEGATIVITY_TOL || !v.is_finite()) {
                return Err(Error::InvalidScenario(format!(
                    "setting {s} has invalid probability {v}"
                )));
            }
            let total: f64 = chunk.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidScenario(format!(
                    "setting {s} sums to {total}, not 1"
                )));
            }
        }
        Ok(Self {
            scenario,
            probabilities,
        })
    }

    pub fn from_fn(
        scenario: Scenario,
        mut f: impl FnMut(&[usize], &[usize]) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(scenario.behavior_len());
        for s in 0..scenario.setting_count() {
            let settings = scenario.decode_settings(s);
            for o in 0..scenario.outcome_count() {
                data.push(f(&settings, &scenario.decode_outcomes(o)));
            }
        }
        Self::new(scenario, data)
    }

    /// Every party answers input `x` with `outputs[p][x]`.
    pub fn deterministic(scenario: Scenario, outputs: &[Vec<usize>]) -> Result<Self> {
        if outputs.len() != scenario.parties()
            || outputs
                .iter()
                .enumerate()
                .any(|(p, o)| o.len() != scenario.inputs(p) || o.iter().any(|&a| a >= scenario.outputs()))
        {
            return Err(Error::ScenarioMismatch(
                "deterministic assignment does not fit the scenario".into(),
            ));
        }
        let mut data = vec![0.0; scenario.behavior_len()];
        let block = scenario.outcome_count();
        for s in 0..scenario.setting_count() {
            let settings = scenario.decode_settings(s);
            let outcomes: Vec<usize> = settings
                .iter()
                .enumerate()
                .map(|(p, &x)| outputs[p][x])
                .collect();
            data[s * block + scenario.outcome_index(&outcomes)] = 1.0;
        }
        Ok(Self {
            scenario,
            probabilities: data,
        })
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let v = 1.0 / scenario.outcome_count() as f64;
        let probabilities = vec![v; scenario.behavior_len()];
        Self {
            scenario,
            probabilities,
        }
    }

    /// Product behavior from per-party marginals `marginals[p][x][a] = P_p(a|x)`.
    pub fn product(scenario: Scenario, marginals: &[Vec<Vec<f64>>]) -> Result<Self> {
        if marginals.len() != scenario.parties() {
            return Err(Error::ScenarioMismatch("one marginal per party expected".into()));
        }
        for (p, m) in marginals.iter().enumerate() {
            if m.len() != scenario.inputs(p) || m.iter().any(|d| d.len() != scenario.outputs()) {
                return Err(Error::ScenarioMismatch(format!("marginal of party {p} has wrong shape")));
            }
        }
        Self::from_fn(scenario, |s, o| {
            s.iter()
                .zip(o)
                .enumerate()
                .map(|(p, (&x, &a))| marginals[p][x][a])
                .product()
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn prob(&self, settings: &[usize], outcomes: &[usize]) -> f64 {
        let sc = &self.scenario;
        self.probabilities[sc.setting_index(settings) * sc.outcome_count() + sc.outcome_index(outcomes)]
    }

    /// Outcome distribution for one setting, indexed by outcome index.
    pub fn setting_block(&self, settings: &[usize]) -> &[f64] {
        let sc = &self.scenario;
        let block = sc.outcome_count();
        let s = sc.setting_index(settings);
        &self.probabilities[s * block..(s + 1) * block]
    }

    /// `E(j|settings) = P(sum_p a_p = j mod K)`.
    pub fn residue_probability(&self, settings: &[usize], residue: usize) -> f64 {
        let k = self.scenario.outputs();
        let mut digits = vec![0usize; self.scenario.parties()];
        let mut total = 0.0;
        for &p in self.setting_block(settings) {
            if digits.iter().sum::<usize>() % k == residue {
                total += p;
            }
            odometer_step(&mut digits, |_| k);
        }
        total
    }

    /// Full correlator `E(x,y,z) = sum (-1)^(a+b+c) P(a,b,c|x,y,z)`; binary outputs only.
    pub fn correlator(&self, settings: &[usize]) -> Result<f64> {
        if self.scenario.outputs() != 2 {
            return Err(Error::WrongOutputCount {
                expected: 2,
                actual: self.scenario.outputs(),
            });
        }
        if settings.len() != self.scenario.parties()
            || settings.iter().enumerate().any(|(p, &x)| x >= self.scenario.inputs(p))
        {
            return Err(Error::IndexOutOfRange(format!("settings {settings:?}")));
        }
        Ok(self.residue_probability(settings, 0) - self.residue_probability(settings, 1))
    }

    /// The behavior in which party `p` plays the role of party `perm[p]`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        let scenario = self.scenario.permuted(perm)?;
        let n = perm.len();
        let src = &self.scenario;
        Self::from_fn(scenario, |s, o| {
            let mut s0 = vec![0; n];
            let mut o0 = vec![0; n];
            for p in 0..n {
                s0[p] = s[perm[p]];
                o0[p] = o[perm[p]];
            }
            self.probabilities[src.setting_index(&s0) * src.outcome_count() + src.outcome_index(&o0)]
        })
    }

    /// Behavior after substituting `old = scale * new + shift (mod K)` for one party's input.
    pub fn relabel_output(&self, party: usize, input: usize, scale: i64, shift: i64) -> Result<Self> {
        let k = self.scenario.outputs() as i64;
        if num_integer_gcd(scale.rem_euclid(k), k) != 1 {
            return Err(Error::InvalidScenario(format!(
                "scale {scale} is not invertible modulo {k}"
            )));
        }
        let sc = self.scenario.clone();
        Self::from_fn(sc.clone(), |s, o| {
            if s[party] != input {
                return self.prob(s, o);
            }
            let mut old = o.to_vec();
            old[party] = (scale * o[party] as i64 + shift).rem_euclid(k) as usize;
            self.prob(s, &old)
        })
    }

    /// Convex combination `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &Behavior, t: f64) -> Result<Self> {
        if self.scenario != other.scenario {
            return Err(Error::ScenarioMismatch("mixing behaviors of different scenarios".into()));
        }
        let data = self
            .probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| t * a + (1.0 - t) * b)
            .collect();
        Ok(Self {
            scenario: self.scenario.clone(),
            probabilities: data,
        })
    }
}

pub(crate) fn num_integer_gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_counts() {
        assert_eq!(Scenario::tripartite(2).unwrap().strategy_count(), Some(64));
        assert_eq!(Scenario::tripartite(3).unwrap().strategy_count(), Some(729));
        assert_eq!(Scenario::tripartite(8).unwrap().strategy_count(), Some(262_144));
    }

    #[test]
    fn rejects_degenerate_scenarios() {
        assert!(Scenario::new(vec![], 2).is_err());
        assert!(Scenario::new(vec![2, 0], 2).is_err());
        assert!(Scenario::new(vec![2, 2], 1).is_err());
    }

    #[test]
    fn index_layout_round_trips() {
        let sc = Scenario::new(vec![2, 3, 2], 3).unwrap();
        for s in 0..sc.setting_count() {
            assert_eq!(sc.setting_index(&sc.decode_settings(s)), s);
        }
        for o in 0..sc.outcome_count() {
            assert_eq!(sc.outcome_index(&sc.decode_outcomes(o)), o);
        }
    }

    #[test]
    fn deterministic_and_uniform_are_normalized() {
        let sc = Scenario::tripartite(3).unwrap();
        let det = Behavior::deterministic(sc.clone(), &[vec![0, 1], vec![2, 0], vec![1, 1]]).unwrap();
        assert_eq!(det.prob(&[1, 0, 1], &[1, 2, 1]), 1.0);
        assert_eq!(det.prob(&[1, 0, 1], &[0, 2, 1]), 0.0);
        let uni = Behavior::uniform(sc);
        assert!((uni.prob(&[0, 0, 0], &[0, 0, 0]) - 1.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized_data() {
        let sc = Scenario::new(vec![1], 2).unwrap();
        assert!(Behavior::new(sc.clone(), vec![0.5, 0.6]).is_err());
        assert!(Behavior::new(sc.clone(), vec![1.1, -0.1]).is_err());
        assert!(Behavior::new(sc, vec![1.0 + 1e-12, -1e-13]).is_ok());
    }

    #[test]
    fn correlators() {
        let sc = Scenario::tripartite(2).unwrap();
        let zero = Behavior::deterministic(sc.clone(), &[vec![0, 0], vec![0, 0], vec![0, 0]]).unwrap();
        let uni = Behavior::uniform(sc.clone());
        for s in 0..8 {
            let x = sc.decode_settings(s);
            assert_eq!(zero.correlator(&x).unwrap(), 1.0);
            assert!(uni.correlator(&x).unwrap().abs() < 1e-15);
        }
        let k3 = Behavior::uniform(Scenario::tripartite(3).unwrap());
        assert!(matches!(
            k3.correlator(&[0, 0, 0]),
            Err(Error::WrongOutputCount { .. })
        ));
    }

    #[test]
    fn permutation_moves_parties() {
        let sc = Scenario::tripartite(3).unwrap();
        let det = Behavior::deterministic(sc, &[vec![1, 2], vec![0, 0], vec![2, 1]]).unwrap();
        let moved = det.permute_parties(&[1, 2, 0]).unwrap();
        let expect = Behavior::deterministic(
            Scenario::tripartite(3).unwrap(),
            &[vec![2, 1], vec![1, 2], vec![0, 0]],
        )
        .unwrap();
        assert_eq!(moved, expect);
    }
}
