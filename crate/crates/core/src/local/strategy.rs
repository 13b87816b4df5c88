//! Deterministic strategies and exact evaluation of expressions on them.
//!
//! Strategy `index` is a mixed-radix number whose digits are the answers to every
//! (party, input) pair, flattened party-major (`A1, A2, B1, B2, C1, C2` for the
//! tripartite case) with the first pair as the least significant digit.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{BellExpression, Behavior, Comparator, Rational, Scenario};

/// Upper limit on the number of strategies that will be enumerated.
pub const MAX_STRATEGIES: u64 = 1 << 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub index: u64,
    /// `outputs[party][input]`
    pub outputs: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    pub fn behavior(&self, scenario: &Scenario) -> Result<Behavior> {
        Behavior::deterministic(scenario.clone(), &self.outputs)
    }
}

/// Index <-> strategy bijection for one scenario.
#[derive(Clone, Debug)]
pub struct StrategySpace {
    scenario: Scenario,
    offsets: Vec<usize>,
    count: u64,
}

impl StrategySpace {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let count = scenario
            .strategy_count()
            .filter(|&c| c <= MAX_STRATEGIES)
            .ok_or_else(|| {
                Error::Overflow(format!(
                    "{} outputs over {} inputs exceeds the enumeration limit",
                    scenario.outputs(),
                    scenario.total_inputs()
                ))
            })?;
        let mut offsets = Vec::with_capacity(scenario.parties());
        let mut acc = 0;
        for p in 0..scenario.parties() {
            offsets.push(acc);
            acc += scenario.inputs(p);
        }
        Ok(Self {
            scenario: scenario.clone(),
            offsets,
            count,
        })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn slots(&self) -> usize {
        self.scenario.total_inputs()
    }

    /// Flat digit position of `(party, input)`.
    pub fn slot(&self, party: usize, input: usize) -> usize {
        self.offsets[party] + input
    }

    pub fn digits(&self, mut index: u64) -> Vec<usize> {
        let k = self.scenario.outputs() as u64;
        (0..self.slots())
            .map(|_| {
                let d = (index % k) as usize;
                index /= k;
                d
            })
            .collect()
    }

    pub fn strategy(&self, index: u64) -> DeterministicStrategy {
        let digits = self.digits(index);
        let outputs = (0..self.scenario.parties())
            .map(|p| (0..self.scenario.inputs(p)).map(|x| digits[self.slot(p, x)]).collect())
            .collect();
        DeterministicStrategy { index, outputs }
    }

    pub fn iter(&self) -> impl Iterator<Item = DeterministicStrategy> + '_ {
        (0..self.count).map(move |i| self.strategy(i))
    }

    /// Outcome index of every setting, in behavior layout order.
    pub(crate) fn outcome_per_setting(&self, digits: &[usize], out: &mut Vec<usize>) {
        let sc = &self.scenario;
        out.clear();
        let n = sc.parties();
        let mut settings = vec![0usize; n];
        loop {
            let mut o = 0;
            for p in 0..n {
                o = o * sc.outputs() + digits[self.slot(p, settings[p])];
            }
            out.push(o);
            if !crate::scenario::behavior::odometer_step(&mut settings, |p| sc.inputs(p)) {
                break;
            }
        }
    }
}

/// Yields each deterministic strategy exactly once, in index order.
pub fn enumerate_strategies(scenario: &Scenario) -> Result<impl Iterator<Item = DeterministicStrategy>> {
    let space = StrategySpace::new(scenario)?;
    Ok((0..space.count()).map(move |i| space.strategy(i)))
}

/// An expression with weights scaled to integers, evaluated on strategy digits.
#[derive(Clone, Debug)]
pub(crate) struct CompiledExpression {
    k: i64,
    /// common denominator of the weights
    pub scale: i64,
    terms: Vec<(i64, Vec<(usize, i64)>, i64)>,
}

impl CompiledExpression {
    pub fn new(expr: &BellExpression, space: &StrategySpace) -> Self {
        let scale = expr
            .terms()
            .iter()
            .fold(*expr.bound().denom(), |acc, t| acc.lcm(t.weight.denom()));
        let terms = expr
            .terms()
            .iter()
            .map(|t| {
                let w = t.weight.numer() * (scale / t.weight.denom());
                let vars = t
                    .settings
                    .iter()
                    .enumerate()
                    .filter_map(|(p, s)| s.map(|s| (space.slot(p, s.input), s.coeff)))
                    .collect();
                (w, vars, t.offset)
            })
            .collect();
        Self {
            k: expr.outputs() as i64,
            scale,
            terms,
        }
    }

    /// `scale * value` on the given digits.
    pub fn value_scaled(&self, digits: &[usize]) -> i64 {
        self.terms
            .iter()
            .map(|(w, vars, off)| {
                let x = vars.iter().fold(*off, |acc, &(v, c)| acc + c * digits[v] as i64);
                w * x.rem_euclid(self.k)
            })
            .sum()
    }

    pub fn bound_scaled(&self, bound: Rational) -> i64 {
        bound.numer() * (self.scale / bound.denom())
    }
}

/// Exact local extremum of an expression with every strategy attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalBound {
    #[serde(with = "rational_string")]
    pub value: Rational,
    pub comparator: Comparator,
    pub optimizers: Vec<u64>,
    pub strategy_count: u64,
}

impl LocalBound {
    /// Whether the expression's declared bound holds on every strategy.
    pub fn certifies(&self, expr: &BellExpression) -> bool {
        expr.comparator().holds(self.value, expr.bound())
    }
}

const CHUNK: u64 = 1 << 12;

/// Minimum (for `>=`) or maximum (for `<=`) over all deterministic strategies.
///
/// Evaluation is integer arithmetic; optimizers are listed in increasing index order.
pub fn local_bound(expr: &BellExpression) -> Result<LocalBound> {
    let space = StrategySpace::new(expr.scenario())?;
    let compiled = CompiledExpression::new(expr, &space);
    let cmp = expr.comparator();
    let chunks = space.count().div_ceil(CHUNK);
    let partial: Vec<(i64, Vec<u64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(space.count());
            let mut digits = space.digits(start);
            let k = expr.outputs();
            let mut best = None::<i64>;
            let mut idx = Vec::new();
            for i in start..end {
                let v = compiled.value_scaled(&digits);
                match best {
                    Some(b) if v == b => idx.push(i),
                    Some(b) if !cmp.better(v, b) => {}
                    _ => {
                        best = Some(v);
                        idx.clear();
                        idx.push(i);
                    }
                }
                step_little_endian(&mut digits, k);
            }
            (best.unwrap_or(0), idx)
        })
        .collect();
    let mut best = None::<i64>;
    let mut optimizers = Vec::new();
    for (v, idx) in partial {
        if idx.is_empty() {
            continue;
        }
        match best {
            Some(b) if v == b => optimizers.extend(idx),
            Some(b) if !cmp.better(v, b) => {}
            _ => {
                best = Some(v);
                optimizers = idx;
            }
        }
    }
    let value = Rational::new(best.unwrap_or(0), compiled.scale);
    Ok(LocalBound {
        value,
        comparator: cmp,
        optimizers,
        strategy_count: space.count(),
    })
}

/// Increments digits with index 0 least significant.
pub(crate) fn step_little_endian(digits: &mut [usize], k: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < k {
            return true;
        }
        *d = 0;
    }
    false
}

pub(crate) mod rational_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scenario::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::catalog;

    #[test]
    fn enumeration_counts_and_order() {
        for (k, n) in [(2usize, 64u64), (3, 729)] {
            let sc = Scenario::tripartite(k).unwrap();
            let all: Vec<_> = enumerate_strategies(&sc).unwrap().collect();
            assert_eq!(all.len() as u64, n);
            assert!(all.iter().enumerate().all(|(i, s)| s.index == i as u64));
            let mut seen = std::collections::HashSet::new();
            assert!(all.iter().all(|s| seen.insert(s.outputs.clone())));
        }
        let space = StrategySpace::new(&Scenario::tripartite(8).unwrap()).unwrap();
        assert_eq!(space.count(), 262_144);
        // least significant digit is A1
        assert_eq!(space.strategy(1).outputs, vec![vec![1, 0], vec![0, 0], vec![0, 0]]);
        assert_eq!(space.strategy(8).outputs, vec![vec![0, 1], vec![0, 0], vec![0, 0]]);
    }

    #[test]
    fn overflow_guard() {
        let sc = Scenario::new(vec![10; 12], 10).unwrap();
        assert!(matches!(StrategySpace::new(&sc), Err(Error::Overflow(_))));
    }

    #[test]
    fn compiled_matches_float_evaluation() {
        let expr = catalog::catalog("symm-A3", 3).unwrap();
        let space = StrategySpace::new(expr.scenario()).unwrap();
        let compiled = CompiledExpression::new(&expr, &space);
        for s in space.iter().step_by(7) {
            let b = s.behavior(expr.scenario()).unwrap();
            let exact = Rational::new(compiled.value_scaled(&space.digits(s.index)), compiled.scale);
            let f = expr.evaluate(&b).unwrap();
            assert!((f - *exact.numer() as f64 / *exact.denom() as f64).abs() < 1e-12);
            assert_eq!(exact, expr.evaluate_assignment(|p, x| s.outputs[p][x]));
        }
    }

    #[test]
    fn small_bounds() {
        for k in 2..=4 {
            let lb = local_bound(&catalog::mermin_cglmp(k).unwrap()).unwrap();
            assert_eq!(lb.value, Rational::from_integer(k as i64 - 1));
            assert!(lb.optimizers.contains(&0));
        }
        let lb = local_bound(&catalog::catalog("mermin-sym", 3).unwrap()).unwrap();
        assert_eq!(lb.value, Rational::from_integer(2));
    }
}
