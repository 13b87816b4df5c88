//! Expressions in the residue probabilities `E(j|x_1..x_n) = P(sum_p X_p = j mod K)`.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};

use super::behavior::{Behavior, Scenario};
use super::expression::{BellExpression, BracketTerm, Comparator, PartySetting, Rational, SymmetryGroup};
use crate::error::{Error, Result};

/// `sum_{settings, j} c(settings, j) E(j|settings)  (cmp)  bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricSumExpression {
    scenario: Scenario,
    coefficients: BTreeMap<(Vec<usize>, usize), Rational>,
    comparator: Comparator,
    bound: Rational,
}

impl SymmetricSumExpression {
    pub fn new(
        scenario: Scenario,
        entries: impl IntoIterator<Item = (Vec<usize>, usize, Rational)>,
        comparator: Comparator,
        bound: Rational,
    ) -> Result<Self> {
        let mut coefficients = BTreeMap::new();
        for (settings, j, c) in entries {
            if settings.len() != scenario.parties()
                || settings.iter().enumerate().any(|(p, &x)| x >= scenario.inputs(p))
                || j >= scenario.outputs()
            {
                return Err(Error::IndexOutOfRange(format!("E({j}|{settings:?})")));
            }
            *coefficients.entry((settings, j)).or_insert_with(Rational::zero) += c;
        }
        coefficients.retain(|_, c| !c.is_zero());
        Ok(Self {
            scenario,
            coefficients,
            comparator,
            bound,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn coefficients(&self) -> &BTreeMap<(Vec<usize>, usize), Rational> {
        &self.coefficients
    }

    pub fn evaluate(&self, behavior: &Behavior) -> Result<f64> {
        if behavior.scenario() != &self.scenario {
            return Err(Error::ScenarioMismatch("residue expression and behavior differ".into()));
        }
        Ok(self
            .coefficients
            .iter()
            .map(|((s, j), c)| c.to_f64().unwrap_or(f64::NAN) * behavior.residue_probability(s, *j))
            .sum())
    }

    /// Fills in the party-permutation orbit of each listed `E(j|settings)`.
    pub fn symmetrize(&self, group: SymmetryGroup) -> Result<Self> {
        if !self.scenario.is_homogeneous() {
            return Err(Error::HeterogeneousScenario);
        }
        let elements = group.elements(self.scenario.parties());
        let mut out: BTreeMap<(Vec<usize>, usize), Rational> = BTreeMap::new();
        for ((s, j), c) in &self.coefficients {
            if let Some(prev) = out.get(&(s.clone(), *j)) {
                if prev != c {
                    return Err(Error::InconsistentOrbit {
                        first: format!("E({j}|{s:?})"),
                        second: format!("weight {prev}"),
                    });
                }
                continue;
            }
            for g in &elements {
                let mut image = vec![0; s.len()];
                for (p, &q) in g.iter().enumerate() {
                    image[q] = s[p];
                }
                out.entry((image, *j)).or_insert(*c);
            }
        }
        Self::new(
            self.scenario.clone(),
            out.into_iter().map(|((s, j), c)| (s, j, c)),
            self.comparator,
            self.bound,
        )
    }

    /// Rewrites every `E(j|s)` as a combination of brackets `<[sum_p X_p + l]_K>`, `l = 0..K`.
    pub fn to_bell_expression(&self) -> Result<BellExpression> {
        let k = self.scenario.outputs();
        let inverse = residue_indicator_weights(k);
        let n = self.scenario.parties();
        let mut terms = Vec::new();
        for ((s, j), c) in &self.coefficients {
            for (l, a) in inverse[*j].iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let settings = s
                    .iter()
                    .map(|&x| Some(PartySetting { input: x, coeff: 1 }))
                    .collect::<Vec<_>>();
                debug_assert_eq!(settings.len(), n);
                terms.push(BracketTerm::new(c * a, settings, l as i64));
            }
        }
        BellExpression::new(self.scenario.clone(), terms, self.comparator, self.bound)
    }
}

/// `w[j][l]` such that `sum_l w[j][l] * ((r + l) mod K) = [r == j]` for every residue `r`.
///
/// The circulant matrix `M[r][l] = (r + l) mod K` is invertible for every `K >= 2`,
/// so the rows are found by exact Gauss-Jordan elimination.
pub fn residue_indicator_weights(k: usize) -> Vec<Vec<Rational>> {
    let kk = k as i64;
    // augmented [M | I]
    let mut m: Vec<Vec<Rational>> = (0..k)
        .map(|r| {
            let mut row: Vec<Rational> = (0..k)
                .map(|l| Rational::from_integer((r as i64 + l as i64).rem_euclid(kk)))
                .collect();
            row.extend((0..k).map(|c| if c == r { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !m[r][col].is_zero()).expect("circulant is invertible");
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for v in &mut m[col] {
            *v *= inv;
        }
        for r in 0..k {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col];
                for c in 0..2 * k {
                    let sub = f * m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
    }
    // M^{-1}[l][r]; weights for residue j are column j of M^{-1}
    (0..k)
        .map(|j| (0..k).map(|l| m[l][k + j]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_weights_reproduce_delta() {
        for k in 2..=10 {
            let w = residue_indicator_weights(k);
            for j in 0..k {
                for r in 0..k {
                    let v: Rational = (0..k)
                        .map(|l| w[j][l] * Rational::from_integer(((r + l) % k) as i64))
                        .sum();
                    let expect = if r == j { Rational::one() } else { Rational::zero() };
                    assert_eq!(v, expect, "k={k} j={j} r={r}");
                }
            }
        }
    }

    #[test]
    fn symmetrize_fills_orbits() {
        let sc = Scenario::tripartite(3).unwrap();
        let e = SymmetricSumExpression::new(
            sc,
            [
                (vec![0, 0, 1], 1, Rational::from_integer(-1)),
                (vec![1, 1, 1], 2, Rational::from_integer(2)),
            ],
            Comparator::AtMost,
            Rational::zero(),
        )
        .unwrap()
        .symmetrize(SymmetryGroup::Full)
        .unwrap();
        assert_eq!(e.coefficients().len(), 4);
        assert_eq!(
            e.coefficients()[&(vec![1, 0, 0], 1)],
            Rational::from_integer(-1)
        );
    }

    #[test]
    fn rejects_bad_indices() {
        let sc = Scenario::tripartite(3).unwrap();
        let r = SymmetricSumExpression::new(
            sc,
            [(vec![0, 2, 0], 1, Rational::one())],
            Comparator::AtMost,
            Rational::zero(),
        );
        assert!(r.is_err());
    }
}
