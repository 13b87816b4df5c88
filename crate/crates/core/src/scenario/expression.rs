//! Bell expressions written as weighted sums of modular brackets
//! `<[c_1 X_1 + ... + c_n X_n + offset]_K>`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::behavior::{check_permutation, num_integer_gcd, odometer_step, Behavior, Scenario};
use crate::error::{Error, Result};

pub type Rational = Rational64;

/// One party's contribution `coeff * X_input` inside a bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartySetting {
    pub input: usize,
    pub coeff: i64,
}

/// `weight * <[sum_p coeff_p * X_p + offset]_K>`; parties set to `None` are absent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketTerm {
    pub weight: Rational,
    pub settings: Vec<Option<PartySetting>>,
    pub offset: i64,
}

/// Identity of a bracket with the weight stripped off.
pub type BracketKey = (Vec<Option<PartySetting>>, i64);

impl BracketTerm {
    pub fn new(weight: Rational, settings: Vec<Option<PartySetting>>, offset: i64) -> Self {
        Self {
            weight,
            settings,
            offset,
        }
    }

    /// Builds a term from `(party, input, coeff)` triples.
    pub fn from_parts(parties: usize, weight: Rational, parts: &[(usize, usize, i64)], offset: i64) -> Self {
        let mut settings = vec![None; parties];
        for &(p, input, coeff) in parts {
            settings[p] = Some(PartySetting { input, coeff });
        }
        Self::new(weight, settings, offset)
    }

    pub fn key(&self) -> BracketKey {
        (self.settings.clone(), self.offset)
    }

    /// Value of the bracket (without weight) on a deterministic outcome assignment.
    pub fn bracket_value(&self, outcome_of: impl Fn(usize, usize) -> usize, k: usize) -> i64 {
        let mut x = self.offset;
        for (p, s) in self.settings.iter().enumerate() {
            if let Some(s) = s {
                x += s.coeff * outcome_of(p, s.input) as i64;
            }
        }
        x.rem_euclid(k as i64)
    }

    /// Settings used when the term is evaluated on a behavior; absent parties sit on input 0.
    pub fn embedding_settings(&self) -> Vec<usize> {
        self.settings.iter().map(|s| s.map_or(0, |s| s.input)).collect()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut settings = vec![None; self.settings.len()];
        for (p, &q) in perm.iter().enumerate() {
            settings[q] = self.settings[p];
        }
        Self::new(self.weight, settings, self.offset)
    }

    fn canonicalize(&mut self, k: usize) {
        let k = k as i64;
        for s in &mut self.settings {
            if matches!(s, Some(ps) if ps.coeff.rem_euclid(k) == 0) {
                *s = None;
            }
        }
        self.offset = self.offset.rem_euclid(k);
        // constants are stored as weight * [1]_K
        if self.settings.iter().all(Option::is_none) {
            self.weight *= Rational::from_integer(self.offset);
            self.offset = if self.weight.is_zero() { 0 } else { 1 };
        }
    }

    fn check(&self, scenario: &Scenario) -> Result<()> {
        if self.settings.len() != scenario.parties() {
            return Err(Error::ScenarioMismatch(format!(
                "term lists {} parties, scenario has {}",
                self.settings.len(),
                scenario.parties()
            )));
        }
        for (p, s) in self.settings.iter().enumerate() {
            if let Some(s) = s {
                if s.input >= scenario.inputs(p) {
                    return Err(Error::IndexOutOfRange(format!(
                        "party {p} has no input {}",
                        s.input + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `<[X]_K> = sum_j j P(X = j mod K)` for a single bracket on a behavior (weight not applied).
pub fn bracket_expectation(term: &BracketTerm, behavior: &Behavior) -> Result<f64> {
    let sc = behavior.scenario();
    term.check(sc)?;
    let k = sc.outputs();
    let block = behavior.setting_block(&term.embedding_settings());
    let mut digits = vec![0usize; sc.parties()];
    let mut total = 0.0;
    for &p in block {
        if p != 0.0 {
            total += p * term.bracket_value(|party, _| digits[party], k) as f64;
        }
        odometer_step(&mut digits, |_| k);
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    /// `expression >= bound`
    #[serde(rename = ">=")]
    AtLeast,
    /// `expression <= bound`
    #[serde(rename = "<=")]
    AtMost,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::AtLeast => ">=",
            Comparator::AtMost => "<=",
        }
    }

    /// True when `value` satisfies `value (cmp) bound`.
    pub fn holds<T: PartialOrd>(self, value: T, bound: T) -> bool {
        match self {
            Comparator::AtLeast => value >= bound,
            Comparator::AtMost => value <= bound,
        }
    }

    /// True when `a` is strictly more extreme than `b` in the direction of violation.
    pub fn better<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            Comparator::AtLeast => a < b,
            Comparator::AtMost => a > b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryGroup {
    /// Rotations `p -> p + r (mod n)`.
    Cyclic,
    /// All permutations of the parties.
    Full,
}

impl SymmetryGroup {
    /// Group elements as maps `perm[p]` = new slot of party `p`; the identity comes first.
    pub fn elements(self, n: usize) -> Vec<Vec<usize>> {
        match self {
            SymmetryGroup::Cyclic => (0..n).map(|r| (0..n).map(|p| (p + r) % n).collect()).collect(),
            SymmetryGroup::Full => {
                let mut out = Vec::new();
                let mut cur: Vec<usize> = (0..n).collect();
                permutations(&mut cur, 0, &mut out);
                out.sort();
                out
            }
        }
    }
}

fn permutations(cur: &mut Vec<usize>, at: usize, out: &mut Vec<Vec<usize>>) {
    if at == cur.len() {
        out.push(cur.clone());
        return;
    }
    for i in at..cur.len() {
        cur.swap(at, i);
        permutations(cur, at + 1, out);
        cur.swap(at, i);
    }
}

/// A Bell inequality `sum_t w_t <[X_t]_K>  (>= | <=)  bound`.
///
/// Terms are kept canonical: offsets reduced into `0..K`, coefficients that vanish
/// modulo `K` dropped, identical brackets merged and zero weights removed.
/// Term order is the order of first appearance; equality ignores it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BellExpression {
    scenario: Scenario,
    terms: Vec<BracketTerm>,
    comparator: Comparator,
    bound: Rational,
}

impl PartialEq for BellExpression {
    fn eq(&self, other: &Self) -> bool {
        self.scenario == other.scenario
            && self.comparator == other.comparator
            && self.bound == other.bound
            && self.term_map() == other.term_map()
    }
}

impl BellExpression {
    pub fn new(
        scenario: Scenario,
        terms: Vec<BracketTerm>,
        comparator: Comparator,
        bound: Rational,
    ) -> Result<Self> {
        let k = scenario.outputs();
        let mut order: Vec<BracketKey> = Vec::new();
        let mut merged: HashMap<BracketKey, Rational> = HashMap::new();
        for mut t in terms {
            t.check(&scenario)?;
            t.canonicalize(k);
            let key = t.key();
            match merged.get_mut(&key) {
                Some(w) => *w += t.weight,
                None => {
                    order.push(key.clone());
                    merged.insert(key, t.weight);
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|key| {
                let w = merged[&key];
                (!w.is_zero()).then(|| BracketTerm::new(w, key.0, key.1))
            })
            .collect();
        Ok(Self {
            scenario,
            terms,
            comparator,
            bound,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn terms(&self) -> &[BracketTerm] {
        &self.terms
    }

    pub fn comparator(&self) -> Comparator {
        self.comparator
    }

    pub fn bound(&self) -> Rational {
        self.bound
    }

    pub fn outputs(&self) -> usize {
        self.scenario.outputs()
    }

    pub fn with_bound(&self, bound: Rational) -> Self {
        Self {
            bound,
            ..self.clone()
        }
    }

    pub fn bound_f64(&self) -> f64 {
        self.bound.to_f64().unwrap_or(f64::NAN)
    }

    pub fn term_map(&self) -> BTreeMap<BracketKey, Rational> {
        self.terms.iter().map(|t| (t.key(), t.weight)).collect()
    }

    fn check_behavior(&self, behavior: &Behavior) -> Result<()> {
        if behavior.scenario() != &self.scenario {
            return Err(Error::ScenarioMismatch(format!(
                "expression is for {:?}, behavior for {:?}",
                self.scenario,
                behavior.scenario()
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, behavior: &Behavior) -> Result<f64> {
        self.check_behavior(behavior)?;
        let mut total = 0.0;
        for t in &self.terms {
            total += t.weight.to_f64().unwrap_or(f64::NAN) * bracket_expectation(t, behavior)?;
        }
        Ok(total)
    }

    /// Exact value on the deterministic assignment `outcome_of(party, input)`.
    pub fn evaluate_assignment(&self, outcome_of: impl Fn(usize, usize) -> usize) -> Rational {
        let k = self.outputs();
        self.terms
            .iter()
            .map(|t| t.weight * Rational::from_integer(t.bracket_value(&outcome_of, k)))
            .sum()
    }

    /// Coefficients `c` with `evaluate(b) = sum_i c_i b_i` in the behavior layout.
    pub fn expand_to_coefficients(&self) -> CoefficientTensor {
        let sc = &self.scenario;
        let k = sc.outputs();
        let block = sc.outcome_count();
        let mut data = vec![0.0; sc.behavior_len()];
        for t in &self.terms {
            let w = t.weight.to_f64().unwrap_or(f64::NAN);
            let base = sc.setting_index(&t.embedding_settings()) * block;
            let mut digits = vec![0usize; sc.parties()];
            for o in 0..block {
                let v = t.bracket_value(|p, _| digits[p], k);
                if v != 0 {
                    data[base + o] += w * v as f64;
                }
                odometer_step(&mut digits, |_| k);
            }
        }
        CoefficientTensor {
            scenario: sc.clone(),
            data,
        }
    }

    /// Relabels parties: party `p` becomes party `perm[p]`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        let scenario = self.scenario.permuted(perm)?;
        let terms = self.terms.iter().map(|t| t.permuted(perm)).collect();
        Self::new(scenario, terms, self.comparator, self.bound)
    }

    /// Substitutes `X_old = scale * X_new + shift` for one party's input; `scale` must be a unit mod K.
    pub fn relabel_output(&self, party: usize, input: usize, scale: i64, shift: i64) -> Result<Self> {
        self.check_party_input(party, input)?;
        let k = self.outputs() as i64;
        if num_integer_gcd(scale.rem_euclid(k), k) != 1 {
            return Err(Error::InvalidScenario(format!(
                "scale {scale} is not invertible modulo {k}"
            )));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                if let Some(s) = &mut t.settings[party] {
                    if s.input == input {
                        t.offset += s.coeff * shift;
                        s.coeff *= scale;
                    }
                }
                t
            })
            .collect();
        Self::new(self.scenario.clone(), terms, self.comparator, self.bound)
    }

    /// Renames a party's inputs: input `x` becomes `perm[x]`.
    pub fn relabel_input(&self, party: usize, perm: &[usize]) -> Result<Self> {
        if party >= self.scenario.parties() {
            return Err(Error::IndexOutOfRange(format!("party {party}")));
        }
        check_permutation(perm, self.scenario.inputs(party))?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                if let Some(s) = &mut t.settings[party] {
                    s.input = perm[s.input];
                }
                t
            })
            .collect();
        Self::new(self.scenario.clone(), terms, self.comparator, self.bound)
    }

    /// Replaces a party by the deterministic answers `outputs[x]`; the party becomes absent.
    pub fn fix_party(&self, party: usize, outputs: &[usize]) -> Result<Self> {
        if party >= self.scenario.parties() || outputs.len() != self.scenario.inputs(party) {
            return Err(Error::IndexOutOfRange(format!(
                "cannot fix party {party} with {outputs:?}"
            )));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                if let Some(s) = t.settings[party].take() {
                    t.offset += s.coeff * outputs[s.input] as i64;
                }
                t
            })
            .collect();
        Self::new(self.scenario.clone(), terms, self.comparator, self.bound)
    }

    /// Drops a party that no term refers to.
    pub fn remove_party(&self, party: usize) -> Result<Self> {
        if party >= self.scenario.parties() || self.scenario.parties() == 1 {
            return Err(Error::IndexOutOfRange(format!("party {party}")));
        }
        if self.terms.iter().any(|t| t.settings[party].is_some()) {
            return Err(Error::ScenarioMismatch(format!("party {party} is still referenced")));
        }
        let mut inputs = self.scenario.input_counts().to_vec();
        inputs.remove(party);
        let scenario = Scenario::new(inputs, self.outputs())?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.settings.remove(party);
                t
            })
            .collect();
        Self::new(scenario, terms, self.comparator, self.bound)
    }

    /// Appends a party with `inputs` inputs that no term refers to.
    pub fn embed_party(&self, inputs: usize) -> Result<Self> {
        let mut counts = self.scenario.input_counts().to_vec();
        counts.push(inputs);
        let scenario = Scenario::new(counts, self.outputs())?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.settings.push(None);
                t
            })
            .collect();
        Self::new(scenario, terms, self.comparator, self.bound)
    }

    /// Completes the term list to a symmetric expression.
    ///
    /// Every orbit of brackets under `group` that the expression touches is filled
    /// in, each image carrying the weight of the listed representative(s). Listed
    /// brackets in one orbit must agree on their weight. An expression that is
    /// already invariant is returned unchanged.
    pub fn symmetrize(&self, group: SymmetryGroup) -> Result<Self> {
        if !self.scenario.is_homogeneous() {
            return Err(Error::HeterogeneousScenario);
        }
        let elements = group.elements(self.scenario.parties());
        let mut done: HashMap<BracketKey, Rational> = HashMap::new();
        let mut out = Vec::new();
        for t in &self.terms {
            if let Some(w) = done.get(&t.key()) {
                if *w != t.weight {
                    return Err(Error::InconsistentOrbit {
                        first: format!("{}", TermDisplay(t, self.outputs())),
                        second: format!("weight {w}"),
                    });
                }
                continue;
            }
            for g in &elements {
                let image = t.permuted(g);
                let key = image.key();
                if done.contains_key(&key) {
                    continue;
                }
                done.insert(key, t.weight);
                out.push(image);
            }
        }
        Self::new(self.scenario.clone(), out, self.comparator, self.bound)
    }

    fn check_party_input(&self, party: usize, input: usize) -> Result<()> {
        if party >= self.scenario.parties() || input >= self.scenario.inputs(party) {
            return Err(Error::IndexOutOfRange(format!("party {party}, input {input}")));
        }
        Ok(())
    }
}

/// Per-probability coefficients of an expanded expression.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTensor {
    scenario: Scenario,
    data: Vec<f64>,
}

impl CoefficientTensor {
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, settings: &[usize], outcomes: &[usize]) -> f64 {
        let sc = &self.scenario;
        self.data[sc.setting_index(settings) * sc.outcome_count() + sc.outcome_index(outcomes)]
    }

    pub fn contract(&self, behavior: &Behavior) -> Result<f64> {
        if behavior.scenario() != &self.scenario {
            return Err(Error::ScenarioMismatch("coefficient tensor and behavior differ".into()));
        }
        Ok(self
            .data
            .iter()
            .zip(behavior.probabilities())
            .map(|(c, p)| c * p)
            .sum())
    }
}

pub(crate) fn party_letter(p: usize) -> char {
    (b'A' + p as u8) as char
}

/// Formats a bracket as `[ +A2 -B1 +C1 +0 ] % K`.
pub(crate) struct BracketDisplay<'a>(pub &'a BracketTerm, pub usize);

impl fmt::Display for BracketDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (p, s) in self.0.settings.iter().enumerate() {
            if let Some(s) = s {
                let sign = if s.coeff < 0 { '-' } else { '+' };
                let mag = s.coeff.abs();
                if mag == 1 {
                    write!(f, " {sign}{}{}", party_letter(p), s.input + 1)?;
                } else {
                    write!(f, " {sign}{mag}*{}{}", party_letter(p), s.input + 1)?;
                }
            }
        }
        write!(f, " {:+} ] % {}", self.0.offset, self.1)
    }
}

pub(crate) struct TermDisplay<'a>(pub &'a BracketTerm, pub usize);

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * {}", self.0.weight, BracketDisplay(self.0, self.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn sk(k: usize) -> BellExpression {
        crate::scenario::catalog::mermin_cglmp(k).unwrap()
    }

    #[test]
    fn offset_bracket_on_all_zero_outputs() {
        for k in 2..=6 {
            let sc = Scenario::tripartite(k).unwrap();
            let zero = Behavior::deterministic(sc, &[vec![0, 0], vec![0, 0], vec![0, 0]]).unwrap();
            let t = BracketTerm::from_parts(3, r(1), &[(0, 1, -1), (1, 1, -1), (2, 1, -1)], -1);
            assert_eq!(bracket_expectation(&t, &zero).unwrap(), (k - 1) as f64);
            let t = BracketTerm::from_parts(3, r(1), &[(0, 1, 1), (1, 0, -1), (2, 0, 1)], 0);
            assert_eq!(bracket_expectation(&t, &zero).unwrap(), 0.0);
        }
    }

    #[test]
    fn uniform_behavior_bracket_is_one() {
        // all 27 outcome triples equally likely => residues uniform => (0+1+2)/3
        let uni = Behavior::uniform(Scenario::tripartite(3).unwrap());
        let t = BracketTerm::from_parts(3, r(1), &[(0, 0, 1), (1, 1, 1), (2, 0, -1)], 0);
        assert!((bracket_expectation(&t, &uni).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scenario_mismatch_is_an_error() {
        let uni = Behavior::uniform(Scenario::tripartite(3).unwrap());
        assert!(sk(4).evaluate(&uni).is_err());
        let bad = BracketTerm::from_parts(3, r(1), &[(0, 5, 1)], 0);
        assert!(bracket_expectation(&bad, &uni).is_err());
    }

    #[test]
    fn canonical_form_merges_and_reduces() {
        let sc = Scenario::tripartite(3).unwrap();
        let e = BellExpression::new(
            sc,
            vec![
                BracketTerm::from_parts(3, r(1), &[(0, 0, 1)], -1),
                BracketTerm::from_parts(3, r(2), &[(0, 0, 1)], 2),
                BracketTerm::from_parts(3, r(5), &[(0, 0, 3)], 0),
                BracketTerm::from_parts(3, r(4), &[], 5),
            ],
            Comparator::AtLeast,
            r(0),
        )
        .unwrap();
        assert_eq!(e.terms().len(), 2);
        assert_eq!(e.terms()[0].weight, r(3));
        assert_eq!(e.terms()[0].offset, 2);
        // 5*[3 A1]_3 == 5*[0]_3 == 0 and 4*[5]_3 == 8*[1]_3
        assert_eq!(e.terms()[1].weight, r(8));
        assert_eq!(e.terms()[1].offset, 1);
    }

    #[test]
    fn symmetrize_examples() {
        let sc = Scenario::tripartite(3).unwrap();
        let single = |parts: &[(usize, usize, i64)]| {
            BellExpression::new(
                sc.clone(),
                vec![BracketTerm::from_parts(3, r(1), parts, 0)],
                Comparator::AtLeast,
                r(0),
            )
            .unwrap()
        };
        let sym = single(&[(0, 0, 1), (1, 0, 1), (2, 0, 1)]);
        assert_eq!(sym.symmetrize(SymmetryGroup::Full).unwrap(), sym);

        let orbit = single(&[(0, 1, 1), (1, 0, 1), (2, 0, 1)])
            .symmetrize(SymmetryGroup::Full)
            .unwrap();
        assert_eq!(orbit.terms().len(), 3);
        let expect = BellExpression::new(
            sc.clone(),
            vec![
                BracketTerm::from_parts(3, r(1), &[(0, 1, 1), (1, 0, 1), (2, 0, 1)], 0),
                BracketTerm::from_parts(3, r(1), &[(0, 0, 1), (1, 1, 1), (2, 0, 1)], 0),
                BracketTerm::from_parts(3, r(1), &[(0, 0, 1), (1, 0, 1), (2, 1, 1)], 0),
            ],
            Comparator::AtLeast,
            r(0),
        )
        .unwrap();
        assert_eq!(orbit, expect);

        for k in 2..=6 {
            assert_eq!(sk(k).symmetrize(SymmetryGroup::Cyclic).unwrap(), sk(k));
        }
    }

    #[test]
    fn symmetrize_rejects_conflicting_orbit_weights() {
        let sc = Scenario::tripartite(3).unwrap();
        let e = BellExpression::new(
            sc,
            vec![
                BracketTerm::from_parts(3, r(1), &[(0, 1, 1), (1, 0, 1)], 0),
                BracketTerm::from_parts(3, r(2), &[(1, 1, 1), (2, 0, 1)], 0),
            ],
            Comparator::AtLeast,
            r(0),
        )
        .unwrap();
        assert!(matches!(
            e.symmetrize(SymmetryGroup::Cyclic),
            Err(Error::InconsistentOrbit { .. })
        ));
        let hetero = e.embed_party(3).unwrap();
        assert!(matches!(
            hetero.symmetrize(SymmetryGroup::Full),
            Err(Error::HeterogeneousScenario)
        ));
    }

    #[test]
    fn group_elements() {
        assert_eq!(SymmetryGroup::Cyclic.elements(3).len(), 3);
        assert_eq!(SymmetryGroup::Full.elements(3).len(), 6);
        assert_eq!(SymmetryGroup::Full.elements(3)[0], vec![0, 1, 2]);
    }

    #[test]
    fn zero_term_expansion_is_zero() {
        let e = BellExpression::new(Scenario::tripartite(3).unwrap(), vec![], Comparator::AtLeast, r(0)).unwrap();
        assert!(e.expand_to_coefficients().data().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn marginal_term_expands_on_input_one_of_absent_parties() {
        let sc = Scenario::tripartite(2).unwrap();
        let e = BellExpression::new(
            sc.clone(),
            vec![BracketTerm::from_parts(3, r(1), &[(0, 0, 1)], 0)],
            Comparator::AtLeast,
            r(0),
        )
        .unwrap();
        let c = e.expand_to_coefficients();
        for s in 0..8 {
            let x = sc.decode_settings(s);
            for o in 0..8 {
                let a = sc.decode_outcomes(o);
                let expect = if x == [0, 0, 0] && a[0] == 1 { 1.0 } else { 0.0 };
                assert_eq!(c.get(&x, &a), expect);
            }
        }
    }
}
