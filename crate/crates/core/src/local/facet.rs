//! Polytope dimension and facet verification.
//!
//! A deterministic behavior is a 0/1 vector in the full probability
//! parametrization. Affine rank is the linear rank after prepending a constant
//! coordinate, minus one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rank::{exact_rank, random_prime, ExactEliminator, ExactOverflow, ModpEliminator};
use super::strategy::{local_bound, rational_string, CompiledExpression, DeterministicStrategy, StrategySpace};
use crate::error::Result;
use crate::scenario::{BellExpression, Rational, Scenario};

/// Seed used for the modular prime when none is given.
pub const DEFAULT_PRIME_SEED: u64 = 0x5eed_f00d;

/// How the reported affine rank was made exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankCertificate {
    /// Every vertex saturates, so the saturating hull is the whole polytope.
    AllVertices,
    /// Modular rank reached `dimension - 1`, the most a proper face can have.
    HyperplaneBound,
    /// Exact integer elimination over the saturating set.
    ExactElimination,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactPass {
    /// Run the exact pass only when the modular rank alone does not settle the rank.
    WhenNeeded,
    /// Also confirm the modular basis exactly in the tight case.
    Always,
}

#[derive(Clone, Copy, Debug)]
pub struct FacetOptions {
    pub prime_seed: u64,
    pub exact_pass: ExactPass,
}

impl Default for FacetOptions {
    fn default() -> Self {
        Self {
            prime_seed: DEFAULT_PRIME_SEED,
            exact_pass: ExactPass::WhenNeeded,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetReport {
    pub polytope_dimension: usize,
    pub saturating_vertex_count: u64,
    pub saturating_affine_rank: usize,
    pub is_tight: bool,
    pub is_valid: bool,
    #[serde(with = "rational_string")]
    pub bound: Rational,
    #[serde(with = "rational_string")]
    pub local_bound: Rational,
    /// A violating strategy when the bound is invalid, otherwise the first saturating one.
    pub witness: Option<DeterministicStrategy>,
    pub certificate: RankCertificate,
    pub modp_affine_rank: usize,
    pub prime: u64,
    /// Affine rank from the exact pass, when it ran.
    pub exact_affine_rank: Option<usize>,
}

/// Affine dimension of the local polytope of `scenario`.
///
/// Deterministic behaviors are tensor products of single-party one-hot vectors,
/// so the linear span of all vertices is the tensor product of the single-party
/// spans. Each single-party rank is computed by exact elimination and the
/// product gives the exact linear rank; all vertices sit on the hyperplane
/// `sum_outcomes P = 1` away from the origin, hence affine = linear - 1.
pub fn polytope_dimension(scenario: &Scenario) -> Result<usize> {
    let k = scenario.outputs();
    let mut linear = 1usize;
    for p in 0..scenario.parties() {
        let single = Scenario::new(vec![scenario.inputs(p)], k)?;
        let space = StrategySpace::new(&single)?;
        let mut buf = Vec::new();
        let rows: Vec<Vec<(usize, i64)>> = (0..space.count())
            .map(|i| vertex_entries(&space, &space.digits(i), &mut buf, false))
            .collect();
        linear *= exact_rank(single.behavior_len(), &rows);
    }
    Ok(linear - 1)
}

/// Affine rank of all vertices computed directly modulo `p`.
pub fn polytope_dimension_modp(scenario: &Scenario, p: u64) -> Result<usize> {
    let space = StrategySpace::new(scenario)?;
    let mut e = ModpEliminator::new(scenario.behavior_len() + 1, p);
    let mut buf = Vec::new();
    for i in 0..space.count() {
        e.insert(&vertex_entries(&space, &space.digits(i), &mut buf, true), i as usize);
    }
    Ok(e.rank() - 1)
}

/// Nonzero coordinates of the vertex of a strategy, optionally with a leading
/// constant coordinate.
fn vertex_entries(space: &StrategySpace, digits: &[usize], buf: &mut Vec<usize>, affine: bool) -> Vec<(usize, i64)> {
    space.outcome_per_setting(digits, buf);
    let outcomes = space.scenario().outcome_count();
    let shift = usize::from(affine);
    let mut v = Vec::with_capacity(buf.len() + shift);
    if affine {
        v.push((0, 1));
    }
    v.extend(buf.iter().enumerate().map(|(s, &o)| (shift + s * outcomes + o, 1)));
    v
}

const CHUNK: u64 = 1 << 12;

/// Indices of strategies on which the expression equals its declared bound.
pub fn saturating_strategies(expr: &BellExpression) -> Result<Vec<u64>> {
    let space = StrategySpace::new(expr.scenario())?;
    let compiled = CompiledExpression::new(expr, &space);
    let target = compiled.bound_scaled(expr.bound());
    let k = expr.outputs();
    let parts: Vec<Vec<u64>> = (0..space.count().div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(space.count());
            let mut digits = space.digits(start);
            let mut out = Vec::new();
            for i in start..end {
                if compiled.value_scaled(&digits) == target {
                    out.push(i);
                }
                super::strategy::step_little_endian(&mut digits, k);
            }
            out
        })
        .collect();
    Ok(parts.concat())
}

pub fn facet_check(expr: &BellExpression) -> Result<FacetReport> {
    facet_check_with(expr, &FacetOptions::default())
}

/// Validity, saturating set and tightness of `expr` on the local polytope.
pub fn facet_check_with(expr: &BellExpression, options: &FacetOptions) -> Result<FacetReport> {
    let sc = expr.scenario();
    let space = StrategySpace::new(sc)?;
    let dim = polytope_dimension(sc)?;
    let lb = local_bound(expr)?;
    let is_valid = lb.certifies(expr);
    let saturating = saturating_strategies(expr)?;
    let prime = random_prime(options.prime_seed);
    let cols = sc.behavior_len() + 1;

    let witness = if is_valid {
        saturating.first().map(|&i| space.strategy(i))
    } else {
        lb.optimizers.first().map(|&i| space.strategy(i))
    };

    let row_of = |i: u64| vertex_entries(&space, &space.digits(i), &mut Vec::new(), true);

    let (rank, modp_rank, certificate, exact) = if saturating.is_empty() {
        // the empty set has affine rank -1; report 0 and never tight
        (0, 0, RankCertificate::ExactElimination, Some(0))
    } else if saturating.len() as u64 == space.count() {
        (dim, dim, RankCertificate::AllVertices, None)
    } else {
        let mut e = ModpEliminator::new(cols, prime);
        for (n, &i) in saturating.iter().enumerate() {
            e.insert(&row_of(i), n);
            if e.rank() == dim {
                break;
            }
        }
        let modp = e.rank() - 1;
        let basis: Vec<_> = e.basis_sources().iter().map(|&n| row_of(saturating[n])).collect();
        if modp + 1 == dim {
            let exact = match options.exact_pass {
                ExactPass::Always => Some(exact_rank(cols, &basis) - 1),
                ExactPass::WhenNeeded => None,
            };
            (modp, modp, RankCertificate::HyperplaneBound, exact)
        } else {
            let r = exact_saturating_rank(cols, &basis, saturating.iter().map(|&i| row_of(i)));
            (r, modp, RankCertificate::ExactElimination, Some(r))
        }
    };

    Ok(FacetReport {
        polytope_dimension: dim,
        saturating_vertex_count: saturating.len() as u64,
        saturating_affine_rank: rank,
        is_tight: is_valid && !saturating.is_empty() && rank + 1 == dim,
        is_valid,
        bound: expr.bound(),
        local_bound: lb.value,
        witness,
        certificate,
        modp_affine_rank: modp_rank,
        prime,
        exact_affine_rank: exact,
    })
}

/// Exact affine rank: eliminate the modular basis, then check every row against it.
fn exact_saturating_rank(
    cols: usize,
    basis: &[Vec<(usize, i64)>],
    rows: impl Iterator<Item = Vec<(usize, i64)>> + Clone,
) -> usize {
    fn run<T: super::rank::ExactInt>(
        cols: usize,
        basis: &[Vec<(usize, i64)>],
        rows: impl Iterator<Item = Vec<(usize, i64)>>,
    ) -> std::result::Result<usize, ExactOverflow> {
        let mut e = ExactEliminator::<T>::new(cols);
        for b in basis {
            e.insert(b)?;
        }
        for r in rows {
            e.insert(&r)?;
        }
        Ok(e.rank() - 1)
    }
    run::<i128>(cols, basis, rows.clone())
        .unwrap_or_else(|_| run::<num_bigint::BigInt>(cols, basis, rows).expect("BigInt does not overflow"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{catalog, BracketTerm, Comparator};

    #[test]
    fn dimension_matches_formula_and_modular_rank() {
        for k in 2..=3 {
            let sc = Scenario::tripartite(k).unwrap();
            let expect = (2 * (k - 1) + 1).pow(3) - 1;
            assert_eq!(polytope_dimension(&sc).unwrap(), expect);
            assert_eq!(polytope_dimension_modp(&sc, random_prime(3)).unwrap(), expect);
        }
        let bi = Scenario::new(vec![3, 2], 2).unwrap();
        assert_eq!(polytope_dimension(&bi).unwrap(), 4 * 3 - 1);
        assert_eq!(polytope_dimension_modp(&bi, random_prime(3)).unwrap(), 11);
    }

    #[test]
    fn tight_family_small_k() {
        for k in 2..=3 {
            let opts = FacetOptions {
                exact_pass: ExactPass::Always,
                ..Default::default()
            };
            let r = facet_check_with(&catalog::mermin_cglmp(k).unwrap(), &opts).unwrap();
            assert!(r.is_valid && r.is_tight, "{r:?}");
            assert_eq!(r.exact_affine_rank, Some(r.saturating_affine_rank));
        }
    }

    #[test]
    fn trivial_inequality_is_not_tight() {
        let sc = Scenario::tripartite(3).unwrap();
        let t = BracketTerm::from_parts(3, Rational::from_integer(1), &[], 0);
        let e = BellExpression::new(sc, vec![t], Comparator::AtLeast, Rational::from_integer(0)).unwrap();
        let r = facet_check(&e).unwrap();
        assert!(r.is_valid && !r.is_tight);
        assert_eq!(r.saturating_affine_rank, r.polytope_dimension);
        assert_eq!(r.certificate, RankCertificate::AllVertices);
    }

    #[test]
    fn invalid_bound_reports_witness() {
        let e = catalog::mermin_cglmp(3).unwrap().with_bound(Rational::from_integer(3));
        let r = facet_check(&e).unwrap();
        assert!(!r.is_valid && !r.is_tight);
        let w = r.witness.unwrap();
        let v = e.evaluate_assignment(|p, x| w.outputs[p][x]);
        assert_eq!(v, Rational::from_integer(2));
    }

    #[test]
    fn loose_bound_takes_exact_route() {
        // one below the true bound: valid but saturated by nothing
        let e = catalog::mermin_cglmp(2).unwrap().with_bound(Rational::from_integer(0));
        let r = facet_check(&e).unwrap();
        assert!(r.is_valid && !r.is_tight);
        assert_eq!(r.saturating_vertex_count, 0);
    }
}
