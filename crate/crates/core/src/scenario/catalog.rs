//! Built-in inequalities.
//!
//! | name              | parties | K        | form                                   |
//! |-------------------|---------|----------|----------------------------------------|
//! | `mermin-cglmp`    | 3       | any      | cyclic four-bracket family, `>= K-1`   |
//! | `cglmp-bipartite` | 2       | any      | CGLMP in bracket form, `>= K-1`        |
//! | `mermin-sym`      | 3       | 2, 3     | fully symmetric Mermin variant, `>= 2` |
//! | `symm-A1..A9`     | 3       | 3        | symmetric residue inequalities, `<= 0` |
//! | `sliwa7-gen`      | 3       | any      | symmetric family, `>= 6(K-1)`          |
//!
//! Symmetric entries list one representative per orbit and are completed with
//! [`BellExpression::symmetrize`].

use num_traits::Zero;

use super::behavior::Scenario;
use super::expression::{BellExpression, BracketTerm, Comparator, Rational, SymmetryGroup};
use super::symsum::SymmetricSumExpression;
use super::text::parse_bracket_body;
use crate::error::{Error, Result};

pub const CATALOG_NAMES: &[&str] = &[
    "mermin-cglmp",
    "cglmp-bipartite",
    "mermin-sym",
    "symm-A1",
    "symm-A2",
    "symm-A3",
    "symm-A4",
    "symm-A5",
    "symm-A6",
    "symm-A7",
    "symm-A8",
    "symm-A9",
    "sliwa7-gen",
];

fn bracket(sc: &Scenario, weight: i64, body: &str) -> BracketTerm {
    let (settings, offset) = parse_bracket_body(body, sc).expect("catalog bracket is well formed");
    BracketTerm::new(Rational::from_integer(weight), settings, offset)
}

fn build(sc: Scenario, terms: &[(i64, &str)], cmp: Comparator, bound: i64) -> Result<BellExpression> {
    let terms = terms.iter().map(|(w, b)| bracket(&sc, *w, b)).collect();
    BellExpression::new(sc, terms, cmp, Rational::from_integer(bound))
}

/// Looks up a catalog entry with its published bound.
pub fn catalog(name: &str, k: usize) -> Result<BellExpression> {
    match name {
        "mermin-cglmp" => mermin_cglmp(k),
        "cglmp-bipartite" => cglmp_bipartite(k),
        "mermin-sym" => match k {
            2 | 3 => mermin_sym(k),
            _ => Err(Error::UnsupportedOutputs {
                name: name.into(),
                k,
            }),
        },
        "sliwa7-gen" => sliwa7_generalized(k),
        _ => match name.strip_prefix("symm-A").and_then(|i| i.parse::<usize>().ok()) {
            Some(i @ 1..=9) if k == 3 => symmetric_residue(i)?.to_bell_expression(),
            Some(1..=9) => Err(Error::UnsupportedOutputs {
                name: name.into(),
                k,
            }),
            _ => Err(Error::UnknownCatalogEntry(name.into())),
        },
    }
}

/// Like [`catalog`], but also builds entries outside their published K range.
///
/// Returns `false` in the second slot when the bound is only a placeholder and
/// must be replaced by an enumerated local bound before use.
pub fn catalog_any_k(name: &str, k: usize) -> Result<(BellExpression, bool)> {
    match name {
        "mermin-sym" if k >= 2 => Ok((mermin_sym(k)?, k <= 3)),
        _ => catalog(name, k).map(|e| (e, true)),
    }
}

fn check_k(name: &str, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::UnsupportedOutputs {
            name: name.into(),
            k,
        });
    }
    Ok(())
}

/// Tripartite cyclic family generalizing Mermin to `K` outcomes.
pub fn mermin_cglmp(k: usize) -> Result<BellExpression> {
    check_k("mermin-cglmp", k)?;
    build(
        Scenario::tripartite(k)?,
        &[
            (1, "+A2 -B1 +C1"),
            (1, "+A1 +B2 -C1"),
            (1, "-A1 +B1 +C2"),
            (1, "-A2 -B2 -C2 -1"),
        ],
        Comparator::AtLeast,
        k as i64 - 1,
    )
}

/// CGLMP in bracket form.
pub fn cglmp_bipartite(k: usize) -> Result<BellExpression> {
    check_k("cglmp-bipartite", k)?;
    build(
        Scenario::new(vec![2, 2], k)?,
        &[(1, "+A2 -B1"), (1, "+A1 -B2"), (1, "-A1 +B1"), (1, "+B2 -A2 -1")],
        Comparator::AtLeast,
        k as i64 - 1,
    )
}

/// Permutation-symmetric Mermin variant; its bound 2 is only claimed for `K = 2, 3`.
pub fn mermin_sym(k: usize) -> Result<BellExpression> {
    check_k("mermin-sym", k)?;
    build(
        Scenario::tripartite(k)?,
        &[
            (1, "+A2 +B2 +C2"),
            (1, "+A2 +B2 +C2 +1"),
            (1, "+A2 +B1 +C1"),
            (1, "+A2 +B1 +C1 +1"),
            (-3, "+A1 +B1 +C1"),
            (-2, "+A1 +B1 +C1 +1"),
            (1, "+A2 +B2 +C1"),
        ],
        Comparator::AtLeast,
        2,
    )?
    .symmetrize(SymmetryGroup::Full)
}

/// Symmetric `K`-outcome family with local bound `6(K-1)`.
pub fn sliwa7_generalized(k: usize) -> Result<BellExpression> {
    check_k("sliwa7-gen", k)?;
    build(
        Scenario::tripartite(k)?,
        &[
            (2, "+A1 +B1 +C1"),
            (2, "-A1 -B1 -C1 -1"),
            (1, "-A1 -B1 -C1"),
            (3, "-A2 -B2 -C2 -1"),
            (1, "+A2 +B2 +C2 -1"),
            (1, "+A2 +B2 +C2"),
            (1, "-A2 +B1 +C1"),
            (1, "-A1 +B2 +C2"),
        ],
        Comparator::AtLeast,
        6 * (k as i64 - 1),
    )?
    .symmetrize(SymmetryGroup::Full)
}

/// `(coefficient, residue j, settings "xyz")` representatives, inputs labelled 0/1.
const RESIDUE_CLASSES: [&[(i64, usize, &str)]; 9] = [
    &[(1, 2, "000"), (-1, 1, "001"), (-1, 1, "011"), (-1, 2, "011"), (2, 2, "111")],
    &[(-2, 1, "000"), (-1, 1, "001"), (-2, 1, "011"), (2, 1, "111")],
    &[
        (-8, 1, "000"),
        (-2, 2, "000"),
        (-1, 1, "001"),
        (2, 2, "001"),
        (-2, 1, "011"),
        (-2, 2, "011"),
        (2, 1, "111"),
        (-1, 2, "111"),
    ],
    &[
        (-2, 1, "000"),
        (-1, 2, "000"),
        (-1, 1, "001"),
        (-2, 2, "001"),
        (-2, 1, "011"),
        (-1, 2, "011"),
        (5, 1, "111"),
        (4, 2, "111"),
    ],
    &[
        (-2, 1, "000"),
        (-2, 2, "000"),
        (-1, 1, "001"),
        (-1, 2, "001"),
        (-2, 1, "011"),
        (-2, 2, "011"),
        (5, 1, "111"),
        (5, 2, "111"),
    ],
    &[
        (-1, 1, "000"),
        (-1, 1, "001"),
        (-1, 2, "001"),
        (-3, 1, "011"),
        (-1, 2, "011"),
        (4, 1, "111"),
        (3, 2, "111"),
    ],
    &[
        (-3, 1, "000"),
        (-1, 2, "000"),
        (-1, 1, "001"),
        (-1, 2, "001"),
        (-1, 1, "011"),
        (3, 1, "111"),
        (1, 2, "111"),
    ],
    &[
        (-6, 1, "000"),
        (-3, 2, "000"),
        (-1, 1, "001"),
        (-2, 2, "001"),
        (-1, 1, "011"),
        (1, 2, "011"),
        (3, 1, "111"),
    ],
    &[
        (-3, 1, "000"),
        (1, 2, "000"),
        (-1, 1, "001"),
        (-4, 1, "011"),
        (-1, 2, "011"),
        (3, 1, "111"),
        (2, 2, "111"),
    ],
];

/// The `index`-th (1-based) symmetric three-outcome residue inequality, `<= 0`.
pub fn symmetric_residue(index: usize) -> Result<SymmetricSumExpression> {
    let class = RESIDUE_CLASSES
        .get(index.wrapping_sub(1))
        .ok_or_else(|| Error::UnknownCatalogEntry(format!("symm-A{index}")))?;
    let entries = class.iter().map(|&(c, j, s)| {
        let settings = s.bytes().map(|b| (b - b'0') as usize).collect();
        (settings, j, Rational::from_integer(c))
    });
    SymmetricSumExpression::new(Scenario::tripartite(3)?, entries, Comparator::AtMost, Rational::zero())?
        .symmetrize(SymmetryGroup::Full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Behavior;

    fn all_zero(k: usize) -> Behavior {
        Behavior::deterministic(Scenario::tripartite(k).unwrap(), &[vec![0, 0], vec![0, 0], vec![0, 0]]).unwrap()
    }

    #[test]
    fn bounds() {
        assert_eq!(catalog("mermin-cglmp", 5).unwrap().bound(), Rational::from_integer(4));
        assert_eq!(catalog("sliwa7-gen", 2).unwrap().bound(), Rational::from_integer(6));
        assert_eq!(catalog("mermin-sym", 3).unwrap().bound(), Rational::from_integer(2));
    }

    #[test]
    fn all_zero_strategy_values() {
        assert_eq!(mermin_cglmp(3).unwrap().evaluate(&all_zero(3)).unwrap(), 2.0);
        assert_eq!(sliwa7_generalized(4).unwrap().evaluate(&all_zero(4)).unwrap(), 18.0);
        assert_eq!(mermin_sym(3).unwrap().evaluate(&all_zero(3)).unwrap(), 2.0);
        assert!(catalog("symm-A1", 3).unwrap().evaluate(&all_zero(3)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn symmetric_entries_have_full_orbits() {
        let e = mermin_sym(3).unwrap();
        // 4 invariant brackets + 3 orbits of size 3
        assert_eq!(e.terms().len(), 4 + 9);
        let s = sliwa7_generalized(3).unwrap();
        assert_eq!(s.terms().len(), 6 + 6);
    }

    #[test]
    fn unknown_and_unsupported() {
        assert!(matches!(catalog("nope", 3), Err(Error::UnknownCatalogEntry(_))));
        assert!(matches!(catalog("symm-A10", 3), Err(Error::UnknownCatalogEntry(_))));
        assert!(matches!(catalog("symm-A2", 4), Err(Error::UnsupportedOutputs { .. })));
        assert!(matches!(catalog("mermin-sym", 4), Err(Error::UnsupportedOutputs { .. })));
        assert!(matches!(catalog("mermin-cglmp", 1), Err(Error::UnsupportedOutputs { .. })));
        let (e, stated) = catalog_any_k("mermin-sym", 4).unwrap();
        assert!(!stated);
        assert_eq!(e.outputs(), 4);
    }

    #[test]
    fn every_name_resolves() {
        for name in CATALOG_NAMES {
            catalog(name, 3).unwrap();
        }
    }
}
