//! Row rank of integer matrices: streaming elimination modulo a prime, and an
//! exact fraction-free pass over `i128` with a `BigInt` fallback.
//!
//! Rows are supplied sparsely as `(column, value)` pairs. Both eliminators keep
//! their basis in reduced row echelon form, so reducing a new row only touches the
//! pivots found in that row's support.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NONE: u32 = u32::MAX;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// A prime in `[2^30, 2^31)` chosen from `seed`.
pub fn random_prime(seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let c = rng.random_range((1u64 << 30)..(1u64 << 31)) | 1;
        if is_prime(c) {
            return c;
        }
    }
}

/// Streaming row reduction over `Z/p`.
#[derive(Clone, Debug)]
pub struct ModpEliminator {
    p: u64,
    cols: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
    pivot_row: Vec<u32>,
    sources: Vec<usize>,
    buf: Vec<u64>,
}

impl ModpEliminator {
    pub fn new(cols: usize, p: u64) -> Self {
        assert!(p < 1 << 32 && is_prime(p), "modulus must be a prime below 2^32");
        Self {
            p,
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
            pivot_row: vec![NONE; cols],
            sources: Vec::new(),
            buf: vec![0; cols],
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Caller-supplied tags of the rows that entered the basis, in insertion order.
    pub fn basis_sources(&self) -> &[usize] {
        &self.sources
    }

    /// Adds a row; returns whether it increased the rank.
    pub fn insert(&mut self, entries: &[(usize, i64)], source: usize) -> bool {
        let p = self.p;
        let v = &mut self.buf;
        v.iter_mut().for_each(|x| *x = 0);
        for &(c, x) in entries {
            v[c] = (v[c] + x.rem_euclid(p as i64) as u64) % p;
        }
        for &(c, _) in entries {
            let r = self.pivot_row[c];
            if r == NONE || v[c] == 0 {
                continue;
            }
            let f = p - v[c];
            for (x, &y) in v.iter_mut().zip(&self.rows[r as usize]) {
                if y != 0 {
                    *x = (*x + f * y as u64) % p;
                }
            }
        }
        let Some(c) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = pow_mod(v[c], p - 2, p);
        let row: Vec<u32> = v.iter().map(|&x| (x * inv % p) as u32).collect();
        for other in &mut self.rows {
            let f = other[c] as u64;
            if f == 0 {
                continue;
            }
            let f = p - f;
            for (x, &y) in other.iter_mut().zip(&row) {
                if y != 0 {
                    *x = ((*x as u64 + f * y as u64) % p) as u32;
                }
            }
        }
        self.pivot_row[c] = self.rows.len() as u32;
        self.pivots.push(c);
        self.rows.push(row);
        self.sources.push(source);
        true
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// Integer arithmetic needed by [`ExactEliminator`].
pub trait ExactInt: Clone + Debug + PartialEq {
    fn from_i64(v: i64) -> Self;
    fn is_zero_value(&self) -> bool;
    /// `a * x - b * y`, or `None` on overflow.
    fn cross(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self>;
    /// Non-negative gcd.
    fn gcd_with(&self, other: &Self) -> Self;
    fn div_exact(&self, d: &Self) -> Self;
    fn is_one(&self) -> bool;
}

impl ExactInt for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn is_zero_value(&self) -> bool {
        *self == 0
    }
    fn cross(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        a.checked_mul(*x)?.checked_sub(b.checked_mul(*y)?)
    }
    fn gcd_with(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
}

impl ExactInt for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn cross(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        Some(a * x - b * y)
    }
    fn gcd_with(&self, other: &Self) -> Self {
        Integer::gcd(self, other).abs()
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn is_one(&self) -> bool {
        *self == BigInt::from(1)
    }
}

/// Arithmetic overflowed the integer type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactOverflow;

/// Fraction-free row reduction over the integers.
#[derive(Clone, Debug)]
pub struct ExactEliminator<T: ExactInt> {
    cols: usize,
    rows: Vec<Vec<T>>,
    pivot_row: Vec<u32>,
}

impl<T: ExactInt> ExactEliminator<T> {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            rows: Vec::new(),
            pivot_row: vec![NONE; cols],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn normalize(v: &mut [T]) {
        let mut g: Option<T> = None;
        for x in v.iter().filter(|x| !x.is_zero_value()) {
            g = Some(match g {
                None => x.gcd_with(x),
                Some(g) => g.gcd_with(x),
            });
            if g.as_ref().is_some_and(T::is_one) {
                return;
            }
        }
        if let Some(g) = g {
            for x in v.iter_mut().filter(|x| !x.is_zero_value()) {
                *x = x.div_exact(&g);
            }
        }
    }

    /// Reduces `v` against the basis; the result is zero iff `v` lies in the span.
    fn reduce(&self, entries: &[(usize, i64)]) -> Result<Vec<T>, ExactOverflow> {
        let mut v = vec![T::from_i64(0); self.cols];
        for &(c, x) in entries {
            v[c] = T::cross(&v[c], &T::from_i64(1), &T::from_i64(-1), &T::from_i64(x)).ok_or(ExactOverflow)?;
        }
        for &(c, _) in entries {
            let r = self.pivot_row[c];
            if r == NONE || v[c].is_zero_value() {
                continue;
            }
            let row = &self.rows[r as usize];
            let piv = row[c].clone();
            let f = v[c].clone();
            for (x, y) in v.iter_mut().zip(row) {
                if x.is_zero_value() && y.is_zero_value() {
                    continue;
                }
                *x = T::cross(&piv, x, &f, y).ok_or(ExactOverflow)?;
            }
            Self::normalize(&mut v);
        }
        Ok(v)
    }

    pub fn contains(&self, entries: &[(usize, i64)]) -> Result<bool, ExactOverflow> {
        Ok(self.reduce(entries)?.iter().all(T::is_zero_value))
    }

    /// Adds a row; returns whether it increased the rank.
    pub fn insert(&mut self, entries: &[(usize, i64)]) -> Result<bool, ExactOverflow> {
        let v = self.reduce(entries)?;
        let Some(c) = v.iter().position(|x| !x.is_zero_value()) else {
            return Ok(false);
        };
        let vc = v[c].clone();
        let mut updated = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            if row[c].is_zero_value() {
                updated.push(None);
                continue;
            }
            let f = row[c].clone();
            let mut new = Vec::with_capacity(self.cols);
            for (x, y) in row.iter().zip(&v) {
                new.push(if x.is_zero_value() && y.is_zero_value() {
                    x.clone()
                } else {
                    T::cross(&vc, x, &f, y).ok_or(ExactOverflow)?
                });
            }
            Self::normalize(&mut new);
            updated.push(Some(new));
        }
        for (row, new) in self.rows.iter_mut().zip(updated) {
            if let Some(new) = new {
                *row = new;
            }
        }
        self.pivot_row[c] = self.rows.len() as u32;
        self.rows.push(v);
        Ok(true)
    }
}

/// Exact rank of sparse integer rows, trying `i128` before `BigInt`.
pub fn exact_rank(cols: usize, rows: &[Vec<(usize, i64)>]) -> usize {
    fn run<T: ExactInt>(cols: usize, rows: &[Vec<(usize, i64)>]) -> Result<usize, ExactOverflow> {
        let mut e = ExactEliminator::<T>::new(cols);
        for r in rows {
            e.insert(r)?;
        }
        Ok(e.rank())
    }
    run::<i128>(cols, rows).unwrap_or_else(|_| run::<BigInt>(cols, rows).expect("BigInt does not overflow"))
}

/// Rank of `rows` modulo `p`.
pub fn modp_rank(cols: usize, rows: &[Vec<(usize, i64)>], p: u64) -> usize {
    let mut e = ModpEliminator::new(cols, p);
    for (i, r) in rows.iter().enumerate() {
        e.insert(r, i);
    }
    e.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Rank by plain rational Gaussian elimination, as an independent oracle.
    fn rational_rank(cols: usize, rows: &[Vec<(usize, i64)>]) -> usize {
        use num_rational::BigRational;
        let mut m: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| {
                let mut d = vec![BigRational::zero(); cols];
                for &(c, x) in r {
                    d[c] += BigRational::from_integer(x.into());
                }
                d
            })
            .collect();
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(rank, p);
            for i in 0..m.len() {
                if i != rank && !m[i][c].is_zero() {
                    let f = &m[i][c] / &m[rank][c];
                    let pivot = m[rank].clone();
                    for (x, y) in m[i].iter_mut().zip(pivot) {
                        *x -= &f * y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn primes() {
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(2_147_483_649));
        assert!(!is_prime(561));
        let p = random_prime(7);
        assert!(is_prime(p) && (1 << 30..1 << 31).contains(&p));
        assert_eq!(p, random_prime(7));
    }

    #[test]
    fn modulus_dependent_rank() {
        // determinant 7 * 3
        let rows = vec![vec![(0, 7), (1, 0)], vec![(0, 0), (1, 3)]];
        assert_eq!(exact_rank(2, &rows), 2);
        assert_eq!(modp_rank(2, &rows, 7), 1);
        assert_eq!(modp_rank(2, &rows, 2_147_483_647), 2);
    }

    #[test]
    fn growth_falls_back_to_bigint() {
        // rows whose elimination multiplies large pivots together
        let big = 1i64 << 40;
        let rows: Vec<Vec<(usize, i64)>> = (0..6)
            .map(|i| (0..6).map(|j| (j, if i == j { big + i as i64 } else { big - j as i64 })).collect())
            .collect();
        assert_eq!(exact_rank(6, &rows), rational_rank(6, &rows));
    }

    fn matrix() -> impl Strategy<Value = (usize, Vec<Vec<(usize, i64)>>)> {
        (1usize..8).prop_flat_map(|cols| {
            let row = prop::collection::vec(-3i64..=3, cols)
                .prop_map(|v| v.into_iter().enumerate().filter(|(_, x)| *x != 0).collect::<Vec<_>>());
            (Just(cols), prop::collection::vec(row, 0..10))
        })
    }

    proptest! {
        #[test]
        fn exact_matches_rational_oracle((cols, rows) in matrix()) {
            prop_assert_eq!(exact_rank(cols, &rows), rational_rank(cols, &rows));
        }

        #[test]
        fn modp_never_exceeds_exact((cols, rows) in matrix(), seed in 0u64..1000) {
            let p = random_prime(seed);
            let r = modp_rank(cols, &rows, p);
            prop_assert!(r <= exact_rank(cols, &rows));
        }

        #[test]
        fn basis_rows_are_exactly_independent((cols, rows) in matrix()) {
            let mut e = ModpEliminator::new(cols, random_prime(1));
            for (i, r) in rows.iter().enumerate() {
                e.insert(r, i);
            }
            let basis: Vec<_> = e.basis_sources().iter().map(|&i| rows[i].clone()).collect();
            prop_assert_eq!(exact_rank(cols, &basis), e.rank());
        }
    }
}
