//! POVMs and measurement assemblages.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::linalg::{self, c, CMat};
use crate::error::{Error, Result};

pub const POSITIVITY_TOL: f64 = 1e-9;
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// `K` Hermitian positive semidefinite operators summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<CMat>,
}

impl Povm {
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        let p = Self { elements };
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn new_unchecked(elements: Vec<CMat>) -> Self {
        Self { elements }
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let mut sum = CMat::zeros(d, d);
        for (k, m) in self.elements.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch(format!("element {k} is {}x{}, expected {d}x{d}", m.nrows(), m.ncols())));
            }
            linalg::check_hermitian(m)?;
            let low = linalg::min_eigenvalue(m);
            if low < -POSITIVITY_TOL {
                return Err(Error::InvalidPovm(format!("element {k} has eigenvalue {low:e}")));
            }
            sum += m;
        }
        let dev = (sum - linalg::identity(d)).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {dev:e}")));
        }
        Ok(())
    }

    /// Rank-1 projectors onto the columns of a unitary, outcome `k` taking column `k`.
    pub fn from_basis(u: &CMat) -> Result<Self> {
        let groups: Vec<Vec<usize>> = (0..u.ncols()).map(|k| vec![k]).collect();
        Self::from_basis_groups(u, &groups)
    }

    /// Projective measurement where outcome `k` projects onto the columns `groups[k]` of `u`.
    pub fn from_basis_groups(u: &CMat, groups: &[Vec<usize>]) -> Result<Self> {
        let d = u.nrows();
        let elements = groups
            .iter()
            .map(|cols| {
                let mut m = CMat::zeros(d, d);
                for &j in cols {
                    let v = u.column(j);
                    m += v * v.adjoint();
                }
                linalg::hermitize(&m)
            })
            .collect();
        Self::new(elements)
    }

    /// `{I, 0, ..., 0}`.
    pub fn trivial(d: usize, k: usize) -> Self {
        let mut elements = vec![CMat::zeros(d, d); k];
        elements[0] = linalg::identity(d);
        Self { elements }
    }

    /// `{I/K, ..., I/K}`.
    pub fn uniform(d: usize, k: usize) -> Self {
        Self {
            elements: vec![linalg::identity(d).scale(1.0 / k as f64); k],
        }
    }

    pub fn dim(&self) -> usize {
        self.elements.first().map_or(0, CMat::nrows)
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &CMat {
        &self.elements[k]
    }

    /// Largest entrywise deviation of `sum_k M_k` from the identity.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let sum = self.elements.iter().fold(CMat::zeros(d, d), |a, m| a + m);
        (sum - linalg::identity(d)).iter().fold(0.0, |a, z| a.max(z.norm()))
    }
}

impl Serialize for Povm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nested: Vec<Vec<Vec<Complex64>>> = self
            .elements
            .iter()
            .map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect())
            .collect();
        #[derive(Serialize)]
        struct Repr {
            dim: usize,
            elements: Vec<Vec<Vec<Complex64>>>,
        }
        Repr {
            dim: self.dim(),
            elements: nested,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Povm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            dim: usize,
            elements: Vec<Vec<Vec<Complex64>>>,
        }
        let r = Repr::deserialize(d)?;
        let elements = r
            .elements
            .iter()
            .map(|rows| {
                if rows.len() != r.dim || rows.iter().any(|row| row.len() != r.dim) {
                    return Err(serde::de::Error::custom("element shape does not match dim"));
                }
                Ok(CMat::from_fn(r.dim, r.dim, |i, j| rows[i][j]))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Povm::new(elements).map_err(serde::de::Error::custom)
    }
}

/// One POVM per (party, input).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assemblage {
    povms: Vec<Vec<Povm>>,
}

impl Assemblage {
    pub fn new(povms: Vec<Vec<Povm>>) -> Result<Self> {
        let k = povms
            .first()
            .and_then(|p| p.first())
            .map(Povm::outcomes)
            .ok_or_else(|| Error::InvalidPovm("empty assemblage".into()))?;
        for (p, list) in povms.iter().enumerate() {
            let d = list.first().map(Povm::dim).ok_or_else(|| Error::InvalidPovm(format!("party {p} has no inputs")))?;
            for (x, m) in list.iter().enumerate() {
                if m.outcomes() != k {
                    return Err(Error::InvalidPovm(format!("party {p} input {x} has {} outcomes, expected {k}", m.outcomes())));
                }
                if m.dim() != d {
                    return Err(Error::DimensionMismatch(format!("party {p} input {x} acts on dimension {}, expected {d}", m.dim())));
                }
            }
        }
        Ok(Self { povms })
    }

    pub fn parties(&self) -> usize {
        self.povms.len()
    }

    pub fn inputs(&self, party: usize) -> usize {
        self.povms[party].len()
    }

    pub fn outputs(&self) -> usize {
        self.povms[0][0].outcomes()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.povms.iter().map(|l| l[0].dim()).collect()
    }

    pub fn povm(&self, party: usize, input: usize) -> &Povm {
        &self.povms[party][input]
    }

    pub fn povms(&self) -> &[Vec<Povm>] {
        &self.povms
    }

    pub fn with_povm(&self, party: usize, input: usize, povm: Povm) -> Result<Self> {
        let mut povms = self.povms.clone();
        povms[party][input] = povm;
        Self::new(povms)
    }

    pub(crate) fn set_povm(&mut self, party: usize, input: usize, povm: Povm) {
        self.povms[party][input] = povm;
    }

    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        crate::scenario::behavior::check_permutation(perm, self.parties())?;
        let mut povms = self.povms.clone();
        for (p, list) in self.povms.iter().enumerate() {
            povms[perm[p]] = list.clone();
        }
        Self::new(povms)
    }

    /// Every POVM is `{I, 0, ..., 0}`.
    pub fn trivial(dims: &[usize], inputs: usize, k: usize) -> Self {
        Self {
            povms: dims.iter().map(|&d| vec![Povm::trivial(d, k); inputs]).collect(),
        }
    }
}

fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// `(1 + sign * sigma) / 2`
fn half(sigma: &CMat, sign: f64) -> CMat {
    (linalg::identity(2) + sigma.scale(sign)).scale(0.5)
}

/// Qubit measurements reaching `(7 - 3 sqrt 3)/2` on `psi3` for the three-outcome family.
pub fn psi3_assemblage() -> Assemblage {
    let (x, z) = (pauli_x(), pauli_z());
    let zero = CMat::zeros(2, 2);
    let p = |a: CMat, b: CMat, c: CMat| Povm::new(vec![a, b, c]).expect("valid qubit POVM");
    Assemblage::new(vec![
        vec![p(half(&z, 1.0), half(&z, -1.0), zero.clone()), p(half(&x, -1.0), zero.clone(), half(&x, 1.0))],
        vec![p(half(&z, -1.0), half(&z, 1.0), zero.clone()), p(half(&x, 1.0), zero.clone(), half(&x, -1.0))],
        vec![p(half(&x, -1.0), half(&x, 1.0), zero.clone()), p(half(&z, -1.0), half(&z, 1.0), zero)],
    ])
    .expect("consistent assemblage")
}

/// Qubit measurements on which GHZ_2 reaches the algebraic minimum 0 of the two-outcome family.
///
/// Input 1 measures `sigma_y`, input 2 measures `-sigma_x`; outcome 0 is the `+1` eigenvalue.
pub fn ghz_paradox_assemblage() -> Assemblage {
    let (x, y) = (pauli_x(), pauli_y());
    let m = |s: &CMat, sign: f64| Povm::new(vec![half(s, sign), half(s, -sign)]).expect("valid qubit POVM");
    let party = || vec![m(&y, 1.0), m(&x, -1.0)];
    Assemblage::new(vec![party(), party(), party()]).expect("consistent assemblage")
}

/// Fourier-basis projective measurements.
///
/// Outcome `k` of a measurement with phase `phi` projects onto
/// `(1/sqrt K) sum_j exp(2 pi i j (k + phi) / K) |j>`. `phases[p][x]` is the phase
/// of party `p`, input `x`.
pub fn fourier_assemblage(k: usize, phases: &[Vec<f64>]) -> Result<Assemblage> {
    if k < 2 {
        return Err(Error::InvalidPovm("Fourier measurements need K >= 2".into()));
    }
    let povms = phases
        .iter()
        .map(|list| list.iter().map(|&phi| fourier_povm(k, phi)).collect())
        .collect();
    Assemblage::new(povms)
}

pub fn fourier_povm(k: usize, phi: f64) -> Povm {
    let norm = 1.0 / (k as f64).sqrt();
    let elements = (0..k)
        .map(|o| {
            let v: Vec<Complex64> = (0..k)
                .map(|j| Complex64::from_polar(norm, 2.0 * PI * j as f64 * (o as f64 + phi) / k as f64))
                .collect();
            CMat::from_fn(k, k, |a, b| v[a] * v[b].conj())
        })
        .collect();
    Povm::new_unchecked(elements)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_povms() {
        let bad = vec![linalg::identity(2), linalg::identity(2)];
        assert!(matches!(Povm::new(bad), Err(Error::InvalidPovm(_))));
        let neg = vec![half(&pauli_z(), 1.0).scale(2.0), linalg::identity(2) - half(&pauli_z(), 1.0).scale(2.0)];
        assert!(matches!(Povm::new(neg), Err(Error::InvalidPovm(_))));
        let nh = vec![CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])];
        assert!(matches!(Povm::new(nh), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn fourier_k2_is_sigma_x_basis() {
        let p = fourier_povm(2, 0.0);
        assert!((p.element(0) - half(&pauli_x(), 1.0)).norm() < 1e-14);
        assert!((p.element(1) - half(&pauli_x(), -1.0)).norm() < 1e-14);
    }

    #[test]
    fn fourier_completeness() {
        for k in 2..=8 {
            for phi in [0.0, 0.3, 1.7, -2.25] {
                let p = fourier_povm(k, phi);
                assert!(p.completeness_residual() <= 1e-12, "k={k} phi={phi}");
                Povm::new(p.elements().to_vec()).unwrap();
            }
        }
    }

    #[test]
    fn fixed_assemblages_are_valid() {
        let a = psi3_assemblage();
        assert_eq!((a.parties(), a.outputs(), a.dims()), (3, 3, vec![2, 2, 2]));
        let g = ghz_paradox_assemblage();
        assert_eq!(g.outputs(), 2);
    }

    #[test]
    fn mismatched_assemblage() {
        let r = Assemblage::new(vec![vec![Povm::trivial(2, 3)], vec![Povm::trivial(2, 2)]]);
        assert!(r.is_err());
        let r = Assemblage::new(vec![vec![Povm::trivial(2, 3), Povm::trivial(3, 3)]]);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn json_round_trip() {
        let a = psi3_assemblage();
        let text = serde_json::to_string(&a).unwrap();
        let back: Assemblage = serde_json::from_str(&text).unwrap();
        assert_eq!(a, back);
    }
}
