//! Pure and mixed multipartite states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::{self, c, CMat, CVec};
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-10;
pub const RANK_TOL: f64 = 1e-8;

/// Pure state on `C^{d_1} (x) ... (x) C^{d_n}`, party 0 most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ket {
    dims: Vec<usize>,
    #[serde(with = "serde_cvec")]
    amplitudes: CVec,
}

impl Ket {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let ket = Self::unchecked(dims, CVec::from_vec(amplitudes))?;
        let norm = ket.amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(ket)
    }

    /// Scales `amplitudes` to unit norm.
    pub fn normalized(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut ket = Self::unchecked(dims, CVec::from_vec(amplitudes))?;
        let norm = ket.amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        ket.amplitudes /= c(norm, 0.0);
        Ok(ket)
    }

    pub(crate) fn from_vector(dims: Vec<usize>, v: CVec) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        Self::unchecked(dims, v / c(norm, 0.0))
    }

    fn unchecked(dims: Vec<usize>, amplitudes: CVec) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidState(format!("local dimensions {dims:?}")));
        }
        let total: usize = dims.iter().product();
        if total != amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for local dimensions {dims:?}",
                amplitudes.len()
            )));
        }
        Ok(Self { dims, amplitudes })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn density(&self) -> CMat {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn reduced(&self, party: usize) -> CMat {
        let m = linalg::party_matrix(&self.amplitudes, &self.dims, party);
        &m * m.adjoint()
    }

    /// Reorders tensor factors: factor `p` moves to slot `perm[p]`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        crate::scenario::behavior::check_permutation(perm, self.dims.len())?;
        let (dims, map) = linalg::permute_indices(&self.dims, perm);
        let mut amps = CVec::zeros(self.amplitudes.len());
        for (old, &new) in map.iter().enumerate() {
            amps[new] = self.amplitudes[old];
        }
        Ok(Self { dims, amplitudes: amps })
    }
}

/// A state that is either pure or given by its density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum State {
    Pure(Ket),
    Mixed {
        dims: Vec<usize>,
        #[serde(with = "serde_cmat")]
        rho: CMat,
    },
}

impl State {
    pub fn mixed(dims: Vec<usize>, rho: CMat) -> Result<Self> {
        let total: usize = dims.iter().product();
        if rho.nrows() != total || rho.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} density matrix for local dimensions {dims:?}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        linalg::check_hermitian(&rho)?;
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        if linalg::min_eigenvalue(&rho) < -1e-9 {
            return Err(Error::InvalidState("density matrix is not positive semidefinite".into()));
        }
        Ok(State::Mixed { dims, rho })
    }

    /// `1/D` on the full space.
    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let total: usize = dims.iter().product();
        State::Mixed {
            dims,
            rho: linalg::identity(total).scale(1.0 / total as f64),
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            State::Pure(k) => k.dims(),
            State::Mixed { dims, .. } => dims,
        }
    }

    pub fn density(&self) -> CMat {
        match self {
            State::Pure(k) => k.density(),
            State::Mixed { rho, .. } => rho.clone(),
        }
    }

    pub fn reduced(&self, party: usize) -> CMat {
        match self {
            State::Pure(k) => k.reduced(party),
            State::Mixed { dims, rho } => linalg::partial_trace_keep(rho, dims, party),
        }
    }

    /// Ranks of the single-party marginals at eigenvalue cutoff `1e-8`.
    pub fn reduced_ranks(&self) -> Vec<usize> {
        (0..self.dims().len()).map(|p| linalg::rank(&self.reduced(p), RANK_TOL)).collect()
    }

    /// `v |psi><psi| + (1 - v) noise`.
    pub fn mix_with(&self, noise: &CMat, v: f64) -> Result<Self> {
        let rho = self.density().scale(v) + noise.scale(1.0 - v);
        State::mixed(self.dims().to_vec(), rho)
    }

    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        match self {
            State::Pure(k) => Ok(State::Pure(k.permute_parties(perm)?)),
            State::Mixed { dims, rho } => {
                crate::scenario::behavior::check_permutation(perm, dims.len())?;
                let (new_dims, map) = linalg::permute_indices(dims, perm);
                let mut out = CMat::zeros(rho.nrows(), rho.ncols());
                for (i, &ni) in map.iter().enumerate() {
                    for (j, &nj) in map.iter().enumerate() {
                        out[(ni, nj)] = rho[(i, j)];
                    }
                }
                Ok(State::Mixed { dims: new_dims, rho: out })
            }
        }
    }
}

impl From<Ket> for State {
    fn from(k: Ket) -> Self {
        State::Pure(k)
    }
}

/// Named states.
///
/// | name        | dims     | state                                         |
/// |-------------|----------|-----------------------------------------------|
/// | `ghz`       | (K,K,K)  | `sum_j |jjj> / sqrt K`                        |
/// | `ghz:N`     | (N,N,N)  | GHZ with `N` levels regardless of `K`         |
/// | `w`         | (2,2,2)  | `(|001> + |010> + |100>) / sqrt 3`            |
/// | `aharonov`  | (3,3,3)  | totally antisymmetric three-qutrit state      |
/// | `psi3`      | (2,2,2)  | `(3 - 2 sqrt 3)|000> + |011> + |101> + |110>`, normalized |
pub fn state_factory(name: &str, k: usize) -> Result<Ket> {
    let name = name.trim().to_ascii_lowercase();
    if let Some(n) = name.strip_prefix("ghz:").or_else(|| name.strip_prefix("ghz")) {
        let levels = if n.is_empty() {
            k
        } else {
            n.parse().map_err(|_| Error::UnknownState(name.clone()))?
        };
        return ghz(levels);
    }
    match name.as_str() {
        "w" => basis_sum(&[2, 2, 2], &[(&[0, 0, 1], 1.0), (&[0, 1, 0], 1.0), (&[1, 0, 0], 1.0)]),
        "aharonov" => basis_sum(
            &[3, 3, 3],
            &[
                (&[0, 1, 2], 1.0),
                (&[1, 2, 0], 1.0),
                (&[2, 0, 1], 1.0),
                (&[0, 2, 1], -1.0),
                (&[1, 0, 2], -1.0),
                (&[2, 1, 0], -1.0),
            ],
        ),
        "psi3" => {
            let a = 3.0 - 2.0 * 3f64.sqrt();
            basis_sum(
                &[2, 2, 2],
                &[(&[0, 0, 0], a), (&[0, 1, 1], 1.0), (&[1, 0, 1], 1.0), (&[1, 1, 0], 1.0)],
            )
        }
        _ => Err(Error::UnknownState(name)),
    }
}

pub fn ghz(levels: usize) -> Result<Ket> {
    if levels == 0 {
        return Err(Error::InvalidState("GHZ needs at least one level".into()));
    }
    let terms: Vec<(Vec<usize>, f64)> = (0..levels).map(|j| (vec![j; 3], 1.0)).collect();
    let refs: Vec<(&[usize], f64)> = terms.iter().map(|(s, a)| (s.as_slice(), *a)).collect();
    basis_sum(&[levels; 3], &refs)
}

fn basis_sum(dims: &[usize], terms: &[(&[usize], f64)]) -> Result<Ket> {
    let total: usize = dims.iter().product();
    let mut amps = vec![Complex64::new(0.0, 0.0); total];
    for (digits, a) in terms {
        let idx = digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x);
        amps[idx] += c(*a, 0.0);
    }
    Ket::normalized(dims.to_vec(), amps)
}

pub(crate) mod serde_cvec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::CVec;

    pub fn serialize<S: Serializer>(v: &CVec, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVec, D::Error> {
        Ok(CVec::from_vec(Vec::<Complex64>::deserialize(d)?))
    }
}

/// Row-major nested arrays of `[re, im]` pairs.
pub(crate) mod serde_cmat {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::CMat;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Complex64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = Vec::<Vec<Complex64>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(CMat::from_fn(n, m, |i, j| rows[i][j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::SymmetryGroup;

    #[test]
    fn ghz_is_normalized_with_maximally_mixed_marginals() {
        for k in 2..=5 {
            let g = state_factory("ghz", k).unwrap();
            assert!((g.amplitudes().norm() - 1.0).abs() < 1e-12);
            for p in 0..3 {
                let r = g.reduced(p);
                assert!((r - linalg::identity(k).scale(1.0 / k as f64)).norm() < 1e-12);
            }
            assert_eq!(State::Pure(g).reduced_ranks(), vec![k; 3]);
        }
        assert_eq!(state_factory("ghz:3", 2).unwrap().dims(), &[3, 3, 3]);
    }

    #[test]
    fn psi3_normalization_constant() {
        let k = state_factory("psi3", 3).unwrap();
        let n = 2.0 * (6.0 - 3.0 * 3f64.sqrt()).sqrt();
        assert!((k.amplitudes()[0].re - (3.0 - 2.0 * 3f64.sqrt()) / n).abs() < 1e-14);
        assert!((k.amplitudes()[3].re - 1.0 / n).abs() < 1e-14);
    }

    #[test]
    fn aharonov_is_antisymmetric() {
        let a = state_factory("aharonov", 3).unwrap();
        for perm in SymmetryGroup::Full.elements(3) {
            let b = a.permute_parties(&perm).unwrap();
            let overlap = (a.amplitudes().adjoint() * b.amplitudes())[(0, 0)];
            assert!((overlap.norm() - 1.0).abs() < 1e-12, "{perm:?}");
            let inversions = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            assert!((overlap.re - sign).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_names_and_bad_kets() {
        assert!(matches!(state_factory("bell", 2), Err(Error::UnknownState(_))));
        assert!(Ket::new(vec![2, 2], vec![c(1.0, 0.0); 4]).is_err());
        assert!(Ket::new(vec![2, 2], vec![c(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let k = state_factory("psi3", 3).unwrap();
        let text = serde_json::to_string(&State::Pure(k.clone())).unwrap();
        assert!(text.contains("[-0."), "{text}");
        let back: State = serde_json::from_str(&text).unwrap();
        assert_eq!(back, State::Pure(k));
        let m = State::maximally_mixed(vec![2, 2]);
        let back: State = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn permutation_of_mixed_matches_pure() {
        let w = state_factory("psi3", 3).unwrap();
        let pure = State::Pure(w.clone()).permute_parties(&[1, 2, 0]).unwrap();
        let mixed = State::Mixed {
            dims: w.dims().to_vec(),
            rho: w.density(),
        }
        .permute_parties(&[1, 2, 0])
        .unwrap();
        assert!((pure.density() - mixed.density()).norm() < 1e-14);
    }
}
