//! Dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn check_hermitian(m: &CMat) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// `(m + m^dagger) / 2`
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(m.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    eigh(m).0[0]
}

/// `f` applied to the spectrum of a Hermitian matrix.
pub fn spectral_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (w, v) = eigh(m);
    let scaled = CMat::from_fn(v.nrows(), v.ncols(), |r, k| v[(r, k)] * f(w[k]));
    &scaled * v.adjoint()
}

/// Principal square root of a positive semidefinite matrix.
pub fn psd_sqrt(m: &CMat) -> CMat {
    spectral_map(m, |x| x.max(0.0).sqrt())
}

pub fn psd_inv_sqrt(m: &CMat) -> CMat {
    spectral_map(m, |x| 1.0 / x.sqrt())
}

/// Number of eigenvalues above `tol`.
pub fn rank(m: &CMat, tol: f64) -> usize {
    eigh(m).0.iter().filter(|&&x| x > tol).count()
}

/// Projector onto the span of eigenvectors with eigenvalue above `tol`.
pub fn support_projector(m: &CMat, tol: f64) -> CMat {
    spectral_map(m, |x| if x > tol { 1.0 } else { 0.0 })
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    // Tr(AB) = sum_ij A_ij B_ji
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// Matrix whose rows are indexed by party `p` and columns by the remaining parties
/// in their original order; `amps` is laid out with party 0 most significant.
pub fn party_matrix(amps: &CVec, dims: &[usize], p: usize) -> CMat {
    let dp = dims[p];
    let inner: usize = dims[p + 1..].iter().product();
    let outer: usize = dims[..p].iter().product();
    CMat::from_fn(dp, outer * inner, |i, col| {
        let (o, n) = (col / inner, col % inner);
        amps[(o * dp + i) * inner + n]
    })
}

/// Applies `op` to the tensor factor `p` of a vector.
pub fn apply_local(op: &CMat, p: usize, dims: &[usize], v: &CVec) -> CVec {
    let dp = dims[p];
    let inner: usize = dims[p + 1..].iter().product();
    let outer: usize = dims[..p].iter().product();
    let mut out = CVec::zeros(v.len());
    for o in 0..outer {
        for n in 0..inner {
            for i in 0..dp {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..dp {
                    let a = op[(i, j)];
                    if a.re != 0.0 || a.im != 0.0 {
                        s += a * v[(o * dp + j) * inner + n];
                    }
                }
                out[(o * dp + i) * inner + n] = s;
            }
        }
    }
    out
}

/// Reduced density matrix of party `p` from a full density matrix.
pub fn partial_trace_keep(rho: &CMat, dims: &[usize], p: usize) -> CMat {
    let dp = dims[p];
    let inner: usize = dims[p + 1..].iter().product();
    let outer: usize = dims[..p].iter().product();
    CMat::from_fn(dp, dp, |i, j| {
        let mut s = Complex64::new(0.0, 0.0);
        for o in 0..outer {
            for n in 0..inner {
                s += rho[((o * dp + i) * inner + n, (o * dp + j) * inner + n)];
            }
        }
        s
    })
}

/// Index permutation for reordering tensor factors: new factor `perm[p]` holds old factor `p`.
pub fn permute_indices(dims: &[usize], perm: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = dims.len();
    let mut new_dims = vec![0; n];
    for p in 0..n {
        new_dims[perm[p]] = dims[p];
    }
    let total: usize = dims.iter().product();
    let mut map = vec![0; total];
    let mut digits = vec![0usize; n];
    for (old, slot) in map.iter_mut().enumerate() {
        let mut r = old;
        for p in (0..n).rev() {
            digits[p] = r % dims[p];
            r /= dims[p];
        }
        let mut new = 0;
        let mut new_digits = vec![0; n];
        for p in 0..n {
            new_digits[perm[p]] = digits[p];
        }
        for q in 0..n {
            new = new * new_dims[q] + new_digits[q];
        }
        *slot = new;
    }
    (new_dims, map)
}

pub fn random_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase of `R`'s diagonal removed.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| random_complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMat {
        let g = CMat::from_fn(d, d, |_, _| random_complex_gaussian(rng));
        hermitize(&g)
    }

    #[test]
    fn eigh_orders_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [1, 2, 5, 27, 64, 343] {
            let m = random_hermitian(d, &mut rng);
            let (w, v) = eigh(&m);
            assert!(w.windows(2).all(|p| p[0] <= p[1]));
            let lam = CMat::from_diagonal(&CVec::from_iterator(d, w.iter().map(|&x| c(x, 0.0))));
            let err = (&v * lam * v.adjoint() - &m).norm();
            assert!(err <= 1e-8 * m.norm(), "d={d} err={err}");
        }
    }

    #[test]
    fn eigenvalues_match_characteristic_roots() {
        // 2x2 Hermitian: roots of x^2 - tr x + det
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let m = random_hermitian(2, &mut rng);
            let tr = (m[(0, 0)] + m[(1, 1)]).re;
            let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
            let disc = (tr * tr - 4.0 * det).sqrt();
            let (w, _) = eigh(&m);
            assert!((w[0] - (tr - disc) / 2.0).abs() < 1e-12);
            assert!((w[1] - (tr + disc) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..7 {
            let u = haar_unitary(d, &mut rng);
            assert!((&u * u.adjoint() - identity(d)).norm() < 1e-12);
        }
    }

    #[test]
    fn local_application_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dims = [2, 3, 2];
        let v = CVec::from_fn(12, |_, _| random_complex_gaussian(&mut rng));
        let op = random_hermitian(3, &mut rng);
        let full = kron(&kron(&identity(2), &op), &identity(2));
        assert!((apply_local(&op, 1, &dims, &v) - &full * &v).norm() < 1e-12);
    }

    #[test]
    fn partial_traces_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dims = [3, 2, 2];
        let mut v = CVec::from_fn(12, |_, _| random_complex_gaussian(&mut rng));
        v /= c(v.norm(), 0.0);
        let rho = &v * v.adjoint();
        for p in 0..3 {
            let m = party_matrix(&v, &dims, p);
            let direct = &m * m.adjoint();
            assert!((direct - partial_trace_keep(&rho, &dims, p)).norm() < 1e-12);
        }
    }

    #[test]
    fn sqrt_and_inverse_sqrt() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = CMat::from_fn(4, 4, |_, _| random_complex_gaussian(&mut rng));
        let p = &g * g.adjoint() + identity(4);
        let s = psd_sqrt(&p);
        assert!((&s * &s - &p).norm() < 1e-10);
        let is = psd_inv_sqrt(&p);
        assert!((&is * &p * &is - identity(4)).norm() < 1e-10);
    }
}
