//! Dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Eigenvalues in `[-PSD_CLAMP, 0)` are treated as rounding noise.
pub const PSD_CLAMP: f64 = 1e-9;

/// Guards against accidentally materializing huge operators.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_entries: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_entries: 1 << 20 }
    }
}

impl Limits {
    pub fn check(&self, rows: usize, cols: usize) -> Result<()> {
        match rows.checked_mul(cols) {
            Some(e) if e <= self.max_entries => Ok(()),
            _ => Err(Error::SizeCap { rows, cols, cap: self.max_entries }),
        }
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|v| C64::new(v, 0.0))
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `d^k` with overflow reported as a size-cap error.
pub fn checked_pow(d: usize, k: usize) -> Result<usize> {
    d.checked_pow(k as u32).ok_or(Error::SizeCap { rows: usize::MAX, cols: 1, cap: 0 })
}

pub fn tensor_power(m: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    tensor_power_with(m, k, &Limits::default())
}

pub fn tensor_power_with(m: &ComplexMatrix, k: usize, limits: &Limits) -> Result<ComplexMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("tensor power needs k >= 1".into()));
    }
    let r = checked_pow(m.nrows(), k)?;
    let cc = checked_pow(m.ncols(), k)?;
    limits.check(r, cc)?;
    let mut out = ComplexMatrix::identity(1, 1);
    for _ in 0..k {
        out = out.kronecker(m);
    }
    Ok(out)
}

pub fn ket_power(v: &ComplexVector, k: usize) -> ComplexVector {
    let mut out = ComplexVector::from_element(1, C64::new(1.0, 0.0));
    for _ in 0..k {
        out = out.kronecker(v);
    }
    out
}

pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    let e = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn eigvalsh(m: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(hermitize(m)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &ComplexMatrix) -> f64 {
    eigvalsh(m).last().copied().unwrap_or(0.0)
}

/// `V f(D) V†` for a Hermitian input.
pub fn spectral_map(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (vals, vecs) = eigh(m);
    let mut scaled = vecs.clone();
    for (j, v) in vals.iter().enumerate() {
        let fv = f(*v);
        scaled.column_mut(j).scale_mut(fv);
    }
    &scaled * vecs.adjoint()
}

fn check_psd(vals: &[f64]) -> Result<()> {
    match vals.first() {
        Some(&l) if l < -PSD_CLAMP => Err(Error::NotPsd(l)),
        _ => Ok(()),
    }
}

pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_psd(&eigvalsh(m))?;
    Ok(spectral_map(m, |v| v.max(0.0).sqrt()))
}

/// Pseudo-inverse square root; eigenvalues at or below `rel_cutoff * λ_max`
/// are treated as zero. Also returns the projector onto the kept eigenspace.
pub fn pinv_sqrt(m: &ComplexMatrix, rel_cutoff: f64) -> (ComplexMatrix, ComplexMatrix) {
    let (vals, vecs) = eigh(m);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cut = rel_cutoff * top;
    let n = m.nrows();
    let mut inv = ComplexMatrix::zeros(n, n);
    let mut proj = ComplexMatrix::zeros(n, n);
    for (j, &v) in vals.iter().enumerate() {
        if v > cut && v > 0.0 {
            let col = vecs.column(j);
            let outer = &col * col.adjoint();
            inv += &outer * C64::new(1.0 / v.sqrt(), 0.0);
            proj += outer;
        }
    }
    (inv, proj)
}

pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    eigvalsh(m).iter().map(|v| v.abs()).sum()
}

/// `Re Tr(A B)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)] * b[(j, i)];
            s += x.re;
        }
    }
    s
}

pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexVector {
    let v = ComplexVector::from_fn(d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix on R.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let x = r[(j, j)];
        let ph = if x.norm() > 0.0 { x / x.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|v| *v *= ph);
    }
    q
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as u64
}

pub fn factorial(n: u64) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigh_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = ComplexMatrix::from_fn(4, 4, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let h = hermitize(&a);
        let (vals, vecs) = eigh(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = ComplexMatrix::from_diagonal(&DVector::from_iterator(4, vals.iter().map(|v| C64::new(*v, 0.0))));
        assert!(max_abs(&(&vecs * d * vecs.adjoint() - &h)) < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = ComplexMatrix::from_fn(3, 3, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let p = &a * a.adjoint();
        let s = psd_sqrt(&p).unwrap();
        assert!(max_abs(&(&s * &s - &p)) < 1e-10);
    }

    #[test]
    fn sqrt_rejects_negative() {
        let m = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-1e-6, 0.0)]));
        assert!(matches!(psd_sqrt(&m), Err(Error::NotPsd(_))));
        let m = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-1e-12, 0.0)]));
        assert!(psd_sqrt(&m).is_ok());
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_unitary(5, &mut rng);
        assert!(max_abs(&(&u * u.adjoint() - ComplexMatrix::identity(5, 5))) < 1e-12);
    }

    #[test]
    fn size_cap() {
        let m = ComplexMatrix::identity(2, 2);
        let lim = Limits { max_entries: 64 };
        assert!(tensor_power_with(&m, 3, &lim).is_ok());
        assert!(matches!(tensor_power_with(&m, 4, &lim), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(7, 3), 35);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }
}
