use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// The standard symplectic form: `n` diagonal blocks `[[0, 1], [-1, 0]]`.
pub fn j_form(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

/// `max |M^T J M - J|`.
pub fn symplectic_residual(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square of even size", m.nrows(), m.ncols())));
    }
    let j = j_form(m.nrows() / 2);
    Ok(max_abs(&(m.transpose() * &j * m - j)))
}

/// An element of `Sp(2n,R)` in coordinates `(x1, y1, ..., xn, yn)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix {
    m: DMatrix<f64>,
}

impl SymplecticMatrix {
    /// Validates with tolerance `1e-9 * max(1, |M|^2)`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, 1e-9)
    }

    pub fn with_tolerance(m: DMatrix<f64>, rel_tol: f64) -> Result<Self> {
        let r = symplectic_residual(&m)?;
        let scale = max_abs(&m).max(1.0);
        if r > rel_tol * scale * scale {
            return Err(Error::InvalidArgument(format!("matrix is not symplectic (residual {r:e})")));
        }
        Ok(Self { m })
    }

    pub fn from_raw(m: DMatrix<f64>) -> Self {
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(2 * n, 2 * n) }
    }

    /// `n`: half the dimension.
    pub fn order(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.m).expect("validated dimensions")
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { m: &self.m * &other.m }
    }

    /// `J^-1 M^T J`.
    pub fn inverse(&self) -> Self {
        let j = j_form(self.order());
        Self { m: -(&j * self.m.transpose() * &j) }
    }

    pub fn neg(&self) -> Self {
        Self { m: -&self.m }
    }

    /// Block-diagonal sum in the `J` block convention.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.m.nrows(), other.m.nrows());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.m);
        m.view_mut((a, a), (b, b)).copy_from(&other.m);
        Self { m }
    }

    /// Block-diagonal embedding of `SL(2,R)` matrices.
    pub fn from_sl2_blocks(blocks: &[[[f64; 2]; 2]]) -> Self {
        let n = blocks.len();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (k, b) in blocks.iter().enumerate() {
            for (i, row) in b.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    m[(2 * k + i, 2 * k + j)] = v;
                }
            }
        }
        Self { m }
    }

    /// `exp(J S)` for symmetric `S`.
    pub fn exp_hamiltonian(s: &DMatrix<f64>) -> Result<Self> {
        check_symmetric(s)?;
        let j = j_form(s.nrows() / 2);
        Ok(Self { m: (j * s).exp() })
    }

    /// `exp(J^T S)`: for `S` positive semidefinite this is a nonnegative
    /// element of the causal order.
    pub fn exp_causal(s: &DMatrix<f64>) -> Result<Self> {
        check_symmetric(s)?;
        let j = j_form(s.nrows() / 2);
        Ok(Self { m: (j.transpose() * s).exp() })
    }

    /// Rotation by `theta` in every `(x_k, y_k)` plane.
    pub fn rotation(n: usize, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_sl2_blocks(&vec![[[c, -s], [s, c]]; n])
    }

    /// Complex form `z -> A z + B conj(z)` with `z_k = x_k + i y_k`.
    pub fn complex_form(&self) -> (CMatrix, CMatrix) {
        complex_form(&self.m)
    }

    /// Polar decomposition `M = O P` with `O` orthogonal and `P` symmetric
    /// positive definite; both factors are symplectic. `O` is the unitary
    /// polar factor of the complex-linear part, which stays well conditioned
    /// when `M` is not.
    pub fn polar(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let (a, _) = self.complex_form();
        let n = a.nrows();
        let svd = a.svd(true, true);
        let u = svd.u.expect("u requested") * svd.v_t.expect("v_t requested");
        let o = real_form(&u, &CMatrix::zeros(n, n));
        let p = o.transpose() * &self.m;
        let p = (&p + p.transpose()) * 0.5;
        (o, p)
    }
}

fn check_symmetric(s: &DMatrix<f64>) -> Result<()> {
    if s.nrows() != s.ncols() || s.nrows() % 2 != 0 || s.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!("{}x{} generator", s.nrows(), s.ncols())));
    }
    if max_abs(&(s - s.transpose())) > 1e-12 * max_abs(s).max(1.0) {
        return Err(Error::InvalidArgument("generator is not symmetric".into()));
    }
    Ok(())
}

pub fn complex_form(m: &DMatrix<f64>) -> (CMatrix, CMatrix) {
    let n = m.nrows() / 2;
    let mut a = CMatrix::zeros(n, n);
    let mut b = CMatrix::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let p = m[(2 * k, 2 * l)];
            let q = m[(2 * k, 2 * l + 1)];
            let r = m[(2 * k + 1, 2 * l)];
            let s = m[(2 * k + 1, 2 * l + 1)];
            a[(k, l)] = Complex64::new((p + s) / 2.0, (r - q) / 2.0);
            b[(k, l)] = Complex64::new((p - s) / 2.0, (r + q) / 2.0);
        }
    }
    (a, b)
}

/// Inverse of [`complex_form`].
pub fn real_form(a: &CMatrix, b: &CMatrix) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        for l in 0..n {
            let (x, y) = (a[(k, l)], b[(k, l)]);
            m[(2 * k, 2 * l)] = x.re + y.re;
            m[(2 * k, 2 * l + 1)] = y.im - x.im;
            m[(2 * k + 1, 2 * l)] = x.im + y.im;
            m[(2 * k + 1, 2 * l + 1)] = x.re - y.re;
        }
    }
    m
}

/// Random symmetric matrix with spectral radius exactly `radius`.
pub fn random_symmetric(dim: usize, rng: &mut ChaCha8Rng, radius: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
    let s: DMatrix<f64> = (&g + g.transpose()) * 0.5;
    let rho = SymmetricEigen::new(s.clone()).eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if rho == 0.0 {
        return s;
    }
    s * (radius / rho)
}

/// `exp(J S)` with `S` random symmetric of spectral radius `bound`.
pub fn random_hamiltonian_exp(n: usize, seed: u64, bound: f64) -> Result<SymplecticMatrix> {
    if !(bound > 0.0) || n == 0 {
        return Err(Error::InvalidArgument("need n >= 1 and bound > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SymplecticMatrix::exp_hamiltonian(&random_symmetric(2 * n, &mut rng, bound))
}
