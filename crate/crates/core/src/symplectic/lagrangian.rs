use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::{j_form, max_abs, CMatrix, SymplecticMatrix};
use crate::error::{Error, Result};

/// A Lagrangian subspace of `R^2n`, stored as an orthonormal `2n x n` frame.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianFrame {
    f: DMatrix<f64>,
}

/// `U` with `L = U . span(x_1, ..., x_n)` under `z_k = x_k + i y_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryRepresentative {
    pub u: CMatrix,
}

impl UnitaryRepresentative {
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.u.nrows();
        (self.u.adjoint() * &self.u - CMatrix::identity(n, n)).iter().fold(0.0, |a, z| a.max(z.norm()))
    }
}

fn orthonormalize(f: &DMatrix<f64>) -> DMatrix<f64> {
    f.clone().qr().q()
}

impl LagrangianFrame {
    pub fn new(f: DMatrix<f64>) -> Result<Self> {
        if f.nrows() != 2 * f.ncols() || f.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!("{}x{} frame", f.nrows(), f.ncols())));
        }
        let n = f.ncols();
        let scale = max_abs(&f).max(f64::MIN_POSITIVE);
        let residual = max_abs(&(f.transpose() * j_form(n) * &f));
        if residual > 1e-9 * scale * scale {
            return Err(Error::NotLagrangian { residual });
        }
        let sv = f.clone().singular_values();
        let smin = sv.iter().fold(f64::INFINITY, |a, &x| a.min(x));
        if smin <= 1e-12 * scale {
            return Err(Error::NotLagrangian { residual: f64::INFINITY });
        }
        Ok(Self { f: orthonormalize(&f) })
    }

    /// `span(x_1, ..., x_n)`.
    pub fn standard(n: usize) -> Self {
        let mut f = DMatrix::zeros(2 * n, n);
        for k in 0..n {
            f[(2 * k, k)] = 1.0;
        }
        Self { f }
    }

    pub fn from_unitary(u: &CMatrix) -> Self {
        let n = u.nrows();
        let f = DMatrix::from_fn(2 * n, n, |r, c| if r % 2 == 0 { u[(r / 2, c)].re } else { u[(r / 2, c)].im });
        Self { f: orthonormalize(&f) }
    }

    /// Lagrangian with unitary representative `diag(e^{i a_k})`.
    pub fn from_angles(angles: &[f64]) -> Self {
        let n = angles.len();
        let u = CMatrix::from_fn(n, n, |r, c| if r == c { Complex64::from_polar(1.0, angles[r]) } else { Complex64::new(0.0, 0.0) });
        Self::from_unitary(&u)
    }

    pub fn order(&self) -> usize {
        self.f.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn unitary_rep(&self) -> UnitaryRepresentative {
        let n = self.order();
        UnitaryRepresentative {
            u: CMatrix::from_fn(n, n, |r, c| Complex64::new(self.f[(2 * r, c)], self.f[(2 * r + 1, c)])),
        }
    }

    /// `W = U U^T`, a symmetric unitary matrix that depends only on the span.
    pub fn w_matrix(&self) -> CMatrix {
        let u = self.unitary_rep().u;
        &u * u.transpose()
    }

    /// `arg det(U)^2` in `[0, 2 pi)`.
    pub fn arg_det_sq(&self) -> f64 {
        let d = self.unitary_rep().u.determinant();
        (2.0 * d.arg()).rem_euclid(2.0 * PI)
    }

    pub fn apply(&self, g: &SymplecticMatrix) -> Self {
        Self { f: orthonormalize(&(g.matrix() * &self.f)) }
    }

    /// `|det [F1 F2]|` for orthonormal frames: 1 for orthogonal complements,
    /// 0 when the subspaces meet.
    pub fn transversality_margin(&self, other: &Self) -> Result<f64> {
        if self.order() != other.order() {
            return Err(Error::DimensionMismatch("Lagrangians of different dimension".into()));
        }
        let n = self.order();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (2 * n, n)).copy_from(&self.f);
        m.view_mut((0, n), (2 * n, n)).copy_from(&other.f);
        Ok(m.determinant().abs())
    }

    pub fn transverse(&self, other: &Self) -> Result<(bool, f64)> {
        let m = self.transversality_margin(other)?;
        Ok((m > 1e-8, m))
    }
}

/// A Haar-distributed random Lagrangian (via a random unitary).
pub fn random_lagrangian<R: Rng>(rng: &mut R, n: usize) -> LagrangianFrame {
    let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    LagrangianFrame::from_unitary(&g.qr().q())
}
