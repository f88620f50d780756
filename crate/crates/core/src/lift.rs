//! The Z-central extension of `Sp(2n,R)` acting on the universal cover of the
//! Lagrangian Grassmannian.
//!
//! A point of the cover is a Lagrangian together with a real `theta`
//! congruent to `arg det(U)^2` mod `2 pi`. A lifted group element is stored
//! as its endpoint matrix plus the amount `s` by which it moves `theta` at the
//! standard Lagrangian; its displacement elsewhere follows from
//! `arg det W' = arg det W + 2 arg det A + 2 arg det(I + Z conj(W))`, where
//! `g z = A z + B conj(z)` and `Z = A^-1 B` has norm below 1.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circle::{CircleLift, MoebiusLift};
use crate::error::{Error, Result};
use crate::order::{OrderedGroup, Positivity};
use crate::symplectic::{j_form, max_abs, random_lagrangian, real_form, CMatrix, LagrangianFrame, SymplecticMatrix};
use crate::Estimate;

const TAU: f64 = 2.0 * PI;
const MAX_STEPS: usize = 1 << 20;
/// Displacements (in radians) at or below this count as fixed or retreating.
const FIXED_TOL: f64 = 1e-8;
/// Orbit steps moving the projector by less than this count as fixed.
const FIXED_POINT_TOL: f64 = 1e-13;
/// Error attached to `psi` read off at a numerically fixed Lagrangian.
const FIXED_POINT_ERROR: f64 = 1e-9;

fn projector(frame: &LagrangianFrame) -> DMatrix<f64> {
    frame.frame() * frame.frame().transpose()
}

/// Eigenvalues and orthonormal eigenvectors of a unitary matrix, read off a
/// generic real combination of its Hermitian and skew-Hermitian parts.
fn unitary_eigen(u: &CMatrix) -> (Vec<Complex64>, CMatrix) {
    let (c, s) = (0.7f64.cos(), 0.7f64.sin());
    let herm = (u + u.adjoint()) * Complex64::from(c / 2.0) + (u - u.adjoint()) * Complex64::new(0.0, -s / 2.0);
    let vectors = SymmetricEigen::new(herm).eigenvectors;
    let values = (0..u.nrows())
        .map(|k| {
            let v = vectors.column(k);
            (v.adjoint() * u * v)[(0, 0)]
        })
        .collect();
    (values, vectors)
}

/// Sum of principal arguments of the eigenvalues of `I + x`, where `x` has
/// spectral radius below 1.
fn eigen_arg_sum(x: &CMatrix) -> f64 {
    let n = x.nrows();
    let m = CMatrix::identity(n, n) + x;
    if n == 1 {
        return m[(0, 0)].arg();
    }
    if let Some(eig) = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 200).and_then(|s| s.eigenvalues()) {
        return eig.iter().map(|z| z.arg()).sum();
    }
    unwrapped_arg_det(x)
}

/// `arg det(I + t x)` followed continuously from `t = 0` to `1`. Each
/// eigenvalue `1 + t mu` stays in the right half-plane, so this equals the
/// sum of principal arguments.
fn unwrapped_arg_det(x: &CMatrix) -> f64 {
    let n = x.nrows();
    let mut steps = 8;
    loop {
        let mut prev = 0.0;
        let mut total = 0.0;
        let mut ok = true;
        for j in 1..=steps {
            let a = (CMatrix::identity(n, n) + x * Complex64::from(j as f64 / steps as f64)).determinant().arg();
            let d = (a - prev + PI).rem_euclid(TAU) - PI;
            if d.abs() >= PI / 4.0 {
                ok = false;
                break;
            }
            total += d;
            prev = a;
        }
        if ok || steps >= MAX_STEPS {
            return total;
        }
        steps *= 2;
    }
}

/// `arg det` of the complex frame `x_k + i y_k` of `g` applied to the standard
/// Lagrangian, doubled: `arg det W(g L0)` modulo `2 pi`.
fn arg_det_sq_of_image(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows() / 2;
    let v = CMatrix::from_fn(n, n, |r, c| Complex64::new(g[(2 * r, 2 * c)], g[(2 * r + 1, 2 * c)]));
    2.0 * v.determinant().arg()
}

fn w_conj(frame: &LagrangianFrame) -> CMatrix {
    frame.w_matrix().map(|z| z.conj())
}

/// Unwrapped change of `arg det W(g_t L0)` along `t in [0, 1]`, in turns.
/// Steps double until no step moves the angle by `pi/2` or more.
pub fn track_path(path: impl Fn(f64) -> DMatrix<f64>, initial_steps: usize) -> Result<(f64, usize)> {
    let mut steps = initial_steps.max(1);
    loop {
        let mut prev = arg_det_sq_of_image(&path(0.0));
        let mut total = 0.0;
        let mut ok = true;
        for j in 1..=steps {
            let a = arg_det_sq_of_image(&path(j as f64 / steps as f64));
            let d = (a - prev + PI).rem_euclid(TAU) - PI;
            if d.abs() >= PI / 2.0 {
                ok = false;
                break;
            }
            total += d;
            prev = a;
        }
        if ok {
            return Ok((total / TAU, steps));
        }
        if steps >= MAX_STEPS {
            return Err(Error::RefinementLimit { max_steps: MAX_STEPS });
        }
        steps *= 2;
    }
}

/// A point of the universal cover of the Lagrangian Grassmannian.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverPoint {
    pub frame: LagrangianFrame,
    pub theta: f64,
}

impl CoverPoint {
    pub fn new(frame: LagrangianFrame, theta: f64) -> Result<Self> {
        let d = (theta - frame.arg_det_sq() + PI).rem_euclid(TAU) - PI;
        if d.abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!("theta is off the fibre by {d:e}")));
        }
        Ok(Self { frame, theta })
    }

    /// The standard Lagrangian at `theta = 0`.
    pub fn basepoint(n: usize) -> Self {
        Self { frame: LagrangianFrame::standard(n), theta: 0.0 }
    }

    /// Lift of `frame` with `theta` in `[0, 2 pi)`.
    pub fn over(frame: LagrangianFrame) -> Self {
        let theta = frame.arg_det_sq();
        Self { frame, theta }
    }

    pub fn deck(&self, k: i64) -> Self {
        Self { frame: self.frame.clone(), theta: self.theta + TAU * k as f64 }
    }
}

/// Evidence that an element is nonnegative (or dominant) in the causal order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    None,
    Positive,
    Dominant,
}

impl Certificate {
    fn compose(self, other: Self) -> Self {
        use Certificate::*;
        match (self, other) {
            (None, _) | (_, None) => None,
            (Dominant, _) | (_, Dominant) => Dominant,
            (Positive, Positive) => Positive,
        }
    }
}

/// An element of the central extension: endpoint plus displacement at the
/// basepoint in turns (`zeta_shift / 2 pi`), kept as an integer winding and
/// a real remainder so that deck translations are exact.
#[derive(Clone, Debug)]
pub struct LiftedSymplectic {
    endpoint: SymplecticMatrix,
    winding: i64,
    base: f64,
    certificate: Certificate,
    steps: usize,
    z: CMatrix,
    base_correction: f64,
}

impl LiftedSymplectic {
    fn assemble(endpoint: SymplecticMatrix, winding: i64, base: f64, certificate: Certificate, steps: usize) -> Self {
        let (a, b) = endpoint.complex_form();
        // `A` is invertible for symplectic matrices; LU can still fail on
        // products with enormous entries.
        let z = match a.clone().lu().solve(&b) {
            Some(z) => z,
            None => a.svd(true, true).solve(&b, 0.0).expect("u and v were requested"),
        };
        let base_correction = eigen_arg_sum(&z) / PI;
        let mut lifted = Self { endpoint, winding, base, certificate, steps, z, base_correction };
        if lifted.is_central() {
            lifted.certificate = match lifted.turns() {
                t if t > 0.5 => Certificate::Dominant,
                t if t > -0.5 => Certificate::Positive,
                _ => Certificate::None,
            };
        }
        lifted
    }

    /// Lift with the given basepoint shift (in radians), snapped onto the
    /// fibre over `endpoint`.
    pub fn from_shift(endpoint: SymplecticMatrix, zeta_shift: f64) -> Self {
        let exact = arg_det_sq_of_image(endpoint.matrix());
        let k = ((zeta_shift - exact) / TAU).round();
        Self::assemble(endpoint, k as i64, exact / TAU, Certificate::None, 0)
    }

    /// The lift along the polar path `t -> O^t P^t`, in closed form.
    pub fn base(endpoint: SymplecticMatrix) -> Self {
        let (o, p) = endpoint.polar();
        // `X = P_xx` stays positive definite along `P^t` and `Y X^-1` is
        // symmetric, so `arg det(X + iY)` is a sum of arctangents.
        let n = endpoint.order();
        let x = DMatrix::from_fn(n, n, |r, c| p[(2 * r, 2 * c)]);
        let y = DMatrix::from_fn(n, n, |r, c| p[(2 * r + 1, 2 * c)]);
        let positive_part = match x.clone().cholesky() {
            Some(ch) => {
                let s = ch.solve(&y.transpose()).transpose();
                let s = (&s + s.transpose()) * 0.5;
                SymmetricEigen::new(s).eigenvalues.iter().map(|m| m.atan()).sum()
            }
            None => {
                let (ap, bp) = crate::symplectic::complex_form(&p);
                eigen_arg_sum(&ap.lu().solve(&bp).expect("invertible"))
            }
        };
        let (uo, _) = crate::symplectic::complex_form(&o);
        let rotation_part: f64 = unitary_eigen(&uo).0.iter().map(|z| z.arg()).sum();
        let approx = 2.0 * (positive_part + rotation_part);
        Self::from_shift(endpoint, approx)
    }

    /// The lift along the polar path, by unwrapped tracking.
    pub fn lift(endpoint: SymplecticMatrix, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument("steps must be >= 1".into()));
        }
        let (o, p) = endpoint.polar();
        let (uo, _) = crate::symplectic::complex_form(&o);
        let (q, t) = nalgebra::linalg::Schur::new(uo).unpack();
        let phases: Vec<f64> = (0..t.nrows()).map(|k| t[(k, k)].arg()).collect();
        let peig = SymmetricEigen::new(p);
        let path = |s: f64| {
            let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                phases.len(),
                phases.iter().map(|&f| Complex64::from_polar(1.0, s * f)),
            ));
            let us = &q * d * q.adjoint();
            let os = real_form(&us, &CMatrix::zeros(us.nrows(), us.ncols()));
            let lam = peig.eigenvalues.map(|l| l.powf(s));
            let ps = &peig.eigenvectors * DMatrix::from_diagonal(&lam) * peig.eigenvectors.transpose();
            os * ps
        };
        let (turns, used) = track_path(path, steps)?;
        let mut lifted = Self::from_shift(endpoint, turns * TAU);
        lifted.steps = used;
        Ok(lifted)
    }

    /// Lift of `exp(X)` along `t -> exp(t X)` with `X = J^T S`. Certified
    /// nonnegative when `S` is positive semidefinite, dominant when positive
    /// definite.
    pub fn exp_causal(s: &DMatrix<f64>, steps: usize) -> Result<Self> {
        let endpoint = SymplecticMatrix::exp_causal(s)?;
        let x = j_form(s.nrows() / 2).transpose() * s;
        let (turns, used) = track_path(|t| (&x * t).exp(), steps.max(1))?;
        let min_eig = SymmetricEigen::new(s.clone()).eigenvalues.iter().fold(f64::INFINITY, |a, &e| a.min(e));
        let certificate = if min_eig > 1e-8 {
            Certificate::Dominant
        } else if min_eig >= -1e-10 {
            Certificate::Positive
        } else {
            Certificate::None
        };
        let mut lifted = Self::from_shift(endpoint, turns * TAU);
        lifted.steps = used;
        lifted.certificate = lifted.certificate.max_with(certificate);
        Ok(lifted)
    }

    /// The deck transformation `Z^k`.
    pub fn central(n: usize, k: i64) -> Self {
        Self::assemble(SymplecticMatrix::identity(n), k, 0.0, Certificate::None, 0)
    }

    pub fn identity(n: usize) -> Self {
        Self::central(n, 0)
    }

    /// The `n = 1` element corresponding to a lift of a projective map of the circle.
    pub fn from_moebius(f: &MoebiusLift) -> Self {
        let m = SymplecticMatrix::from_sl2_blocks(&[f.matrix()]);
        Self::central(1, f.winding).compose(&Self::base(m))
    }

    pub fn order(&self) -> usize {
        self.endpoint.order()
    }

    /// For `n = 1`: the circle lift with the same action on the cover of `RP^1`.
    pub fn to_moebius(&self) -> Option<MoebiusLift> {
        if self.order() != 1 {
            return None;
        }
        let m = self.endpoint.matrix();
        let f = MoebiusLift::from_matrix([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]).ok()?;
        let w = (self.turns() - Self::from_moebius(&f).turns()).round() as i64;
        Some(f.with_winding(w))
    }

    /// Splits a block-diagonal endpoint into `SL(2)` base lifts plus the
    /// integer winding left over after adding up their shifts.
    fn circle_blocks(&self) -> Option<(Vec<MoebiusLift>, i64)> {
        let m = self.endpoint.matrix();
        let scale = max_abs(m).max(1.0);
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if r / 2 != c / 2 && m[(r, c)].abs() > 1e-12 * scale {
                    return None;
                }
            }
        }
        let mut blocks = Vec::with_capacity(self.order());
        let mut sum = 0.0;
        for k in 0..self.order() {
            let (i, j) = (2 * k, 2 * k + 1);
            let f = MoebiusLift::from_matrix([[m[(i, i)], m[(i, j)]], [m[(j, i)], m[(j, j)]]]).ok()?;
            sum += Self::from_moebius(&f).turns();
            blocks.push(f);
        }
        Some((blocks, (self.turns() - sum).round() as i64))
    }

    /// Certificate from splitting the winding over `SL(2)` blocks so that
    /// every block is nonnegative (resp. dominant).
    fn block_certificate(&self) -> Certificate {
        let Some((blocks, spare)) = self.circle_blocks() else {
            return Certificate::None;
        };
        let least = |ok: &dyn Fn(&MoebiusLift) -> bool| -> Option<i64> {
            let mut total = 0;
            for f in &blocks {
                total += (-2..=2).find(|&w| ok(&f.with_winding(w)))?;
            }
            Some(total)
        };
        if least(&|f| f.dominant_exact()).is_some_and(|t| t <= spare) {
            Certificate::Dominant
        } else if least(&|f| f.positivity_exact() == Positivity::Positive).is_some_and(|t| t <= spare) {
            Certificate::Positive
        } else {
            Certificate::None
        }
    }

    pub fn endpoint(&self) -> &SymplecticMatrix {
        &self.endpoint
    }

    /// `zeta(g x0) - zeta(x0)` at the standard basepoint, in radians.
    pub fn zeta_shift(&self) -> f64 {
        self.turns() * TAU
    }

    pub fn turns(&self) -> f64 {
        self.winding as f64 + self.base
    }

    /// Integer part of the stored shift; the rest is [`Self::turns`] minus this.
    pub fn winding(&self) -> i64 {
        self.winding
    }

    /// The same lift composed with the deck transformation `Z^k`.
    pub fn deck(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.winding += k;
        if out.is_central() {
            out = Self::assemble(out.endpoint, out.winding, out.base, Certificate::None, out.steps);
        } else if k < 0 {
            out.certificate = Certificate::None;
        }
        out
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    /// Path steps used to build the lift (0 for closed-form constructions).
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn with_certificate(mut self, c: Certificate) -> Self {
        self.certificate = c;
        self
    }

    /// Endpoint is `+-I`, so the element acts by a constant shift.
    pub fn is_central(&self) -> bool {
        let m = self.endpoint.matrix();
        let id = DMatrix::<f64>::identity(m.nrows(), m.ncols());
        max_abs(&(m - &id)) < 1e-12 || max_abs(&(m + &id)) < 1e-12
    }

    /// Displacement `zeta(g x) - zeta(x)` at a point over `frame`, in turns.
    pub fn displacement_turns(&self, frame: &LagrangianFrame) -> f64 {
        self.winding as f64 + self.fractional_displacement(frame)
    }

    fn fractional_displacement(&self, frame: &LagrangianFrame) -> f64 {
        let c = eigen_arg_sum(&(&self.z * w_conj(frame))) / PI;
        self.base + c - self.base_correction
    }

    pub fn act(&self, x: &CoverPoint) -> CoverPoint {
        CoverPoint { frame: x.frame.apply(&self.endpoint), theta: x.theta + TAU * self.displacement_turns(&x.frame) }
    }

    pub fn compose(&self, other: &Self) -> Self {
        let moved = LagrangianFrame::standard(self.order()).apply(&other.endpoint);
        let base = other.base + self.fractional_displacement(&moved);
        let certificate = self.certificate.compose(other.certificate);
        Self::assemble(self.endpoint.mul(&other.endpoint), self.winding + other.winding, base, certificate, 0)
    }

    pub fn inverse(&self) -> Self {
        let inv = self.endpoint.inverse();
        let moved = LagrangianFrame::standard(self.order()).apply(&inv);
        let base = -self.fractional_displacement(&moved);
        Self::assemble(inv, -self.winding, base, Certificate::None, 0)
    }

    pub fn power(&self, m: i64) -> Self {
        let mut base = if m < 0 { self.inverse() } else { self.clone() };
        let mut e = m.unsigned_abs();
        let mut acc = Self::identity(self.order());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base);
            }
        }
        acc
    }

    /// Homogenised displacement `lim (zeta(g^k x) - zeta(x)) / 2 pi k`; see
    /// [`LiftedProduct::psi`].
    pub fn psi(&self, k_iters: usize) -> Result<Estimate> {
        LiftedProduct::single(self.clone()).psi(k_iters)
    }

    /// [`Self::psi`] minus [`Self::winding`].
    pub fn psi_fractional(&self, k_iters: usize) -> Result<Estimate> {
        LiftedProduct::single(self.clone()).psi_fractional(k_iters)
    }

    pub fn positivity_verdict(&self, samples: usize, seed: u64) -> PositivityVerdict {
        LiftedProduct::single(self.clone()).positivity_verdict(samples, seed)
    }

    pub fn dominance_verdict(&self, samples: usize, seed: u64, k_iters: usize) -> Result<DominanceVerdict> {
        LiftedProduct::single(self.clone()).dominance_verdict(samples, seed, k_iters)
    }
}

/// A product `f1 f2 ... fm` kept as its factors. Displacements are summed
/// factor by factor while the frame is carried along, which stays accurate
/// when the product itself has huge entries.
#[derive(Clone, Debug)]
pub struct LiftedProduct {
    factors: Vec<LiftedSymplectic>,
}

impl LiftedProduct {
    pub fn new(factors: Vec<LiftedSymplectic>) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Err(Error::InvalidArgument("empty product".into()));
        };
        if factors.iter().any(|f| f.order() != first.order()) {
            return Err(Error::DimensionMismatch("factors of different order".into()));
        }
        Ok(Self { factors })
    }

    pub fn single(g: LiftedSymplectic) -> Self {
        Self { factors: vec![g] }
    }

    pub fn order(&self) -> usize {
        self.factors[0].order()
    }

    pub fn factors(&self) -> &[LiftedSymplectic] {
        &self.factors
    }

    pub fn winding(&self) -> i64 {
        self.factors.iter().map(|f| f.winding).sum()
    }

    /// Fractional displacement at `frame` and the image frame.
    fn transport(&self, frame: &LagrangianFrame) -> (f64, LagrangianFrame) {
        let mut frac = 0.0;
        let mut x = frame.clone();
        for f in self.factors.iter().rev() {
            frac += f.fractional_displacement(&x);
            x = x.apply(&f.endpoint);
        }
        (frac, x)
    }

    pub fn displacement_turns(&self, frame: &LagrangianFrame) -> f64 {
        self.winding() as f64 + self.transport(frame).0
    }

    /// The product as a single lift.
    pub fn fold(&self) -> LiftedSymplectic {
        if self.factors.len() == 1 {
            return self.factors[0].clone();
        }
        let (frac, _) = self.transport(&LagrangianFrame::standard(self.order()));
        let mut endpoint = self.factors[0].endpoint.clone();
        let mut certificate = self.factors[0].certificate;
        for f in &self.factors[1..] {
            endpoint = endpoint.mul(&f.endpoint);
            certificate = certificate.compose(f.certificate);
        }
        LiftedSymplectic::assemble(endpoint, self.winding(), frac, certificate, 0)
    }

    /// Fractional parts of per-step displacements along the orbit of the
    /// basepoint, and the last frame reached. Stops early, returning the last
    /// step's movement, once the orbit sits on a fixed Lagrangian.
    fn orbit(&self, k_iters: usize) -> (Vec<f64>, LagrangianFrame, Option<f64>) {
        let mut frame = LagrangianFrame::standard(self.order());
        let mut deltas = Vec::with_capacity(k_iters);
        for _ in 0..k_iters {
            let (d, next) = self.transport(&frame);
            deltas.push(d);
            let moved = max_abs(&(projector(&next) - projector(&frame)));
            frame = next;
            if moved < FIXED_POINT_TOL {
                return (deltas, frame, Some(moved));
            }
        }
        (deltas, frame, None)
    }

    /// Homogenised displacement `lim (zeta(g^k x) - zeta(x)) / 2 pi k`.
    ///
    /// The orbit average uses the smooth weight `exp(-1/(t(1-t)))`. Birkhoff
    /// sums stay within `n` turns of `k psi`, so summation by parts bounds the
    /// error by `n * TV(w) / sum(w)`.
    pub fn psi(&self, k_iters: usize) -> Result<Estimate> {
        let e = self.psi_fractional(k_iters)?;
        Ok(Estimate::new(self.winding() as f64 + e.value, e.error))
    }

    /// [`Self::psi`] minus [`Self::winding`].
    pub fn psi_fractional(&self, k_iters: usize) -> Result<Estimate> {
        Ok(self.psi_with_orbit(k_iters)?.0)
    }

    fn psi_with_orbit(&self, k_iters: usize) -> Result<(Estimate, LagrangianFrame)> {
        if k_iters == 0 {
            return Err(Error::InvalidArgument("k_iters must be >= 1".into()));
        }
        if self.factors.iter().all(|f| f.is_central()) {
            let (frac, last) = self.transport(&LagrangianFrame::standard(self.order()));
            return Ok((Estimate::exact(frac), last));
        }
        let (deltas, last, fixed) = self.orbit(k_iters);
        if let Some(moved) = fixed {
            // at a fixed point x, zeta(g^k x) - zeta(x) = k * displacement(x)
            let error = if moved == 0.0 { 0.0 } else { FIXED_POINT_ERROR };
            return Ok((Estimate::new(*deltas.last().expect("nonempty"), error), last));
        }
        let k = k_iters as f64;
        let weights: Vec<f64> = (0..k_iters)
            .map(|j| {
                let t = (j as f64 + 0.5) / k;
                (-1.0 / (t * (1.0 - t))).exp()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let d0 = deltas[0];
        let mean = d0 + weights.iter().zip(&deltas).map(|(w, d)| w * (d - d0)).sum::<f64>() / total;
        let mut variation = weights[0] + weights[k_iters - 1];
        variation += weights.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
        let error = if deltas.iter().all(|&d| d == d0) { 0.0 } else { self.order() as f64 * variation / total };
        Ok((Estimate::new(mean, error), last))
    }

    pub fn positivity_verdict(&self, samples: usize, seed: u64) -> PositivityVerdict {
        let folded = self.fold();
        if let Some(f) = folded.to_moebius() {
            return match f.positivity_exact() {
                Positivity::Positive => PositivityVerdict::CertifiedPositive,
                _ => PositivityVerdict::Violation { displacement: f.min_displacement().value * TAU },
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.order();
        let frames = std::iter::once(LagrangianFrame::standard(n)).chain((0..samples).map(|_| random_lagrangian(&mut rng, n)));
        for frame in frames {
            let d = self.displacement_turns(&frame) * TAU;
            if d < -FIXED_TOL {
                return PositivityVerdict::Violation { displacement: d };
            }
        }
        match folded.certificate.max_with(folded.block_certificate()) {
            Certificate::Positive | Certificate::Dominant => PositivityVerdict::CertifiedPositive,
            Certificate::None => PositivityVerdict::Unknown,
        }
    }

    pub fn dominance_verdict(&self, samples: usize, seed: u64, k_iters: usize) -> Result<DominanceVerdict> {
        let folded = self.fold();
        if let Some(f) = folded.to_moebius() {
            return Ok(if f.dominant_exact() {
                DominanceVerdict::CertifiedDominant
            } else {
                DominanceVerdict::NotDominant(DominanceWitness::NonAdvancingPoint {
                    displacement: f.min_displacement().value * TAU,
                })
            });
        }
        if folded.certificate == Certificate::Dominant || folded.block_certificate() == Certificate::Dominant {
            return Ok(DominanceVerdict::CertifiedDominant);
        }
        let (frac, last) = self.psi_with_orbit(k_iters)?;
        let psi = Estimate::new(self.winding() as f64 + frac.value, frac.error);
        if psi.value + psi.error < 0.0 {
            return Ok(DominanceVerdict::NotDominant(DominanceWitness::NegativePsi { psi: psi.value, error: psi.error }));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.order();
        let frames = [LagrangianFrame::standard(n), last]
            .into_iter()
            .chain((0..samples).map(|_| random_lagrangian(&mut rng, n)));
        for frame in frames {
            let d = self.displacement_turns(&frame) * TAU;
            if d <= FIXED_TOL {
                return Ok(DominanceVerdict::NotDominant(DominanceWitness::NonAdvancingPoint { displacement: d }));
            }
        }
        Ok(DominanceVerdict::Unknown)
    }
}

trait MaxWith {
    fn max_with(self, other: Self) -> Self;
}

impl MaxWith for Certificate {
    fn max_with(self, other: Self) -> Self {
        let rank = |c: Certificate| match c {
            Certificate::None => 0,
            Certificate::Positive => 1,
            Certificate::Dominant => 2,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PositivityVerdict {
    Violation { displacement: f64 },
    CertifiedPositive,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "witness", rename_all = "snake_case")]
pub enum DominanceWitness {
    NegativePsi { psi: f64, error: f64 },
    NonAdvancingPoint { displacement: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DominanceVerdict {
    NotDominant(DominanceWitness),
    CertifiedDominant,
    Unknown,
}

/// `round((zeta(x) - zeta(y)) / 2 pi)` and its distance to the nearest
/// half-integer.
pub fn height_iota(x: &CoverPoint, y: &CoverPoint) -> (i64, f64) {
    let v = (x.theta - y.theta) / TAU;
    let r = v.round();
    (r as i64, 0.5 - (v - r).abs())
}

/// Largest `zeta` length, over sampled pairs, of the one-parameter causal
/// rotation carrying one Lagrangian to another. At most `2 pi n`.
pub fn causal_diameter_estimate(n: usize, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let wx = random_lagrangian(&mut rng, n).w_matrix();
        let wy = random_lagrangian(&mut rng, n).w_matrix();
        let (values, q) = unitary_eigen(&wx);
        let half = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            values.iter().map(|z| Complex64::from_polar(1.0, -z.arg() / 2.0)),
        ));
        let root_inv = &q * half * q.adjoint();
        let m = &root_inv * wy * &root_inv;
        let len: f64 = unitary_eigen(&m).0.iter().map(|z| z.arg().rem_euclid(TAU)).sum();
        best = best.max(len);
    }
    best
}

/// Lifted symplectic elements with the causal order (certificates and sampled
/// refutations) and `psi`. The defect bound and sandwich constant are
/// estimates, not proved constants.
#[derive(Clone, Copy, Debug)]
pub struct SymplecticOrder {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub k_iters: usize,
    pub sandwich: f64,
}

impl SymplecticOrder {
    /// Sandwich constant `5 D / 2 pi` from an estimated causal diameter `D`.
    pub fn new(n: usize, samples: usize, seed: u64, k_iters: usize) -> Self {
        let d = causal_diameter_estimate(n, 256, seed);
        Self { n, samples, seed, k_iters, sandwich: 5.0 * d / TAU }
    }
}

impl OrderedGroup for SymplecticOrder {
    type Elem = LiftedSymplectic;

    fn identity(&self) -> LiftedSymplectic {
        LiftedSymplectic::identity(self.n)
    }
    fn compose(&self, a: &LiftedSymplectic, b: &LiftedSymplectic) -> LiftedSymplectic {
        a.compose(b)
    }
    fn inverse(&self, a: &LiftedSymplectic) -> LiftedSymplectic {
        a.inverse()
    }
    fn positivity(&self, g: &LiftedSymplectic) -> Positivity {
        match g.positivity_verdict(self.samples, self.seed) {
            PositivityVerdict::Violation { .. } => Positivity::NotPositive,
            PositivityVerdict::CertifiedPositive => Positivity::Positive,
            PositivityVerdict::Unknown => Positivity::Unknown,
        }
    }
    fn qm_value(&self, g: &LiftedSymplectic) -> f64 {
        g.psi(self.k_iters).map(|e| e.value).unwrap_or(f64::NAN)
    }
    fn defect_bound(&self) -> f64 {
        self.n as f64
    }
    fn sandwich_constant(&self) -> f64 {
        self.sandwich
    }
    fn power(&self, g: &LiftedSymplectic, n: i64) -> LiftedSymplectic {
        g.power(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::random_moebius;
    use crate::symplectic::{random_hamiltonian_exp, random_symmetric};
    use rand::Rng;

    fn rotation_lift(n: usize, theta: f64) -> LiftedSymplectic {
        LiftedSymplectic::base(SymplecticMatrix::rotation(n, theta))
    }

    #[test]
    fn basic_lifts() {
        let id = LiftedSymplectic::lift(SymplecticMatrix::identity(2), 4).unwrap();
        assert_eq!(id.zeta_shift(), 0.0);
        let r = LiftedSymplectic::lift(SymplecticMatrix::rotation(1, 0.7), 4).unwrap();
        assert!((r.zeta_shift() - 1.4).abs() < 1e-12);
        assert!((rotation_lift(1, 0.7).zeta_shift() - 1.4).abs() < 1e-12);
        assert!((rotation_lift(3, 0.7).zeta_shift() - 4.2).abs() < 1e-12);
        let m = random_hamiltonian_exp(2, 3, 1.0).unwrap();
        let shifted = LiftedSymplectic::central(2, -3).compose(&LiftedSymplectic::base(m.clone()));
        assert!((LiftedSymplectic::base(m).zeta_shift() - shifted.zeta_shift() - 3.0 * TAU).abs() < 1e-9);
        assert!(matches!(LiftedSymplectic::lift(SymplecticMatrix::identity(1), 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn closed_form_matches_tracking() {
        for seed in 0..30 {
            let n = 1 + (seed as usize) % 3;
            let m = random_hamiltonian_exp(n, seed, 2.5).unwrap();
            let closed = LiftedSymplectic::base(m.clone());
            let tracked = LiftedSymplectic::lift(m, 8).unwrap();
            assert!((closed.turns() - tracked.turns()).abs() < 1e-9, "{} {}", closed.turns(), tracked.turns());
        }
    }

    #[test]
    fn shift_congruent_to_fibre() {
        for seed in 0..20 {
            let m = random_hamiltonian_exp(2, seed, 1.5).unwrap();
            let l = LiftedSymplectic::base(m.clone());
            let img = LagrangianFrame::standard(2).apply(&m);
            let d = (l.zeta_shift() - img.arg_det_sq() + PI).rem_euclid(TAU) - PI;
            assert!(d.abs() < 1e-9);
        }
    }

    #[test]
    fn deck_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in -3..=3 {
            let x = CoverPoint::over(random_lagrangian(&mut rng, 2)).deck(rng.random_range(-2..=2));
            let y = LiftedSymplectic::central(2, k).act(&x);
            assert_eq!(y.theta, x.theta + TAU * k as f64);
            assert!((y.frame.w_matrix() - x.frame.w_matrix()).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn action_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..40 {
            let n = 1 + (seed as usize) % 3;
            let g = LiftedSymplectic::base(random_hamiltonian_exp(n, seed, 1.5).unwrap());
            let h = LiftedSymplectic::base(random_hamiltonian_exp(n, seed + 100, 1.5).unwrap());
            let x = CoverPoint::over(random_lagrangian(&mut rng, n));
            let a = g.compose(&h).act(&x);
            let b = g.act(&h.act(&x));
            assert!((a.theta - b.theta).abs() < 1e-6);
            // double-transport oracle: track the path h-path then g-path applied to x
            let oracle = transport(&g, &transport(&h, &x));
            assert!((oracle.theta - a.theta).abs() < 1e-6, "{} {}", oracle.theta, a.theta);
            let back = g.inverse().act(&g.act(&x));
            assert!((back.theta - x.theta).abs() < 1e-8);
        }
    }

    /// Continuous transport of `x` along the polar path of a base lift.
    fn transport(g: &LiftedSymplectic, x: &CoverPoint) -> CoverPoint {
        let (o, p) = g.endpoint().polar();
        let (uo, _) = crate::symplectic::complex_form(&o);
        let (q, t) = nalgebra::linalg::Schur::new(uo).unpack();
        let phases: Vec<f64> = (0..t.nrows()).map(|k| t[(k, k)].arg()).collect();
        let peig = SymmetricEigen::new(p);
        let f = x.frame.frame().clone();
        let gt = |s: f64| {
            let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                phases.len(),
                phases.iter().map(|&f| Complex64::from_polar(1.0, s * f)),
            ));
            let us = &q * d * q.adjoint();
            let os = real_form(&us, &CMatrix::zeros(us.nrows(), us.ncols()));
            let lam = peig.eigenvalues.map(|l| l.powf(s));
            os * (&peig.eigenvectors * DMatrix::from_diagonal(&lam) * peig.eigenvectors.transpose()) * &f
        };
        let steps = 4096;
        let mut theta = x.theta;
        let mut prev = LagrangianFrame::new(gt(0.0)).unwrap().arg_det_sq();
        for j in 1..=steps {
            let a = LagrangianFrame::new(gt(j as f64 / steps as f64)).unwrap().arg_det_sq();
            theta += (a - prev + PI).rem_euclid(TAU) - PI;
            prev = a;
        }
        // the base lift may differ from the polar path by the snap; none here
        CoverPoint { frame: x.frame.apply(g.endpoint()), theta }
    }

    #[test]
    fn psi_examples() {
        for k in -3..=3 {
            let p = LiftedSymplectic::central(2, k).psi(100).unwrap();
            assert_eq!(p.value, k as f64);
        }
        let r = rotation_lift(1, 0.9).psi(2000).unwrap();
        assert!((r.value - 0.9 / PI).abs() < 1e-6);
        let h = LiftedSymplectic::base(SymplecticMatrix::from_sl2_blocks(&[[[3.0, 0.0], [0.0, 1.0 / 3.0]]]));
        assert!(h.psi(2000).unwrap().value.abs() < 1e-6);
    }

    #[test]
    fn psi_matches_translation_number() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..60 {
            let f = random_moebius(&mut rng, 1.0, 2);
            let p = LiftedSymplectic::from_moebius(&f).psi(2000).unwrap();
            assert!((p.value - f.translation_number_exact()).abs() < 1e-4, "{f:?} {p:?}");
            // the base lifts agree pointwise
            let g = LiftedSymplectic::from_moebius(&f);
            for i in 0..5 {
                let x = 0.2 * i as f64;
                let frame = LagrangianFrame::from_angles(&[PI * x]);
                assert!((g.displacement_turns(&frame) - (f.eval(x) - x)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn verdict_examples() {
        let z = LiftedSymplectic::central(2, 1);
        assert_eq!(z.positivity_verdict(16, 0), PositivityVerdict::CertifiedPositive);
        assert!(matches!(z.inverse().positivity_verdict(16, 0), PositivityVerdict::Violation { .. }));
        assert_eq!(z.dominance_verdict(16, 0, 200).unwrap(), DominanceVerdict::CertifiedDominant);
        let h = LiftedSymplectic::base(SymplecticMatrix::from_sl2_blocks(&[[[3.0, 0.0], [0.0, 1.0 / 3.0]]]));
        assert!(matches!(h.dominance_verdict(16, 0, 500).unwrap(), DominanceVerdict::NotDominant(_)));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_symmetric(4, &mut rng, 1.0);
        let pd = &s * &s + DMatrix::identity(4, 4) * 0.1;
        let e = LiftedSymplectic::exp_causal(&pd, 8).unwrap();
        assert_eq!(e.dominance_verdict(16, 0, 200).unwrap(), DominanceVerdict::CertifiedDominant);
        assert_eq!(e.positivity_verdict(64, 1), PositivityVerdict::CertifiedPositive);
    }

    #[test]
    fn exact_for_one_degree_of_freedom() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let f = random_moebius(&mut rng, 1.5, 2);
            let g = LiftedSymplectic::from_moebius(&f);
            assert_eq!(g.to_moebius().unwrap().winding, f.winding);
            let dominant = g.dominance_verdict(0, 0, 10).unwrap() == DominanceVerdict::CertifiedDominant;
            assert_eq!(dominant, f.dominant_exact());
        }
    }

    #[test]
    fn block_certificates() {
        let h = [[2.0, 0.0], [0.0, 0.5]];
        let hyp = LiftedSymplectic::base(SymplecticMatrix::from_sl2_blocks(&[h, h]));
        assert_eq!(hyp.block_certificate(), Certificate::None);
        assert_eq!(hyp.deck(1).block_certificate(), Certificate::None);
        assert_eq!(hyp.deck(2).block_certificate(), Certificate::Dominant);
        let rot = rotation_lift(2, 0.3);
        assert_eq!(rot.block_certificate(), Certificate::Dominant);
        assert_eq!(rot.inverse().block_certificate(), Certificate::None);
        // not block diagonal
        let m = random_hamiltonian_exp(2, 1, 1.0).unwrap();
        assert!(LiftedSymplectic::base(m).circle_blocks().is_none());
    }

    #[test]
    fn indefinite_generators_never_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let mut s = random_symmetric(4, &mut rng, 1.0);
            s[(0, 0)] -= 2.0;
            let e = LiftedSymplectic::exp_causal(&s, 8).unwrap();
            assert_ne!(e.positivity_verdict(32, 0), PositivityVerdict::CertifiedPositive);
        }
    }

    #[test]
    fn causal_generators_advance_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let s = random_symmetric(6, &mut rng, 1.0);
            let psd = &s * &s;
            let e = LiftedSymplectic::exp_causal(&psd, 8).unwrap();
            for _ in 0..20 {
                let f = random_lagrangian(&mut rng, 3);
                assert!(e.displacement_turns(&f) > -1e-9);
            }
        }
    }

    #[test]
    fn heights() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = CoverPoint::over(random_lagrangian(&mut rng, 2));
        let (v, slack) = height_iota(&x, &x);
        assert_eq!(v, 0);
        assert_eq!(slack, 0.5);
        assert_eq!(height_iota(&x.deck(1), &x).0, 1);
        let d = causal_diameter_estimate(2, 200, 1);
        assert!(d > 0.0 && d <= 2.0 * TAU + 1e-9);
        for _ in 0..500 {
            let a = CoverPoint::over(random_lagrangian(&mut rng, 2)).deck(rng.random_range(-3..=3));
            let b = CoverPoint::over(random_lagrangian(&mut rng, 2)).deck(rng.random_range(-3..=3));
            let (i, _) = height_iota(&a, &b);
            assert!((TAU * i as f64 - (a.theta - b.theta)).abs() <= d);
        }
    }
}
