use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{wrap_half_pi, CircleLift};
use crate::error::{Error, Result};
use crate::order::Positivity;
use crate::Estimate;

const CENTRAL_TOL: f64 = 1e-9;
const ELLIPTIC_MARGIN: f64 = 1e-11;
const PARABOLIC_TOL: f64 = 1e-9;
const GRID: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectiveClass {
    Central,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// Element of the universal cover of `PSL(2,R)`: the polar-path lift of the
/// matrix followed by translation by `winding`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoebiusLift {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub winding: i64,
}

impl MoebiusLift {
    pub fn new(a: f64, b: f64, c: f64, d: f64, winding: i64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs()).max(1.0);
        if (det - 1.0).abs() > 1e-9 * scale * scale {
            return Err(Error::InvalidArgument(format!("determinant {det} is not 1")));
        }
        Ok(Self { a, b, c, d, winding })
    }

    /// Base lift of an `SL(2,R)` matrix given row-major.
    pub fn from_matrix(m: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(m[0][0], m[0][1], m[1][0], m[1][1], 0)
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0, winding: 0 }
    }

    /// The deck generator `x -> x + k`.
    pub fn translation(k: i64) -> Self {
        Self { winding: k, ..Self::identity() }
    }

    /// The lift `x -> x + theta/pi` of the rotation by `theta`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let wrapped = s.atan2(c);
        let winding = ((theta - wrapped) / PI).round() as i64;
        Self { a: c, b: -s, c: s, d: c, winding }
    }

    pub fn with_winding(self, winding: i64) -> Self {
        Self { winding, ..self }
    }

    pub fn shift(self, k: i64) -> Self {
        Self { winding: self.winding + k, ..self }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Rotation angle of the orthogonal polar factor, in `(-pi, pi]`.
    fn polar_angle(&self) -> f64 {
        (self.c - self.b).atan2(self.a + self.d)
    }

    fn base_eval(&self, x: f64) -> f64 {
        let (s, c) = (PI * x).sin_cos();
        let img = (self.c * c + self.d * s).atan2(self.a * c + self.b * s);
        let theta = self.polar_angle();
        x + (theta + wrap_half_pi(img - PI * x - theta)) / PI
    }

    /// Derivative of the projective action in the `x` coordinate.
    fn derivative(&self, x: f64) -> f64 {
        let (s, c) = (PI * x).sin_cos();
        let u = self.a * c + self.b * s;
        let v = self.c * c + self.d * s;
        1.0 / (u * u + v * v)
    }

    fn winding_against(&self, target: impl Fn(f64) -> f64) -> i64 {
        let mut ks: Vec<i64> =
            [0.0, 0.25, 0.5, 0.75].iter().map(|&x| (target(x) - self.base_eval(x)).round() as i64).collect();
        ks.sort_unstable();
        ks[1]
    }

    fn is_central(&self) -> bool {
        [1.0, -1.0].iter().any(|&s| {
            (self.a - s).abs() < CENTRAL_TOL
                && self.b.abs() < CENTRAL_TOL
                && self.c.abs() < CENTRAL_TOL
                && (self.d - s).abs() < CENTRAL_TOL
        })
    }

    pub fn classify(&self) -> ProjectiveClass {
        let t = self.trace().abs();
        if self.is_central() {
            ProjectiveClass::Central
        } else if t < 2.0 - ELLIPTIC_MARGIN {
            ProjectiveClass::Elliptic
        } else if t <= 2.0 + PARABOLIC_TOL {
            ProjectiveClass::Parabolic
        } else {
            ProjectiveClass::Hyperbolic
        }
    }

    /// A point of `[0,1)` fixed by the projective action. Only meaningful for
    /// parabolic and hyperbolic elements.
    fn fixed_point(&self) -> f64 {
        let t = self.trace();
        let disc = (t * t - 4.0).max(0.0).sqrt();
        let lambda = (t + t.signum() * disc) / 2.0;
        let v1 = (self.b, lambda - self.a);
        let v2 = (lambda - self.d, self.c);
        let n1 = v1.0.hypot(v1.1);
        let n2 = v2.0.hypot(v2.1);
        let v = if n1 >= n2 { v1 } else { v2 };
        (v.1.atan2(v.0) / PI).rem_euclid(1.0)
    }

    fn median_floor_displacement(&self) -> i64 {
        let mut ks: Vec<i64> = (0..5)
            .map(|i| {
                let x = i as f64 / 5.0;
                (self.eval(x) - x).floor() as i64
            })
            .collect();
        ks.sort_unstable();
        ks[2]
    }

    /// Exact translation number from the conjugacy class of the matrix.
    pub fn translation_number_exact(&self) -> f64 {
        match self.classify() {
            ProjectiveClass::Central => self.eval(0.0).round(),
            ProjectiveClass::Elliptic => {
                // sign chosen so that every direction turns counterclockwise
                let t = if self.c > 0.0 { self.trace() } else { -self.trace() };
                let frac = (t / 2.0).clamp(-1.0, 1.0).acos() / PI;
                self.median_floor_displacement() as f64 + frac
            }
            ProjectiveClass::Parabolic | ProjectiveClass::Hyperbolic => {
                let p = self.fixed_point();
                (self.eval(p) - p).round()
            }
        }
    }

    pub fn translation_number(&self, mode: TranslationMode) -> Estimate {
        match mode {
            TranslationMode::Exact => Estimate::exact(self.translation_number_exact()),
            TranslationMode::Iterative(n) => self.translation_number_iterative(n),
        }
    }

    /// Positivity decided from the conjugacy class, without tolerances on the
    /// displacement.
    pub fn positivity_exact(&self) -> Positivity {
        let tau = self.translation_number_exact();
        if tau > 0.0 {
            return Positivity::Positive;
        }
        if tau < 0.0 {
            return Positivity::NotPositive;
        }
        match self.classify() {
            ProjectiveClass::Central => Positivity::Positive,
            ProjectiveClass::Hyperbolic | ProjectiveClass::Elliptic => Positivity::NotPositive,
            ProjectiveClass::Parabolic => {
                let x = self.fixed_point() + 0.5;
                if self.eval(x) - x >= 0.0 {
                    Positivity::Positive
                } else {
                    Positivity::NotPositive
                }
            }
        }
    }

    /// Dominance, i.e. `f(x) > x` everywhere, which for these lifts is `tau > 0`.
    pub fn dominant_exact(&self) -> bool {
        self.translation_number_exact() > 0.0
    }

    /// Dominance from the certified minimal displacement, cross-checked
    /// against the sign of the translation number.
    pub fn is_dominant_checked(&self) -> Result<bool> {
        let by_displacement = self.is_dominant()?;
        let by_tau = self.dominant_exact();
        if by_displacement != by_tau {
            let m = self.min_displacement();
            return Err(Error::NumericalDrift { spread: m.value.abs() });
        }
        Ok(by_tau)
    }

    pub fn power(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { *self };
        let mut acc = Self::identity();
        for _ in 0..n.unsigned_abs() {
            acc = base.compose(&acc);
        }
        acc
    }

    pub fn conjugate_by(&self, h: &Self) -> Self {
        h.compose(self).compose(&h.inverse())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslationMode {
    Exact,
    Iterative(usize),
}

impl CircleLift for MoebiusLift {
    fn eval(&self, x: f64) -> f64 {
        self.base_eval(x) + self.winding as f64
    }

    fn compose(&self, other: &Self) -> Self {
        let m = Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
            winding: 0,
        };
        let k = m.winding_against(|x| self.eval(other.eval(x)));
        m.with_winding(k)
    }

    fn inverse(&self) -> Self {
        let m = Self { a: self.d, b: -self.b, c: -self.c, d: self.a, winding: 0 };
        // f^-1(f(x)) = x
        let mut ks: Vec<i64> = [0.0, 0.25, 0.5, 0.75]
            .iter()
            .map(|&x| (x - m.base_eval(self.eval(x))).round() as i64)
            .collect();
        ks.sort_unstable();
        m.with_winding(ks[1])
    }

    fn min_displacement(&self) -> Estimate {
        if self.is_central() {
            return Estimate::exact(self.eval(0.0));
        }
        let h = 1.0 / GRID as f64;
        let mut best = f64::INFINITY;
        let mut best_i = 0;
        let mut dmax: f64 = 0.0;
        for i in 0..GRID {
            let x = i as f64 * h;
            let v = self.eval(x) - x;
            if v < best {
                best = v;
                best_i = i;
            }
            dmax = dmax.max((self.derivative(x) - 1.0).abs());
        }
        let bound = 2.0 * dmax;
        // ternary refinement around the best grid point
        let (mut lo, mut hi) = ((best_i as f64 - 1.0) * h, (best_i as f64 + 1.0) * h);
        let disp = |x: f64| self.eval(x) - x;
        for _ in 0..80 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if disp(m1) < disp(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let refined = disp(0.5 * (lo + hi)).min(best);
        Estimate::new(refined, bound * h / 2.0)
    }
}

/// Random lift `R(alpha) diag(e^s, e^-s) R(beta)` with `s` uniform in
/// `[0, max_log_stretch]` and winding uniform in `-max_winding..=max_winding`.
pub fn random_moebius<R: Rng>(rng: &mut R, max_log_stretch: f64, max_winding: i64) -> MoebiusLift {
    let alpha = rng.random_range(0.0..2.0 * PI);
    let beta = rng.random_range(0.0..2.0 * PI);
    let s = rng.random_range(0.0..=max_log_stretch);
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (e, f) = (s.exp(), (-s).exp());
    // R(alpha) * diag(e, f)
    let m = [[ca * e, -sa * f], [sa * e, ca * f]];
    let a = m[0][0] * cb + m[0][1] * sb;
    let b = -m[0][0] * sb + m[0][1] * cb;
    let c = m[1][0] * cb + m[1][1] * sb;
    let d = -m[1][0] * sb + m[1][1] * cb;
    let k = rng.random_range(-max_winding..=max_winding);
    MoebiusLift { a, b, c, d, winding: k }
}
