//! Lifts of circle homeomorphisms to the real line.
//!
//! The circle is the projective line with coordinate `x = angle / pi`, so the
//! period is 1 and a Euclidean rotation by `theta` acts as `x -> x + theta/pi`.

mod moebius;
mod tabulated;

pub use moebius::{random_moebius, MoebiusLift, ProjectiveClass, TranslationMode};
pub use tabulated::{random_tabulated, TabulatedLift};

use crate::error::{Error, Result};
use crate::Estimate;

/// An element of `Homeo_Z(R)`: increasing and commuting with `x -> x + 1`.
pub trait CircleLift: Clone {
    fn eval(&self, x: f64) -> f64;
    fn compose(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;

    /// `(f^n(0) - 0) / n`, with the standard bound `1/n`.
    fn translation_number_iterative(&self, n: usize) -> Estimate {
        let n = n.max(1);
        let mut x = 0.0;
        for _ in 0..n {
            x = self.eval(x);
        }
        Estimate::new(x / n as f64, 1.0 / n as f64)
    }

    /// Minimum of `f(x) - x` over one period with a certified error.
    fn min_displacement(&self) -> Estimate;

    /// True iff `f(x) >= x` everywhere.
    fn is_positive(&self) -> Result<bool> {
        let m = self.min_displacement();
        if m.value.abs() < m.error {
            return Err(Error::UncertifiedMargin { value: m.value, error: m.error });
        }
        Ok(m.value >= 0.0)
    }

    /// True iff `f(x) > x` everywhere.
    fn is_dominant(&self) -> Result<bool> {
        let m = self.min_displacement();
        if m.value.abs() < m.error {
            return Err(Error::UncertifiedMargin { value: m.value, error: m.error });
        }
        Ok(m.value > 0.0)
    }
}

/// `r` reduced into `(-pi/2, pi/2]`.
pub(crate) fn wrap_half_pi(r: f64) -> f64 {
    use std::f64::consts::PI;
    let mut t = r.rem_euclid(PI);
    if t > PI / 2.0 {
        t -= PI;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        use std::f64::consts::PI;
        for k in -20..20 {
            let r = 0.37 * k as f64;
            let w = wrap_half_pi(r);
            assert!(w > -PI / 2.0 - 1e-15 && w <= PI / 2.0);
            let q = (r - w) / PI;
            assert!((q - q.round()).abs() < 1e-12);
        }
    }
}
