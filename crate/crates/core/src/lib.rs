//! Bounded-cohomology invariants of surface-group representations into
//! `PSL(2,R)` and `Sp(2n,R)`: translation numbers, the Maslov-type
//! quasimorphism on the universal cover of the Lagrangian Grassmannian,
//! Toledo invariants and weak-maximality tests.

pub mod circle;
pub mod constructions;
pub mod error;
pub mod invariants;
pub mod io;
pub mod lift;
pub mod order;
pub mod surface;
pub mod symplectic;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// A real value together with a bound on its absolute error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.error
    }
}
