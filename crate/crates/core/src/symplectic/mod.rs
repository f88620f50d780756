//! `Sp(2n,R)`, the Lagrangian Grassmannian and the Maslov cocycle.
//!
//! Coordinates are `(x1, y1, ..., xn, yn)` with the form `J_n` made of
//! `[[0, 1], [-1, 0]]` blocks; the complex structure is `z_k = x_k + i y_k`.

mod lagrangian;
mod maslov;
mod matrix;

pub use lagrangian::{random_lagrangian, LagrangianFrame, UnitaryRepresentative};
pub use maslov::{kashiwara_form, kashiwara_index, maslov_beta};
pub use matrix::{
    complex_form, j_form, max_abs, random_hamiltonian_exp, random_symmetric, real_form, symplectic_residual, CMatrix,
    SymplecticMatrix,
};
