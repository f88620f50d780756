//! Builders for example representations: hyperbolizations, polydisk and
//! direct sums, orientation reversal, the cubic symmetric power, and the
//! unipotent (Heisenberg) extension of a symplectic representation.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{Representation, Target};
use crate::surface::{SurfacePresentation, Word};
use crate::symplectic::{j_form, random_hamiltonian_exp, SymplecticMatrix};

fn sl2(m: [[f64; 2]; 2]) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
}

fn inv(m: &DMatrix<f64>) -> DMatrix<f64> {
    SymplecticMatrix::from_raw(m.clone()).inverse().into_matrix()
}

/// Rotation of the disk model by `phi` about the centre.
fn disk_rotation(phi: f64) -> DMatrix<f64> {
    let (s, c) = (phi / 2.0).sin_cos();
    sl2([[c, -s], [s, c]])
}

/// Genus-2 holonomy from octagon side pairings `rot(j pi/4) T rot(pi - i pi/4)`,
/// `T` the translation with `cosh(l/2) = cot(pi/8)`. The relator holds to
/// `1e-9` and the Toledo invariant is `+2`.
pub fn fuchsian_closed_genus2() -> Representation {
    // translation length between opposite sides: cosh(l/2) = cot(pi/8)
    let half = (1.0 / FRAC_PI_8.tan()).acosh();
    let shift = sl2([[half.exp(), 0.0], [0.0, (-half).exp()]]);
    let pairing = |i: usize, j: usize| {
        disk_rotation(j as f64 * FRAC_PI_4) * &shift * disk_rotation(PI - i as f64 * FRAC_PI_4)
    };
    let images = vec![inv(&pairing(0, 2)), pairing(1, 3), inv(&pairing(4, 6)), pairing(5, 7)];
    let p = SurfacePresentation::new(2, 0).expect("genus 2");
    Representation::with_tolerance(p, Target::Psl2, images, 1e-9).expect("octagon relations hold")
}

/// One-holed torus `(1,1)` from traces `(tr a, tr b, tr ab)` with
/// `x^2 + y^2 + z^2 < xyz`, or pair of pants `(0,3)` from
/// `(tr c1, tr c2, tr c1 c2)` with `x, y > 2 > -2 > z`. The last boundary
/// generator is solved from the relator, and the result is oriented so that
/// its Toledo invariant is `+1`.
pub fn fuchsian_bounded(genus: usize, boundary: usize, traces: [f64; 3]) -> Result<Representation> {
    let p = SurfacePresentation::new(genus, boundary)?;
    let [x, y, z] = traces;
    if x.abs() <= 2.0 {
        return Err(Error::NonHyperbolicBoundary { index: 0, trace: x });
    }
    let a = (x.abs() + (x * x - 4.0).sqrt()) / 2.0 * x.signum();
    let d = 1.0 / a;
    let pp = (z - y * d) / (a - d);
    let ss = y - pp;
    let first = sl2([[a, 0.0], [0.0, d]]);
    let second = sl2([[pp, 1.0], [pp * ss - 1.0, ss]]);
    let images = match (genus, boundary) {
        (1, 1) => {
            let comm = &first * &second * inv(&first) * inv(&second);
            vec![first, second, inv(&comm)]
        }
        (0, 3) => {
            let last = inv(&(&first * &second));
            vec![first, second, last]
        }
        _ => return Err(Error::InvalidArgument("trace parameters cover the (1,1) and (0,3) surfaces only".into())),
    };
    for j in 0..boundary {
        let m = &images[p.c(j)];
        let trace = m[(0, 0)] + m[(1, 1)];
        if trace.abs() <= 2.0 + 1e-12 {
            return Err(Error::NonHyperbolicBoundary { index: j, trace });
        }
    }
    Ok(orientation_reverse(&Representation::new(p, Target::Psl2, images)?))
}

/// Random representation of a surface with boundary: free generators
/// `exp(J S)` with spectral radius `bound`, last boundary generator solved.
pub fn random_free(presentation: &SurfacePresentation, n: usize, seed: u64, bound: f64) -> Result<Representation> {
    if presentation.is_closed() {
        return Err(Error::InvalidArgument("random_free needs a boundary component".into()));
    }
    let k = presentation.generator_count();
    let mut images: Vec<DMatrix<f64>> = (0..k - 1)
        .map(|i| random_hamiltonian_exp(n, seed.wrapping_mul(0x9e37_79b9).wrapping_add(i as u64), bound).map(|m| m.into_matrix()))
        .collect::<Result<_>>()?;
    images.push(DMatrix::identity(2 * n, 2 * n));
    let mut rel = presentation.relator();
    rel.0.pop();
    let w = evaluate(&images, &rel);
    images[k - 1] = inv(&w);
    Representation::new(presentation.clone(), Target::Sp(n), images)
}

fn evaluate(images: &[DMatrix<f64>], w: &Word) -> DMatrix<f64> {
    let dim = images[0].nrows();
    let mut acc = DMatrix::identity(dim, dim);
    for l in &w.0 {
        acc = if l.inverse { acc * inv(&images[l.generator]) } else { acc * &images[l.generator] };
    }
    acc
}

fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let dim: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(dim, dim);
    let mut at = 0;
    for b in blocks {
        m.view_mut((at, at), (b.nrows(), b.nrows())).copy_from(b);
        at += b.nrows();
    }
    m
}

/// Block-diagonal sum of representations of one presentation; `PSL(2)`
/// factors count as `Sp(2)`.
pub fn direct_sum_all(factors: &[&Representation]) -> Result<Representation> {
    let Some(first) = factors.first() else {
        return Err(Error::InvalidArgument("no factors".into()));
    };
    if factors.iter().any(|f| f.presentation() != first.presentation()) {
        return Err(Error::MixedPresentations);
    }
    let n: usize = factors.iter().map(|f| f.order()).sum();
    let images = (0..first.presentation().generator_count())
        .map(|i| block_diag(&factors.iter().map(|f| &f.images()[i]).collect::<Vec<_>>()))
        .collect();
    let tol = factors.iter().map(|f| f.relator_residual()).fold(1e-8, f64::max) * 2.0;
    Representation::with_tolerance(first.presentation().clone(), Target::Sp(n), images, tol)
}

pub fn direct_sum(a: &Representation, b: &Representation) -> Result<Representation> {
    direct_sum_all(&[a, b])
}

/// Polydisk embedding of `PSL(2)` representations.
pub fn polydisk(factors: &[&Representation]) -> Result<Representation> {
    if factors.iter().any(|f| f.target() != Target::Psl2) {
        return Err(Error::DimensionMismatch("polydisk factors must be PSL(2) representations".into()));
    }
    direct_sum_all(factors)
}

/// Conjugation by `diag(1, -1)`.
pub fn orientation_reverse(rep: &Representation) -> Representation {
    let images = rep
        .images()
        .iter()
        .map(|m| {
            let mut r = m.clone();
            r[(0, 1)] = -r[(0, 1)];
            r[(1, 0)] = -r[(1, 0)];
            r
        })
        .collect();
    Representation::with_tolerance(rep.presentation().clone(), Target::Psl2, images, rep.relator_residual().max(1e-8) * 2.0)
        .expect("conjugation preserves the relator")
}

/// `(rho0, rho_a, reversed rho_a)` in `Sp(6)`.
pub fn cancelling_triple(rho0: &Representation, rho_a: &Representation) -> Result<Representation> {
    polydisk(&[rho0, rho_a, &orientation_reverse(rho_a)])
}

/// A genus-2 representation `(A, B, B, A)`: both commutators cancel.
pub fn doubled_torus(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Representation> {
    let p = SurfacePresentation::new(2, 0)?;
    Representation::new(p, Target::Psl2, vec![a.clone(), b.clone(), b.clone(), a.clone()])
}

/// Representation by rotations; on a closed surface the relator holds exactly.
pub fn elliptic_abelian(presentation: &SurfacePresentation, angles: &[f64]) -> Result<Representation> {
    let images = angles.iter().map(|&t| disk_rotation(2.0 * t)).collect();
    Representation::new(presentation.clone(), Target::Psl2, images)
}

/// `Sym^3` of an `SL(2)` matrix on binary cubics in the symplectic basis
/// `(u^3, -v^3, sqrt3 u v^2, -sqrt3 u^2 v)`.
pub fn sym_cube_matrix(g: &DMatrix<f64>) -> DMatrix<f64> {
    let (a, b, c, d) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    // coefficients on u^3, u^2 v, u v^2, v^3
    let mul = |p: &[f64], q: [f64; 2]| {
        let mut r = vec![0.0; p.len() + 1];
        for (i, &x) in p.iter().enumerate() {
            r[i] += x * q[0];
            r[i + 1] += x * q[1];
        }
        r
    };
    let mut m = DMatrix::zeros(4, 4);
    for k in 0..4 {
        let mut poly = vec![1.0];
        for _ in 0..3 - k {
            poly = mul(&poly, [a, c]);
        }
        for _ in 0..k {
            poly = mul(&poly, [b, d]);
        }
        for (i, &x) in poly.iter().enumerate() {
            m[(i, k)] = x;
        }
    }
    let r3 = 3f64.sqrt();
    let basis = DMatrix::from_row_slice(4, 4, &[
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -r3, //
        0.0, 0.0, r3, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    ]);
    let basis_inv = basis.clone().try_inverse().expect("invertible basis");
    basis_inv * m * basis
}

pub fn sym_cube(rep: &Representation) -> Result<Representation> {
    if rep.target() != Target::Psl2 {
        return Err(Error::DimensionMismatch("sym_cube takes an SL(2) representation".into()));
    }
    let images = rep.images().iter().map(sym_cube_matrix).collect();
    Representation::with_tolerance(rep.presentation().clone(), Target::Sp(2), images, 1e-7)
}

/// Running value `(A, b, d)` of the affine-plus-central extension along a word.
struct Extension {
    a: DMatrix<f64>,
    b: DVector<f64>,
    d: f64,
}

fn extend_along(rep: &Representation, b_values: &[DVector<f64>], d_values: &[f64], w: &Word) -> Extension {
    let dim = 2 * rep.order();
    let j = j_form(rep.order());
    let mut acc = Extension { a: DMatrix::identity(dim, dim), b: DVector::zeros(dim), d: 0.0 };
    for l in &w.0 {
        let g = &rep.images()[l.generator];
        let (ga, gb, gd) = if l.inverse {
            let gi = inv(g);
            let bi = -(&gi * &b_values[l.generator]);
            (gi, bi, -d_values[l.generator])
        } else {
            (g.clone(), b_values[l.generator].clone(), d_values[l.generator])
        };
        let cross = (acc.b.transpose() * &j * &acc.a * &gb)[(0, 0)];
        acc = Extension { b: &acc.b + &acc.a * &gb, d: acc.d + gd + cross, a: &acc.a * ga };
    }
    acc
}

fn check_b(rep: &Representation, b_values: &[DVector<f64>]) -> Result<()> {
    let dim = 2 * rep.order();
    if b_values.len() != rep.images().len() || b_values.iter().any(|b| b.len() != dim) {
        return Err(Error::DimensionMismatch(format!("need one vector of length {dim} per generator")));
    }
    Ok(())
}

/// Value of `d` on the relator when `d` vanishes on generators. For a
/// cocycle `b` this is the quadratic form of its class on the fundamental class.
pub fn cocycle_obstruction(rep: &Representation, b_values: &[DVector<f64>]) -> Result<f64> {
    check_b(rep, b_values)?;
    Ok(extend_along(rep, b_values, &vec![0.0; b_values.len()], &rep.presentation().relator()).d)
}

/// `|b(relator)|`: zero exactly for cocycles.
pub fn cocycle_residual(rep: &Representation, b_values: &[DVector<f64>]) -> Result<f64> {
    check_b(rep, b_values)?;
    let e = extend_along(rep, b_values, &vec![0.0; b_values.len()], &rep.presentation().relator());
    Ok(e.b.amax())
}

/// The coboundary `b(g) = v - rho(g) v`.
pub fn coboundary(rep: &Representation, v: &DVector<f64>) -> Vec<DVector<f64>> {
    rep.images().iter().map(|m| v - m * v).collect()
}

/// Least-squares projection of generator values onto the cocycle space.
pub fn project_to_cocycles(rep: &Representation, b_values: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    check_b(rep, b_values)?;
    let dim = 2 * rep.order();
    let k = b_values.len();
    let zero = vec![0.0; k];
    let rel = rep.presentation().relator();
    let mut l = DMatrix::zeros(dim, dim * k);
    for col in 0..dim * k {
        let mut basis = vec![DVector::zeros(dim); k];
        basis[col / dim][col % dim] = 1.0;
        l.set_column(col, &extend_along(rep, &basis, &zero, &rel).b);
    }
    let flat = DVector::from_iterator(dim * k, b_values.iter().flat_map(|b| b.iter().copied()));
    let pinv = l.clone().pseudo_inverse(1e-10).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let projected = &flat - pinv * (l * &flat);
    Ok((0..k).map(|i| projected.rows(i * dim, dim).into_owned()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum HeisenbergOutcome {
    Built { scale: f64, obstruction: f64 },
    Obstruction { value: f64 },
}

/// Extension of `rep` by generator images
/// `[[A, b, 0], [0, 1, 0], [-b^T J A, -d, 1]]` in `Sp(2n+2)`.
///
/// `b_values` are first projected onto cocycles. With `split = Some(n1)` the
/// part of `b` in the last `n - n1` degrees of freedom is rescaled so that
/// the two blocks' obstructions cancel.
pub fn heisenberg_extend(
    rep: &Representation,
    b_values: &[DVector<f64>],
    split: Option<usize>,
) -> Result<(Option<Representation>, HeisenbergOutcome)> {
    let n = rep.order();
    let mut b = project_to_cocycles(rep, b_values)?;
    let mut scale = 1.0;
    if let Some(n1) = split {
        if n1 == 0 || n1 >= n {
            return Err(Error::InvalidArgument(format!("split {n1} must lie strictly between 0 and {n}")));
        }
        let part = |keep_first: bool| -> Vec<DVector<f64>> {
            b.iter()
                .map(|v| DVector::from_fn(v.len(), |i, _| if (i < 2 * n1) == keep_first { v[i] } else { 0.0 }))
                .collect()
        };
        let q1 = cocycle_obstruction(rep, &part(true))?;
        let q2 = cocycle_obstruction(rep, &part(false))?;
        if q1 * q2 >= 0.0 {
            return Err(Error::SameSignObstructions { q1, q2 });
        }
        scale = (-q1 / q2).sqrt();
        for v in b.iter_mut() {
            for i in 2 * n1..2 * n {
                v[i] *= scale;
            }
        }
    }
    let q = cocycle_obstruction(rep, &b)?;
    let typical = b.iter().map(|v| v.norm_squared()).fold(1.0, f64::max);
    if q.abs() > 1e-8 * typical {
        return Ok((None, HeisenbergOutcome::Obstruction { value: q }));
    }
    let j = j_form(n);
    let images = rep
        .images()
        .iter()
        .zip(&b)
        .map(|(a, bv)| {
            let mut m = DMatrix::zeros(2 * n + 2, 2 * n + 2);
            m.view_mut((0, 0), (2 * n, 2 * n)).copy_from(a);
            m.view_mut((0, 2 * n), (2 * n, 1)).copy_from(bv);
            m[(2 * n, 2 * n)] = 1.0;
            m[(2 * n + 1, 2 * n + 1)] = 1.0;
            let c = bv.transpose() * &j * a;
            for i in 0..2 * n {
                m[(2 * n + 1, i)] = -c[(0, i)];
            }
            m
        })
        .collect();
    let built = Representation::with_tolerance(rep.presentation().clone(), Target::Sp(n + 1), images, 1e-7)?;
    Ok((Some(built), HeisenbergOutcome::Built { scale, obstruction: q }))
}
