use nalgebra::{DMatrix, SymmetricEigen};

use super::lagrangian::LagrangianFrame;
use super::matrix::j_form;
use crate::error::{Error, Result};

const ZERO_THRESHOLD: f64 = 1e-8;
const TRANSVERSE_MARGIN: f64 = 1e-8;

/// Gram matrix of `Q(v1,v2,v3) = w(v1,v2) + w(v2,v3) + w(v3,v1)` on
/// `L1 + L2 + L3`, symmetrised.
pub fn kashiwara_form(l1: &LagrangianFrame, l2: &LagrangianFrame, l3: &LagrangianFrame) -> Result<DMatrix<f64>> {
    let n = l1.order();
    if l2.order() != n || l3.order() != n {
        return Err(Error::DimensionMismatch("Lagrangians of different dimension".into()));
    }
    let j = j_form(n);
    let pair = |a: &LagrangianFrame, b: &LagrangianFrame| a.frame().transpose() * &j * b.frame();
    let mut m = DMatrix::zeros(3 * n, 3 * n);
    m.view_mut((0, n), (n, n)).copy_from(&pair(l1, l2));
    m.view_mut((n, 2 * n), (n, n)).copy_from(&pair(l2, l3));
    m.view_mut((2 * n, 0), (n, n)).copy_from(&pair(l3, l1));
    Ok((&m + m.transpose()) * 0.5)
}

/// Signature of the Kashiwara form of a pairwise transverse triple.
pub fn kashiwara_index(l1: &LagrangianFrame, l2: &LagrangianFrame, l3: &LagrangianFrame) -> Result<i32> {
    for (a, b) in [(l1, l2), (l2, l3), (l1, l3)] {
        let margin = a.transversality_margin(b)?;
        if margin <= TRANSVERSE_MARGIN {
            return Err(Error::NotTransverse { margin });
        }
    }
    let q = kashiwara_form(l1, l2, l3)?;
    let eig = SymmetricEigen::new(q).eigenvalues;
    let mut sig = 0;
    for &e in eig.iter() {
        if e.abs() < ZERO_THRESHOLD {
            return Err(Error::NearDegenerate { eigenvalue: e });
        }
        sig += if e > 0.0 { 1 } else { -1 };
    }
    Ok(sig)
}

/// Half the Kashiwara index.
pub fn maslov_beta(l1: &LagrangianFrame, l2: &LagrangianFrame, l3: &LagrangianFrame) -> Result<f64> {
    Ok(kashiwara_index(l1, l2, l3)? as f64 / 2.0)
}
