//! Surface-group representations and their Toledo invariant, Milnor-Wood
//! margin, weak-maximality defect and causality scan.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circle::MoebiusLift;
use crate::error::{Error, Result};
use crate::lift::{DominanceVerdict, LiftedProduct, LiftedSymplectic};
use crate::surface::{SurfacePresentation, Word};
use crate::symplectic::{max_abs, random_lagrangian, symplectic_residual, SymplecticMatrix};

/// Relator tolerance for validated representations.
pub const RELATOR_TOL: f64 = 1e-8;
/// Weak-maximality tolerance on the defect.
pub const WM_TOL: f64 = 0.05;
/// Iterations used for boundary `psi` values.
pub const BOUNDARY_ITERS: usize = 2000;

const BASEPOINTS: usize = 8;
const INTEGRALITY_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum Target {
    Psl2,
    Sp(usize),
}

impl Target {
    /// Half the matrix size.
    pub fn order(self) -> usize {
        match self {
            Target::Psl2 => 1,
            Target::Sp(n) => n,
        }
    }
}

/// A homomorphism from a surface group, given on generators. `PSL(2)`
/// images are stored as `SL(2)` representatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    presentation: SurfacePresentation,
    target: Target,
    images: Vec<DMatrix<f64>>,
    relator_residual: f64,
}

impl Representation {
    pub fn new(presentation: SurfacePresentation, target: Target, images: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::with_tolerance(presentation, target, images, RELATOR_TOL)
    }

    pub fn with_tolerance(
        presentation: SurfacePresentation,
        target: Target,
        images: Vec<DMatrix<f64>>,
        tolerance: f64,
    ) -> Result<Self> {
        if images.len() != presentation.generator_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} images for {} generators",
                images.len(),
                presentation.generator_count()
            )));
        }
        let dim = 2 * target.order();
        if let Target::Sp(0) = target {
            return Err(Error::DimensionMismatch("Sp(0)".into()));
        }
        for (i, m) in images.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(format!("image {i} is {}x{}, expected {dim}x{dim}", m.nrows(), m.ncols())));
            }
            let scale = max_abs(m).max(1.0);
            let r = symplectic_residual(m)?;
            if r > 1e-8 * scale * scale {
                return Err(Error::InvalidArgument(format!("image {i} is not symplectic (residual {r:e})")));
            }
        }
        let mut rep = Self { presentation, target, images, relator_residual: 0.0 };
        let rel = rep.evaluate_word(&rep.presentation.relator());
        let id = DMatrix::<f64>::identity(dim, dim);
        let mut residual = max_abs(&(&rel - &id));
        if target == Target::Psl2 {
            residual = residual.min(max_abs(&(&rel + &id)));
        }
        if residual > tolerance {
            return Err(Error::RelatorViolation { residual, tolerance });
        }
        rep.relator_residual = residual;
        Ok(rep)
    }

    /// The trivial representation.
    pub fn trivial(presentation: SurfacePresentation, target: Target) -> Self {
        let dim = 2 * target.order();
        let images = vec![DMatrix::identity(dim, dim); presentation.generator_count()];
        Self { presentation, target, images, relator_residual: 0.0 }
    }

    pub fn presentation(&self) -> &SurfacePresentation {
        &self.presentation
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn order(&self) -> usize {
        self.target.order()
    }

    pub fn images(&self) -> &[DMatrix<f64>] {
        &self.images
    }

    pub fn relator_residual(&self) -> f64 {
        self.relator_residual
    }

    /// The same images viewed in `Sp(2) = SL(2)`.
    pub fn as_symplectic(&self) -> Self {
        Self { target: Target::Sp(self.order()), ..self.clone() }
    }

    pub fn evaluate_word(&self, w: &Word) -> DMatrix<f64> {
        let dim = 2 * self.order();
        let mut acc = DMatrix::identity(dim, dim);
        for l in &w.0 {
            let m = &self.images[l.generator];
            acc = if l.inverse { acc * SymplecticMatrix::from_raw(m.clone()).inverse().into_matrix() } else { acc * m };
        }
        acc
    }

    /// Base (polar path) lifts of the generator images.
    pub fn base_lifts(&self) -> Vec<LiftedSymplectic> {
        self.images.iter().map(|m| LiftedSymplectic::base(SymplecticMatrix::from_raw(m.clone()))).collect()
    }

    /// Base circle lifts; `None` unless the target is `PSL(2)`.
    pub fn circle_lifts(&self) -> Option<Vec<MoebiusLift>> {
        if self.target != Target::Psl2 {
            return None;
        }
        Some(
            self.images
                .iter()
                .map(|m| MoebiusLift { a: m[(0, 0)], b: m[(0, 1)], c: m[(1, 0)], d: m[(1, 1)], winding: 0 })
                .collect(),
        )
    }
}

/// The lifted word as a product of generator lifts.
pub fn word_product(lifts: &[LiftedSymplectic], w: &Word) -> LiftedProduct {
    let n = lifts[0].order();
    let mut inverses: Vec<Option<LiftedSymplectic>> = vec![None; lifts.len()];
    let factors: Vec<LiftedSymplectic> = w
        .0
        .iter()
        .map(|l| {
            if l.inverse {
                inverses[l.generator].get_or_insert_with(|| lifts[l.generator].inverse()).clone()
            } else {
                lifts[l.generator].clone()
            }
        })
        .collect();
    if factors.is_empty() {
        return LiftedProduct::single(LiftedSymplectic::identity(n));
    }
    LiftedProduct::new(factors).expect("factors share one order")
}

pub fn evaluate_word_lifted(lifts: &[LiftedSymplectic], w: &Word) -> LiftedSymplectic {
    word_product(lifts, w).fold()
}

pub fn evaluate_word_circle(lifts: &[MoebiusLift], w: &Word) -> MoebiusLift {
    use crate::circle::CircleLift;
    let mut acc = MoebiusLift::identity();
    for l in &w.0 {
        let g = if l.inverse { lifts[l.generator].inverse() } else { lifts[l.generator] };
        acc = acc.compose(&g);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToledoMethod {
    Closed,
    Bounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToledoReport {
    pub value: f64,
    pub method: ToledoMethod,
    pub winding_integer: i64,
    pub boundary_psi: Vec<f64>,
    pub mw_bound: f64,
    pub mw_margin: f64,
    pub error_estimate: f64,
}

pub fn toledo(rep: &Representation) -> Result<ToledoReport> {
    toledo_with_lifts(rep, &rep.base_lifts(), BOUNDARY_ITERS)
}

/// Toledo invariant from chosen generator lifts. The lifted relator is
/// central; its winding is read off at several basepoints. With boundary,
/// the boundary lifts' `psi` values are subtracted.
pub fn toledo_with_lifts(rep: &Representation, lifts: &[LiftedSymplectic], k_iters: usize) -> Result<ToledoReport> {
    let p = rep.presentation();
    if lifts.len() != p.generator_count() || lifts.iter().any(|l| l.order() != rep.order()) {
        return Err(Error::DimensionMismatch("one lift per generator of the target group".into()));
    }
    let relator = evaluate_word_lifted(lifts, &p.relator());
    let winding = central_winding(&relator)?;
    let mut boundary_psi = Vec::with_capacity(p.boundary_count());
    let mut integer = winding;
    let mut fractional = 0.0;
    let mut error = 0.0;
    for j in 0..p.boundary_count() {
        let c = &lifts[p.c(j)];
        let (w, frac, err) = match c.to_moebius() {
            Some(f) => (f.winding, f.with_winding(0).translation_number_exact(), 0.0),
            None => {
                let e = c.psi_fractional(k_iters)?;
                (c.winding(), e.value, e.error)
            }
        };
        boundary_psi.push(w as f64 + frac);
        integer -= w;
        fractional += frac;
        error += err;
    }
    let value = integer as f64 - fractional;
    let mw_bound = (rep.order() as i64 * p.euler_characteristic().abs()) as f64;
    Ok(ToledoReport {
        value,
        method: if p.is_closed() { ToledoMethod::Closed } else { ToledoMethod::Bounded },
        winding_integer: winding,
        boundary_psi,
        mw_bound,
        mw_margin: mw_bound - value.abs(),
        error_estimate: error,
    })
}

/// Integer `m` with the lifted relator equal to `Z^m`, checked at the
/// standard basepoint and seven sampled ones.
fn central_winding(relator: &LiftedSymplectic) -> Result<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let n = relator.order();
    let mut values = vec![relator.displacement_turns(&crate::symplectic::LagrangianFrame::standard(n))];
    values.extend((1..BASEPOINTS).map(|_| relator.displacement_turns(&random_lagrangian(&mut rng, n))));
    let m = values[0].round();
    for &v in &values {
        let distance = (v - v.round()).abs();
        if distance > INTEGRALITY_TOL {
            return Err(Error::RelatorNotCentral { winding: v, distance });
        }
    }
    let spread = values.iter().map(|v| (v - m).abs()).fold(0.0, f64::max);
    if spread > INTEGRALITY_TOL {
        return Err(Error::NumericalDrift { spread });
    }
    Ok(m as i64)
}

/// `n |chi| - |T|`.
pub fn milnor_wood(rep: &Representation) -> Result<f64> {
    Ok(toledo(rep)?.mw_margin)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WmVerdict {
    WeaklyMaximal,
    NotWeaklyMaximal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WmReport {
    pub lambda: f64,
    pub toledo: f64,
    pub defect: f64,
    pub worst_word: Option<String>,
    pub sample_count: usize,
    pub verdict: WmVerdict,
    pub tolerance: f64,
    pub k_iters: usize,
    pub error_estimate: f64,
    pub seed: u64,
}

/// Reference data of a hyperbolization: base circle lifts and the sign that
/// makes its Toledo invariant `+|chi|`.
struct Hyperbolization {
    lifts: Vec<MoebiusLift>,
    sign: f64,
}

fn check_hyperbolization(rep: &Representation, hyp: &Representation) -> Result<Hyperbolization> {
    if hyp.target() != Target::Psl2 {
        return Err(Error::BadHyperbolization("target is not PSL(2,R)".into()));
    }
    if hyp.presentation() != rep.presentation() {
        return Err(Error::BadHyperbolization("presentation differs from the representation's".into()));
    }
    let t = toledo(hyp).map_err(|e| Error::BadHyperbolization(e.to_string()))?;
    let chi = hyp.presentation().euler_characteristic().abs() as f64;
    if (t.value.abs() - chi).abs() > 1e-6 {
        return Err(Error::BadHyperbolization(format!("Toledo invariant {} is not +-{chi}", t.value)));
    }
    Ok(Hyperbolization { lifts: hyp.circle_lifts().expect("PSL(2) target"), sign: t.value.signum() })
}

/// Defect `max |psi(rho(w)) - lambda tau(rho_h(w))|` over sampled
/// homologically trivial words, with `lambda = T / |chi|`.
pub fn wm_defect(rep: &Representation, hyp: &Representation, seed: u64, count: usize) -> Result<WmReport> {
    let h = check_hyperbolization(rep, hyp)?;
    let t = toledo(rep)?;
    let chi = rep.presentation().euler_characteristic().abs() as f64;
    let lambda = t.value / chi;
    let words = rep.presentation().sample_trivial_words(seed, count, 3, 3)?;
    let circle = rep.circle_lifts();
    let lifts = rep.base_lifts();
    let mut k_iters = 256;
    while rep.order() as f64 * 5.3 / k_iters as f64 > WM_TOL / 4.0 {
        k_iters *= 2;
    }
    let mut defect: f64 = 0.0;
    let mut worst = None;
    let mut error: f64 = 0.0;
    for w in &words {
        let tau = h.sign * evaluate_word_circle(&h.lifts, w).translation_number_exact();
        let psi = match &circle {
            Some(c) => evaluate_word_circle(c, w).translation_number_exact(),
            None => {
                let e = word_product(&lifts, w).psi(k_iters)?;
                error = error.max(e.error);
                e.value
            }
        };
        let d = (psi - lambda * tau).abs();
        if d > defect || worst.is_none() {
            defect = defect.max(d);
            worst = Some(w.to_string());
        }
    }
    Ok(WmReport {
        lambda,
        toledo: t.value,
        defect,
        worst_word: worst,
        sample_count: words.len(),
        verdict: if defect <= WM_TOL { WmVerdict::WeaklyMaximal } else { WmVerdict::NotWeaklyMaximal },
        tolerance: WM_TOL,
        k_iters,
        error_estimate: error,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QCausalReport {
    pub q: u32,
    pub drawn: usize,
    pub eligible: usize,
    pub certified_dominant: usize,
    pub unknown: usize,
    pub not_dominant: usize,
    pub seed: u64,
}

impl QCausalReport {
    pub fn refuted(&self) -> bool {
        self.not_dominant > 0
    }
}

/// Dominance verdicts for sampled trivial words whose hyperbolic
/// translation number exceeds `q`. Draws at most `50 * count` words.
pub fn q_causal_check(rep: &Representation, hyp: &Representation, q: u32, seed: u64, count: usize) -> Result<QCausalReport> {
    let h = check_hyperbolization(rep, hyp)?;
    let lifts = rep.base_lifts();
    let mut report = QCausalReport { q, drawn: 0, eligible: 0, certified_dominant: 0, unknown: 0, not_dominant: 0, seed };
    let words = rep.presentation().sample_trivial_words(seed, 50 * count.max(1), 4, 3)?;
    for w in &words {
        if report.eligible >= count {
            break;
        }
        report.drawn += 1;
        let tau = h.sign * evaluate_word_circle(&h.lifts, w).translation_number_exact();
        if tau <= q as f64 {
            continue;
        }
        report.eligible += 1;
        match word_product(&lifts, w).dominance_verdict(32, seed, 500)? {
            DominanceVerdict::CertifiedDominant => report.certified_dominant += 1,
            DominanceVerdict::Unknown => report.unknown += 1,
            DominanceVerdict::NotDominant(_) => report.not_dominant += 1,
        }
    }
    Ok(report)
}

/// Distance from `T ell / |chi|` to the nearest integer.
pub fn rationality_check(t: f64, ell: u32, chi: i64) -> f64 {
    let x = t * ell as f64 / chi.abs() as f64;
    (x - x.round()).abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub t: f64,
    pub toledo: Option<f64>,
    pub defect: Option<f64>,
    pub error: Option<String>,
}

/// Toledo invariant and WM defect along `family(t)`, `t = i / steps`.
pub fn wm_path_scan(
    family: impl Fn(f64) -> Result<Representation>,
    hyp: &Representation,
    steps: usize,
    seed: u64,
    count: usize,
) -> Vec<ScanRow> {
    (0..=steps)
        .map(|i| {
            let t = if steps == 0 { 0.0 } else { i as f64 / steps as f64 };
            match family(t).and_then(|rep| wm_defect(&rep, hyp, seed, count)) {
                Ok(r) => ScanRow { t, toledo: Some(r.toledo), defect: Some(r.defect), error: None },
                Err(e) => ScanRow { t, toledo: None, defect: None, error: Some(e.code().to_string()) },
            }
        })
        .collect()
}

pub fn write_scan_csv<W: std::io::Write>(out: &mut W, rows: &[ScanRow]) -> std::io::Result<()> {
    writeln!(out, "t,toledo,defect,error")?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_default();
    for r in rows {
        writeln!(out, "{},{},{},{}", r.t, opt(r.toledo), opt(r.defect), r.error.as_deref().unwrap_or(""))?;
    }
    Ok(())
}
