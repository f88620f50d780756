//! Bi-invariant orders sandwiched by a homogeneous quasimorphism: dominant
//! elements, the growth function `e_n(g, h) = min { p : g^p >= h^n }` and the
//! two-sided bracket on `e_n/n - f(h)/f(g)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::circle::{CircleLift, MoebiusLift, TabulatedLift};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Positivity {
    Positive,
    NotPositive,
    Unknown,
}

/// A group with a (possibly semi-decidable) bi-invariant order and a
/// homogeneous quasimorphism `f` sandwiching it:
/// `{ f >= C } ⊆ G+ ⊆ { f >= 0 }`.
pub trait OrderedGroup {
    type Elem: Clone;

    fn identity(&self) -> Self::Elem;
    fn compose(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;
    fn positivity(&self, g: &Self::Elem) -> Positivity;
    fn qm_value(&self, g: &Self::Elem) -> f64;
    /// Upper bound on `|f(ab) - f(a) - f(b)|`.
    fn defect_bound(&self) -> f64;
    fn sandwich_constant(&self) -> f64;

    fn power(&self, g: &Self::Elem, n: i64) -> Self::Elem {
        let mut base = if n < 0 { self.inverse(g) } else { g.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.compose(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.compose(&base, &base);
            }
        }
        acc
    }
}

/// Outcome of the search for `e_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrowthSearch {
    pub value: i64,
    /// The window predicted by the bracket inequality.
    pub window: (i64, i64),
    /// The minimum was found outside the predicted window, which means the
    /// supplied quasimorphism data do not sandwich the order.
    pub outside_window: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub n: i64,
    pub e_n: i64,
    pub ratio: f64,
    /// Bounds on `ratio - target`.
    pub low: f64,
    pub high: f64,
    /// `f(h) / f(g)`.
    pub target: f64,
}

impl GrowthRecord {
    pub fn holds(&self) -> bool {
        let d = self.ratio - self.target;
        self.low <= d + 1e-12 && d <= self.high + 1e-12
    }
}

fn check_dominant<O: OrderedGroup>(ops: &O, g: &O::Elem) -> Result<f64> {
    let fg = ops.qm_value(g);
    if !(fg > 0.0) || ops.positivity(g) != Positivity::Positive {
        return Err(Error::NotDominant(format!("f(g) = {fg}")));
    }
    Ok(fg)
}

/// How far past the predicted window the search may wander, as a multiple of
/// the window length.
const WINDOW_SLACK: i64 = 8;

/// Minimal `p` with `g^p h^-n` positive, searched from the window given by
/// the bracket inequality.
pub fn e_n_search<O: OrderedGroup>(ops: &O, g: &O::Elem, h: &O::Elem, n: i64) -> Result<GrowthSearch> {
    let fg = check_dominant(ops, g)?;
    let fh = ops.qm_value(h);
    let d = ops.defect_bound();
    let c = ops.sandwich_constant();
    let nf = n as f64 * fh;
    let lo = ((nf - d) / fg).floor() as i64 - 1;
    let hi = ((nf + c + d) / fg).ceil() as i64 + 1;
    let budget = WINDOW_SLACK * (hi - lo + 1) + 16;

    let h_inv_n = ops.power(h, -n);
    let g_inv = ops.inverse(g);
    let at = |p: i64| ops.compose(&ops.power(g, p), &h_inv_n);

    let mut elem = at(lo);
    match ops.positivity(&elem) {
        Positivity::Positive => {
            // walk down until positivity fails
            let mut p = lo;
            for _ in 0..budget {
                let below = ops.compose(&g_inv, &elem);
                match ops.positivity(&below) {
                    Positivity::Positive => {
                        elem = below;
                        p -= 1;
                    }
                    Positivity::NotPositive => {
                        return Ok(GrowthSearch { value: p, window: (lo, hi), outside_window: true });
                    }
                    Positivity::Unknown => return Err(Error::VerdictUnknown { p: p - 1 }),
                }
            }
            Err(Error::WindowExhausted { scanned: budget as usize })
        }
        Positivity::Unknown => Err(Error::VerdictUnknown { p: lo }),
        Positivity::NotPositive => {
            let mut p = lo;
            for _ in 0..(hi - lo) + budget {
                elem = ops.compose(g, &elem);
                p += 1;
                match ops.positivity(&elem) {
                    Positivity::Positive => {
                        return Ok(GrowthSearch { value: p, window: (lo, hi), outside_window: p > hi });
                    }
                    Positivity::NotPositive => {}
                    Positivity::Unknown => return Err(Error::VerdictUnknown { p }),
                }
            }
            Err(Error::WindowExhausted { scanned: (hi - lo + budget) as usize })
        }
    }
}

pub fn e_n<O: OrderedGroup>(ops: &O, g: &O::Elem, h: &O::Elem, n: i64) -> Result<i64> {
    e_n_search(ops, g, h, n).map(|s| s.value)
}

/// The bracket `[low, high]` on `e_n/n - f(h)/f(g)`.
pub fn bracket(defect: f64, sandwich: f64, fg: f64, n: i64) -> (f64, f64) {
    let nf = n as f64 * fg;
    (-defect / nf, (defect + sandwich + fg) / nf)
}

pub fn growth_record<O: OrderedGroup>(ops: &O, g: &O::Elem, h: &O::Elem, n: i64) -> Result<(GrowthRecord, bool)> {
    let s = e_n_search(ops, g, h, n)?;
    let fg = ops.qm_value(g);
    let (low, high) = bracket(ops.defect_bound(), ops.sandwich_constant(), fg, n);
    let rec = GrowthRecord {
        n,
        e_n: s.value,
        ratio: s.value as f64 / n as f64,
        low,
        high,
        target: ops.qm_value(h) / fg,
    };
    Ok((rec, s.outside_window))
}

/// `e_{n_max} / n_max` and an interval that must contain `f(h)/f(g)`.
pub fn e_limit<O: OrderedGroup>(ops: &O, g: &O::Elem, h: &O::Elem, n_max: i64) -> Result<(f64, (f64, f64))> {
    let (rec, _) = growth_record(ops, g, h, n_max)?;
    Ok((rec.ratio, (rec.ratio - rec.high, rec.ratio - rec.low)))
}

#[derive(Clone, Debug, Default)]
pub struct ReconstructionReport {
    pub records: Vec<GrowthRecord>,
    /// Values of `n` where the bracket inequality fails.
    pub violations: Vec<i64>,
    /// Values of `n` where the minimum fell outside the predicted window.
    pub outside_window: Vec<i64>,
}

impl ReconstructionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.outside_window.is_empty()
    }
}

pub fn reconstruction_check<O: OrderedGroup>(
    ops: &O,
    g: &O::Elem,
    h: &O::Elem,
    n_max: i64,
) -> Result<ReconstructionReport> {
    let mut report = ReconstructionReport::default();
    for n in 1..=n_max {
        let (rec, outside) = growth_record(ops, g, h, n)?;
        if !rec.holds() {
            report.violations.push(n);
        }
        if outside {
            report.outside_window.push(n);
        }
        report.records.push(rec);
    }
    Ok(report)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SandwichReport {
    pub trials: usize,
    /// Elements with `f >= C` judged not positive.
    pub upper_violations: usize,
    /// Elements with `f >= C` whose verdict is unknown.
    pub upper_unknown: usize,
    /// Positive elements with `f < -tol`.
    pub lower_violations: usize,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.upper_violations == 0 && self.lower_violations == 0
    }
}

pub fn verify_sandwich<O: OrderedGroup>(
    ops: &O,
    mut sampler: impl FnMut() -> O::Elem,
    trials: usize,
    tol: f64,
) -> SandwichReport {
    let c = ops.sandwich_constant();
    let mut r = SandwichReport { trials, ..Default::default() };
    for _ in 0..trials {
        let g = sampler();
        let f = ops.qm_value(&g);
        let v = ops.positivity(&g);
        if f >= c {
            match v {
                Positivity::NotPositive => r.upper_violations += 1,
                Positivity::Unknown => r.upper_unknown += 1,
                Positivity::Positive => {}
            }
        }
        if v == Positivity::Positive && f < -tol {
            r.lower_violations += 1;
        }
    }
    r
}

pub fn write_growth_csv<W: Write>(out: &mut W, records: &[GrowthRecord]) -> std::io::Result<()> {
    writeln!(out, "n,e_n,ratio,low,high,target")?;
    for r in records {
        writeln!(out, "{},{},{},{},{},{}", r.n, r.e_n, r.ratio, r.low, r.high, r.target)?;
    }
    Ok(())
}

/// Lifts of projective transformations of the circle, ordered pointwise, with
/// the translation number. Verdicts are exact.
#[derive(Clone, Copy, Debug, Default)]
pub struct CircleOrder;

impl OrderedGroup for CircleOrder {
    type Elem = MoebiusLift;

    fn identity(&self) -> MoebiusLift {
        MoebiusLift::identity()
    }
    fn compose(&self, a: &MoebiusLift, b: &MoebiusLift) -> MoebiusLift {
        a.compose(b)
    }
    fn inverse(&self, a: &MoebiusLift) -> MoebiusLift {
        a.inverse()
    }
    fn positivity(&self, g: &MoebiusLift) -> Positivity {
        g.positivity_exact()
    }
    fn qm_value(&self, g: &MoebiusLift) -> f64 {
        g.translation_number_exact()
    }
    fn defect_bound(&self) -> f64 {
        1.0
    }
    fn sandwich_constant(&self) -> f64 {
        1.5
    }
}

/// Piecewise-linear lifts with the pointwise order. Positivity is exact (the
/// displacement is minimised at knots); the translation number is iterated.
#[derive(Clone, Copy, Debug)]
pub struct PiecewiseLinearOrder {
    pub iterations: usize,
}

impl Default for PiecewiseLinearOrder {
    fn default() -> Self {
        Self { iterations: 4096 }
    }
}

impl OrderedGroup for PiecewiseLinearOrder {
    type Elem = TabulatedLift;

    fn identity(&self) -> TabulatedLift {
        TabulatedLift::translation(0.0)
    }
    fn compose(&self, a: &TabulatedLift, b: &TabulatedLift) -> TabulatedLift {
        a.compose(b)
    }
    fn inverse(&self, a: &TabulatedLift) -> TabulatedLift {
        a.inverse()
    }
    fn positivity(&self, g: &TabulatedLift) -> Positivity {
        if g.min_displacement().value >= -1e-12 {
            Positivity::Positive
        } else {
            Positivity::NotPositive
        }
    }
    fn qm_value(&self, g: &TabulatedLift) -> f64 {
        g.translation_number_iterative(self.iterations).value
    }
    fn defect_bound(&self) -> f64 {
        1.0
    }
    fn sandwich_constant(&self) -> f64 {
        1.5
    }
}
