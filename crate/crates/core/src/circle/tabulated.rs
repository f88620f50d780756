use rand::Rng;

use super::CircleLift;
use crate::error::{Error, Result};
use crate::Estimate;

const MERGE_TOL: f64 = 1e-13;

/// Piecewise-linear element of `Homeo_Z(R)` given by knots `(x_i, v_i)` with
/// `x_i` in `[0,1)` increasing, `v_i` strictly increasing and
/// `v_last < v_0 + 1`, extended by `f(x + 1) = f(x) + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedLift {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl TabulatedLift {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidArgument("a tabulated lift needs at least one knot".into()));
        }
        let mut normalized: Vec<(f64, f64)> = knots
            .into_iter()
            .map(|(x, v)| {
                let n = x.floor();
                (x - n, v - n)
            })
            .collect();
        normalized.sort_by(|p, q| p.0.total_cmp(&q.0));
        let (xs, vs): (Vec<f64>, Vec<f64>) = normalized.into_iter().unzip();
        let strict = xs.windows(2).all(|w| w[0] < w[1]) && vs.windows(2).all(|w| w[0] < w[1]);
        if !strict || vs[vs.len() - 1] >= vs[0] + 1.0 || xs[xs.len() - 1] >= xs[0] + 1.0 {
            return Err(Error::InvalidArgument("tabulated lift is not strictly increasing".into()));
        }
        Ok(Self { xs, vs })
    }

    pub fn translation(t: f64) -> Self {
        Self { xs: vec![0.0], vs: vec![t] }
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.vs.iter().copied())
    }

    fn len(&self) -> usize {
        self.xs.len()
    }

    /// Knot `i` of the periodic extension, for any integer `i`.
    fn knot(&self, i: i64) -> (f64, f64) {
        let m = self.len() as i64;
        let q = i.div_euclid(m);
        let r = i.rem_euclid(m) as usize;
        (self.xs[r] + q as f64, self.vs[r] + q as f64)
    }
}

impl CircleLift for TabulatedLift {
    fn eval(&self, x: f64) -> f64 {
        let n = x.floor();
        let r = x - n;
        // index of the last knot <= r, or -1 if r precedes every knot
        let i = self.xs.partition_point(|&k| k <= r) as i64 - 1;
        let (x0, v0) = self.knot(i);
        let (x1, v1) = self.knot(i + 1);
        let t = (r - x0) / (x1 - x0);
        v0 + t * (v1 - v0) + n
    }

    fn compose(&self, other: &Self) -> Self {
        let inv = other.inverse();
        let mut xs: Vec<f64> = other.xs.clone();
        xs.extend(self.xs.iter().map(|&x| inv.eval(x).rem_euclid(1.0)));
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < MERGE_TOL);
        if xs.len() > 1 && xs[xs.len() - 1] + MERGE_TOL > xs[0] + 1.0 {
            xs.pop();
        }
        let vs = xs.iter().map(|&x| self.eval(other.eval(x))).collect();
        Self { xs, vs }
    }

    fn inverse(&self) -> Self {
        let knots = self.knots().map(|(x, v)| (v, x)).collect();
        Self::new(knots).expect("inverse of a strictly increasing lift")
    }

    /// Exact: the displacement is piecewise linear, so its minimum is at a knot.
    fn min_displacement(&self) -> Estimate {
        let m = self.knots().map(|(x, v)| v - x).fold(f64::INFINITY, f64::min);
        Estimate::exact(m)
    }
}

/// Random lift with about `knots` knots and translation part `shift`. The knot
/// spacing of the image is the source spacing distorted by factors in
/// `[e^-distortion, e^distortion]` (before renormalisation).
pub fn random_tabulated<R: Rng>(rng: &mut R, knots: usize, shift: f64, distortion: f64) -> TabulatedLift {
    let mut xs: Vec<f64> = (0..knots.max(1)).map(|_| rng.random_range(0.0..1.0)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let m = xs.len();
    let gaps: Vec<f64> = (0..m)
        .map(|i| {
            let next = if i + 1 < m { xs[i + 1] } else { xs[0] + 1.0 };
            (next - xs[i]) * rng.random_range(-distortion..=distortion).exp()
        })
        .collect();
    let total: f64 = gaps.iter().sum();
    let mut vs = Vec::with_capacity(m);
    let mut v = xs[0] + shift;
    for g in gaps.iter().take(m) {
        vs.push(v);
        v += g / total;
    }
    TabulatedLift { xs, vs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn translation_behaviour() {
        let t = TabulatedLift::translation(1.0);
        assert_eq!(t.eval(0.3), 1.3);
        assert_eq!(t.translation_number_iterative(10).value, 1.0);
        assert_eq!(t.min_displacement(), Estimate::exact(1.0));
    }

    #[test]
    fn periodic_and_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let f = random_tabulated(&mut rng, 7, 0.2, 0.1);
            let mut prev = f64::NEG_INFINITY;
            for i in 0..400 {
                let x = -2.0 + i as f64 * 0.01;
                let y = f.eval(x);
                assert!(y > prev);
                prev = y;
                assert!((f.eval(x + 1.0) - y - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn compose_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let f = random_tabulated(&mut rng, 6, 0.3, 0.2);
            let g = random_tabulated(&mut rng, 5, -0.6, 0.3);
            let fg = f.compose(&g);
            let fi = f.inverse();
            for i in 0..300 {
                let x = -1.5 + i as f64 * 0.0113;
                assert!((fg.eval(x) - f.eval(g.eval(x))).abs() < 1e-10);
                assert!((fi.eval(f.eval(x)) - x).abs() < 1e-10);
            }
            let fine = (0..100_000).map(|i| i as f64 / 1e5).map(|x| fg.eval(x) - x).fold(f64::INFINITY, f64::min);
            assert!(fg.min_displacement().value <= fine + 1e-12);
        }
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(TabulatedLift::new(vec![(0.1, 0.5), (0.2, 0.4)]).is_err());
        assert!(TabulatedLift::new(vec![(0.1, 0.0), (0.9, 1.0)]).is_err());
        assert!(TabulatedLift::new(vec![]).is_err());
    }
}
