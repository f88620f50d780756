//! Fundamental groups of compact oriented surfaces.
//!
//! A surface of genus `g` with `b` boundary components is presented on the
//! generators `a1, b1, ..., ag, bg, c1, ..., cb` with the single relator
//! `[a1,b1]...[ag,bg] c1...cb`. For `b >= 1` the group is free, but the
//! redundant presentation keeps the closed and bounded cases on one code path.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator raised to the power `+1` or `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Self { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Self { generator: self.generator, inverse: !self.inverse }
    }

    pub fn exponent(self) -> i64 {
        if self.inverse { -1 } else { 1 }
    }

    /// Signed 1-based index: `+(i+1)` for the generator, `-(i+1)` for its inverse.
    pub fn signed_index(self) -> i64 {
        (self.generator as i64 + 1) * self.exponent()
    }

    pub fn from_signed_index(index: i64) -> Result<Self> {
        if index == 0 {
            return Err(Error::Parse("letter index 0 is not allowed".into()));
        }
        Ok(Self::new(index.unsigned_abs() as usize - 1, index < 0))
    }
}

/// A word in the generators of a surface group. Not reduced unless produced by
/// [`Word::free_reduce`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn generator(index: usize) -> Self {
        Self(vec![Letter::new(index, false)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Concatenation, without reduction.
    pub fn concat(&self, other: &Word) -> Self {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Self(letters)
    }

    /// `[u, v] = u v u^-1 v^-1`.
    pub fn commutator(u: &Word, v: &Word) -> Self {
        u.concat(v).concat(&u.inverse()).concat(&v.inverse())
    }

    pub fn free_reduce(&self) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            match out.last() {
                Some(&last) if last == l.inv() => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Self(out)
    }

    pub fn is_freely_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inv())
    }

    pub fn to_signed(&self) -> Vec<i64> {
        self.0.iter().map(|l| l.signed_index()).collect()
    }

    pub fn from_signed(indices: &[i64]) -> Result<Self> {
        indices.iter().map(|&i| Letter::from_signed_index(i)).collect::<Result<Vec<_>>>().map(Self)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", l.signed_index())?;
        }
        Ok(())
    }
}

/// Exponent sums per generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianizationVector(pub Vec<i64>);

/// Presentation of the fundamental group of a compact oriented surface of
/// negative Euler characteristic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfacePresentation {
    genus: usize,
    boundary: usize,
}

impl SurfacePresentation {
    pub fn new(genus: usize, boundary: usize) -> Result<Self> {
        let chi = 2 - 2 * genus as i64 - boundary as i64;
        if chi >= 0 {
            return Err(Error::NonHyperbolicSurface { genus, boundary, chi });
        }
        Ok(Self { genus, boundary })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary
    }

    pub fn is_closed(&self) -> bool {
        self.boundary == 0
    }

    pub fn generator_count(&self) -> usize {
        2 * self.genus + self.boundary
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundary as i64
    }

    pub fn a(&self, i: usize) -> usize {
        assert!(i < self.genus);
        2 * i
    }

    pub fn b(&self, i: usize) -> usize {
        assert!(i < self.genus);
        2 * i + 1
    }

    /// Index of the `j`-th boundary generator.
    pub fn c(&self, j: usize) -> usize {
        assert!(j < self.boundary);
        2 * self.genus + j
    }

    pub fn generator_name(&self, index: usize) -> String {
        if index < 2 * self.genus {
            let kind = if index % 2 == 0 { 'a' } else { 'b' };
            format!("{kind}{}", index / 2 + 1)
        } else {
            format!("c{}", index - 2 * self.genus + 1)
        }
    }

    pub fn relator(&self) -> Word {
        let mut w = Word::empty();
        for i in 0..self.genus {
            w = w.concat(&Word::commutator(&Word::generator(self.a(i)), &Word::generator(self.b(i))));
        }
        for j in 0..self.boundary {
            w = w.concat(&Word::generator(self.c(j)));
        }
        w
    }

    pub fn validate(&self, w: &Word) -> Result<()> {
        let n = self.generator_count();
        match w.0.iter().find(|l| l.generator >= n) {
            Some(l) => Err(Error::InvalidArgument(format!(
                "generator index {} out of range for {} generators",
                l.generator, n
            ))),
            None => Ok(()),
        }
    }

    pub fn abelianization(&self, w: &Word) -> AbelianizationVector {
        let mut v = vec![0; self.generator_count()];
        for l in &w.0 {
            v[l.generator] += l.exponent();
        }
        AbelianizationVector(v)
    }

    /// True iff the abelianization of `w` is an integer multiple of the
    /// relator's, i.e. `w` is trivial in `H_1` of the surface.
    pub fn is_homologically_trivial(&self, w: &Word) -> bool {
        let v = self.abelianization(w).0;
        let (ab, c) = v.split_at(2 * self.genus);
        if ab.iter().any(|&e| e != 0) {
            return false;
        }
        c.windows(2).all(|p| p[0] == p[1])
    }

    /// A uniformly random freely reduced word of the given length.
    pub fn random_reduced_word<R: Rng>(&self, rng: &mut R, len: usize) -> Word {
        let n = self.generator_count();
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        while letters.len() < len {
            let l = Letter::new(rng.random_range(0..n), rng.random_bool(0.5));
            if letters.last().is_some_and(|&last| last == l.inv()) {
                continue;
            }
            letters.push(l);
        }
        Word(letters)
    }

    /// Deterministic sample of homologically trivial words. Each word is a
    /// product of between 1 and `max_blocks` commutators `[u, v]`, with `u`
    /// and `v` random freely reduced words of length `1..=max_len`. Words
    /// that reduce to the identity are redrawn.
    pub fn sample_trivial_words(&self, seed: u64, count: usize, max_blocks: usize, max_len: usize) -> Result<Vec<Word>> {
        if count == 0 || max_blocks == 0 || max_len == 0 {
            return Err(Error::InvalidArgument("count, max_blocks and max_len must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let blocks = rng.random_range(1..=max_blocks);
            let mut w = Word::empty();
            for _ in 0..blocks {
                let lu = rng.random_range(1..=max_len);
                let lv = rng.random_range(1..=max_len);
                let u = self.random_reduced_word(&mut rng, lu);
                let v = self.random_reduced_word(&mut rng, lv);
                w = w.concat(&Word::commutator(&u, &v));
            }
            let w = w.free_reduce();
            if !w.is_empty() {
                out.push(w);
            }
        }
        Ok(out)
    }
}
