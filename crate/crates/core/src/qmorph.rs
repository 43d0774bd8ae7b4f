//! Integer and rational valued quasimorphisms.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Element, GroupKind, GroupRef, Letter};
use crate::metric::Ball;

pub type QmFn = dyn Fn(&Element) -> Rational64 + Send + Sync;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QmKind {
    Brooks(String),
    ExponentSum(String),
    FloorOf(Box<QmKind>),
    Scaled { inner: Box<QmKind>, factor: String },
    Custom(String),
}

impl fmt::Display for QmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QmKind::Brooks(w) => write!(f, "h_{{{w}}}"),
            QmKind::ExponentSum(g) => write!(f, "exp_{g}"),
            QmKind::FloorOf(inner) => write!(f, "floor({inner})"),
            QmKind::Scaled { inner, factor } => write!(f, "{factor}*{inner}"),
            QmKind::Custom(label) => f.write_str(label),
        }
    }
}

/// A map `G → Q` evaluated exactly.
#[derive(Clone)]
pub struct Quasimorphism {
    pub source: GroupRef,
    pub kind: QmKind,
    eval: Arc<QmFn>,
}

impl fmt::Debug for Quasimorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quasimorphism({} on {})", self.kind, self.source.name())
    }
}

impl Quasimorphism {
    pub fn new<F>(source: GroupRef, kind: QmKind, eval: F) -> Self
    where
        F: Fn(&Element) -> Rational64 + Send + Sync + 'static,
    {
        Quasimorphism { source, kind, eval: Arc::new(eval) }
    }

    pub fn eval(&self, g: &Element) -> Rational64 {
        (self.eval)(g)
    }

    pub fn label(&self) -> String {
        self.kind.to_string()
    }

    pub fn zero(source: GroupRef) -> Self {
        Self::new(source, QmKind::Custom("0".into()), |_| Rational64::zero())
    }

    /// Brooks counting quasimorphism: non-overlapping occurrences of `w` in
    /// the reduced word of `g`, scanned left to right, minus those of `w⁻¹`.
    pub fn brooks(source: GroupRef, w: &[Letter]) -> Result<Self> {
        if !matches!(source.kind(), GroupKind::Free { .. }) {
            return Err(crate::group::GroupError::WrongKind {
                expected: "free group",
                actual: source.name().to_string(),
            }
            .into());
        }
        let elem = source.word_to_element(w)?;
        let label = source.format(&elem);
        let reduced = w.windows(2).all(|p| p[0] != -p[1]);
        if w.is_empty() || !reduced || w[0] == -w[w.len() - 1] {
            return Err(Error::NotCyclicallyReduced(label));
        }
        let word = w.to_vec();
        let inv: Vec<Letter> = w.iter().rev().map(|l| -l).collect();
        Ok(Self::new(source, QmKind::Brooks(label), move |g| {
            let Element::Free(v) = g else { return Rational64::zero() };
            Rational64::from_integer(count_little(v, &word) - count_little(v, &inv))
        }))
    }

    /// Exponent sum of generator `gen`, a homomorphism on free and free
    /// abelian groups.
    pub fn exponent_sum(source: GroupRef, gen: usize) -> Result<Self> {
        if !matches!(source.kind(), GroupKind::Free { .. } | GroupKind::FreeAbelian { .. }) {
            return Err(crate::group::GroupError::WrongKind {
                expected: "free or free abelian group",
                actual: source.name().to_string(),
            }
            .into());
        }
        if gen >= source.generators().len() {
            return Err(crate::group::GroupError::IndexOutOfRange {
                index: gen as i64,
                count: source.generators().len(),
            }
            .into());
        }
        let name = source.generator_name(gen).to_string();
        Ok(Self::new(source, QmKind::ExponentSum(name), move |g| {
            let n = match g {
                Element::Free(v) => v
                    .iter()
                    .filter(|l| l.unsigned_abs() as usize == gen + 1)
                    .map(|l| l.signum() as i64)
                    .sum(),
                Element::Abelian(v) => v[gen],
                _ => 0,
            };
            Rational64::from_integer(n)
        }))
    }

    pub fn scaled(&self, factor: Rational64) -> Self {
        let inner = self.clone();
        let kind = QmKind::Scaled { inner: Box::new(self.kind.clone()), factor: factor.to_string() };
        Self::new(self.source.clone(), kind, move |g| inner.eval(g) * factor)
    }

    /// `g ↦ ⌊φ(g)⌋`.
    pub fn floor(&self) -> Self {
        let inner = self.clone();
        let kind = QmKind::FloorOf(Box::new(self.kind.clone()));
        Self::new(self.source.clone(), kind, move |g| inner.eval(g).floor())
    }

    /// `|φ(xy) − φ(x) − φ(y)|`.
    pub fn defect_at(&self, x: &Element, y: &Element) -> Rational64 {
        let xy = self.source.mul(x, y);
        (self.eval(&xy) - self.eval(x) - self.eval(y)).abs()
    }
}

/// Greedy non-overlapping occurrence count.
pub fn count_little(v: &[Letter], w: &[Letter]) -> i64 {
    let (n, m) = (v.len(), w.len());
    let mut i = 0;
    let mut count = 0;
    while i + m <= n {
        if &v[i..i + m] == w {
            count += 1;
            i += m;
        } else {
            i += 1;
        }
    }
    count
}

pub fn floor_compose(phi: &Quasimorphism) -> Quasimorphism {
    phi.floor()
}

/// `max |φ(xy) − φ(x) − φ(y)|` over all pairs of the ball.
pub fn defect_sup(phi: &Quasimorphism, ball: &Ball) -> Rational64 {
    let elements = ball.elements();
    let values: Vec<Rational64> = elements.par_iter().map(|g| phi.eval(g)).collect();
    let group = &phi.source;
    elements
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            elements
                .iter()
                .enumerate()
                .map(|(j, y)| (phi.eval(&group.mul(x, y)) - values[i] - values[j]).abs())
                .max()
                .unwrap_or_else(Rational64::zero)
        })
        .max()
        .unwrap_or_else(Rational64::zero)
}

/// The sequence `φ(gⁿ)/n` with its last value as estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct Homogenization {
    pub values: Vec<Rational64>,
    pub estimate: Rational64,
    /// `max − min` over the second half of the sequence
    pub oscillation: Rational64,
}

pub fn homogenize_estimate(phi: &Quasimorphism, g: &Element, n_max: u32) -> Homogenization {
    let group = &phi.source;
    let n_max = n_max.max(1);
    let mut power = group.identity();
    let mut values = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        power = group.mul(&power, g);
        values.push(phi.eval(&power) / Rational64::from_integer(n as i64));
    }
    let tail = &values[(n_max as usize) / 2..];
    let max = tail.iter().max().copied().unwrap_or_else(Rational64::zero);
    let min = tail.iter().min().copied().unwrap_or_else(Rational64::zero);
    Homogenization { estimate: *values.last().unwrap(), values, oscillation: max - min }
}

/// Largest integer `⌊x⌋` as `i64`.
pub fn floor_i64(x: Rational64) -> i64 {
    x.numer().div_floor(x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn f2() -> GroupRef {
        Group::free(2).unwrap()
    }

    #[test]
    fn brooks_counts_powers() {
        let g = f2();
        let h = Quasimorphism::brooks(g.clone(), &[1, 2]).unwrap();
        let ab = g.parse("a b").unwrap();
        assert_eq!(h.eval(&g.pow(&ab, 3)), Rational64::from_integer(3));
        assert_eq!(h.eval(&g.parse("b a").unwrap()), Rational64::zero());
        assert_eq!(h.eval(&g.identity()), Rational64::zero());
        assert_eq!(h.eval(&g.pow(&ab, -4)), Rational64::from_integer(-4));
    }

    #[test]
    fn little_counting_skips_overlaps() {
        assert_eq!(count_little(&[1, 1, 1], &[1, 1]), 1);
        assert_eq!(count_little(&[1, 2, 1, 2, 1], &[1, 2, 1]), 1);
        assert_eq!(count_little(&[], &[1]), 0);
    }

    #[test]
    fn brooks_rejects_bad_words() {
        assert!(Quasimorphism::brooks(f2(), &[]).is_err());
        assert!(Quasimorphism::brooks(f2(), &[1, 2, -1]).is_err());
        assert!(Quasimorphism::brooks(f2(), &[1, -1]).is_err());
        assert!(Quasimorphism::brooks(Group::free_abelian(2).unwrap(), &[1]).is_err());
    }

    #[test]
    fn single_letter_brooks_is_exponent_sum() {
        let g = f2();
        let ball = Ball::standard(&g, 4);
        let h = Quasimorphism::brooks(g.clone(), &[1]).unwrap();
        let e = Quasimorphism::exponent_sum(g, 0).unwrap();
        for x in ball.elements() {
            assert_eq!(h.eval(x), e.eval(x));
        }
        assert_eq!(defect_sup(&h, &ball), Rational64::zero());
    }

    #[test]
    fn floor_of_half_exponent_sum() {
        let z = Group::free_abelian(1).unwrap();
        let half = Quasimorphism::exponent_sum(z.clone(), 0).unwrap().scaled(Rational64::new(1, 2));
        let fl = floor_compose(&half);
        for n in -50..=50i64 {
            for m in -50..=50i64 {
                let (x, y) = (Element::Abelian(vec![n]), Element::Abelian(vec![m]));
                assert!(fl.defect_at(&x, &y) <= Rational64::from_integer(1));
            }
        }
        assert_eq!(fl.eval(&Element::Abelian(vec![-3])), Rational64::from_integer(-2));
    }

    #[test]
    fn homogenization_of_brooks() {
        let g = f2();
        let h = Quasimorphism::brooks(g.clone(), &[1, 2]).unwrap();
        let est = homogenize_estimate(&h, &g.parse("a b").unwrap(), 10);
        assert!(est.values.iter().all(|v| *v == Rational64::from_integer(1)));
        assert_eq!(est.oscillation, Rational64::zero());
        let a = homogenize_estimate(&h, &g.parse("a").unwrap(), 10);
        assert!(a.values.iter().all(|v| v.is_zero()));
        let id = homogenize_estimate(&h, &g.identity(), 5);
        assert!(id.values.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn floor_helper() {
        assert_eq!(floor_i64(Rational64::new(-1, 2)), -1);
        assert_eq!(floor_i64(Rational64::new(7, 2)), 3);
    }
}
