use std::fmt;
use std::sync::Arc;

use num_integer::{Integer, Roots};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Element, GroupError, GroupKind, GroupRef};
use crate::metric::Ball;

/// Slope of the rounding cocycle: `num/den`, or `sqrt(num/den)` when `sqrt`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alpha {
    pub num: i64,
    pub den: i64,
    pub sqrt: bool,
}

impl Alpha {
    pub fn rational(num: i64, den: i64) -> Self {
        Alpha { num, den, sqrt: false }
    }

    /// `sqrt(num/den)`; `Alpha::sqrt_of(1, 2)` is √2/2.
    pub fn sqrt_of(num: i64, den: i64) -> Self {
        Alpha { num, den, sqrt: true }
    }

    /// `⌊α·x⌋`, exact.
    pub fn floor_times(&self, x: i64) -> i64 {
        if !self.sqrt {
            return Integer::div_floor(&(self.num as i128 * x as i128), &(self.den as i128)) as i64;
        }
        let m = self.num as i128 * x as i128 * x as i128;
        let s = (m / self.den as i128).sqrt();
        if x >= 0 {
            s as i64
        } else if s * s * self.den as i128 == m {
            -(s as i64)
        } else {
            -(s as i64) - 1
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sqrt {
            write!(f, "sqrt({}/{})", self.num, self.den)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

pub type CocycleFn = dyn Fn(&Element, &Element) -> Vec<i64> + Send + Sync;

#[derive(Clone)]
pub enum CocycleRule {
    Zero,
    /// `ω(x,y) = ⌊α(x+y)⌋ − ⌊αx⌋ − ⌊αy⌋` on `Z`.
    Rounding(Alpha),
    /// `ω((x,y),(x',y')) = −x'y` on `Z²`; the extension is the Heisenberg group.
    Heisenberg,
    Custom { label: String, eval: Arc<CocycleFn> },
}

impl fmt::Debug for CocycleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CocycleRule::Zero => f.write_str("Zero"),
            CocycleRule::Rounding(a) => write!(f, "Rounding({a})"),
            CocycleRule::Heisenberg => f.write_str("Heisenberg"),
            CocycleRule::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

/// A normalized 2-cocycle `Q × Q → Z^k`.
#[derive(Clone, Debug)]
pub struct Cocycle {
    pub rule: CocycleRule,
    pub declared_bound: Option<u64>,
}

const TRIPLE_RADIUS: u32 = 4;
const RANDOM_TRIPLES: usize = 1000;
const MAX_EXHAUSTIVE_TRIPLES: usize = 3_000_000;

impl Cocycle {
    pub fn zero() -> Self {
        Cocycle { rule: CocycleRule::Zero, declared_bound: Some(0) }
    }

    pub fn rounding(alpha: Alpha) -> Self {
        Cocycle { rule: CocycleRule::Rounding(alpha), declared_bound: Some(1) }
    }

    pub fn heisenberg() -> Self {
        Cocycle { rule: CocycleRule::Heisenberg, declared_bound: None }
    }

    pub fn custom<F>(label: &str, declared_bound: Option<u64>, eval: F) -> Self
    where
        F: Fn(&Element, &Element) -> Vec<i64> + Send + Sync + 'static,
    {
        Cocycle {
            rule: CocycleRule::Custom { label: label.to_string(), eval: Arc::new(eval) },
            declared_bound,
        }
    }

    pub fn label(&self) -> String {
        match &self.rule {
            CocycleRule::Zero => "zero".into(),
            CocycleRule::Rounding(a) => format!("rounding({a})"),
            CocycleRule::Heisenberg => "heisenberg".into(),
            CocycleRule::Custom { label, .. } => label.clone(),
        }
    }

    pub fn eval(&self, z_rank: usize, q1: &Element, q2: &Element) -> Vec<i64> {
        match &self.rule {
            CocycleRule::Zero => vec![0; z_rank],
            CocycleRule::Rounding(alpha) => {
                let (Element::Abelian(x), Element::Abelian(y)) = (q1, q2) else {
                    panic!("rounding cocycle lives on Z");
                };
                let (x, y) = (x[0], y[0]);
                vec![alpha.floor_times(x + y) - alpha.floor_times(x) - alpha.floor_times(y)]
            }
            CocycleRule::Heisenberg => {
                let (Element::Abelian(p), Element::Abelian(q)) = (q1, q2) else {
                    panic!("heisenberg cocycle lives on Z^2");
                };
                vec![-q[0] * p[1]]
            }
            CocycleRule::Custom { eval, .. } => eval(q1, q2),
        }
    }

    pub(crate) fn check_compatible(&self, z_rank: usize, base: &GroupRef) -> Result<(), GroupError> {
        let need = |what: &str| {
            Err(GroupError::InvalidParameters(format!("{} cocycle needs {what}", self.label())))
        };
        match &self.rule {
            CocycleRule::Rounding(alpha) => {
                if !matches!(base.kind(), GroupKind::FreeAbelian { rank: 1 }) || z_rank != 1 {
                    return need("base Z and z_rank 1");
                }
                if alpha.den <= 0 || (alpha.sqrt && alpha.num < 0) {
                    return need("a positive denominator (and non-negative radicand)");
                }
            }
            CocycleRule::Heisenberg => {
                if !matches!(base.kind(), GroupKind::FreeAbelian { rank: 2 }) || z_rank != 1 {
                    return need("base Z^2 and z_rank 1");
                }
            }
            CocycleRule::Zero | CocycleRule::Custom { .. } => {}
        }
        Ok(())
    }

    /// Checks normalization and the cocycle identity
    /// `ω(x,y) + ω(xy,z) = ω(y,z) + ω(x,yz)` on every triple of the radius-4
    /// base ball (shrunk if too large) plus 10³ seeded random triples.
    pub(crate) fn verify(&self, z_rank: usize, base: &GroupRef) -> Result<(), GroupError> {
        let mut radius = TRIPLE_RADIUS;
        let ball = loop {
            let ball = Ball::new(base, &base.generator_elements(), radius);
            if ball.len().pow(3) <= MAX_EXHAUSTIVE_TRIPLES || radius == 1 {
                break ball;
            }
            radius -= 1;
        };
        let elements = ball.elements();
        let id = base.identity();
        for q in elements {
            for (a, b) in [(&id, q), (q, &id)] {
                let w = self.eval(z_rank, a, b);
                if w.len() != z_rank {
                    return Err(GroupError::InvalidParameters(format!(
                        "cocycle returned {} values for z_rank {z_rank}",
                        w.len()
                    )));
                }
                if w.iter().any(|&v| v != 0) {
                    return Err(self.witness(base, a, b, &id, "not normalized"));
                }
            }
        }
        for x in elements {
            for y in elements {
                for z in elements {
                    self.check_triple(z_rank, base, x, y, z)?;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0c1);
        let gens = base.generator_elements();
        let mut random = || {
            let len = rng.gen_range(0..=12);
            (0..len).fold(base.identity(), |acc, _| {
                let g = &gens[rng.gen_range(0..gens.len())];
                let g = if rng.gen_bool(0.5) { base.inv(g) } else { g.clone() };
                base.mul(&acc, &g)
            })
        };
        for _ in 0..RANDOM_TRIPLES {
            let (x, y, z) = (random(), random(), random());
            self.check_triple(z_rank, base, &x, &y, &z)?;
        }
        Ok(())
    }

    fn check_triple(
        &self,
        z_rank: usize,
        base: &GroupRef,
        x: &Element,
        y: &Element,
        z: &Element,
    ) -> Result<(), GroupError> {
        let xy = base.mul(x, y);
        let yz = base.mul(y, z);
        let lhs = add(&self.eval(z_rank, x, y), &self.eval(z_rank, &xy, z));
        let rhs = add(&self.eval(z_rank, y, z), &self.eval(z_rank, x, &yz));
        if lhs != rhs {
            return Err(self.witness(base, x, y, z, &format!("{lhs:?} != {rhs:?}")));
        }
        Ok(())
    }

    fn witness(&self, base: &GroupRef, x: &Element, y: &Element, z: &Element, detail: &str) -> GroupError {
        GroupError::NonAssociativeCocycle {
            x: base.format(x),
            y: base.format(y),
            z: base.format(z),
            detail: detail.to_string(),
        }
    }
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn floor_of_sqrt_half_matches_float() {
        let alpha = Alpha::sqrt_of(1, 2);
        let a = std::f64::consts::SQRT_2 / 2.0;
        for x in -1000..=1000 {
            assert_eq!(alpha.floor_times(x), (a * x as f64).floor() as i64, "x = {x}");
        }
    }

    #[test]
    fn floor_of_rational_alpha() {
        let alpha = Alpha::rational(1, 2);
        assert_eq!(alpha.floor_times(3), 1);
        assert_eq!(alpha.floor_times(-3), -2);
        let perfect = Alpha::sqrt_of(4, 1);
        assert_eq!(perfect.floor_times(-3), -6);
    }

    #[test]
    fn non_cocycle_is_rejected_with_witness() {
        let z = Group::free_abelian(1).unwrap();
        // ω(x,y) = x·y² is normalized but not a cocycle
        let bad = Cocycle::custom("bad", None, |p, q| {
            let (Element::Abelian(x), Element::Abelian(y)) = (p, q) else { unreachable!() };
            vec![x[0] * y[0] * y[0]]
        });
        let err = Group::central_extension(1, z, bad).unwrap_err();
        assert!(matches!(err, GroupError::NonAssociativeCocycle { .. }), "{err}");
    }

    #[test]
    fn unnormalized_cocycle_is_rejected() {
        let z = Group::free_abelian(1).unwrap();
        let constant = Cocycle::custom("one", Some(1), |_, _| vec![1]);
        assert!(Group::central_extension(1, z, constant).is_err());
    }

    #[test]
    fn rounding_requires_base_z() {
        let z2 = Group::free_abelian(2).unwrap();
        assert!(Group::central_extension(1, z2, Cocycle::rounding(Alpha::sqrt_of(1, 2))).is_err());
    }
}
