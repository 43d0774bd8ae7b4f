//! Quasi-retractions, coset transversals and split extensions.

mod commutators;
mod cyclic;
mod fin_index;
mod split;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{Element, Group, GroupKind, GroupRef, SubgroupSpec};
use crate::metric::Ball;
use crate::qhom::{central_perturb, CheckOutcome, MapFn, QHom};

pub use crate::sets::commutator_set;
pub use commutators::{
    almost_commutative_check, power_commutator_checks, symmetry_check, PowerCommutatorReport, SymmetryReport,
};
pub use cyclic::{
    cyclic_retract_from_qm, non_retract_certificate, normalize_retraction, CyclicRetraction, NonRetractCertificate,
    NormalizedRetraction, NormalizeReport,
};
pub use fin_index::{finite_index_criterion, FiniteIndexReport, TransversalSummary, DEFAULT_TRANSVERSAL_CAP};
pub use split::{
    retraction_to_section, strict_qiso_product, transversal_retraction, RetractionReport, SectionExtraction,
    SectionReport, StrictQiso, StrictQisoReport, TransversalRetraction,
};

pub type CoordFn = dyn Fn(&Element) -> Option<Element> + Send + Sync;

/// A right coset transversal of `H` in `G`, given by the representative of
/// each element's coset.
#[derive(Clone)]
pub struct Transversal {
    pub ambient: GroupRef,
    pub subgroup: SubgroupSpec,
    pub label: String,
    rep: Arc<MapFn>,
    pub contains_identity: bool,
}

impl fmt::Debug for Transversal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Transversal({} of {} in {})", self.label, self.subgroup.name, self.ambient.name())
    }
}

impl Transversal {
    pub fn new<F>(subgroup: SubgroupSpec, label: &str, rep: F) -> Self
    where
        F: Fn(&Element) -> Element + Send + Sync + 'static,
    {
        let ambient = subgroup.ambient.clone();
        let contains_identity = ambient.is_identity(&rep(&ambient.identity()));
        Transversal { ambient, subgroup, label: label.to_string(), rep: Arc::new(rep), contains_identity }
    }

    /// `g_T`.
    pub fn rep(&self, g: &Element) -> Element {
        (self.rep)(g)
    }

    /// `(g_H, g_T)` with `g = g_H·g_T`.
    pub fn decompose(&self, g: &Element) -> (Element, Element) {
        let t = self.rep(g);
        (self.ambient.mul(g, &self.ambient.inv(&t)), t)
    }

    /// Checks `g_H ∈ H`, `g_H·g_T = g` and that `hg` has the same
    /// representative as `g` for every subgroup generator `h`.
    pub fn verify(&self, radius: u32) -> Result<CheckOutcome> {
        let g = &self.ambient;
        let ball = Ball::complete(g, &g.generator_elements(), radius)?;
        let hs = crate::metric::symmetric_closure(g, &self.subgroup.generators);
        let mut out = CheckOutcome::new("transversal", radius);
        out.samples = ball.len();
        for x in ball.elements() {
            let (xh, xt) = self.decompose(x);
            if !self.subgroup.contains(&xh) {
                out.fail(format!("{}: g_H = {} is not in {}", g.format(x), g.format(&xh), self.subgroup.name));
            }
            if g.mul(&xh, &xt) != *x {
                out.fail(format!("{}: g_H g_T differs from g", g.format(x)));
            }
            for h in &hs {
                if self.rep(&g.mul(h, x)) != xt {
                    out.fail(format!("{} and {}{} get different representatives", g.format(x), g.format(h), g.format(x)));
                }
            }
        }
        out.value("contains_identity", self.contains_identity);
        Ok(out)
    }
}

/// A short exact sequence `1 → H → G → Q → 1` with a section `s` of `π`.
#[derive(Clone)]
pub struct SesBundle {
    pub label: String,
    pub total: GroupRef,
    pub fiber: SubgroupSpec,
    /// `H` as an abstract group
    pub fiber_group: GroupRef,
    pub inclusion: QHom,
    coordinates: Arc<CoordFn>,
    pub quotient: GroupRef,
    pub projection: QHom,
    pub section: QHom,
    /// images in `G` of the quotient generators
    pub lift_generators: Vec<Element>,
}

impl fmt::Debug for SesBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SesBundle({}: {} -> {} -> {})", self.label, self.fiber.name, self.total.name(), self.quotient.name())
    }
}

fn central_parts(e: &Element) -> (&[i64], &Element) {
    match e {
        Element::Central { fiber, base } => (fiber, base),
        _ => panic!("expected an element of a central extension"),
    }
}

impl SesBundle {
    /// `Z^k → G → Q` for a cocycle extension, with the zero-lift section
    /// `q ↦ (0, q)`.
    pub fn from_central_extension(g: GroupRef) -> Result<Self> {
        let ext = g.extension().ok_or_else(|| Error::InvalidBundle(format!("{} is not a central extension", g.name())))?;
        let (k, base) = (ext.z_rank, ext.base.clone());
        let names: Vec<String> = (0..k).map(|i| g.generator_name(i).to_string()).collect();
        let fiber_group = Group::free_abelian_named(&names)?;
        let base_id = base.identity();
        let inclusion = {
            let base_id = base_id.clone();
            QHom::new(fiber_group.clone(), g.clone(), "iota", move |h| match h {
                Element::Abelian(v) => Element::Central { fiber: v.clone(), base: Box::new(base_id.clone()) },
                _ => panic!("expected a fiber element"),
            })
        };
        let coordinates = {
            let base_id = base_id.clone();
            move |e: &Element| {
                let (z, q) = central_parts(e);
                (*q == base_id).then(|| Element::Abelian(z.to_vec()))
            }
        };
        let projection = QHom::new(g.clone(), base.clone(), "pi", |e| central_parts(e).1.clone());
        let section = QHom::new(base.clone(), g.clone(), "zero-lift", move |q| Element::Central {
            fiber: vec![0; k],
            base: Box::new(q.clone()),
        });
        Ok(SesBundle {
            label: format!("{} over {}", ext.cocycle.label(), base.name()),
            fiber: SubgroupSpec::extension_fiber(g.clone())?,
            lift_generators: g.generator_elements()[k..].to_vec(),
            total: g,
            fiber_group,
            inclusion,
            coordinates: Arc::new(coordinates),
            quotient: base,
            projection,
            section,
        })
    }

    /// `⟨c⟩ → H₃ → Z²` with `s(x, y) = aˣbʸ`.
    pub fn heisenberg_center(g: GroupRef) -> Result<Self> {
        let fiber = SubgroupSpec::heisenberg_center(g.clone())?;
        let fiber_group = Group::free_abelian_named(&["c"])?;
        let quotient = Group::free_abelian_named(&["a", "b"])?;
        let inclusion = QHom::new(fiber_group.clone(), g.clone(), "iota", |h| match h {
            Element::Abelian(v) => Element::Heisenberg { x: 0, y: 0, z: v[0] },
            _ => panic!("expected a fiber element"),
        });
        let projection = QHom::new(g.clone(), quotient.clone(), "pi", |e| match e {
            Element::Heisenberg { x, y, .. } => Element::Abelian(vec![*x, *y]),
            _ => panic!("expected a Heisenberg element"),
        });
        let section = QHom::new(quotient.clone(), g.clone(), "zero-lift", |q| match q {
            Element::Abelian(v) => Element::Heisenberg { x: v[0], y: v[1], z: 0 },
            _ => panic!("expected a point of Z^2"),
        });
        Ok(SesBundle {
            label: "Heisenberg center".into(),
            lift_generators: vec![g.generator(0).clone(), g.generator(1).clone()],
            total: g,
            fiber,
            fiber_group,
            inclusion,
            coordinates: Arc::new(|e| match e {
                Element::Heisenberg { x: 0, y: 0, z } => Some(Element::Abelian(vec![*z])),
                _ => None,
            }),
            quotient,
            projection,
            section,
        })
    }

    /// `⟨t⟩ → D∞ → Z/2` with `s(1) = s`.
    pub fn dihedral_rotations(g: GroupRef) -> Result<Self> {
        let fiber = SubgroupSpec::dihedral_rotations(g.clone())?;
        let fiber_group = Group::free_abelian_named(&["t"])?;
        let quotient = Group::cyclic(2)?;
        let inclusion = QHom::new(fiber_group.clone(), g.clone(), "iota", |h| match h {
            Element::Abelian(v) => Element::Dihedral { shift: v[0], flip: false },
            _ => panic!("expected a fiber element"),
        });
        let projection = QHom::new(g.clone(), quotient.clone(), "pi", |e| match e {
            Element::Dihedral { flip, .. } => Element::Finite(*flip as u32),
            _ => panic!("expected a dihedral element"),
        });
        let section = QHom::new(quotient.clone(), g.clone(), "reflection", |q| Element::Dihedral {
            shift: 0,
            flip: *q == Element::Finite(1),
        });
        Ok(SesBundle {
            label: "dihedral rotations".into(),
            lift_generators: vec![Element::Dihedral { shift: 0, flip: true }],
            total: g,
            fiber,
            fiber_group,
            inclusion,
            coordinates: Arc::new(|e| match e {
                Element::Dihedral { shift, flip: false } => Some(Element::Abelian(vec![*shift])),
                _ => None,
            }),
            quotient,
            projection,
            section,
        })
    }

    /// `H → H × Q → Q` with `s(q) = (1, q)`.
    pub fn direct_product(g: GroupRef) -> Result<Self> {
        let GroupKind::DirectProduct(l, r) = g.kind() else {
            return Err(Error::InvalidBundle(format!("{} is not a direct product", g.name())));
        };
        let (l, r) = (l.clone(), r.clone());
        let (lid, rid) = (l.identity(), r.identity());
        let inclusion = {
            let rid = rid.clone();
            QHom::new(l.clone(), g.clone(), "iota", move |h| Element::Pair(Box::new(h.clone()), Box::new(rid.clone())))
        };
        let projection = QHom::new(g.clone(), r.clone(), "pi", |e| match e {
            Element::Pair(_, q) => (**q).clone(),
            _ => panic!("expected a pair"),
        });
        let section = {
            let lid = lid.clone();
            QHom::new(r.clone(), g.clone(), "(1, q)", move |q| Element::Pair(Box::new(lid.clone()), Box::new(q.clone())))
        };
        let lifts = r
            .generator_elements()
            .into_iter()
            .map(|q| Element::Pair(Box::new(lid.clone()), Box::new(q)))
            .collect();
        Ok(SesBundle {
            label: format!("{} x {}", l.name(), r.name()),
            fiber: SubgroupSpec::left_factor(g.clone())?,
            total: g,
            fiber_group: l,
            inclusion,
            coordinates: Arc::new(move |e| match e {
                Element::Pair(h, q) if **q == rid => Some((**h).clone()),
                _ => None,
            }),
            quotient: r,
            projection,
            section,
            lift_generators: lifts,
        })
    }

    /// Replaces the section.
    pub fn with_section(mut self, section: QHom) -> Result<Self> {
        if section.source.name() != self.quotient.name() || section.target.name() != self.total.name() {
            return Err(Error::InvalidBundle(format!("section {} has the wrong domain or codomain", section.label)));
        }
        self.section = section;
        Ok(self)
    }

    /// The coordinates in `fiber_group` of an element of `H`.
    pub fn coordinates(&self, h: &Element) -> Option<Element> {
        (self.coordinates)(h)
    }

    /// Intrinsic ball of `H`, generated by the fiber generators.
    pub fn fiber_ball(&self, radius: u32) -> Result<Ball> {
        Ok(Ball::complete(&self.total, &self.fiber.generators, radius)?)
    }

    pub fn quotient_ball(&self, radius: u32) -> Result<Ball> {
        Ok(Ball::complete(&self.quotient, &self.quotient.generator_elements(), radius)?)
    }

    /// The transversal `{s(q)}`: `g_T = s(π(g))`.
    pub fn transversal(&self) -> Transversal {
        let (p, s) = (self.projection.clone(), self.section.clone());
        Transversal::new(self.fiber.clone(), &format!("s(Q) for {}", s.label), move |g| s.apply(&p.apply(g)))
    }

    /// The lift of each quotient element along its canonical word.
    pub fn word_lift(&self) -> QHom {
        QHom::from_generator_images(self.quotient.clone(), self.total.clone(), "word lift", self.lift_generators.clone())
    }

    /// Checks `π∘s = Id`, `π(H) = 1`, normality of `H` on generators and
    /// that `π` is a homomorphism on the ball.
    pub fn validate(&self, radius: u32) -> Result<CheckOutcome> {
        let (g, q) = (&self.total, &self.quotient);
        let mut out = CheckOutcome::new("bundle", radius);
        for x in self.quotient_ball(radius)?.elements() {
            if self.projection.apply(&self.section.apply(x)) != *x {
                out.fail(format!("pi(s({})) differs from {}", q.format(x), q.format(x)));
            }
        }
        for h in self.fiber_ball(radius)?.elements() {
            if !q.is_identity(&self.projection.apply(h)) {
                out.fail(format!("pi({}) is not trivial", g.format(h)));
            }
        }
        let gens = crate::metric::symmetric_closure(g, &g.generator_elements());
        for h in &self.fiber.generators {
            for x in &gens {
                let c = g.conjugate(x, h);
                if !self.fiber.contains(&c) {
                    out.fail(format!("{} conjugated by {} leaves {}", g.format(h), g.format(x), self.fiber.name));
                }
            }
        }
        let ball = Ball::complete(g, &g.generator_elements(), radius)?;
        let images = self.projection.images(ball.elements());
        for (i, x) in ball.elements().iter().enumerate() {
            for (j, y) in ball.elements().iter().enumerate() {
                if self.projection.apply(&g.mul(x, y)) != q.mul(&images[i], &images[j]) {
                    out.fail(format!("pi is not multiplicative at ({}, {})", g.format(x), g.format(y)));
                }
            }
        }
        out.samples = ball.len() * ball.len();
        out.value("section_normalized", self.total.is_identity(&self.section.apply(&q.identity())));
        Ok(out)
    }

    /// Makes the section normalized by right multiplication with `s(1)⁻¹`
    /// when `s(1)` is central; refuses otherwise.
    pub fn normalized(mut self, radius: u32) -> Result<Self> {
        let g = &self.total;
        let s1 = self.section.apply(&self.quotient.identity());
        if g.is_identity(&s1) {
            return Ok(self);
        }
        let fix = g.inv(&s1);
        let p = central_perturb(&self.section, vec![fix], |_| 0, radius).map_err(|e| match e {
            Error::NotCentral { .. } => {
                Error::InvalidBundle(format!("s(1) = {} is not central, cannot normalize", g.format(&s1)))
            }
            other => other,
        })?;
        self.section = p.map;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Alpha, Cocycle};

    fn rounding() -> GroupRef {
        let z = Group::free_abelian(1).unwrap();
        Group::central_extension(1, z, Cocycle::rounding(Alpha::sqrt_of(1, 2))).unwrap()
    }

    #[test]
    fn bundles_validate() {
        let bundles = [
            SesBundle::from_central_extension(rounding()).unwrap(),
            SesBundle::heisenberg_center(Group::heisenberg()).unwrap(),
            SesBundle::dihedral_rotations(Group::infinite_dihedral()).unwrap(),
            SesBundle::direct_product(Group::direct_product(
                Group::free_abelian(1).unwrap(),
                Group::cyclic(2).unwrap(),
            ))
            .unwrap(),
        ];
        for b in bundles {
            let out = b.validate(3).unwrap();
            assert!(out.passed, "{}: {:?}", b.label, out.witnesses);
            let t = b.transversal();
            assert!(t.contains_identity);
            assert!(t.verify(3).unwrap().passed, "{}", b.label);
        }
    }

    #[test]
    fn coordinates_invert_inclusion() {
        let b = SesBundle::heisenberg_center(Group::heisenberg()).unwrap();
        let h = Element::Abelian(vec![-4]);
        assert_eq!(b.coordinates(&b.inclusion.apply(&h)), Some(h));
        assert_eq!(b.coordinates(&b.total.generator(0).clone()), None);
    }

    #[test]
    fn normalizing_a_shifted_section() {
        let b = SesBundle::heisenberg_center(Group::heisenberg()).unwrap();
        let g = b.total.clone();
        let s = b.section.clone();
        let c = Element::Heisenberg { x: 0, y: 0, z: 1 };
        let shifted = QHom::new(b.quotient.clone(), g.clone(), "s c", move |q| g.mul(&s.apply(q), &c));
        let nb = b.with_section(shifted).unwrap().normalized(2).unwrap();
        let id = nb.quotient.identity();
        assert!(nb.total.is_identity(&nb.section.apply(&id)));
    }

    #[test]
    fn non_central_offset_is_refused() {
        let b = SesBundle::heisenberg_center(Group::heisenberg()).unwrap();
        let g = b.total.clone();
        let s = b.section.clone();
        let a = g.generator(0).clone();
        let shifted = QHom::new(b.quotient.clone(), g.clone(), "s a", move |q| g.mul(&s.apply(q), &a));
        let err = b.with_section(shifted).unwrap().normalized(2).unwrap_err();
        assert!(matches!(err, Error::InvalidBundle(_)));
    }

    #[test]
    fn word_lift_differs_from_zero_lift_on_rounding() {
        let b = SesBundle::from_central_extension(rounding()).unwrap();
        let lift = b.word_lift();
        let q = Element::Abelian(vec![5]);
        assert_eq!(b.projection.apply(&lift.apply(&q)), q);
        assert_ne!(lift.apply(&q), b.section.apply(&q));
    }
}
