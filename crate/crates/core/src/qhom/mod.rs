//! Maps between groups and their defect sets.

mod lemmas;
mod qiso;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Element, GroupRef};
use crate::metric::{Ball, Distance, WordMetric};
use crate::sets::{format_set, ElementSet, GrowthTable, Stability};

pub use lemmas::{
    central_perturb, check_commutator_image, check_conjugation_bound, check_inverse_bound,
    check_product_bound, Perturbation,
};
pub use qiso::{commutator_growth, goodqh_check, qi_constants, qiso_check, GoodQhReport, QiConstants, QisoReport};

pub type MapFn = dyn Fn(&Element) -> Element + Send + Sync;

/// A map `source → target` given by an evaluation rule.
#[derive(Clone)]
pub struct QHom {
    pub source: GroupRef,
    pub target: GroupRef,
    pub label: String,
    eval: Arc<MapFn>,
}

impl fmt::Debug for QHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QHom({}: {} -> {})", self.label, self.source.name(), self.target.name())
    }
}

impl QHom {
    pub fn new<F>(source: GroupRef, target: GroupRef, label: &str, eval: F) -> Self
    where
        F: Fn(&Element) -> Element + Send + Sync + 'static,
    {
        QHom { source, target, label: label.to_string(), eval: Arc::new(eval) }
    }

    pub fn identity(group: GroupRef) -> Self {
        Self::new(group.clone(), group, "id", |g| g.clone())
    }

    /// The constant map to the identity, a quasi-homomorphism with `D = {1}`.
    pub fn trivial(source: GroupRef, target: GroupRef) -> Self {
        let id = target.identity();
        Self::new(source, target, "trivial", move |_| id.clone())
    }

    /// The homomorphism sending generator `i` to `images[i]`, evaluated on
    /// the canonical word of each element. Only meaningful when the images
    /// satisfy the source relations.
    pub fn from_generator_images(source: GroupRef, target: GroupRef, label: &str, images: Vec<Element>) -> Self {
        let src = source.clone();
        let tgt = target.clone();
        Self::new(source, target, label, move |g| {
            src.syllables(g)
                .iter()
                .fold(tgt.identity(), |acc, s| tgt.mul(&acc, &tgt.pow(&images[s.gen], s.exp)))
        })
    }

    pub fn apply(&self, g: &Element) -> Element {
        (self.eval)(g)
    }

    pub fn images(&self, elements: &[Element]) -> Vec<Element> {
        elements.par_iter().map(|g| self.apply(g)).collect()
    }

    /// Defect `φ(y)⁻¹φ(x)⁻¹φ(xy)`.
    pub fn defect(&self, x: &Element, y: &Element) -> Element {
        let xy = self.source.mul(x, y);
        defect_from(&self.target, &self.apply(x), &self.apply(y), &self.apply(&xy))
    }

    /// Dual defect `φ(x)φ(y)φ(xy)⁻¹`.
    pub fn dual_defect(&self, x: &Element, y: &Element) -> Element {
        let xy = self.source.mul(x, y);
        dual_defect_from(&self.target, &self.apply(x), &self.apply(y), &self.apply(&xy))
    }
}

fn defect_from(target: &GroupRef, px: &Element, py: &Element, pxy: &Element) -> Element {
    target.left_quotient(&target.mul(px, py), pxy)
}

fn dual_defect_from(target: &GroupRef, px: &Element, py: &Element, pxy: &Element) -> Element {
    target.mul(&target.mul(px, py), &target.inv(pxy))
}

/// `ψ ∘ φ`.
pub fn compose(psi: &QHom, phi: &QHom) -> Result<QHom> {
    if !Arc::ptr_eq(&phi.target, &psi.source) && phi.target.name() != psi.source.name() {
        return Err(Error::NotComposable(format!(
            "{} lands in {}, {} starts at {}",
            phi.label,
            phi.target.name(),
            psi.label,
            psi.source.name()
        )));
    }
    let (p, q) = (psi.clone(), phi.clone());
    Ok(QHom::new(
        phi.source.clone(),
        psi.target.clone(),
        &format!("{} o {}", psi.label, phi.label),
        move |g| p.apply(&q.apply(g)),
    ))
}

/// Radius-indexed growth of a set of elements produced from a ball.
#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    pub label: String,
    pub table: GrowthTable,
    pub verdict: Stability,
    /// the set at the largest radius, printed as words
    pub words: Vec<String>,
    #[serde(skip)]
    pub elements: ElementSet,
}

impl DefectReport {
    /// Builds the report from each element's first radius of appearance.
    pub fn from_first_radius(label: &str, group: &GroupRef, first: FxHashMap<Element, u32>, radius: u32) -> Self {
        let radii: Vec<u32> = (1..=radius.max(1)).collect();
        let sizes = radii
            .iter()
            .map(|&r| first.values().filter(|&&f| f <= r).count())
            .collect();
        let table = GrowthTable { radii, sizes };
        let elements: ElementSet = first.into_keys().collect();
        DefectReport {
            label: label.to_string(),
            verdict: table.stability(),
            table,
            words: format_set(group, &elements),
            elements,
        }
    }

    pub fn is_stable(&self) -> bool {
        self.verdict.is_stable()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn merge_min(mut a: FxHashMap<Element, u32>, b: FxHashMap<Element, u32>) -> FxHashMap<Element, u32> {
    if a.len() < b.len() {
        return merge_min(b, a);
    }
    for (k, v) in b {
        a.entry(k).and_modify(|w| *w = (*w).min(v)).or_insert(v);
    }
    a
}

/// Applies `f(i, j)` to every ordered pair of ball positions and records,
/// for each value, the smallest radius `max(|x_i|, |x_j|, 1)` producing it.
pub fn pair_growth<F>(ball: &Ball, f: F) -> FxHashMap<Element, u32>
where
    F: Fn(usize, usize) -> Element + Sync,
{
    let n = ball.len();
    (0..n)
        .into_par_iter()
        .fold(FxHashMap::default, |mut local, i| {
            let di = ball.distance_at(i);
            for j in 0..n {
                let r = di.max(ball.distance_at(j)).max(1);
                let e = f(i, j);
                local.entry(e).and_modify(|w: &mut u32| *w = (*w).min(r)).or_insert(r);
            }
            local
        })
        .reduce(FxHashMap::default, merge_min)
}

/// Like [`pair_growth`] for pairs drawn from two balls, recording
/// `max(|x_i|, |y_j|, 1)`.
pub fn cross_growth<F>(left: &Ball, right: &Ball, f: F) -> FxHashMap<Element, u32>
where
    F: Fn(usize, usize) -> Element + Sync,
{
    (0..left.len())
        .into_par_iter()
        .fold(FxHashMap::default, |mut local, i| {
            let di = left.distance_at(i);
            for j in 0..right.len() {
                let r = di.max(right.distance_at(j)).max(1);
                local.entry(f(i, j)).and_modify(|w: &mut u32| *w = (*w).min(r)).or_insert(r);
            }
            local
        })
        .reduce(FxHashMap::default, merge_min)
}

fn defect_growth(phi: &QHom, radius: u32, dual: bool) -> Result<DefectReport> {
    let source = &phi.source;
    let ball = Ball::complete(source, &source.generator_elements(), radius)?;
    let elements = ball.elements();
    let images = phi.images(elements);
    let target = &phi.target;
    let first = pair_growth(&ball, |i, j| {
        let pxy = phi.apply(&source.mul(&elements[i], &elements[j]));
        if dual {
            dual_defect_from(target, &images[i], &images[j], &pxy)
        } else {
            defect_from(target, &images[i], &images[j], &pxy)
        }
    });
    let label = if dual { format!("dual defect of {}", phi.label) } else { format!("defect of {}", phi.label) };
    Ok(DefectReport::from_first_radius(&label, target, first, radius))
}

/// `D_r(φ) = {φ(y)⁻¹φ(x)⁻¹φ(xy)}` over the radius-`r` ball, `r = 1..radius`.
pub fn defect_set(phi: &QHom, radius: u32) -> Result<DefectReport> {
    defect_growth(phi, radius, false)
}

/// `D̃_r(φ) = {φ(x)φ(y)φ(xy)⁻¹}` over the radius-`r` ball.
pub fn dual_defect_set(phi: &QHom, radius: u32) -> Result<DefectReport> {
    defect_growth(phi, radius, true)
}

/// `max d(φ(x), φ′(x))` over the source ball, measured with the target
/// word metric up to `horizon`.
pub fn equiv_distance(phi: &QHom, psi: &QHom, radius: u32, horizon: u32) -> Result<Distance> {
    if phi.source.name() != psi.source.name() || phi.target.name() != psi.target.name() {
        return Err(Error::NotComposable(format!("{} and {} have different domains", phi.label, psi.label)));
    }
    let ball = Ball::complete(&phi.source, &phi.source.generator_elements(), radius)?;
    let metric = WordMetric::standard(&phi.target, horizon);
    Ok(ball
        .elements()
        .par_iter()
        .map(|x| metric.distance(&phi.apply(x), &psi.apply(x)))
        .max()
        .unwrap_or(Distance::Exact(0)))
}

/// Result of a bound check over sampled tuples.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub check: String,
    pub radius: u32,
    pub samples: usize,
    pub passed: bool,
    pub witnesses: Vec<String>,
    pub values: BTreeMap<String, serde_json::Value>,
}

impl CheckOutcome {
    pub fn new(check: &str, radius: u32) -> Self {
        CheckOutcome {
            check: check.to_string(),
            radius,
            samples: 0,
            passed: true,
            witnesses: Vec::new(),
            values: BTreeMap::new(),
        }
    }

    pub fn fail(&mut self, witness: String) {
        self.passed = false;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness);
        }
    }

    pub fn value<V: Serialize>(&mut self, key: &str, v: V) {
        self.values.insert(key.to_string(), serde_json::to_value(v).unwrap_or_default());
    }
}

/// Witness lists are truncated to this length.
pub const MAX_WITNESSES: usize = 8;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Cocycle, Group};

    #[test]
    fn identity_has_trivial_defect() {
        for g in [Group::free(2).unwrap(), Group::heisenberg(), Group::infinite_dihedral()] {
            let rep = defect_set(&QHom::identity(g.clone()), 3).unwrap();
            assert_eq!(rep.elements.len(), 1);
            assert!(rep.elements.contains(&g.identity()));
            assert!(rep.is_stable());
        }
    }

    #[test]
    fn exponent_retraction_is_a_homomorphism() {
        let f2 = Group::free(2).unwrap();
        let b = f2.generator(1).clone();
        let r = QHom::from_generator_images(f2.clone(), f2.clone(), "r_b", vec![f2.identity(), b]);
        assert_eq!(defect_set(&r, 3).unwrap().len(), 1);
        assert_eq!(dual_defect_set(&r, 3).unwrap().len(), 1);
    }

    #[test]
    fn heisenberg_section_defect_grows() {
        let z2 = Group::free_abelian(2).unwrap();
        let h = Group::heisenberg();
        let s = QHom::new(z2, h, "s", |q| {
            let Element::Abelian(v) = q else { unreachable!() };
            Element::Heisenberg { x: v[0], y: v[1], z: 0 }
        });
        let rep = dual_defect_set(&s, 4).unwrap();
        assert!(rep.table.strictly_increasing(), "{:?}", rep.table);
        assert!(!rep.is_stable());
    }

    #[test]
    fn rounding_section_dual_defect_has_two_elements() {
        let z = Group::free_abelian(1).unwrap();
        let g = Group::central_extension(1, z.clone(), Cocycle::rounding(crate::group::Alpha::sqrt_of(1, 2))).unwrap();
        let s = QHom::new(z, g.clone(), "s", |q| Element::Central { fiber: vec![0], base: Box::new(q.clone()) });
        let rep = dual_defect_set(&s, 6).unwrap();
        let expected: ElementSet = [0, 1]
            .into_iter()
            .map(|z| Element::Central { fiber: vec![z], base: Box::new(Element::Abelian(vec![0])) })
            .collect();
        assert_eq!(rep.elements, expected);
        assert!(rep.is_stable());
    }

    #[test]
    fn compose_checks_domains() {
        let f2 = Group::free(2).unwrap();
        let z = Group::free_abelian(1).unwrap();
        let a = QHom::identity(f2);
        let b = QHom::identity(z);
        assert!(compose(&a, &b).is_err());
        let c = compose(&a, &a).unwrap();
        assert_eq!(c.apply(&a.source.parse("a b").unwrap()), a.source.parse("a b").unwrap());
    }

    #[test]
    fn equiv_distance_of_offset() {
        let f2 = Group::free(2).unwrap();
        let b = f2.generator(1).clone();
        let r = QHom::from_generator_images(f2.clone(), f2.clone(), "r", vec![f2.identity(), b.clone()]);
        let g2 = f2.clone();
        let r2 = r.clone();
        let shifted = QHom::new(f2.clone(), f2.clone(), "b r", move |x| g2.mul(&b, &r2.apply(x)));
        assert_eq!(equiv_distance(&r, &shifted, 3, 5).unwrap(), Distance::Exact(1));
        assert_eq!(equiv_distance(&r, &r, 3, 5).unwrap(), Distance::Exact(0));
    }
}
