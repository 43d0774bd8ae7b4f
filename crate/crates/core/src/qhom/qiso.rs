use rayon::prelude::*;
use serde::Serialize;

use super::{compose, defect_set, equiv_distance, pair_growth, DefectReport, QHom};
use crate::error::Result;
use crate::group::Element;
use crate::metric::{symmetric_closure, Ball, Distance, WordMetric};

#[derive(Clone, Debug, Serialize)]
pub struct QisoReport {
    pub radius: u32,
    /// `dist(φ′∘φ, Id)` on the source ball
    pub forward: Distance,
    /// `dist(φ∘φ′, Id)` on the target ball
    pub backward: Distance,
    /// both compositions are the identity on every sampled element
    pub strict: bool,
}

/// Distances of both composites from the identity on balls of `radius`.
pub fn qiso_check(phi: &QHom, psi: &QHom, radius: u32, horizon: u32) -> Result<QisoReport> {
    let there_back = compose(psi, phi)?;
    let back_there = compose(phi, psi)?;
    let forward = equiv_distance(&there_back, &QHom::identity(phi.source.clone()), radius, horizon)?;
    let backward = equiv_distance(&back_there, &QHom::identity(psi.source.clone()), radius, horizon)?;
    Ok(QisoReport {
        radius,
        forward,
        backward,
        strict: forward == Distance::Exact(0) && backward == Distance::Exact(0),
    })
}

/// Predicted and measured quasi-isometry constants of a quasi-isomorphism
/// pair `φ: G → G′`, `φ′: G′ → G`.
#[derive(Clone, Debug, Serialize)]
pub struct QiConstants {
    pub radius: u32,
    pub c1: u64,
    pub c2: u64,
    pub c: u64,
    /// `C₁ + C₂`
    pub lambda: u64,
    /// `6C₁`, the additive constant of the upper inequality
    pub upper_additive: u64,
    /// `6C₁ + 2C`, the additive constant of the lower inequality
    pub lower_additive: u64,
    /// `max d′/d` and `max d/d′` over pairs with nonzero distances
    pub empirical_lambda: f64,
    /// smallest additive constant making both inequalities hold with `λ = C₁ + C₂`
    pub empirical_additive: i64,
    pub pairs: usize,
    pub violations: usize,
    pub witnesses: Vec<String>,
}

impl QiConstants {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

fn max_length(metric: &WordMetric, items: impl Iterator<Item = Element>) -> Option<u64> {
    let mut best = 0;
    for x in items {
        best = best.max(metric.length(&x).exact()?);
    }
    Some(best)
}

/// Computes `C₁`, `C₂`, `C` and checks
/// `d′(φg₁,φg₂) ≤ (C₁+C₂)d(g₁,g₂) + 6C₁` and
/// `d(g₁,g₂) ≤ (C₁+C₂)d′(φg₁,φg₂) + 6C₁ + 2C` on all pairs of the ball.
/// Returns `None` when a needed length is beyond `horizon`.
pub fn qi_constants(phi: &QHom, psi: &QHom, radius: u32, horizon: u32) -> Result<Option<QiConstants>> {
    let (g, h) = (&phi.source, &phi.target);
    let dg = WordMetric::standard(g, horizon);
    let dh = WordMetric::standard(h, horizon);
    let d_phi = defect_set(phi, radius)?.elements;
    let d_psi = defect_set(psi, radius)?.elements;
    let (Some(l_psi), Some(l_phi)) = (
        max_length(&dg, d_psi.into_iter()),
        max_length(&dh, d_phi.into_iter()),
    ) else {
        return Ok(None);
    };
    let c1 = l_psi + l_phi;
    let s = symmetric_closure(g, &g.generator_elements());
    let s_prime = symmetric_closure(h, &h.generator_elements());
    let (Some(a), Some(b)) = (
        max_length(&dg, s_prime.iter().map(|x| psi.apply(x))),
        max_length(&dh, s.iter().map(|x| phi.apply(x))),
    ) else {
        return Ok(None);
    };
    let c2 = a + b;
    let iso = qiso_check(phi, psi, radius, horizon)?;
    let (Distance::Exact(f), Distance::Exact(bk)) = (iso.forward, iso.backward) else {
        return Ok(None);
    };
    let c = f.max(bk);
    let lambda = c1 + c2;
    let (upper, lower) = (6 * c1, 6 * c1 + 2 * c);

    let ball = Ball::complete(g, &g.generator_elements(), radius)?;
    let el = ball.elements();
    let images = phi.images(el);
    let rows: Vec<(f64, i64, usize, Vec<String>, bool)> = (0..el.len())
        .into_par_iter()
        .map(|i| {
            let mut ratio: f64 = 0.0;
            let mut additive = i64::MIN;
            let mut violations = 0;
            let mut witnesses = Vec::new();
            let mut beyond = false;
            for j in 0..el.len() {
                let (Some(d), Some(dp)) = (dg.distance(&el[i], &el[j]).exact(), dh.distance(&images[i], &images[j]).exact())
                else {
                    beyond = true;
                    continue;
                };
                if d > 0 && dp > 0 {
                    ratio = ratio.max(dp as f64 / d as f64).max(d as f64 / dp as f64);
                }
                let (l, d, dp) = (lambda as i64, d as i64, dp as i64);
                additive = additive.max(dp - l * d).max(d - l * dp);
                if dp > l * d + upper as i64 || d > l * dp + lower as i64 {
                    violations += 1;
                    if witnesses.len() < 4 {
                        witnesses.push(format!("({}, {}): d = {d}, d' = {dp}", g.format(&el[i]), g.format(&el[j])));
                    }
                }
            }
            (ratio, additive, violations, witnesses, beyond)
        })
        .collect();
    if rows.iter().any(|r| r.4) {
        return Ok(None);
    }
    let mut witnesses: Vec<String> = rows.iter().flat_map(|r| r.3.clone()).collect();
    witnesses.truncate(super::MAX_WITNESSES);
    Ok(Some(QiConstants {
        radius,
        c1,
        c2,
        c,
        lambda,
        upper_additive: upper,
        lower_additive: lower,
        empirical_lambda: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        empirical_additive: rows.iter().map(|r| r.1).max().unwrap_or(0).max(0),
        pairs: el.len() * el.len(),
        violations: rows.iter().map(|r| r.2).sum(),
        witnesses,
    }))
}

/// Growth of `A = {φ(g)⁻¹g}` and `C(φ(G)⁻¹, A)` for a self-map, with the
/// equivalence against the identity as a cross-check.
#[derive(Clone, Debug, Serialize)]
pub struct GoodQhReport {
    pub a: DefectReport,
    pub commutators: DefectReport,
    pub positive: bool,
    pub identity_distance: Distance,
    pub consistent: bool,
}

pub fn goodqh_check(phi: &QHom, radius: u32, horizon: u32) -> Result<GoodQhReport> {
    let g = &phi.source;
    let ball = Ball::complete(g, &g.generator_elements(), radius)?;
    let el = ball.elements();
    let images = phi.images(el);
    let a_elems: Vec<Element> = el.iter().zip(&images).map(|(x, p)| g.left_quotient(p, x)).collect();
    let img_inv: Vec<Element> = images.iter().map(|p| g.inv(p)).collect();

    let mut first_a = rustc_hash::FxHashMap::default();
    for (i, a) in a_elems.iter().enumerate() {
        let r = ball.distance_at(i).max(1);
        first_a.entry(a.clone()).and_modify(|w: &mut u32| *w = (*w).min(r)).or_insert(r);
    }
    let a = DefectReport::from_first_radius(&format!("A of {}", phi.label), g, first_a, radius);
    let first_c = pair_growth(&ball, |i, j| g.commutator(&img_inv[i], &a_elems[j]));
    let commutators = DefectReport::from_first_radius(&format!("C(phi(G)^-1, A) of {}", phi.label), g, first_c, radius);
    let positive = a.is_stable() && commutators.is_stable();
    let identity_distance = equiv_distance(phi, &QHom::identity(g.clone()), radius, horizon)?;
    let consistent = positive == (a.is_stable() && identity_distance.is_exact());
    Ok(GoodQhReport { a, commutators, positive, identity_distance, consistent })
}

/// Growth table of `C(ball_r, ball_r)`.
pub fn commutator_growth(group: &crate::group::GroupRef, radius: u32) -> Result<DefectReport> {
    let ball = Ball::complete(group, &group.generator_elements(), radius)?;
    let el = ball.elements();
    let first = pair_growth(&ball, |i, j| group.commutator(&el[i], &el[j]));
    Ok(DefectReport::from_first_radius("C(G,G)", group, first, radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn identity_is_strict() {
        let g = Group::heisenberg();
        let id = QHom::identity(g);
        let rep = qiso_check(&id, &id, 3, 10).unwrap();
        assert!(rep.strict);
        assert_eq!(rep.forward, Distance::Exact(0));
    }

    #[test]
    fn identity_qi_constants() {
        let z = Group::free_abelian(1).unwrap();
        let id = QHom::identity(z);
        let q = qi_constants(&id, &id, 5, 12).unwrap().unwrap();
        assert_eq!((q.c1, q.c2, q.c), (0, 2, 0));
        assert!(q.holds());
        assert_eq!(q.empirical_lambda, 1.0);
        assert_eq!(q.empirical_additive, 0);
    }

    #[test]
    fn goodqh_central_shift() {
        let h = Group::heisenberg();
        let z = Element::Heisenberg { x: 0, y: 0, z: 1 };
        let hh = h.clone();
        let phi = QHom::new(h.clone(), h.clone(), "g z", move |g| hh.mul(g, &z));
        let rep = goodqh_check(&phi, 3, 8).unwrap();
        assert_eq!(rep.a.len(), 1);
        assert_eq!(rep.commutators.len(), 1);
        assert!(rep.positive && rep.consistent);
    }

    #[test]
    fn goodqh_dihedral_projection_is_negative() {
        let d = Group::infinite_dihedral();
        let phi = QHom::new(d.clone(), d.clone(), "g_H", |g| match g {
            Element::Dihedral { shift, .. } => Element::Dihedral { shift: *shift, flip: false },
            _ => unreachable!(),
        });
        let rep = goodqh_check(&phi, 6, 12).unwrap();
        assert!(rep.a.is_stable());
        assert!(!rep.commutators.is_stable());
        assert!(!rep.positive);
        let t4 = Element::Dihedral { shift: 4, flip: false };
        assert!(rep.commutators.elements.contains(&t4));
    }

    #[test]
    fn abelian_commutators_are_trivial() {
        let z2 = Group::free_abelian(2).unwrap();
        assert_eq!(commutator_growth(&z2, 3).unwrap().len(), 1);
        let d = Group::infinite_dihedral();
        assert!(commutator_growth(&d, 6).unwrap().table.strictly_increasing());
    }
}
