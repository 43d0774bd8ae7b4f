use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Element, SubgroupSpec};
use crate::metric::{Ball, DistortionProfile, DistortionVerdict};
use crate::qhom::{defect_set, CheckOutcome, DefectReport, QHom};
use crate::qmorph::{floor_i64, homogenize_estimate, Quasimorphism};
use crate::sets::{inverse_set, product_of, ElementSet};

#[derive(Clone, Debug, Serialize)]
pub struct CyclicRetraction {
    #[serde(skip)]
    pub map: QHom,
    pub element: String,
    /// `φ(hⁿ)/n` for `n = 1..n_max`, as exact fractions
    pub homogenization: Vec<String>,
    pub estimate: String,
    pub oscillation: String,
    pub defect: DefectReport,
    /// `r(hⁿ) = hⁿ` for `|n| ≤ n_max`
    pub on_powers: CheckOutcome,
}

/// `r(g) = h^⌊φ(g)/φ̄(h)⌋`, a map onto `⟨h⟩`.
pub fn cyclic_retract_from_qm(phi: &Quasimorphism, h: &Element, radius: u32, n_max: u32) -> Result<CyclicRetraction> {
    let g = phi.source.clone();
    let est = homogenize_estimate(phi, h, n_max);
    if est.estimate.is_zero() || est.estimate.abs() <= est.oscillation {
        return Err(Error::BoundedQuasimorphism { element: g.format(h), estimate: est.estimate.to_string() });
    }
    let scale = Rational64::from_integer(1) / est.estimate;
    let psi = phi.scaled(scale);
    let (gg, hh) = (g.clone(), h.clone());
    let map = QHom::new(g.clone(), g.clone(), &format!("{}^floor({})", g.format(h), psi.label()), move |x| {
        gg.pow(&hh, floor_i64(psi.eval(x)))
    });
    let mut on_powers = CheckOutcome::new("retraction_on_powers", radius);
    for n in -(n_max as i64)..=(n_max as i64) {
        let hn = g.pow(h, n);
        on_powers.samples += 1;
        if map.apply(&hn) != hn {
            on_powers.fail(format!("r({}) differs", g.format(&hn)));
        }
    }
    Ok(CyclicRetraction {
        defect: defect_set(&map, radius)?,
        element: g.format(h),
        homogenization: est.values.iter().map(|v| v.to_string()).collect(),
        estimate: est.estimate.to_string(),
        oscillation: est.oscillation.to_string(),
        on_powers,
        map,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizeReport {
    pub radius: u32,
    /// `A = {φ(h)⁻¹h}` over `H` in the ball of radius `2R`
    pub a: DefectReport,
    /// `B = {φ(g)⁻¹aφ(g)}`
    pub b: DefectReport,
    pub defect_phi: DefectReport,
    pub defect: DefectReport,
    /// pairs falling in each of the four cases
    pub cases: BTreeMap<String, usize>,
    pub certificate: CheckOutcome,
    pub restriction: CheckOutcome,
}

#[derive(Clone, Debug)]
pub struct NormalizedRetraction {
    pub map: QHom,
    pub report: NormalizeReport,
}

/// `r(g) = g` on `H` and `φ(g)` elsewhere. Every defect of `r` is placed
/// in `{1}`, `B⁻¹D`, `A⁻¹D`, `D` or `DA` according to which of `g`, `g′`,
/// `gg′` lie in `H`.
pub fn normalize_retraction(phi: &QHom, subgroup: &SubgroupSpec, radius: u32) -> Result<NormalizedRetraction> {
    let g = phi.source.clone();
    if !subgroup.is_exact() {
        return Err(Error::UnstablePrerequisite {
            which: "membership".into(),
            detail: format!("{} has only approximate membership", subgroup.name),
        });
    }
    let big = Ball::complete(&g, &g.generator_elements(), 2 * radius)?;
    let mut first_a: FxHashMap<Element, u32> = FxHashMap::default();
    let mut h_small: Vec<usize> = Vec::new();
    for (i, x) in big.elements().iter().enumerate() {
        if subgroup.contains(x) {
            let a = g.left_quotient(&phi.apply(x), x);
            let r = big.distance_at(i).max(1);
            first_a.entry(a).and_modify(|w| *w = (*w).min(r)).or_insert(r);
            if big.distance_at(i) <= radius {
                h_small.push(i);
            }
        }
    }
    let a = DefectReport::from_first_radius(&format!("A of {}", phi.label), &g, first_a, 2 * radius);
    if !a.is_stable() {
        return Err(Error::UnstablePrerequisite { which: "A".into(), detail: format!("sizes {:?}", a.table.sizes) });
    }
    let ball = Ball::complete(&g, &g.generator_elements(), radius)?;
    let phis = phi.images(ball.elements());
    let mut first_b: FxHashMap<Element, u32> = FxHashMap::default();
    for (i, p) in phis.iter().enumerate() {
        let p_inv = g.inv(p);
        for &k in &h_small {
            let x = &big.elements()[k];
            let a = g.left_quotient(&phi.apply(x), x);
            let r = ball.distance_at(i).max(big.distance_at(k)).max(1);
            first_b.entry(g.mul(&g.mul(&p_inv, &a), p)).and_modify(|w| *w = (*w).min(r)).or_insert(r);
        }
    }
    let b = DefectReport::from_first_radius(&format!("B of {}", phi.label), &g, first_b, radius);
    if !b.is_stable() {
        return Err(Error::UnstablePrerequisite { which: "B".into(), detail: format!("sizes {:?}", b.table.sizes) });
    }
    let defect_phi = defect_set(phi, radius)?;
    let d = &defect_phi.elements;
    let a_set: ElementSet = a.elements.clone();
    let a_inv = inverse_set(&g, &a_set);
    let b_inv = inverse_set(&g, &b.elements);
    let identity: ElementSet = [g.identity()].into_iter().collect();
    let case2 = product_of(&g, &[&b_inv, d])?;
    let case3 = product_of(&g, &[&a_inv, d])?;
    let case4h = product_of(&g, &[d, &a_set])?;

    let (inner, sub) = (phi.clone(), subgroup.clone());
    let map = QHom::new(g.clone(), phi.target.clone(), &format!("normalized {}", phi.label), move |x| {
        if sub.contains(x) {
            x.clone()
        } else {
            inner.apply(x)
        }
    });
    let el = ball.elements();
    let member: Vec<bool> = el.iter().map(|x| subgroup.contains(x)).collect();
    let images = map.images(el);
    let mut cases: BTreeMap<String, usize> = BTreeMap::new();
    let mut certificate = CheckOutcome::new("normalized_defect_cases", radius);
    certificate.samples = el.len() * el.len();
    for i in 0..el.len() {
        for j in 0..el.len() {
            let xy = g.mul(&el[i], &el[j]);
            let in_xy = subgroup.contains(&xy);
            let dr = g.left_quotient(&g.mul(&images[i], &images[j]), &map.apply(&xy));
            let (name, set) = match (member[i], member[j]) {
                (true, true) => ("I", &identity),
                (true, false) => ("II", &case2),
                (false, true) => ("III", &case3),
                (false, false) if in_xy => ("IV (gg' in H)", &case4h),
                (false, false) => ("IV", d),
            };
            *cases.entry(name.to_string()).or_default() += 1;
            if !set.contains(&dr) {
                certificate.fail(format!(
                    "case {name} at ({}, {}): {} outside the predicted set",
                    g.format(&el[i]),
                    g.format(&el[j]),
                    g.format(&dr)
                ));
            }
        }
    }
    let mut restriction = CheckOutcome::new("restriction_is_identity", 2 * radius);
    for x in big.elements().iter().filter(|x| subgroup.contains(x)) {
        restriction.samples += 1;
        if map.apply(x) != *x {
            restriction.fail(format!("r({}) differs", g.format(x)));
        }
    }
    Ok(NormalizedRetraction {
        report: NormalizeReport {
            radius,
            defect: defect_set(&map, radius)?,
            a,
            b,
            defect_phi,
            cases,
            certificate,
            restriction,
        },
        map,
    })
}

/// Contrapositive of undistortedness for quasi-retracts: a subgroup that is
/// distorted within the horizon is not a quasi-retract within the horizon.
#[derive(Clone, Debug, Serialize)]
pub struct NonRetractCertificate {
    pub subgroup: String,
    pub radius: u32,
    pub exponent: f64,
    /// `(intrinsic, extrinsic, element)` on the envelope
    pub witnesses: Vec<(u64, u64, String)>,
    pub statement: String,
}

pub fn non_retract_certificate(profile: &DistortionProfile) -> Option<NonRetractCertificate> {
    let DistortionVerdict::SuperlinearWithin { exponent } = profile.verdict else {
        return None;
    };
    let witnesses = profile
        .envelope
        .iter()
        .zip(&profile.envelope_witnesses)
        .map(|(&(ext, int), w)| (int, ext, w.clone()))
        .collect();
    Some(NonRetractCertificate {
        subgroup: profile.subgroup.clone(),
        radius: profile.radius,
        exponent,
        witnesses,
        statement: format!(
            "{} is distorted within radius {}, so it is not a quasi-retract within this horizon",
            profile.subgroup, profile.radius
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Group, SubgroupSpec};
    use crate::metric::distortion_profile;

    #[test]
    fn brooks_ab_retraction() {
        let f2 = Group::free(2).unwrap();
        let h = Quasimorphism::brooks(f2.clone(), &[1, 2]).unwrap();
        let ab = f2.parse("a b").unwrap();
        let r = cyclic_retract_from_qm(&h, &ab, 4, 10).unwrap();
        assert!(r.on_powers.passed);
        assert!(r.defect.is_stable());
        assert_eq!(r.estimate, "1");
    }

    #[test]
    fn bounded_direction_is_rejected() {
        let f2 = Group::free(2).unwrap();
        let h = Quasimorphism::brooks(f2.clone(), &[1, 2]).unwrap();
        let a = f2.parse("a").unwrap();
        assert!(matches!(cyclic_retract_from_qm(&h, &a, 3, 10), Err(Error::BoundedQuasimorphism { .. })));
        let zero = Quasimorphism::zero(f2.clone());
        assert!(cyclic_retract_from_qm(&zero, &a, 3, 10).is_err());
    }

    #[test]
    fn exponent_sum_gives_exact_retraction() {
        let f2 = Group::free(2).unwrap();
        let e = Quasimorphism::exponent_sum(f2.clone(), 1).unwrap();
        let b = f2.parse("b").unwrap();
        let r = cyclic_retract_from_qm(&e, &b, 3, 8).unwrap();
        assert_eq!(r.defect.len(), 1);
    }

    #[test]
    fn normalizing_offset_brooks_retraction() {
        let f2 = Group::free(2).unwrap();
        let b = f2.parse("b").unwrap();
        let e = Quasimorphism::exponent_sum(f2.clone(), 1).unwrap();
        let r = cyclic_retract_from_qm(&e, &b, 3, 8).unwrap().map;
        let (g, rr, bb) = (f2.clone(), r.clone(), b.clone());
        let phi = QHom::new(f2.clone(), f2.clone(), "b r", move |x| g.mul(&bb, &rr.apply(x)));
        let sub = SubgroupSpec::free_cyclic(f2.clone(), &[2]).unwrap();
        let n = normalize_retraction(&phi, &sub, 3).unwrap();
        assert!(n.report.certificate.passed, "{:?}", n.report.certificate.witnesses);
        assert!(n.report.restriction.passed);
        assert_eq!(n.report.a.len(), 1);
        for k in -5..=5 {
            let bk = f2.pow(&b, k);
            assert_eq!(n.map.apply(&bk), r.apply(&bk));
        }
        assert_eq!(n.report.cases.len(), 5);
    }

    #[test]
    fn growing_a_is_rejected() {
        let f2 = Group::free(2).unwrap();
        let sub = SubgroupSpec::free_cyclic(f2.clone(), &[2]).unwrap();
        let trivial = QHom::trivial(f2.clone(), f2.clone());
        let err = normalize_retraction(&trivial, &sub, 3).unwrap_err();
        assert!(matches!(err, Error::UnstablePrerequisite { ref which, .. } if which == "A"));
    }

    #[test]
    fn heisenberg_center_certificate() {
        let h3 = Group::heisenberg();
        let c = SubgroupSpec::heisenberg_center(h3.clone()).unwrap();
        let p = distortion_profile(&h3.generator_elements(), &c, &c.generators, 16, 12).unwrap();
        let cert = non_retract_certificate(&p).unwrap();
        assert!(cert.exponent > 1.3);
        let f2 = Group::free(2).unwrap();
        let b = SubgroupSpec::free_cyclic(f2.clone(), &[2]).unwrap();
        let p = distortion_profile(&f2.generator_elements(), &b, &b.generators, 8, 10).unwrap();
        assert!(non_retract_certificate(&p).is_none());
    }
}
