use serde::Serialize;

use crate::error::Result;
use crate::group::{Element, GroupRef, SubgroupSpec};
use crate::metric::{Ball, Distance, WordMetric};
use crate::qhom::{commutator_growth, CheckOutcome, DefectReport};
use crate::sets::{commutator_set, inverse_set, power_set, ElementSet};

/// The largest enlargement factor tried for the subgroup ball.
const MAX_ENLARGEMENT: u32 = 8;

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub radius: u32,
    /// intrinsic radius of the enlarged ball holding every `h^t` and `h^{t⁻¹}`
    pub enlarged_radius: u32,
    pub c_h_t: usize,
    pub c_tinv_h: usize,
    pub c_h_tinv_inverse: usize,
    pub outcome: CheckOutcome,
}

fn intrinsic_ball(subgroup: &SubgroupSpec, radius: u32) -> Result<Ball> {
    Ok(Ball::complete(&subgroup.ambient, &subgroup.generators, radius)?)
}

/// Intrinsic radius needed to hold all `elements`, or `None` past the
/// enlargement limit.
fn radius_holding(subgroup: &SubgroupSpec, elements: &[Element], horizon: u32) -> Option<u32> {
    let metric = WordMetric::new(&subgroup.ambient, &subgroup.generators, horizon);
    let mut best = 0;
    for x in elements {
        match metric.length(x) {
            Distance::Exact(d) => best = best.max(d as u32),
            Distance::AboveHorizon => return None,
        }
    }
    Some(best)
}

/// Checks `C(H,T) = C(T⁻¹,H) = C(H,T⁻¹)⁻¹` on the intrinsic `H`-ball.
/// Each `[h,t]` is matched with `[t⁻¹, h^t]` and each `[t⁻¹,h]` with
/// `[h^{t⁻¹}, t]`, where `h^t = tht⁻¹`; the conjugates must lie in `H` and the
/// containments are tested against the ball enlarged to hold them.
pub fn symmetry_check(subgroup: &SubgroupSpec, radius: u32, t: &[Element]) -> Result<SymmetryReport> {
    let g = &subgroup.ambient;
    let ball = intrinsic_ball(subgroup, radius)?;
    let hs = ball.elements();
    let t_inv: Vec<Element> = t.iter().map(|x| g.inv(x)).collect();
    let mut out = CheckOutcome::new("commutator_symmetry", radius);

    let c_ht = commutator_set(g, hs, t);
    let c_th = commutator_set(g, &t_inv, hs);
    let c_htinv_inv = inverse_set(g, &commutator_set(g, hs, &t_inv));
    if c_th != c_htinv_inv {
        let diff: Vec<String> = c_th.symmetric_difference(&c_htinv_inv).map(|x| g.format(x)).collect();
        out.fail(format!("C(T^-1,H) and C(H,T^-1)^-1 differ at {}", diff.join(", ")));
    }

    let mut conjugates = Vec::new();
    for h in hs {
        for (x, xi) in t.iter().zip(&t_inv) {
            let ht = g.conjugate(x, h);
            let hti = g.conjugate(xi, h);
            for c in [&ht, &hti] {
                if !subgroup.contains(c) {
                    out.fail(format!("{} conjugated by {} leaves {}", g.format(h), g.format(x), subgroup.name));
                }
            }
            if g.commutator(h, x) != g.commutator(xi, &ht) {
                out.fail(format!("[h,t] differs from [t^-1, h^t] at h = {}, t = {}", g.format(h), g.format(x)));
            }
            if g.commutator(xi, h) != g.commutator(&hti, x) {
                out.fail(format!("[t^-1,h] differs from [h^(t^-1), t] at h = {}, t = {}", g.format(h), g.format(x)));
            }
            conjugates.push(ht);
            conjugates.push(hti);
        }
    }
    let enlarged = if out.passed {
        radius_holding(subgroup, &conjugates, MAX_ENLARGEMENT * radius.max(1)).unwrap_or(0).max(radius)
    } else {
        radius
    };
    if out.passed {
        let big = intrinsic_ball(subgroup, enlarged)?;
        let big_th = commutator_set(g, &t_inv, big.elements());
        let big_ht = commutator_set(g, big.elements(), t);
        for x in c_ht.difference(&big_th) {
            out.fail(format!("{} in C(H,T) but not in C(T^-1,H)", g.format(x)));
        }
        for x in c_th.difference(&big_ht) {
            out.fail(format!("{} in C(T^-1,H) but not in C(H,T)", g.format(x)));
        }
    }
    out.samples = hs.len() * t.len();
    out.value("enlarged_radius", enlarged);
    Ok(SymmetryReport {
        radius,
        enlarged_radius: enlarged,
        c_h_t: c_ht.len(),
        c_tinv_h: c_th.len(),
        c_h_tinv_inverse: c_htinv_inv.len(),
        outcome: out,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerCommutatorReport {
    pub radius: u32,
    pub n_max: usize,
    /// `[h, t₁⋯tₙ]` as a product of `n` commutators `[h′, tᵢ]`
    pub factorization: CheckOutcome,
    /// `(hⁿtⁿ)⁻¹(ht)ⁿ ∈ C(H,T)ⁿ`
    pub power_defect: CheckOutcome,
}

/// Factors `[h, t₁⋯tₙ]` through `[h,tg] = [h,g]·[ghg⁻¹,t]`.
fn factor_commutator(g: &GroupRef, h: &Element, ts: &[Element]) -> Vec<(Element, Element)> {
    match ts {
        [] => Vec::new(),
        [t] => vec![(h.clone(), t.clone())],
        [t, rest @ ..] => {
            let tail = g.product(rest.iter());
            let mut out = factor_commutator(g, h, rest);
            out.push((g.conjugate(&tail, h), t.clone()));
            out
        }
    }
}

fn tuples_of(t: &[Element], n: usize) -> Vec<Vec<Element>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                t.iter().map(move |x| {
                    let mut p = p.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Checks `C(H,Tⁿ) ⊂ C(H,T)ⁿ` by explicit factorization and
/// `(ht)ⁿ ∼ hⁿtⁿ` modulo `C(H,T)ⁿ` for `n ≤ n_max`, enlarging the `H`-ball as
/// the conjugates require.
pub fn power_commutator_checks(
    subgroup: &SubgroupSpec,
    radius: u32,
    t: &[Element],
    n_max: usize,
) -> Result<PowerCommutatorReport> {
    let g = &subgroup.ambient;
    let ball = intrinsic_ball(subgroup, radius)?;
    let hs = ball.elements();
    let horizon = MAX_ENLARGEMENT * radius.max(1) * n_max.max(1) as u32;

    let mut fact = CheckOutcome::new("commutator_power_factorization", radius);
    let mut conjugates = Vec::new();
    for n in 1..=n_max {
        for ts in tuples_of(t, n) {
            for h in hs {
                let factors = factor_commutator(g, h, &ts);
                fact.samples += 1;
                let product = g.product(factors.iter().map(|(a, b)| g.commutator(a, b)).collect::<Vec<_>>().iter());
                if product != g.commutator(h, &g.product(ts.iter())) || factors.len() != n {
                    fact.fail(format!("factorization of [{}, t1..t{n}] fails", g.format(h)));
                }
                for (hp, _) in factors {
                    if !subgroup.contains(&hp) {
                        fact.fail(format!("{} is not in {}", g.format(&hp), subgroup.name));
                    }
                    conjugates.push(hp);
                }
            }
        }
    }
    conjugates.sort();
    conjugates.dedup();
    let used = radius_holding(subgroup, &conjugates, horizon);
    match used {
        Some(r) => fact.value("radius_used", r.max(radius)),
        None => fact.fail(format!("a conjugate lies beyond intrinsic radius {horizon}")),
    }

    let mut pow = CheckOutcome::new("power_commutator_defect", radius);
    let mut rho = (n_max.max(1) as u32) * radius.max(1);
    let mut pending: Vec<(usize, Element, String)> = Vec::new();
    for n in 1..=n_max {
        for h in hs {
            for x in t {
                let ht = g.mul(h, x);
                let lhs = g.pow(&ht, n as i64);
                let base = g.mul(&g.pow(h, n as i64), &g.pow(x, n as i64));
                let a = g.left_quotient(&base, &lhs);
                pow.samples += 1;
                pending.push((n, a, format!("h = {}, t = {}, n = {n}", g.format(h), g.format(x))));
            }
        }
    }
    loop {
        let big = intrinsic_ball(subgroup, rho)?;
        let c: ElementSet = commutator_set(g, big.elements(), t);
        let powers: Vec<ElementSet> = (0..=n_max).map(|n| power_set(g, &c, n)).collect::<Result<_>>()?;
        let missing: Vec<&(usize, Element, String)> =
            pending.iter().filter(|(n, a, _)| !powers[*n].contains(a)).collect();
        if missing.is_empty() {
            pow.value("radius_used", rho);
            break;
        }
        if rho >= horizon {
            for (n, a, w) in missing {
                pow.fail(format!("{w}: {} not in C(H,T)^{n}", g.format(a)));
            }
            pow.value("radius_used", rho);
            break;
        }
        rho = (rho * 2).min(horizon);
    }
    Ok(PowerCommutatorReport { radius, n_max, factorization: fact, power_defect: pow })
}

/// Growth of `C(B_r, B_r)` for the standard ball.
pub fn almost_commutative_check(group: &GroupRef, radius: u32) -> Result<DefectReport> {
    commutator_growth(group, radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn factorization_identity() {
        let h3 = Group::heisenberg();
        let a = h3.generator(0).clone();
        let b = h3.generator(1).clone();
        let ts = vec![b.clone(), a.clone(), b.clone()];
        let f = factor_commutator(&h3, &a, &ts);
        assert_eq!(f.len(), 3);
        let prod = h3.product(f.iter().map(|(x, y)| h3.commutator(x, y)).collect::<Vec<_>>().iter());
        assert_eq!(prod, h3.commutator(&a, &h3.product(ts.iter())));
    }

    #[test]
    fn dihedral_symmetry_and_powers() {
        let d = Group::infinite_dihedral();
        let h = SubgroupSpec::dihedral_rotations(d.clone()).unwrap();
        let s = d.parse("s").unwrap();
        let rep = symmetry_check(&h, 4, std::slice::from_ref(&s)).unwrap();
        assert!(rep.outcome.passed, "{:?}", rep.outcome.witnesses);
        assert_eq!(rep.c_h_t, 9);
        let p = power_commutator_checks(&h, 4, &[s], 3).unwrap();
        assert!(p.factorization.passed && p.power_defect.passed);
    }

    #[test]
    fn heisenberg_power_defect() {
        let g = Group::heisenberg();
        let h = SubgroupSpec::heisenberg_a_c(g.clone()).unwrap();
        let b = g.generator(1).clone();
        let a = g.generator(0).clone();
        let ab2 = g.pow(&g.mul(&a, &b), 2);
        let expected = g.mul(&g.mul(&g.pow(&a, 2), &g.pow(&b, 2)), &Element::Heisenberg { x: 0, y: 0, z: -1 });
        assert_eq!(ab2, expected);
        let p = power_commutator_checks(&h, 3, std::slice::from_ref(&b), 3).unwrap();
        assert!(p.power_defect.passed, "{:?}", p.power_defect.witnesses);
        let s = symmetry_check(&h, 3, &[b]).unwrap();
        assert!(s.outcome.passed, "{:?}", s.outcome.witnesses);
        assert!(s.enlarged_radius > 3);
    }

    #[test]
    fn central_subgroup_gives_trivial_sets() {
        let g = Group::heisenberg();
        let h = SubgroupSpec::heisenberg_center(g.clone()).unwrap();
        let rep = symmetry_check(&h, 3, &g.generator_elements()).unwrap();
        assert!(rep.outcome.passed);
        assert_eq!((rep.c_h_t, rep.c_tinv_h, rep.c_h_tinv_inverse), (1, 1, 1));
    }

    #[test]
    fn non_normal_subgroup_is_flagged() {
        let f2 = Group::free(2).unwrap();
        let h = SubgroupSpec::free_cyclic(f2.clone(), &[2]).unwrap();
        let rep = symmetry_check(&h, 2, &[f2.parse("a").unwrap()]).unwrap();
        assert!(!rep.outcome.passed);
    }
}
