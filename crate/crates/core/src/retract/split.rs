use rayon::prelude::*;
use serde::Serialize;

use super::{SesBundle, Transversal};
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::metric::{Ball, Distance};
use crate::qhom::{
    cross_growth, defect_set, dual_defect_set, equiv_distance, qi_constants, qiso_check, CheckOutcome,
    DefectReport, QHom, QiConstants, QisoReport,
};

const SHOWN_WITNESSES: usize = 6;

fn unstable(which: &str, report: &DefectReport) -> Error {
    let mut words = report.words.clone();
    words.sort_by_key(|w| std::cmp::Reverse(w.len()));
    words.truncate(SHOWN_WITNESSES);
    Error::UnstablePrerequisite {
        which: which.to_string(),
        detail: format!("sizes {:?} over radii {:?}; longest elements {}", report.table.sizes, report.table.radii, words.join(", ")),
    }
}

/// `C(H_r, s(Q_r))` over matching radii.
fn commutator_report(bundle: &SesBundle, section: &QHom, radius: u32) -> Result<DefectReport> {
    let g = &bundle.total;
    let hb = bundle.fiber_ball(radius)?;
    let qb = bundle.quotient_ball(radius)?;
    let ts = section.images(qb.elements());
    let first = cross_growth(&hb, &qb, |i, j| g.commutator(&hb.elements()[i], &ts[j]));
    Ok(DefectReport::from_first_radius(&format!("C(H, {})", section.label), g, first, radius))
}

#[derive(Clone, Debug, Serialize)]
pub struct RetractionReport {
    pub bundle: String,
    pub radius: u32,
    pub dual_defect: DefectReport,
    pub commutators: DefectReport,
    pub defect: DefectReport,
    /// each defect equals `[g′_H⁻¹, g_T]·(g_T g′_T)_H` with the factors in the computed sets
    pub certificate: CheckOutcome,
    pub restriction: CheckOutcome,
}

#[derive(Clone, Debug)]
pub struct TransversalRetraction {
    /// `r: G → G` with values in `H`
    pub map: QHom,
    pub transversal: Transversal,
    pub report: RetractionReport,
}

/// `r(g) = g·s(π(g))⁻¹`, after checking that `D̃(s)` and `C(H, s(Q))` are
/// stable within the horizon.
pub fn transversal_retraction(bundle: &SesBundle, radius: u32) -> Result<TransversalRetraction> {
    let g = bundle.total.clone();
    let dual = dual_defect_set(&bundle.section, radius)?;
    if !dual.is_stable() {
        return Err(unstable(&format!("dual defect of {}", bundle.section.label), &dual));
    }
    let comm = commutator_report(bundle, &bundle.section, radius)?;
    if !comm.is_stable() {
        return Err(unstable("C(H, s(Q))", &comm));
    }
    let transversal = bundle.transversal();
    let tv = transversal.clone();
    let map = QHom::new(g.clone(), g.clone(), &format!("r for {}", bundle.label), move |x| tv.decompose(x).0);
    let defect = defect_set(&map, radius)?;

    let ball = Ball::complete(&g, &g.generator_elements(), radius)?;
    let el = ball.elements();
    let parts: Vec<(Element, Element)> = el.par_iter().map(|x| transversal.decompose(x)).collect();
    let images = map.images(el);
    let failures: Vec<String> = (0..el.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let (g, parts, images, map, comm, dual, transversal) = (&g, &parts, &images, &map, &comm, &dual, &transversal);
            (0..el.len()).filter_map(move |j| {
                let d = g.left_quotient(&g.mul(&images[i], &images[j]), &map.apply(&g.mul(&el[i], &el[j])));
                let c = g.commutator(&g.inv(&parts[j].0), &parts[i].1);
                let tt = g.mul(&parts[i].1, &parts[j].1);
                let dd = transversal.decompose(&tt).0;
                if d != g.mul(&c, &dd) {
                    Some(format!("({}, {}): defect does not factor", g.format(&el[i]), g.format(&el[j])))
                } else if !comm.elements.contains(&c) {
                    Some(format!("({}, {}): {} outside C(H,T) at horizon", g.format(&el[i]), g.format(&el[j]), g.format(&c)))
                } else if !dual.elements.contains(&dd) {
                    Some(format!("({}, {}): {} outside the dual defect set", g.format(&el[i]), g.format(&el[j]), g.format(&dd)))
                } else {
                    None
                }
            })
        })
        .collect();
    let mut certificate = CheckOutcome::new("defect_factorization", radius);
    certificate.samples = el.len() * el.len();
    failures.into_iter().for_each(|w| certificate.fail(w));

    let restriction = restriction_check(bundle, &map, radius)?;
    Ok(TransversalRetraction {
        map,
        transversal,
        report: RetractionReport {
            bundle: bundle.label.clone(),
            radius,
            dual_defect: dual,
            commutators: comm,
            defect,
            certificate,
            restriction,
        },
    })
}

/// `r(h) = h` for every `h` in the intrinsic fiber ball.
fn restriction_check(bundle: &SesBundle, r: &QHom, radius: u32) -> Result<CheckOutcome> {
    let g = &bundle.total;
    let hb = bundle.fiber_ball(radius)?;
    let mut out = CheckOutcome::new("restriction_is_identity", radius);
    out.samples = hb.len();
    for h in hb.elements() {
        let rh = r.apply(h);
        if rh != *h {
            out.fail(format!("r({}) = {}", g.format(h), g.format(&rh)));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionReport {
    pub radius: u32,
    /// `r(T′) ⊆ D` and `r(T̃) ⊆ D`
    pub retraction_on_transversal: CheckOutcome,
    pub commutators: DefectReport,
    pub defect: DefectReport,
    pub projection_exact: bool,
    pub normalized: bool,
    /// distance to the bundle's own section
    pub equiv_distance: Distance,
}

#[derive(Clone, Debug)]
pub struct SectionExtraction {
    pub section: QHom,
    pub report: SectionReport,
}

/// Builds a section from a quasi-retraction: starting from the word lift
/// `t` of each `q`, `t′ = r(t)⁻¹t` and `t̃ = r(t′)⁻¹t′`.
pub fn retraction_to_section(r: &QHom, bundle: &SesBundle, radius: u32, horizon: u32) -> Result<SectionExtraction> {
    let g = bundle.total.clone();
    let restriction = restriction_check(bundle, r, radius)?;
    if !restriction.passed {
        return Err(Error::UnstablePrerequisite {
            which: "r restricted to H".into(),
            detail: restriction.witnesses.join("; "),
        });
    }
    let d = defect_set(r, radius)?;
    if !d.is_stable() {
        return Err(unstable(&format!("defect of {}", r.label), &d));
    }
    let lift = bundle.word_lift();
    let step = {
        let (g, r) = (g.clone(), r.clone());
        move |t: &Element| g.mul(&g.inv(&r.apply(t)), t)
    };
    let section = {
        let step = step.clone();
        QHom::new(bundle.quotient.clone(), g.clone(), &format!("section from {}", r.label), move |q| {
            step(&step(&lift.apply(q)))
        })
    };

    let qb = bundle.quotient_ball(radius)?;
    let mut on_t = CheckOutcome::new("retraction_on_transversal", radius);
    on_t.samples = qb.len();
    let lift = bundle.word_lift();
    for q in qb.elements() {
        let t1 = step(&lift.apply(q));
        let t2 = step(&t1);
        for (name, t) in [("T'", &t1), ("T~", &t2)] {
            let rt = r.apply(t);
            if !d.elements.contains(&rt) {
                on_t.fail(format!("r({}) = {} for {name} is outside D", g.format(t), g.format(&rt)));
            }
        }
    }
    let commutators = commutator_report(bundle, &section, radius)?;
    let defect = defect_set(&section, radius)?;
    let projection_exact = qb.elements().iter().all(|q| bundle.projection.apply(&section.apply(q)) == *q);
    let normalized = g.is_identity(&section.apply(&bundle.quotient.identity()));
    let equiv = equiv_distance(&section, &bundle.section, radius, horizon)?;
    Ok(SectionExtraction {
        section,
        report: SectionReport {
            radius,
            retraction_on_transversal: on_t,
            commutators,
            defect,
            projection_exact,
            normalized,
            equiv_distance: equiv,
        },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StrictQisoReport {
    pub radius: u32,
    pub qiso: QisoReport,
    /// elements of the `G`-ball where `φ′(φ(g)) ≠ g`
    pub forward_mismatches: usize,
    /// elements of the `H × Q`-ball where `φ(φ′(p)) ≠ p`
    pub backward_mismatches: usize,
    pub defect_phi: DefectReport,
    pub defect_phi_inverse: DefectReport,
    /// `φ∘ι = (Id_H, 1)` and `pr_Q∘φ = π`
    pub diagram: CheckOutcome,
    pub constants: Option<QiConstants>,
}

#[derive(Clone, Debug)]
pub struct StrictQiso {
    pub phi: QHom,
    pub phi_inverse: QHom,
    pub report: StrictQisoReport,
}

/// `φ(g) = (r(g), π(g))` and `φ′(h, x) = h·s(x)`.
pub fn strict_qiso_product(bundle: &SesBundle, r: &QHom, s: &QHom, radius: u32, horizon: u32) -> Result<StrictQiso> {
    let g = bundle.total.clone();
    let product = Group::direct_product(bundle.fiber_group.clone(), bundle.quotient.clone());
    let ball = Ball::complete(&g, &g.generator_elements(), radius)?;
    for x in ball.elements() {
        if bundle.coordinates(&r.apply(x)).is_none() {
            return Err(Error::InvalidBundle(format!("r({}) is not in {}", g.format(x), bundle.fiber.name)));
        }
    }
    let phi = {
        let (b, r) = (bundle.clone(), r.clone());
        QHom::new(g.clone(), product.clone(), "(r, pi)", move |x| {
            let h = b.coordinates(&r.apply(x)).expect("retraction left the fiber");
            Element::Pair(Box::new(h), Box::new(b.projection.apply(x)))
        })
    };
    let phi_inverse = {
        let (b, s, g) = (bundle.clone(), s.clone(), g.clone());
        QHom::new(product.clone(), g.clone(), "h s(x)", move |p| match p {
            Element::Pair(h, q) => g.mul(&b.inclusion.apply(h), &s.apply(q)),
            _ => panic!("expected a pair"),
        })
    };
    let forward_mismatches = ball.elements().par_iter().filter(|x| phi_inverse.apply(&phi.apply(x)) != **x).count();
    let pball = Ball::complete(&product, &product.generator_elements(), radius)?;
    let backward_mismatches = pball.elements().par_iter().filter(|p| phi.apply(&phi_inverse.apply(p)) != **p).count();

    let mut diagram = CheckOutcome::new("diagram", radius);
    let fb = Ball::complete(&bundle.fiber_group, &bundle.fiber_group.generator_elements(), radius)?;
    for h in fb.elements() {
        let expected = Element::Pair(Box::new(h.clone()), Box::new(bundle.quotient.identity()));
        if phi.apply(&bundle.inclusion.apply(h)) != expected {
            diagram.fail(format!("phi(iota({})) differs from ({}, 1)", bundle.fiber_group.format(h), bundle.fiber_group.format(h)));
        }
    }
    for x in ball.elements() {
        let Element::Pair(_, q) = phi.apply(x) else { unreachable!() };
        if *q != bundle.projection.apply(x) {
            diagram.fail(format!("second coordinate of phi({}) differs from pi", g.format(x)));
        }
    }
    diagram.samples = fb.len() + ball.len();

    Ok(StrictQiso {
        report: StrictQisoReport {
            radius,
            qiso: qiso_check(&phi, &phi_inverse, radius, horizon)?,
            forward_mismatches,
            backward_mismatches,
            defect_phi: defect_set(&phi, radius)?,
            defect_phi_inverse: defect_set(&phi_inverse, radius)?,
            diagram,
            constants: qi_constants(&phi, &phi_inverse, radius, horizon)?,
        },
        phi,
        phi_inverse,
    })
}
